import json
import time
from pathlib import Path

import pytest

from pursuitsim import (
    AngelaniConfig,
    EpisodeOptions,
    ZeroConfig,
    load_scenario,
    run_scenario_batch,
)
from pursuitsim.bridge import (
    BridgeConfig,
    BridgeProtocolError,
    BridgeServer,
    decode_message,
    encode_message,
    parse_commands,
)
from pursuitsim.dynamics import ThrustRateCommand, VelocityCommand

from helpers import bridge_session, pure_pursuit_commands, zero_commands

DATA_DIR = Path(__file__).parent / "data"


def serve_in_background(config):
    server = BridgeServer(config)
    server.start(max_clients=1)
    return server


# --- message parsing -----------------------------------------------------------


def test_message_round_trip():
    msg = {"type": "obs", "step": 3, "observations": [[0.1, -0.25]]}
    assert decode_message(encode_message(msg)) == msg


def test_decode_rejects_junk():
    with pytest.raises(BridgeProtocolError, match="invalid JSON"):
        decode_message("not json\n")
    with pytest.raises(BridgeProtocolError, match="'type'"):
        decode_message("[1, 2]\n")


def test_parse_commands_accepts_both_kinds():
    msg = {
        "type": "act",
        "commands": [
            {"kind": "velocity", "v": [0.1, 0.2, 0.3]},
            {"kind": "thrust_rate", "c": 0.294, "omega": [0.0, 0.0, 1.0]},
        ],
    }
    parsed = parse_commands(msg, 2)
    assert parsed[0] == VelocityCommand((0.1, 0.2, 0.3))
    assert parsed[1] == ThrustRateCommand(0.294, (0.0, 0.0, 1.0))


def test_parse_commands_reports_field_paths():
    with pytest.raises(BridgeProtocolError, match=r"act\.commands: expected 2"):
        parse_commands({"type": "act", "commands": [{"kind": "velocity", "v": [0, 0, 0]}]}, 2)
    with pytest.raises(BridgeProtocolError, match=r"act\.commands\[0\]\.v"):
        parse_commands({"type": "act", "commands": [{"kind": "velocity", "v": [1, 2]}]}, 1)
    with pytest.raises(BridgeProtocolError, match=r"act\.commands\[0\]\.kind"):
        parse_commands({"type": "act", "commands": [{"kind": "warp"}]}, 1)
    with pytest.raises(BridgeProtocolError, match="expected 'act'"):
        parse_commands({"type": "reward"}, 1)


# --- served episodes ------------------------------------------------------------


def bridge_config(**overrides):
    defaults = dict(
        task=load_scenario("empty"),
        episodes=3,
        seed_base=500,
        options=EpisodeOptions(),
        n_obstacle_slots=3,
        respawn=True,
    )
    defaults.update(overrides)
    return BridgeConfig(**defaults)


def test_hello_advertises_engine_dimensions():
    config = bridge_config(episodes=1)
    server = serve_in_background(config)
    hello, results, errors = bridge_session(server.address, zero_commands)
    server.join(30)
    assert hello["protocol_version"] == 1
    assert hello["n_drones"] == 4
    assert hello["n_o_max"] == 3
    assert hello["obs_len"] == 44
    assert not errors


def test_zero_command_client_matches_in_process_zero_policy():
    config = bridge_config()
    server = serve_in_background(config)
    _, results, errors = bridge_session(server.address, zero_commands)
    server.join(30)
    assert not errors
    local = run_scenario_batch(config.task, ZeroConfig(), 3, seed_base=500)
    assert [r["result"] for r in results] == [r.to_dict() for r in local]


def test_pure_pursuit_client_is_bit_identical_to_in_process_policy():
    config = bridge_config(episodes=5)
    server = serve_in_background(config)
    _, results, errors = bridge_session(server.address, pure_pursuit_commands)
    server.join(60)
    assert not errors
    local = run_scenario_batch(config.task, AngelaniConfig(), 5, seed_base=500)
    assert [r["result"] for r in results] == [r.to_dict() for r in local]
    assert [r.to_dict() for r in server.results] == [r.to_dict() for r in local]


def test_malformed_act_aborts_only_that_episode():
    config = bridge_config(episodes=3)
    server = serve_in_background(config)
    calls = {"n": 0}

    def flaky(obs_msg, hello):
        calls["n"] += 1
        if calls["n"] == 1:  # wrong arity on the very first act
            return {"type": "act", "commands": [{"kind": "velocity", "v": [0, 0, 0]}]}
        return pure_pursuit_commands(obs_msg, hello)

    _, results, errors = bridge_session(server.address, flaky)
    server.join(60)
    assert len(errors) == 1
    assert "act.commands" in errors[0]["message"]
    episodes_with_results = [r["episode"] for r in results]
    assert episodes_with_results == [1, 2]  # episode 0 aborted, rest completed


def test_out_of_turn_message_aborts_episode():
    config = bridge_config(episodes=1)
    server = serve_in_background(config)
    _, results, errors = bridge_session(
        server.address, lambda obs, hello: {"type": "reward", "rewards": []}
    )
    server.join(30)
    assert len(errors) == 1
    assert "expected 'act'" in errors[0]["message"]
    assert results == []


def test_protocol_version_mismatch_disconnects():
    config = bridge_config(episodes=2)
    server = serve_in_background(config)
    _, results, errors = bridge_session(server.address, zero_commands, version=99)
    server.join(30)
    assert len(errors) == 1
    assert "protocol_version" in errors[0]["message"]
    assert results == []


def test_fuzzed_replies_always_draw_errors_never_crashes():
    import socket as socket_mod

    config = bridge_config(episodes=4, act_timeout=2.0)
    server = serve_in_background(config)
    junk = ['not json at all', '[1,2,3]', '{"no_type": 1}', '{"type": "act", "commands": 7}']
    with socket_mod.create_connection(server.address, timeout=30) as sock:
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        wfile = sock.makefile("w", encoding="utf-8", newline="\n")
        rfile.readline()  # hello
        wfile.write('{"type": "hello", "protocol_version": 1}\n')
        wfile.flush()
        errors = 0
        i = 0
        for line in rfile:
            msg = json.loads(line)
            if msg["type"] == "obs":
                wfile.write(junk[i % len(junk)] + "\n")
                wfile.flush()
                i += 1
            elif msg["type"] == "error":
                errors += 1
    server.join(30)
    assert errors == 4  # one abort per episode, the session itself survives


def test_act_timeout_aborts_the_episode():
    config = bridge_config(episodes=1, act_timeout=0.3)
    server = serve_in_background(config)

    def sleepy(obs_msg, hello):
        time.sleep(1.0)
        return zero_commands(obs_msg, hello)

    _, results, errors = bridge_session(server.address, sleepy)
    server.join(30)
    assert results == []
    assert len(errors) == 1


def test_stdio_endpoint_speaks_the_same_protocol():
    import subprocess

    proc = subprocess.Popen(
        [
            "python3", "-m", "pursuitsim", "serve", "--endpoint", "stdio",
            "--scenario", "empty", "--episodes", "1", "--seed", "1",
            "--capture-radius", "0.6", "--evader-speed", "0.0",
        ],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True,
    )
    try:
        hello = json.loads(proc.stdout.readline())
        assert hello["type"] == "hello"
        proc.stdin.write('{"type": "hello", "protocol_version": 1}\n')
        proc.stdin.flush()
        result = None
        for line in proc.stdout:
            msg = json.loads(line)
            if msg["type"] == "obs":
                reply = pure_pursuit_commands(msg, hello)
                proc.stdin.write(json.dumps(reply) + "\n")
                proc.stdin.flush()
            elif msg["type"] == "result":
                result = msg
                break
        assert result is not None and result["result"]["captured"] is True
    finally:
        proc.stdin.close()
        assert proc.wait(timeout=30) == 0


# --- conformance transcript --------------------------------------------------------


TRANSCRIPT_CONFIG = dict(
    scenario="tower1",
    episodes=2,
    seed_base=777,
    capture_radius=0.3,
    evader_speed=0.0,
    obstacle_slots=3,
    horizon=800,
)


def record_conformance_session():
    import dataclasses

    task = load_scenario(TRANSCRIPT_CONFIG["scenario"])
    task = dataclasses.replace(
        task,
        intrinsic=dataclasses.replace(
            task.intrinsic,
            capture_radius=TRANSCRIPT_CONFIG["capture_radius"],
            evader_speed=TRANSCRIPT_CONFIG["evader_speed"],
        ),
    )
    config = BridgeConfig(
        task=task,
        episodes=TRANSCRIPT_CONFIG["episodes"],
        seed_base=TRANSCRIPT_CONFIG["seed_base"],
        options=EpisodeOptions(horizon=TRANSCRIPT_CONFIG["horizon"]),
        n_obstacle_slots=TRANSCRIPT_CONFIG["obstacle_slots"],
    )
    server = serve_in_background(config)
    transcript = [{"dir": "meta", "serve": TRANSCRIPT_CONFIG, "client": "pure_pursuit_v1"}]
    bridge_session(server.address, pure_pursuit_commands, transcript=transcript)
    server.join(60)
    return transcript


def test_live_session_matches_the_frozen_transcript():
    frozen = [
        json.loads(line)
        for line in (DATA_DIR / "bridge_session.jsonl").read_text().splitlines()
    ]
    live = record_conformance_session()
    assert live == frozen
