"""Line-protocol bridge letting an external process act as the drone policy.

One JSON object per UTF-8 line. The server speaks first:

    server -> hello  {type, protocol_version, n_drones, n_o_max, obs_len}
    client -> hello  {type, protocol_version}
    per episode, strictly alternating:
        server -> reset  {type, episode, seed, task}
        repeat: server -> obs    {type, step, observations}
                client -> act    {type, commands}
                server -> reward {type, step, rewards, captured, done}
        server -> result {type, episode, result}
    server -> error  {type, message}   on any protocol violation

Velocity commands are {"kind": "velocity", "v": [x, y, z]}; thrust/body-rate
commands are {"kind": "thrust_rate", "c": c, "omega": [x, y, z]}. Floats are
serialized in shortest round-trip form, so values cross the wire exactly.

A malformed or late ``act`` aborts only the current episode (the server sends
``error`` and moves to the next episode); a protocol-version mismatch aborts
the connection. One client is served at a time.
"""
from __future__ import annotations

import json
import logging
import socket
import threading
from dataclasses import dataclass, field
from typing import IO, Sequence

from .dynamics import DroneCommand, ThrustRateCommand, VelocityCommand
from .episode import (
    EpisodeOptions,
    EpisodeResult,
    PolicyError,
    materialize_episode_task,
    run_episode,
)
from .policies import build_observation_matrix, observation_length
from .world import TaskParams, WorldState

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
DEFAULT_ACT_TIMEOUT = 10.0


class BridgeProtocolError(PolicyError):
    """Client broke the message contract; carries the offending field path."""


@dataclass(frozen=True)
class BridgeConfig:
    """What the server runs on the client's behalf.

    ``task`` may be None when the episode tasks come from elsewhere (the
    curriculum driver hands tasks to a :class:`BridgeTrainer` directly).
    """

    task: TaskParams | None
    episodes: int = 1
    seed_base: int = 0
    options: EpisodeOptions = field(default_factory=EpisodeOptions)
    n_obstacle_slots: int = 3
    respawn: bool = True
    act_timeout: float = DEFAULT_ACT_TIMEOUT


def encode_message(message: dict) -> str:
    return json.dumps(message, separators=(",", ":")) + "\n"


def decode_message(line: str) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BridgeProtocolError(f"message: invalid JSON ({exc})") from None
    if not isinstance(message, dict) or "type" not in message:
        raise BridgeProtocolError("message: expected an object with a 'type' field")
    return message


def parse_commands(message: dict, n_drones: int) -> list[DroneCommand]:
    """Validate an ``act`` message and build engine commands."""
    if message.get("type") != "act":
        raise BridgeProtocolError(
            f"message.type: expected 'act', got {message.get('type')!r}"
        )
    commands = message.get("commands")
    if not isinstance(commands, list):
        raise BridgeProtocolError("act.commands: expected a list")
    if len(commands) != n_drones:
        raise BridgeProtocolError(
            f"act.commands: expected {n_drones} entries, got {len(commands)}"
        )
    parsed: list[DroneCommand] = []
    for i, cmd in enumerate(commands):
        path = f"act.commands[{i}]"
        if not isinstance(cmd, dict):
            raise BridgeProtocolError(f"{path}: expected an object")
        kind = cmd.get("kind")
        if kind == "velocity":
            v = cmd.get("v")
            if not isinstance(v, list) or len(v) != 3:
                raise BridgeProtocolError(f"{path}.v: expected 3 numbers")
            try:
                parsed.append(VelocityCommand((float(v[0]), float(v[1]), float(v[2]))))
            except (TypeError, ValueError):
                raise BridgeProtocolError(f"{path}.v: non-numeric entry") from None
        elif kind == "thrust_rate":
            omega = cmd.get("omega")
            if not isinstance(omega, list) or len(omega) != 3:
                raise BridgeProtocolError(f"{path}.omega: expected 3 numbers")
            try:
                parsed.append(
                    ThrustRateCommand(
                        float(cmd["c"]), (float(omega[0]), float(omega[1]), float(omega[2]))
                    )
                )
            except (KeyError, TypeError, ValueError):
                raise BridgeProtocolError(f"{path}.c: missing or non-numeric thrust") from None
        else:
            raise BridgeProtocolError(
                f"{path}.kind: expected 'velocity' or 'thrust_rate', got {kind!r}"
            )
    return parsed


class _RemotePolicy:
    """Policy adapter that forwards the episode loop over the wire."""

    def __init__(self, rfile: IO[str], wfile: IO[str], config: BridgeConfig):
        self.rfile = rfile
        self.wfile = wfile
        self.config = config
        self.n_drones = config.task.external.n_drones if config.task is not None else 0
        self.episode_index = 0

    def send(self, message: dict) -> None:
        self.wfile.write(encode_message(message))
        self.wfile.flush()

    def receive(self) -> dict:
        line = self.rfile.readline()
        if not line:
            raise ConnectionError("client disconnected")
        return decode_message(line)

    def begin_episode(self, task: TaskParams, seed: int) -> None:
        self.send(
            {
                "type": "reset",
                "episode": self.episode_index,
                "seed": seed,
                "task": task.to_dict(),
            }
        )

    def act(self, world: WorldState) -> Sequence[DroneCommand]:
        observations = build_observation_matrix(
            world, self.config.n_obstacle_slots, self.config.options.horizon
        )
        self.send(
            {
                "type": "obs",
                "step": world.step_index,
                "observations": [[float(x) for x in row] for row in observations],
            }
        )
        return parse_commands(self.receive(), self.n_drones)

    def observe_step(self, step: int, rewards, captured: bool, done: bool) -> None:
        self.send(
            {
                "type": "reward",
                "step": step,
                "rewards": [float(r) for r in rewards],
                "captured": captured,
                "done": done,
            }
        )

    def end_episode(self, result: EpisodeResult) -> None:
        self.send(
            {"type": "result", "episode": self.episode_index, "result": result.to_dict()}
        )


def _serve_connection(rfile: IO[str], wfile: IO[str], config: BridgeConfig) -> list[EpisodeResult]:
    """Drive the configured episode batch over one established connection."""
    policy = _RemotePolicy(rfile, wfile, config)
    policy.send(
        {
            "type": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "n_drones": policy.n_drones,
            "n_o_max": config.n_obstacle_slots,
            "obs_len": observation_length(policy.n_drones, config.n_obstacle_slots),
        }
    )
    greeting = policy.receive()
    if greeting.get("type") != "hello" or greeting.get("protocol_version") != PROTOCOL_VERSION:
        policy.send(
            {
                "type": "error",
                "message": (
                    "hello.protocol_version: server speaks "
                    f"{PROTOCOL_VERSION}, client sent {greeting.get('protocol_version')!r}"
                ),
            }
        )
        return []

    results: list[EpisodeResult] = []
    for episode in range(config.episodes):
        policy.episode_index = episode
        seed = config.seed_base + episode
        task = materialize_episode_task(config.task, seed, respawn=config.respawn)
        try:
            result = run_episode(
                task,
                policy,
                seed,
                options=config.options,
                step_observer=policy.observe_step,
            )
            results.append(result)
        except (BridgeProtocolError, PolicyError, socket.timeout, TimeoutError) as exc:
            log.warning("episode %d aborted: %s", episode, exc)
            policy.send({"type": "error", "message": str(exc)})
    return results


class BridgeServer:
    """TCP bridge server. Serves clients one at a time, sequentially."""

    def __init__(self, config: BridgeConfig, host: str = "127.0.0.1", port: int = 0):
        self.config = config
        self._sock = socket.create_server((host, port))
        self._thread: threading.Thread | None = None
        self.results: list[EpisodeResult] = []

    @property
    def address(self) -> tuple[str, int]:
        return self._sock.getsockname()[:2]

    @property
    def endpoint(self) -> str:
        host, port = self.address
        return f"tcp://{host}:{port}"

    def serve(self, max_clients: int = 1) -> None:
        served = 0
        while max_clients <= 0 or served < max_clients:
            try:
                conn, peer = self._sock.accept()
            except OSError:
                break  # socket closed
            log.info("client connected from %s", peer)
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            conn.settimeout(self.config.act_timeout)
            with conn:
                rfile = conn.makefile("r", encoding="utf-8", newline="\n")
                wfile = conn.makefile("w", encoding="utf-8", newline="\n")
                try:
                    self.results = _serve_connection(rfile, wfile, self.config)
                except (ConnectionError, OSError) as exc:
                    log.warning("connection dropped: %s", exc)
                finally:
                    # Close explicitly: the makefile objects keep the socket fd
                    # alive, and a lingering exception traceback can delay GC,
                    # which would leave the client waiting for EOF.
                    for stream in (rfile, wfile):
                        try:
                            stream.close()
                        except OSError:
                            pass
            served += 1

    def start(self, max_clients: int = 1) -> None:
        self._thread = threading.Thread(
            target=self.serve, kwargs={"max_clients": max_clients}, daemon=True
        )
        self._thread.start()

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class BridgeTrainer:
    """Curriculum trainer backed by one connected bridge client.

    The driver's train/evaluate batches stream to the client as ordinary
    bridge episodes. Client failures propagate: a broken learner aborts the
    curriculum run rather than producing fabricated results.
    """

    def __init__(self, rfile: IO[str], wfile: IO[str], options: EpisodeOptions,
                 n_obstacle_slots: int, seed_base: int = 0, n_drones: int = 4):
        config = BridgeConfig(
            task=None,  # episodes get their tasks from the curriculum driver
            options=options,
            n_obstacle_slots=n_obstacle_slots,
        )
        self._policy = _RemotePolicy(rfile, wfile, config)
        self._policy.n_drones = n_drones
        self.options = options
        self.seed_base = seed_base
        self._episodes = 0
        self._server: BridgeServer | None = None

    @classmethod
    def listen(cls, endpoint: str, options: EpisodeOptions, n_obstacle_slots: int,
               seed_base: int = 0, n_drones: int = 4) -> "BridgeTrainer":
        """Bind the endpoint, wait for one learner, exchange hellos."""
        if not endpoint.startswith("tcp://"):
            raise ValueError(f"endpoint must be tcp://host:port, got {endpoint!r}")
        host, _, port_text = endpoint[len("tcp://") :].partition(":")
        sock = socket.create_server((host, int(port_text or 0)))
        bound = sock.getsockname()
        print(f"listening on tcp://{bound[0]}:{bound[1]}", flush=True)
        conn, _ = sock.accept()
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        conn.settimeout(DEFAULT_ACT_TIMEOUT)
        rfile = conn.makefile("r", encoding="utf-8", newline="\n")
        wfile = conn.makefile("w", encoding="utf-8", newline="\n")
        trainer = cls(rfile, wfile, options, n_obstacle_slots, seed_base, n_drones)
        trainer._conn = conn
        trainer._listen_sock = sock
        trainer._policy.send(
            {
                "type": "hello",
                "protocol_version": PROTOCOL_VERSION,
                "n_drones": n_drones,
                "n_o_max": n_obstacle_slots,
                "obs_len": observation_length(n_drones, n_obstacle_slots),
            }
        )
        greeting = trainer._policy.receive()
        if greeting.get("type") != "hello" or greeting.get("protocol_version") != PROTOCOL_VERSION:
            trainer._policy.send(
                {"type": "error", "message": "hello.protocol_version: mismatch"}
            )
            raise BridgeProtocolError("client protocol version mismatch")
        return trainer

    def _run(self, task: TaskParams) -> EpisodeResult:
        seed = self.seed_base + self._episodes
        self._policy.episode_index = self._episodes
        self._episodes += 1
        return run_episode(
            task, self._policy, seed, options=self.options,
            step_observer=self._policy.observe_step,
        )

    def train_on(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]:
        return [self._run(task) for task in tasks]

    def evaluate_policy(self, task: TaskParams) -> EpisodeResult:
        return self._run(task)


def serve(endpoint: str, config: BridgeConfig, max_clients: int = 1) -> list[EpisodeResult]:
    """Run the bridge server until ``max_clients`` clients were served.

    ``endpoint`` is ``tcp://host:port`` (port 0 picks a free port, printed on
    startup) or ``stdio`` to speak the protocol over stdin/stdout to a parent
    process (single client, no act timeout: pipe lifetime bounds the session).
    """
    if endpoint == "stdio":
        import sys

        return _serve_connection(sys.stdin, sys.stdout, config)
    if not endpoint.startswith("tcp://"):
        raise ValueError(f"endpoint must be tcp://host:port or stdio, got {endpoint!r}")
    host, _, port_text = endpoint[len("tcp://") :].partition(":")
    server = BridgeServer(config, host=host, port=int(port_text or 0))
    print(f"listening on {server.endpoint}", flush=True)
    try:
        server.serve(max_clients=max_clients)
    finally:
        server.close()
    return server.results
