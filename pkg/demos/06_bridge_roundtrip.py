"""Driving episodes from outside the process over the bridge protocol.

The engine serves observations line by line over a local socket; the client
(here: a few lines of Python, normally your learner in any language) answers
with velocity or thrust/body-rate commands. The same episodes run in-process
give bit-identical results, which is what makes the bridge safe for training.
"""
import json
import math
import socket
import threading

from pursuitsim import AngelaniConfig, EpisodeOptions, load_scenario, run_scenario_batch
from pursuitsim.bridge import BridgeConfig, BridgeServer

config = BridgeConfig(
    task=load_scenario("empty"), episodes=3, seed_base=42,
    options=EpisodeOptions(), n_obstacle_slots=3,
)
server = BridgeServer(config)
threading.Thread(target=server.serve, kwargs={"max_clients": 1}, daemon=True).start()
print(f"server listening on {server.endpoint}")

with socket.create_connection(server.address) as sock:
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    rfile = sock.makefile("r", newline="\n")
    wfile = sock.makefile("w", newline="\n")

    def send(msg):
        wfile.write(json.dumps(msg) + "\n")
        wfile.flush()

    hello = json.loads(rfile.readline())
    print(f"hello: {hello['n_drones']} drones, obs length {hello['obs_len']}")
    send({"type": "hello", "protocol_version": hello["protocol_version"]})

    for line in rfile:
        msg = json.loads(line)
        if msg["type"] == "obs":
            commands = []
            for row in msg["observations"]:
                dx, dy, dz = row[10:13]  # evader position relative to this drone
                n = math.sqrt(dx * dx + dy * dy + dz * dz)
                v = [dx / n, dy / n, dz / n] if n > 0 else [0.0, 0.0, 0.0]
                commands.append({"kind": "velocity", "v": v})
            send({"type": "act", "commands": commands})
        elif msg["type"] == "result":
            r = msg["result"]
            print(f"episode {msg['episode']}: captured={r['captured']} "
                  f"at step {r['capture_timestep']}")

local = run_scenario_batch(config.task, AngelaniConfig(), 3, seed_base=42)
print("in-process pure pursuit, same seeds:",
      [(r.captured, r.capture_timestep) for r in local])
