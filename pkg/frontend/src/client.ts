/**
 * Reference bridge client: drives the engine's episodes with a local policy
 * callback. Use it as the template for attaching a real learner - replace the
 * callback with your policy's forward pass.
 */
import * as net from "net";

import {
  ActMsg,
  DroneCommand,
  ErrorMsg,
  HelloMsg,
  LineDecoder,
  ObsMsg,
  PROTOCOL_VERSION,
  ResetMsg,
  ResultMsg,
  ServerMsg,
  encodeLine,
} from "./protocol";

export interface EpisodeContext {
  hello: HelloMsg;
  reset: ResetMsg;
}

/** Returns one command per drone for the current observations. */
export type PolicyCallback = (observations: number[][], ctx: EpisodeContext) => DroneCommand[];

export const zeroPolicy: PolicyCallback = (observations) =>
  observations.map(() => ({ kind: "velocity", v: [0.0, 0.0, 0.0] }));

/**
 * Pure pursuit from the observation vector: slots [10:13] hold the evader's
 * position relative to the drone. The arithmetic mirrors the engine's
 * in-process pure-pursuit policy operation for operation ((d/n)*v_p with an
 * IEEE-754 sqrt), so episodes driven through this callback reproduce
 * in-process results bit for bit.
 */
export function purePursuitPolicy(maxSpeed = 1.0): PolicyCallback {
  return (observations) =>
    observations.map((row) => {
      const dx = row[10];
      const dy = row[11];
      const dz = row[12];
      const n = Math.sqrt(dx * dx + dy * dy + dz * dz);
      if (n > 0) {
        return { kind: "velocity", v: [(dx / n) * maxSpeed, (dy / n) * maxSpeed, (dz / n) * maxSpeed] };
      }
      return { kind: "velocity", v: [0.0, 0.0, 0.0] };
    });
}

export interface TranscriptRecord {
  dir: "s2c" | "c2s";
  msg: unknown;
}

export interface SessionLog {
  hello: HelloMsg;
  results: ResultMsg[];
  errors: ErrorMsg[];
  transcript: TranscriptRecord[];
}

export interface ClientOptions {
  /** record every wire message in order (for conformance checks) */
  recordTranscript?: boolean;
  /** override the protocol version sent in the greeting (testing) */
  protocolVersion?: number;
}

/**
 * Connect to a bridge server, run every episode it offers, and resolve with
 * the collected results once the server closes the connection. Server-side
 * `error` messages abort only their episode; they are collected, not thrown.
 */
export function runBridgeClient(
  host: string,
  port: number,
  policy: PolicyCallback,
  options: ClientOptions = {},
): Promise<SessionLog> {
  return new Promise((resolve, reject) => {
    const socket = net.createConnection({ host, port });
    socket.setNoDelay(true);
    const decoder = new LineDecoder();
    const transcript: TranscriptRecord[] = [];
    const results: ResultMsg[] = [];
    const errors: ErrorMsg[] = [];
    let hello: HelloMsg | undefined;
    let reset: ResetMsg | undefined;

    const record = (dir: "s2c" | "c2s", msg: unknown) => {
      if (options.recordTranscript) transcript.push({ dir, msg });
    };
    const send = (msg: ActMsg | { type: "hello"; protocol_version: number }) => {
      socket.write(encodeLine(msg));
      record("c2s", msg);
    };

    socket.on("data", (chunk) => {
      let messages: ServerMsg[];
      try {
        messages = decoder.push(chunk);
      } catch (err) {
        socket.destroy();
        reject(err);
        return;
      }
      for (const msg of messages) {
        record("s2c", msg);
        switch (msg.type) {
          case "hello":
            hello = msg;
            send({ type: "hello", protocol_version: options.protocolVersion ?? PROTOCOL_VERSION });
            break;
          case "reset":
            reset = msg;
            break;
          case "obs": {
            if (!hello || !reset) {
              socket.destroy();
              reject(new Error("obs before hello/reset"));
              return;
            }
            const commands = policy((msg as ObsMsg).observations, { hello, reset });
            send({ type: "act", commands });
            break;
          }
          case "reward":
            break;
          case "result":
            results.push(msg);
            break;
          case "error":
            errors.push(msg);
            break;
        }
      }
    });

    socket.on("error", (err) => reject(err));
    socket.on("close", () => {
      if (!hello) {
        reject(new Error("connection closed before the server's hello"));
        return;
      }
      resolve({ hello, results, errors, transcript });
    });
  });
}
