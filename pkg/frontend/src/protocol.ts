/**
 * Bridge protocol v1: one JSON object per UTF-8 line.
 *
 * The server speaks first (hello), the client answers with its own hello,
 * then per episode the messages alternate strictly:
 * reset -> (obs -> act -> reward)* -> result. Floats are serialized in
 * shortest round-trip form on both sides, so values cross the wire exactly.
 */

export const PROTOCOL_VERSION = 1;

export interface HelloMsg {
  type: "hello";
  protocol_version: number;
  n_drones: number;
  n_o_max: number;
  obs_len: number;
}

export interface ScenarioDoc {
  arena: { radius: number; height: number };
  intrinsic: { capture_radius: number; evader_speed: number };
  drones: number[][];
  evader: number[];
  obstacles: { x: number; y: number; radius: number; height: number }[];
}

export interface ResetMsg {
  type: "reset";
  episode: number;
  seed: number;
  task: ScenarioDoc;
}

export interface ObsMsg {
  type: "obs";
  step: number;
  observations: number[][];
}

export interface RewardMsg {
  type: "reward";
  step: number;
  rewards: number[];
  captured: boolean;
  done: boolean;
}

export interface EpisodeOutcome {
  captured: boolean;
  capture_timestep: number;
  per_drone_return: number[];
  capture_return: number;
  seed: number;
}

export interface ResultMsg {
  type: "result";
  episode: number;
  result: EpisodeOutcome;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = HelloMsg | ResetMsg | ObsMsg | RewardMsg | ResultMsg | ErrorMsg;

export type DroneCommand =
  | { kind: "velocity"; v: number[] }
  | { kind: "thrust_rate"; c: number; omega: number[] };

export interface ActMsg {
  type: "act";
  commands: DroneCommand[];
}

export type ClientMsg = { type: "hello"; protocol_version: number } | ActMsg;

export function encodeLine(msg: ClientMsg | ServerMsg): string {
  return JSON.stringify(msg) + "\n";
}

/** Incremental splitter for newline-delimited JSON arriving in TCP chunks. */
export class LineDecoder {
  private buffer = "";

  push(chunk: string | Buffer): ServerMsg[] {
    this.buffer += chunk.toString();
    const messages: ServerMsg[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 1);
      if (line.trim().length === 0) continue;
      messages.push(JSON.parse(line) as ServerMsg);
    }
    return messages;
  }
}
