import { describe, expect, it } from "vitest";

import { LineDecoder, encodeLine } from "../src/protocol";
import { purePursuitPolicy, zeroPolicy } from "../src/client";

describe("line framing", () => {
  it("round-trips messages", () => {
    const msg = { type: "act" as const, commands: [{ kind: "velocity" as const, v: [0.1, -0.2, 0.3] }] };
    const decoder = new LineDecoder();
    const [decoded] = decoder.push(encodeLine(msg));
    expect(decoded).toEqual(msg);
  });

  it("reassembles messages split across chunks", () => {
    const decoder = new LineDecoder();
    const line = encodeLine({ type: "error", message: "boom" });
    expect(decoder.push(line.slice(0, 7))).toEqual([]);
    const rest = decoder.push(line.slice(7) + encodeLine({ type: "error", message: "again" }));
    expect(rest.map((m) => (m as { message: string }).message)).toEqual(["boom", "again"]);
  });

  it("serializes floats in shortest round-trip form", () => {
    const encoded = encodeLine({ type: "act", commands: [{ kind: "velocity", v: [0.1, 1 / 3, 2.4] }] });
    const parsed = JSON.parse(encoded);
    expect(parsed.commands[0].v[0]).toBe(0.1);
    expect(parsed.commands[0].v[1]).toBe(1 / 3);
  });
});

describe("policy callbacks", () => {
  const fakeObs = (relative: number[]): number[][] => {
    const row = new Array(44).fill(0);
    row[10] = relative[0];
    row[11] = relative[1];
    row[12] = relative[2];
    return [row];
  };

  it("zero policy commands nothing", () => {
    expect(zeroPolicy(fakeObs([0.5, 0, 0]), {} as never)).toEqual([
      { kind: "velocity", v: [0, 0, 0] },
    ]);
  });

  it("pure pursuit normalizes toward the evader", () => {
    const [cmd] = purePursuitPolicy(1.0)(fakeObs([0.3, 0, 0]), {} as never);
    expect(cmd).toEqual({ kind: "velocity", v: [1, 0, 0] });
  });

  it("pure pursuit stays put when coincident", () => {
    const [cmd] = purePursuitPolicy(1.0)(fakeObs([0, 0, 0]), {} as never);
    expect(cmd).toEqual({ kind: "velocity", v: [0, 0, 0] });
  });
});
