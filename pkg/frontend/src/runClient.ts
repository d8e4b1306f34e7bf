/**
 * Run a built-in policy against a bridge server and print the results.
 *
 *   node dist/runClient.js tcp://127.0.0.1:5555 --policy pursuit \
 *        [--speed 1.0] [--out results.jsonl]
 */
import * as fs from "fs";

import { purePursuitPolicy, runBridgeClient, zeroPolicy } from "./client";

async function main(): Promise<number> {
  const args = process.argv.slice(2);
  const endpoint = args.find((a) => !a.startsWith("--"));
  const match = endpoint?.match(/^tcp:\/\/([^:]+):(\d+)$/);
  if (!match) {
    console.error("usage: runClient tcp://HOST:PORT [--policy zero|pursuit] [--speed S] [--out F]");
    return 2;
  }
  const flag = (name: string) => {
    const i = args.indexOf(name);
    return i >= 0 ? args[i + 1] : undefined;
  };
  const speed = parseFloat(flag("--speed") ?? "1.0");
  const policyName = flag("--policy") ?? "pursuit";
  const policy = policyName === "zero" ? zeroPolicy : purePursuitPolicy(speed);

  const session = await runBridgeClient(match[1], parseInt(match[2], 10), policy);
  console.log(
    `server: ${session.hello.n_drones} drones, obs length ${session.hello.obs_len}`,
  );
  for (const r of session.results) {
    console.log(
      `episode ${r.episode}: captured=${r.result.captured} ` +
        `step=${r.result.capture_timestep} return=${r.result.capture_return}`,
    );
  }
  for (const e of session.errors) console.error(`server error: ${e.message}`);

  const out = flag("--out");
  if (out) {
    fs.writeFileSync(
      out,
      session.results.map((r) => JSON.stringify({ episode: r.episode, ...r.result })).join("\n") +
        "\n",
    );
    console.log(`wrote ${out}`);
  }
  return session.errors.length > 0 ? 1 : 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
