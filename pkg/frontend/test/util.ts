import { ChildProcess, spawn } from "child_process";

export interface RunningServer {
  proc: ChildProcess;
  host: string;
  port: number;
}

/** Start `python3 -m pursuitsim serve ...` and wait for its bound address. */
export function startServer(extraArgs: string[]): Promise<RunningServer> {
  return new Promise((resolve, reject) => {
    const proc = spawn(
      "python3",
      ["-m", "pursuitsim", "serve", "--endpoint", "tcp://127.0.0.1:0", ...extraArgs],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    let stdout = "";
    let stderr = "";
    proc.stdout!.on("data", (chunk) => {
      stdout += chunk.toString();
      const match = stdout.match(/listening on tcp:\/\/([^:]+):(\d+)/);
      if (match) resolve({ proc, host: match[1], port: parseInt(match[2], 10) });
    });
    proc.stderr!.on("data", (chunk) => {
      stderr += chunk.toString();
    });
    proc.on("exit", (code) => {
      if (!stdout.includes("listening")) {
        reject(new Error(`server exited with code ${code} before listening:\n${stderr}`));
      }
    });
    proc.on("error", reject);
  });
}

export function waitForExit(proc: ChildProcess): Promise<number | null> {
  return new Promise((resolve) => proc.on("exit", (code) => resolve(code)));
}

/** Run a pursuitsim CLI command to completion, returning stdout. */
export function runCli(args: string[]): Promise<string> {
  return new Promise((resolve, reject) => {
    const proc = spawn("python3", ["-m", "pursuitsim", ...args], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    proc.stdout!.on("data", (c) => (stdout += c.toString()));
    proc.stderr!.on("data", (c) => (stderr += c.toString()));
    proc.on("exit", (code) =>
      code === 0 ? resolve(stdout) : reject(new Error(`exit ${code}: ${stderr}`)),
    );
    proc.on("error", reject);
  });
}
