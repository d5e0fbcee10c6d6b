/**
 * Scripted end-to-end flow against a locally served instance: spawn
 * `pere serve` on a synthetic catalog, drive the real DOM through
 * burn-in (50 cards) plus 5 adaptive rounds, and check the displayed
 * radius sequence, the final recommendations, and idempotent replays.
 *
 * The scripted "user" answers from a fixed taste point read out of the
 * catalog CSV: like anything closer than the median distance, dislike
 * the rest.  Distance-threshold answers are always self-consistent, so
 * the noise-free solver never sees a contradiction.
 */

import { spawn, spawnSync } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import type { RatingValue } from "../src/api";
import { SessionFlow } from "../src/session";
import { mount } from "../src/ui";

const CONFIG = {
  K: 50,
  m: 10,
  T: 5,
  P: 160,
  k_rec: 10,
  k_rel: 20,
  kappa: 1.0,
  seed: 3,
};

let workDir: string;
let server: ChildProcess | undefined;
let serverLog = "";
let baseUrl: string;
let taste: Map<string, "liked" | "disliked">;

function parseCatalog(csvPath: string): Map<string, "liked" | "disliked"> {
  const lines = readFileSync(csvPath, "utf-8").trim().split("\n");
  const rows = lines.slice(1).map((line) => {
    const fields = line.split(",");
    return { id: fields[0]!, emb: fields.slice(2).map(Number) };
  });
  const origin = rows[0]!.emb;
  const distance = (emb: number[]) =>
    Math.hypot(...emb.map((x, i) => x - origin[i]!));
  const sorted = rows.map((r) => distance(r.emb)).sort((a, b) => a - b);
  const median = sorted[Math.floor(sorted.length / 2)]!;
  return new Map(
    rows.map((r) => [r.id, distance(r.emb) <= median ? "liked" : "disliked"]),
  );
}

async function waitFor(
  condition: () => boolean,
  what: string,
  timeoutMs = 60_000,
): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${what}\nserver log:\n${serverLog}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

beforeAll(async () => {
  const probe = spawnSync("pere", ["--help"]);
  if (probe.status !== 0) {
    throw new Error(
      "`pere` CLI not found; install the backend first (pip install -e ..)",
    );
  }

  workDir = mkdtempSync(join(tmpdir(), "pere-webui-"));
  const catalogPath = join(workDir, "catalog.csv");
  const configPath = join(workDir, "config.json");
  const synth = spawnSync("pere", [
    "synth", "--n", "300", "--dim", "2", "--clusters", "3",
    "--seed", "11", "--out", catalogPath,
  ]);
  if (synth.status !== 0) {
    throw new Error(`synth failed: ${synth.stderr?.toString()}`);
  }
  writeFileSync(configPath, JSON.stringify(CONFIG));
  taste = parseCatalog(catalogPath);

  const port = 20_000 + Math.floor(Math.random() * 9_000);
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn("pere", [
    "serve", "--catalog", catalogPath, "--config", configPath,
    "--host", "127.0.0.1", "--port", String(port),
  ]);
  server.stdout?.on("data", (chunk: Buffer) => (serverLog += chunk));
  server.stderr?.on("data", (chunk: Buffer) => (serverLog += chunk));

  let healthy = false;
  for (let attempt = 0; attempt < 120 && !healthy; attempt++) {
    try {
      const response = await fetch(`${baseUrl}/v1/healthz`);
      healthy = response.ok;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
  if (!healthy) {
    throw new Error(`service never came up\nserver log:\n${serverLog}`);
  }
});

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

function cardRows(root: HTMLElement): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>('[data-testid="card"]')];
}

/** Click the scripted answer on every card of the current batch. */
function answerBatch(root: HTMLElement): void {
  const total = cardRows(root).length;
  for (let i = 0; i < total; i++) {
    // re-query: the view re-renders after every click
    const row = cardRows(root)[i]!;
    const answer = taste.get(row.dataset.itemId!);
    expect(answer).toBeDefined();
    row
      .querySelector<HTMLButtonElement>(`button[data-rating="${answer}"]`)!
      .click();
  }
}

function clickSubmit(root: HTMLElement): void {
  root.querySelector<HTMLButtonElement>('[data-testid="submit"]')!.click();
}

describe("scripted flow against a live service", () => {
  it("completes 50 burn-in cards plus 5 rounds and shows recommendations", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    const flow = new SessionFlow(new ApiClient(baseUrl));
    mount(root, flow);

    await flow.start();
    expect(flow.phase).toBe("rating");
    const burnIn = cardRows(root);
    expect(burnIn).toHaveLength(50);
    expect(burnIn.every((row) => row.dataset.rating === "unrated")).toBe(true);

    let submits = 0;
    while (flow.phase === "rating") {
      expect(cardRows(root)).toHaveLength(submits === 0 ? 50 : 10);
      answerBatch(root);
      clickSubmit(root);
      submits += 1;
      await waitFor(
        () => flow.phase !== "submitting",
        `submit ${submits} to settle`,
      );
    }

    expect(flow.phase).toBe("done");
    expect(submits).toBe(1 + CONFIG.T);

    // displayed radius sequence: initial box plus one step per submit,
    // never increasing
    const steps = [
      ...root.querySelectorAll<HTMLElement>('[data-testid="radius-step"]'),
    ].map((step) => Number(step.dataset.radius));
    expect(steps).toHaveLength(2 + CONFIG.T);
    expect(steps[0]).toBe(0.5);
    for (let i = 1; i < steps.length; i++) {
      expect(steps[i]!).toBeLessThanOrEqual(steps[i - 1]! + 1e-9);
    }

    const recommended = root.querySelectorAll(
      '[data-testid="recommendations"] li',
    );
    expect(recommended).toHaveLength(CONFIG.k_rec);
    expect(root.querySelector('[data-testid="round"]')?.textContent).toBe(
      `round ${CONFIG.T}`,
    );
  });

  it("treats a double-clicked submit as one state transition", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    const flow = new SessionFlow(new ApiClient(baseUrl));
    mount(root, flow);
    await flow.start();

    answerBatch(root);
    clickSubmit(root);
    clickSubmit(root); // double-click while the first is in flight
    await waitFor(() => flow.phase === "rating", "the round to advance");

    expect(flow.radiusHistory).toHaveLength(2);
    expect(flow.round).toBe(0); // burn-in solved, no adaptive round yet
    expect(cardRows(root)).toHaveLength(CONFIG.m);
  });

  it("replays an identical ratings POST without advancing the session", async () => {
    const client = new ApiClient(baseUrl);
    const created = await client.createSession();
    const sessionId = created.session_id!;
    const ratings: Record<string, RatingValue> = {};
    for (const card of created.batch!.items) {
      ratings[card.id] = taste.get(card.id) === "liked" ? "+1" : "-1";
    }

    const first = await client.submitRatings(sessionId, 0, ratings);
    const replay = await client.submitRatings(sessionId, 0, ratings);
    expect(replay).toEqual(first);

    const region = await client.region(sessionId);
    expect(region.center_history).toBe(1);
    expect(region.round).toBe(0);
  });
});
