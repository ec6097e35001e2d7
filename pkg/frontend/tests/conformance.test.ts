/** Explorer <-> engine conformance against a live server.
 *
 * Spawns the Python service on a scratch synthetic bundle and checks the
 * three acceptance contracts: client-side tau recoloring matches the
 * server's csf-confusion labels exactly for 20 random taus; dot selection
 * resolves the correct image and (prediction, label, confidence) triple
 * for 50 sampled records; and the concept view shows exactly the server's
 * nine representative ids.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { rebucket } from "../src/recolor.js";
import type { EmbeddingFrame, EmbeddingParams } from "../src/types.js";
import { conceptTiles, recordDetail } from "../src/views.js";

const PORT = 18230 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const PARAMS: EmbeddingParams = {
  pca_dims: 10, perplexity: 15, iterations: 300, seed: 0, theta: 0.5,
};

let root: string;
let server: ChildProcess | null = null;
const api = new ApiClient(BASE);

async function serverReady(timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/api/datasets`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("server did not come up");
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
}

beforeAll(async () => {
  root = mkdtempSync(join(tmpdir(), "sf-lens-ui-"));
  const synth = spawnSync("python3", [
    "-m", "sf_lens.cli", "synth", "--n", "400", "--k", "2", "--d", "10",
    "--t", "0", "--separation", "5", "--offset", "3", "--seed", "0",
    "--image-size", "16", "--out", join(root, "demo"),
  ], { encoding: "utf-8" });
  expect(synth.status, synth.stderr).toBe(0);

  server = spawn("python3", [
    "-m", "sf_lens.cli", "serve", "--port", String(PORT), "--bundle-root", root,
  ], { stdio: "ignore" });
  await serverReady();
  await api.embedAndWait("demo", "all", 0, PARAMS);
}, 180_000);

afterAll(() => {
  server?.kill();
  if (root) rmSync(root, { recursive: true, force: true });
});

describe("tau recoloring conformance", () => {
  it("matches server csf-confusion labels exactly for 20 random taus", async () => {
    const base = await api.embedding("demo", "all", "csf-confusion", 0, PARAMS, "msr");
    const conf = base.confidence!;
    const lo = Math.min(...conf);
    const hi = Math.max(...conf);
    // deterministic pseudo-random taus spanning the observed range and beyond
    let s = 12345;
    const rand = () => {
      s = (s * 1103515245 + 12345) % 2147483648;
      return s / 2147483648;
    };
    for (let trial = 0; trial < 20; trial++) {
      const tau = lo - 0.05 + rand() * (hi - lo + 0.1);
      const server = await api.embedding(
        "demo", "all", "csf-confusion", 0, PARAMS, "msr", tau);
      expect(server.tau).toBe(tau);
      const client = rebucket(base.predictions, base.true_labels, conf, tau);
      expect(client).toEqual(server.labels);
    }
  }, 120_000);
});

describe("dot selection conformance", () => {
  let frameA: EmbeddingFrame;
  let frameB: EmbeddingFrame;

  beforeAll(async () => {
    // two independent fetches with different schemes must agree per id
    frameA = await api.embedding("demo", "all", "csf-confusion", 0, PARAMS, "msr");
    frameB = await api.embedding("demo", "all", "class", 0, PARAMS, "msr");
  });

  it("shows the correct image and triple for 50 sampled records", async () => {
    const byIdB = new Map(frameB.ids.map((id, i) => [id, i]));
    const failureTriples = new Map(
      (await api.failures("demo", "msr", "all", 400)).map((h) => [h.id, h]));

    const step = Math.floor(frameA.ids.length / 50);
    for (let k = 0; k < 50; k++) {
      const index = k * step;
      const detail = recordDetail(frameA, index, (id) => api.imageUrl(id, "demo"));
      // triple agrees with an independent fetch of the same records
      const j = byIdB.get(detail.id);
      expect(j).toBeDefined();
      expect(frameB.predictions[j!]).toBe(detail.prediction);
      expect(frameB.true_labels[j!]).toBe(detail.label);
      expect(frameB.confidence![j!]).toBe(detail.confidence);
      // and with the failures endpoint whenever the record is a failure
      const hit = failureTriples.get(detail.id);
      if (detail.prediction !== detail.label) {
        expect(hit).toBeDefined();
        expect(hit!.prediction).toBe(detail.prediction);
        expect(hit!.label).toBe(detail.label);
        expect(hit!.confidence).toBeCloseTo(detail.confidence!, 12);
      } else {
        expect(hit).toBeUndefined();
      }
      // the displayed image resolves to a real PNG for this id
      const img = await fetch(detail.imageUrl);
      expect(img.status).toBe(200);
      const bytes = new Uint8Array(await img.arrayBuffer());
      expect(Array.from(bytes.slice(1, 4))).toEqual([0x50, 0x4e, 0x47]); // "PNG"
    }
  }, 120_000);
});

describe("concept view conformance", () => {
  it("shows exactly the server's nine representative ids", async () => {
    const first = await api.clusters("demo", "class=0", "all", 0, 9, PARAMS);
    const again = await api.clusters("demo", "class=0", "all", 0, 9, PARAMS);
    expect(first.representative_ids).toHaveLength(9);
    expect(again.representative_ids).toEqual(first.representative_ids);

    const tiles = conceptTiles(first, (id) => api.imageUrl(id, "demo"));
    expect(tiles.map((t) => t.recordId)).toEqual(first.representative_ids);
    tiles.forEach((tile, i) => {
      expect(tile.memberIds).toContain(tile.recordId);
      expect(tile.size).toBe(first.sizes[i]);
    });
    // every representative resolves to a fetchable image
    for (const tile of tiles) {
      const resp = await fetch(tile.imageUrl);
      expect(resp.status).toBe(200);
    }
  }, 120_000);
});
