/** Typed client for the sf-lens HTTP API.
 *
 * All quantities the UI displays come from these calls; the only client-side
 * computation is the tau re-bucketing in recolor.ts. Responses racing each
 * other (e.g. rapid scheme switches) are handled by LatestOnly sequence
 * numbers: resolutions of superseded requests are dropped.
 */

import type {
  ConceptClusters,
  DatasetSummary,
  EmbedJob,
  EmbeddingFrame,
  EmbeddingParams,
  FailureHit,
  MetricRow,
  RcCurve,
  StudySummary,
  SweepPoint,
} from "./types.js";
import { DEFAULT_EMBEDDING_PARAMS } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep statusText
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

function embeddingQuery(params: EmbeddingParams): Record<string, string> {
  return {
    pca_dims: String(params.pca_dims),
    perplexity: String(params.perplexity),
    iterations: String(params.iterations),
    seed: String(params.seed),
    theta: String(params.theta),
  };
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string, query: Record<string, string | number | undefined> = {}): string {
    const search = new URLSearchParams();
    for (const [k, v] of Object.entries(query)) {
      if (v !== undefined) search.set(k, String(v));
    }
    const qs = search.toString();
    return `${this.baseUrl}${path}${qs ? "?" + qs : ""}`;
  }

  private get<T>(path: string, query: Record<string, string | number | undefined> = {}) {
    return this.fetchImpl(this.url(path, query)).then((r) => expectJson<T>(r));
  }

  datasets(): Promise<DatasetSummary[]> {
    return this.get("/api/datasets");
  }

  studies(dataset: string): Promise<StudySummary[]> {
    return this.get("/api/studies", { dataset });
  }

  metrics(dataset: string, study?: string, channel?: string): Promise<MetricRow[]> {
    return this.get("/api/metrics", { dataset, study, channel });
  }

  rcCurve(dataset: string, study: string, channel: string, points = 100, run = 0): Promise<RcCurve> {
    return this.get("/api/rc-curve", { dataset, study, channel, points, run });
  }

  submitEmbed(
    dataset: string,
    scope = "all",
    run = 0,
    params: EmbeddingParams = DEFAULT_EMBEDDING_PARAMS,
  ): Promise<EmbedJob> {
    return this.fetchImpl(this.url("/api/embed"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dataset, scope, run, ...params }),
    }).then((r) => expectJson<EmbedJob>(r));
  }

  /** Submit and poll until the embedding job finishes. */
  async embedAndWait(
    dataset: string,
    scope = "all",
    run = 0,
    params: EmbeddingParams = DEFAULT_EMBEDDING_PARAMS,
    pollMs = 300,
    timeoutMs = 300_000,
  ): Promise<string> {
    const deadline = Date.now() + timeoutMs;
    let job = await this.submitEmbed(dataset, scope, run, params);
    while (job.status === "running") {
      if (Date.now() > deadline) throw new ApiError(408, `embedding ${job.key} timed out`);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
      job = await this.submitEmbed(dataset, scope, run, params);
    }
    if (job.status !== "done") throw new ApiError(500, job.status);
    return job.key;
  }

  embedding(
    dataset: string,
    scope = "all",
    scheme = "class",
    run = 0,
    params: EmbeddingParams = DEFAULT_EMBEDDING_PARAMS,
    channel?: string,
    tau?: number,
  ): Promise<EmbeddingFrame> {
    return this.get("/api/embedding", {
      dataset, scope, scheme, run, channel, tau, ...embeddingQuery(params),
    });
  }

  clusters(
    dataset: string,
    concept: string,
    scope = "all",
    run = 0,
    k = 9,
    params: EmbeddingParams = DEFAULT_EMBEDDING_PARAMS,
  ): Promise<ConceptClusters> {
    const { seed, ...rest } = embeddingQuery(params);
    return this.get("/api/clusters", {
      dataset, concept, scope, run, k, embed_seed: seed, ...rest,
    });
  }

  failures(dataset: string, channel: string, scope = "all", top = 2, run = 0): Promise<FailureHit[]> {
    return this.get("/api/failures", { dataset, channel, scope, top, run });
  }

  sweep(dataset: string, id: string, kind: string, channel: string, run = 0): Promise<SweepPoint[]> {
    return this.get("/api/sweep", { dataset, id, kind, channel, run });
  }

  imageUrl(recordId: string, dataset: string): string {
    return this.url(`/api/images/${encodeURIComponent(recordId)}`, { dataset });
  }
}

/** Drops resolutions of superseded requests so stale responses never render. */
export class LatestOnly<T> {
  private seq = 0;

  async run(task: () => Promise<T>): Promise<T | undefined> {
    const ticket = ++this.seq;
    const result = await task();
    return ticket === this.seq ? result : undefined;
  }
}
