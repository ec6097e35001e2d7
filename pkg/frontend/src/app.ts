/** Explorer application: wires the API, scatter, panels, and URL state. */

import { ApiClient, LatestOnly } from "./api.js";
import { rebucket } from "./recolor.js";
import { ScatterView } from "./scatter.js";
import { DEFAULT_VIEW_STATE, decodeViewState, encodeViewState, ViewState } from "./state.js";
import type { ColorScheme, EmbeddingFrame } from "./types.js";
import { DEFAULT_EMBEDDING_PARAMS } from "./types.js";
import { conceptTiles, failureRows, recordDetail, sweepStrip } from "./views.js";

const api = new ApiClient("");
const embeddingFetch = new LatestOnly<EmbeddingFrame>();

interface AppElements {
  datasetSelect: HTMLSelectElement;
  schemeSelect: HTMLSelectElement;
  channelSelect: HTMLSelectElement;
  tauSlider: HTMLInputElement;
  tauValue: HTMLElement;
  scatterPane: HTMLElement;
  detailPane: HTMLElement;
  conceptPane: HTMLElement;
  failuresPane: HTMLElement;
  sweepPane: HTMLElement;
  status: HTMLElement;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class ExplorerApp {
  private state: ViewState = { ...DEFAULT_VIEW_STATE };
  private frame: EmbeddingFrame | null = null;
  private scatter: ScatterView | null = null;
  private unmount: (() => void) | null = null;

  constructor(private ui: AppElements) {}

  async start(): Promise<void> {
    this.state = { ...DEFAULT_VIEW_STATE, ...decodeViewState(location.hash.slice(1)) };
    const datasets = await api.datasets();
    if (!datasets.length) {
      this.ui.status.textContent = "no bundles under the served root";
      return;
    }
    for (const d of datasets) {
      this.ui.datasetSelect.add(new Option(`${d.name} (n=${d.n})`, d.name));
    }
    if (!this.state.dataset) this.state.dataset = datasets[0].name;
    this.ui.datasetSelect.value = this.state.dataset;
    const channels = datasets.find((d) => d.name === this.state.dataset)?.channels ?? [];
    for (const c of channels) this.ui.channelSelect.add(new Option(c, c));
    this.ui.channelSelect.value = channels.includes(this.state.channel)
      ? this.state.channel : channels[0];

    this.bindControls();
    await this.loadEmbedding();
    await Promise.all([this.loadConcepts(), this.loadFailures()]);
  }

  private bindControls(): void {
    this.ui.datasetSelect.onchange = () => {
      this.state.dataset = this.ui.datasetSelect.value;
      void this.loadEmbedding();
    };
    this.ui.schemeSelect.onchange = () => {
      this.state.scheme = this.ui.schemeSelect.value as ColorScheme;
      void this.loadEmbedding();
    };
    this.ui.channelSelect.onchange = () => {
      this.state.channel = this.ui.channelSelect.value;
      void this.loadEmbedding();
    };
    // tau slider recolors client-side; values must match server buckets exactly
    this.ui.tauSlider.oninput = () => {
      if (!this.frame || !this.scatter || this.frame.confidence === null) return;
      const span = this.tauSpan();
      const tau = span.lo + (Number(this.ui.tauSlider.value) / 1000) * (span.hi - span.lo);
      this.state.tau = tau;
      this.ui.tauValue.textContent = tau.toFixed(4);
      this.scatter.setLabels(
        rebucket(this.frame.predictions, this.frame.true_labels, this.frame.confidence, tau),
      );
      this.pushState();
    };
  }

  private tauSpan(): { lo: number; hi: number } {
    const conf = this.frame?.confidence ?? [0, 1];
    let lo = Infinity;
    let hi = -Infinity;
    for (const c of conf) {
      if (c < lo) lo = c;
      if (c > hi) hi = c;
    }
    return lo < hi ? { lo, hi } : { lo: 0, hi: 1 };
  }

  private pushState(): void {
    history.replaceState(null, "", "#" + encodeViewState(this.state));
  }

  private async loadEmbedding(): Promise<void> {
    const { dataset, scope, scheme, channel } = this.state;
    this.ui.status.textContent = "embedding…";
    await api.embedAndWait(dataset, scope, 0, DEFAULT_EMBEDDING_PARAMS);
    const frame = await embeddingFetch.run(() =>
      api.embedding(dataset, scope, scheme, 0, DEFAULT_EMBEDDING_PARAMS,
                    scheme === "csf-confusion" ? channel : channel,
                    this.state.tau ?? undefined));
    if (!frame) return; // superseded by a newer request
    this.frame = frame;
    this.ui.status.textContent = `${frame.ids.length} records`;
    this.unmount?.();
    this.scatter = new ScatterView(frame.coords, frame.labels, {
      onPick: (index) => void this.showRecord(index),
    });
    this.unmount = this.scatter.mount(this.ui.scatterPane);
    this.pushState();
  }

  /** Dot selection: image plus the (prediction, label, confidence) triple. */
  private async showRecord(index: number | null): Promise<void> {
    const pane = this.ui.detailPane;
    pane.replaceChildren();
    if (index === null || !this.frame) return;
    const detail = recordDetail(this.frame, index,
                                (id) => api.imageUrl(id, this.state.dataset));
    this.state.selectedIds = [detail.id];
    this.pushState();

    const img = document.createElement("img");
    img.src = detail.imageUrl;
    img.alt = detail.id;
    img.onerror = () => img.remove();
    const caption = document.createElement("div");
    caption.textContent =
      `${detail.id} — pred ${detail.prediction}, label ${detail.label}` +
      (detail.confidence === null ? "" : `, conf ${detail.confidence.toFixed(4)}`);
    pane.append(img, caption);
  }

  private async loadConcepts(): Promise<void> {
    const clusters = await api.clusters(
      this.state.dataset, "class=0", this.state.scope, 0, 9, DEFAULT_EMBEDDING_PARAMS);
    const tiles = conceptTiles(clusters, (id) => api.imageUrl(id, this.state.dataset));
    const pane = this.ui.conceptPane;
    pane.replaceChildren();
    for (const tile of tiles) {
      const img = document.createElement("img");
      img.src = tile.imageUrl;
      img.alt = tile.recordId;
      img.title = `cluster ${tile.clusterIndex} (${tile.size} members)`;
      img.onmouseenter = () => this.highlightMembers(tile.memberIds);
      img.onmouseleave = () => this.highlightMembers([]);
      img.onerror = () => { img.replaceWith(document.createTextNode(tile.recordId)); };
      pane.append(img);
    }
  }

  private highlightMembers(ids: string[]): void {
    if (!this.scatter || !this.frame) return;
    const wanted = new Set(ids);
    const indices: number[] = [];
    this.frame.ids.forEach((id, i) => {
      if (wanted.has(id)) indices.push(i);
    });
    this.scatter.setHighlight(indices);
  }

  private async loadFailures(): Promise<void> {
    const { dataset, channel, scope } = this.state;
    const hits = await api.failures(dataset, channel, scope, 5);
    const confByChannel: Record<string, Map<string, number>> = {};
    if (this.frame?.confidence) {
      const perId = new Map<string, number>();
      this.frame.ids.forEach((id, i) => perId.set(id, this.frame!.confidence![i]));
      confByChannel[channel] = perId;
    }
    const rows = failureRows(hits, confByChannel, (id) => api.imageUrl(id, dataset));
    const pane = this.ui.failuresPane;
    pane.replaceChildren();
    for (const row of rows) {
      const div = document.createElement("div");
      div.className = "failure-row";
      div.textContent =
        `${row.id}: pred ${row.prediction} vs label ${row.label} ` +
        `(${Object.entries(row.confidences).map(([c, v]) => `${c}=${v.toFixed(3)}`).join(", ")})`;
      div.onclick = () => {
        const index = this.frame?.ids.indexOf(row.id) ?? -1;
        if (index >= 0) void this.showRecord(index);
      };
      pane.append(div);
    }
  }

  /** Corruption sweep strip for a selected record (shown when variants exist). */
  async loadSweep(recordId: string, kind: string): Promise<void> {
    try {
      const points = await api.sweep(this.state.dataset, recordId, kind, this.state.channel);
      const items = sweepStrip(points, (id) => api.imageUrl(id, this.state.dataset));
      const pane = this.ui.sweepPane;
      pane.replaceChildren();
      for (const item of items) {
        const cell = document.createElement("div");
        cell.className = item.flipped ? "sweep-cell flipped" : "sweep-cell";
        const img = document.createElement("img");
        img.src = item.imageUrl;
        img.alt = `level ${item.level}`;
        const text = document.createElement("div");
        text.textContent = `L${item.level}: pred ${item.prediction} @ ${item.confidence.toFixed(3)}`;
        cell.append(img, text);
        pane.append(cell);
      }
    } catch {
      this.ui.sweepPane.textContent = "no corruption variants for this record";
    }
  }
}

export function bootstrap(): void {
  const app = new ExplorerApp({
    datasetSelect: el("dataset"),
    schemeSelect: el("scheme"),
    channelSelect: el("channel"),
    tauSlider: el("tau"),
    tauValue: el("tau-value"),
    scatterPane: el("scatter"),
    detailPane: el("detail"),
    conceptPane: el("concepts"),
    failuresPane: el("failures"),
    sweepPane: el("sweep"),
    status: el("status"),
  });
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("scatter")) {
  bootstrap();
}
