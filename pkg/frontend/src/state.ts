/** View state, URL-encodable so reloading reproduces any view exactly. */

import type { ColorScheme } from "./types.js";

export interface CameraPose {
  position: [number, number, number];
  target: [number, number, number];
}

export interface ViewState {
  dataset: string;
  scope: string;
  scheme: ColorScheme;
  channel: string;
  tau: number | null;
  selectedIds: string[];
  camera: CameraPose | null;
}

export const DEFAULT_VIEW_STATE: ViewState = {
  dataset: "",
  scope: "all",
  scheme: "class",
  channel: "msr",
  tau: null,
  selectedIds: [],
  camera: null,
};

const SCHEMES: ColorScheme[] = ["class", "domain", "classifier-confusion", "csf-confusion"];

function num3(text: string): [number, number, number] | null {
  const parts = text.split(",").map(Number);
  if (parts.length !== 3 || parts.some((v) => !Number.isFinite(v))) return null;
  return [parts[0], parts[1], parts[2]];
}

export function encodeViewState(state: ViewState): string {
  const q = new URLSearchParams();
  q.set("dataset", state.dataset);
  q.set("scope", state.scope);
  q.set("scheme", state.scheme);
  q.set("channel", state.channel);
  if (state.tau !== null) q.set("tau", String(state.tau));
  if (state.selectedIds.length) q.set("sel", state.selectedIds.join(","));
  if (state.camera) {
    q.set("cam", state.camera.position.join(","));
    q.set("lookat", state.camera.target.join(","));
  }
  return q.toString();
}

export function decodeViewState(encoded: string): ViewState {
  const q = new URLSearchParams(encoded);
  const scheme = q.get("scheme") ?? "class";
  const tauText = q.get("tau");
  const tau = tauText === null ? null : Number(tauText);
  const pos = q.get("cam") ? num3(q.get("cam")!) : null;
  const target = q.get("lookat") ? num3(q.get("lookat")!) : null;
  return {
    dataset: q.get("dataset") ?? "",
    scope: q.get("scope") ?? "all",
    scheme: SCHEMES.includes(scheme as ColorScheme) ? (scheme as ColorScheme) : "class",
    channel: q.get("channel") ?? "msr",
    tau: tau !== null && Number.isFinite(tau) ? tau : null,
    selectedIds: q.get("sel")?.split(",").filter(Boolean) ?? [],
    camera: pos && target ? { position: pos, target } : null,
  };
}
