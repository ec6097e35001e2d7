"""Embedding frames: PCA -> t-SNE coordinates plus coloring schemes and caching.

A frame is fit jointly on whatever scope it is given (source and target
together), so shifted clusters are positioned relative to the source
geometry. Frames persist as a JSON sidecar plus a raw coords.f32 file next
to the bundle, keyed by a hash of (bundle, scope, run, record ids, params).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..bundle.io import InferenceBundle, RunData
from ..core import default_tau, detection_outcomes_all
from ..csf import compute_channel
from .kmeans import kmeans
from .pca import reduce_pca
from .tsne import reduce_tsne

SCHEMES = ("class", "domain", "classifier-confusion", "csf-confusion")


@dataclass(frozen=True)
class EmbeddingParams:
    pca_dims: int = 50
    perplexity: float = 30.0
    iterations: int = 1000
    seed: int = 0
    theta: float = 0.5

    def to_json(self) -> dict:
        return {
            "pca_dims": self.pca_dims,
            "perplexity": self.perplexity,
            "iterations": self.iterations,
            "seed": self.seed,
            "theta": self.theta,
        }

    @staticmethod
    def from_json(obj: dict) -> "EmbeddingParams":
        return EmbeddingParams(
            pca_dims=int(obj["pca_dims"]),
            perplexity=float(obj["perplexity"]),
            iterations=int(obj["iterations"]),
            seed=int(obj["seed"]),
            theta=float(obj["theta"]),
        )


@dataclass
class EmbeddingFrame:
    scope: str
    run: int
    record_ids: np.ndarray          # (n,) str, scope order
    coords: np.ndarray              # (n, 3) float64
    params: EmbeddingParams
    kl_trace: list[tuple[int, float]]
    mode: str


def compute_embedding(latents: np.ndarray, params: EmbeddingParams) -> tuple[np.ndarray, list, str]:
    pca = reduce_pca(latents, k=params.pca_dims)
    tsne = reduce_tsne(
        pca.coords,
        seed=params.seed,
        perplexity=params.perplexity,
        iterations=params.iterations,
        theta=params.theta,
    )
    return tsne.coords, tsne.kl_trace, tsne.mode


def embed_scope(bundle: InferenceBundle, run_idx: int, scope: str,
                indices: np.ndarray, params: EmbeddingParams) -> EmbeddingFrame:
    run = bundle.runs[run_idx]
    coords, trace, mode = compute_embedding(run.latents[indices].astype(np.float64), params)
    return EmbeddingFrame(
        scope=scope,
        run=run_idx,
        record_ids=run.ids[indices].copy(),
        coords=coords,
        params=params,
        kl_trace=trace,
        mode=mode,
    )


# --- coloring schemes ---------------------------------------------------------

def color_labels(bundle: InferenceBundle, run_idx: int, indices: np.ndarray,
                 scheme: str, channel: Optional[str] = None,
                 tau: Optional[float] = None) -> tuple[list[str], Optional[float]]:
    """Per-record color labels for a scope; returns (labels, tau_used)."""
    run = bundle.runs[run_idx]
    if scheme == "class":
        return [str(v) for v in run.labels[indices]], None
    if scheme == "domain":
        if "domain" in run.meta:
            return [str(v) for v in run.meta["domain"][indices]], None
        return ["all"] * len(indices), None
    preds = np.argmax(run.logits[indices], axis=1)
    labels = run.labels[indices]
    if scheme == "classifier-confusion":
        return [f"{p}|{t}" for p, t in zip(preds, labels)], None
    if scheme == "csf-confusion":
        if channel is None:
            channel = "msr"
        conf = compute_channel(run, channel, bundle.manifest.K)[indices]
        t = default_tau(conf) if tau is None else float(tau)
        outcomes = detection_outcomes_all((preds != labels).astype(int), conf, t)
        return [str(o) for o in outcomes], t
    raise ValueError(f"unknown coloring scheme {scheme!r}")


# --- concept clusters ---------------------------------------------------------

@dataclass
class ConceptCluster:
    concept: str
    centers: np.ndarray                 # (k, 3)
    representative_ids: list[str]       # one per cluster, closest member to center
    sizes: list[int]
    member_ids: list[list[str]]


def concept_clusters(coords: np.ndarray, ids: np.ndarray, concept: str,
                     k: int = 9, seed: int = 0) -> ConceptCluster:
    """k-means over the embedded members of one concept; k caps at the member count."""
    result = kmeans(coords, k=min(k, coords.shape[0]), seed=seed)
    reps: list[str] = []
    sizes: list[int] = []
    members: list[list[str]] = []
    for c in range(result.centers.shape[0]):
        member_idx = np.flatnonzero(result.assignments == c)
        diff = coords[member_idx] - result.centers[c]
        d2 = np.einsum("ij,ij->i", diff, diff, optimize=False)
        best = min(zip(d2, (str(ids[i]) for i in member_idx)))
        reps.append(best[1])
        sizes.append(int(member_idx.size))
        members.append([str(ids[i]) for i in member_idx])
    return ConceptCluster(concept=concept, centers=result.centers,
                          representative_ids=reps, sizes=sizes, member_ids=members)


# --- persistence --------------------------------------------------------------

def cache_key(bundle_name: str, scope: str, run_idx: int,
              record_ids: np.ndarray, params: EmbeddingParams) -> str:
    ids_digest = hashlib.sha256("\n".join(str(i) for i in record_ids).encode()).hexdigest()
    payload = json.dumps(
        {"bundle": bundle_name, "scope": scope, "run": run_idx,
         "ids": ids_digest, "params": params.to_json()},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def embeddings_dir(bundle_path: Path) -> Path:
    return Path(bundle_path) / "embeddings"


def save_frame(frame: EmbeddingFrame, bundle_path: Path, bundle_name: str) -> str:
    key = cache_key(bundle_name, frame.scope, frame.run, frame.record_ids, frame.params)
    out = embeddings_dir(bundle_path)
    out.mkdir(parents=True, exist_ok=True)
    frame.coords.astype("<f4").tofile(out / f"{key}.coords.f32")
    sidecar = {
        "scope": frame.scope,
        "run": frame.run,
        "record_ids": [str(i) for i in frame.record_ids],
        "params": frame.params.to_json(),
        "kl_trace": [[int(i), float(v)] for i, v in frame.kl_trace],
        "mode": frame.mode,
    }
    (out / f"{key}.json").write_text(json.dumps(sidecar, sort_keys=True))
    return key


def load_frame(bundle_path: Path, key: str) -> Optional[EmbeddingFrame]:
    out = embeddings_dir(bundle_path)
    sidecar_path = out / f"{key}.json"
    coords_path = out / f"{key}.coords.f32"
    if not sidecar_path.is_file() or not coords_path.is_file():
        return None
    sidecar = json.loads(sidecar_path.read_text())
    ids = np.array(sidecar["record_ids"], dtype=object)
    coords = np.fromfile(coords_path, dtype="<f4").reshape(len(ids), 3).astype(np.float64)
    return EmbeddingFrame(
        scope=sidecar["scope"],
        run=int(sidecar["run"]),
        record_ids=ids,
        coords=coords,
        params=EmbeddingParams.from_json(sidecar["params"]),
        kl_trace=[(int(i), float(v)) for i, v in sidecar["kl_trace"]],
        mode=sidecar["mode"],
    )
