"""Read-only HTTP facade over bundles, metrics, embeddings, and images.

Every GET is side-effect-free and deterministic for fixed on-disk state.
The single mutating route is POST /api/embed, which submits an embedding
job to a one-worker executor; results publish atomically into the cache
and persist next to the bundle, so responses are byte-stable across
restarts. While a job runs, reads of its scope answer 409.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .analytics import (
    EmbeddingParams,
    cache_key,
    color_labels,
    concept_clusters,
    embed_scope,
    intensity_sweep,
    load_frame,
    mine_silent_failures,
    save_frame,
)
from .bundle.io import InferenceBundle, load_bundle
from .csf import available_channels
from .errors import (
    MissingFileError,
    MissingVariantError,
    SfLensError,
    UnknownChannelError,
)
from .metrics import evaluate, rc_curve, thin_curve
from .studies import MatchAll, StudyDefinition, study_list_from_json

ENV_BUNDLE_ROOT = "SF_LENS_BUNDLE_ROOT"
ALL_SCOPE = "all"


class EmbedRequest(BaseModel):
    dataset: str
    scope: str = ALL_SCOPE
    run: int = 0
    pca_dims: int = 50
    perplexity: float = 30.0
    iterations: int = 1000
    seed: int = 0
    theta: float = 0.5

    def params(self) -> EmbeddingParams:
        return EmbeddingParams(
            pca_dims=self.pca_dims,
            perplexity=self.perplexity,
            iterations=self.iterations,
            seed=self.seed,
            theta=self.theta,
        )


class _State:
    def __init__(self, bundle_root: Path):
        self.bundle_root = Path(bundle_root)
        self.bundles: dict[str, InferenceBundle] = {}
        self.studies: dict[str, list[StudyDefinition]] = {}
        self.jobs: dict[str, str] = {}  # key -> "running" | "failed: ..."
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=1)

    def dataset_names(self) -> list[str]:
        names = []
        for child in sorted(self.bundle_root.iterdir()):
            if (child / "manifest.json").is_file():
                names.append(child.name)
        return names

    def bundle(self, name: str) -> InferenceBundle:
        if name not in self.bundles:
            path = self.bundle_root / name
            if not (path / "manifest.json").is_file():
                raise HTTPException(404, f"unknown dataset {name!r}")
            self.bundles[name] = load_bundle(path)
            studies_file = path / "studies.json"
            if studies_file.is_file():
                import json
                self.studies[name] = study_list_from_json(json.loads(studies_file.read_text()))
            else:
                self.studies[name] = []
        return self.bundles[name]

    def study(self, dataset: str, name: str) -> StudyDefinition:
        self.bundle(dataset)
        for s in self.studies[dataset]:
            if s.name == name:
                return s
        raise HTTPException(404, f"unknown study {name!r} in dataset {dataset!r}")

    def scope_indices(self, dataset: str, scope: str, run: int) -> np.ndarray:
        bundle = self.bundle(dataset)
        if run < 0 or run >= bundle.manifest.runs:
            raise HTTPException(404, f"dataset {dataset!r} has no run {run}")
        if scope == ALL_SCOPE:
            return np.arange(bundle.n)
        study = self.study(dataset, scope)
        idx = study.select(bundle.runs[run].columns())
        if idx.size == 0:
            raise HTTPException(404, f"study {scope!r} selects no records")
        return idx

    def channel_or_404(self, dataset: str, channel: str) -> str:
        if channel not in available_channels(self.bundle(dataset)):
            raise HTTPException(404, f"unknown channel {channel!r} for dataset {dataset!r}")
        return channel


def create_app(bundle_root: Optional[Path | str] = None,
               ui_dir: Optional[Path | str] = None) -> FastAPI:
    root = Path(bundle_root or os.environ.get(ENV_BUNDLE_ROOT, "."))
    app = FastAPI(title="sf-lens", docs_url=None, redoc_url=None)
    state = _State(root)
    app.state.lens = state

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"],
                       allow_headers=["*"])
    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    @app.exception_handler(SfLensError)
    async def _engine_error(request: Request, exc: SfLensError):
        from fastapi.responses import JSONResponse

        code = 404 if isinstance(exc, (MissingVariantError, UnknownChannelError,
                                       MissingFileError)) else 422
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    @app.get("/api/datasets")
    def datasets():
        out = []
        for name in state.dataset_names():
            bundle = state.bundle(name)
            m = bundle.manifest
            out.append({
                "name": name,
                "n": m.n,
                "K": m.K,
                "T": m.T,
                "d": m.d,
                "runs": m.runs,
                "channels": available_channels(bundle),
                "studies": [s.name for s in state.studies[name]],
                "has_images": m.image_dir is not None,
            })
        return out

    @app.get("/api/studies")
    def studies(dataset: str):
        bundle = state.bundle(dataset)
        cols = bundle.runs[0].columns()
        out = [{"name": ALL_SCOPE, "kind": "iid", "size": bundle.n}]
        for s in state.studies[dataset]:
            out.append({"name": s.name, "kind": s.kind, "size": int(s.select(cols).size)})
        return out

    @app.get("/api/metrics")
    def metrics(request: Request, dataset: str, study: Optional[str] = None,
                channel: Optional[str] = None):
        bundle = state.bundle(dataset)
        chosen = [state.study(dataset, study)] if study else list(state.studies[dataset])
        if not chosen:
            chosen = [StudyDefinition(ALL_SCOPE, "iid", MatchAll())]
        channels = [state.channel_or_404(dataset, channel)] if channel \
            else available_channels(bundle)
        report = evaluate(bundle, chosen, channels)
        if "text/csv" in request.headers.get("accept", ""):
            return PlainTextResponse(report.to_csv(), media_type="text/csv")
        return [row.__dict__ for row in report.rows]

    @app.get("/api/rc-curve")
    def rc_curve_endpoint(dataset: str, study: str, channel: str,
                          points: int = 100, run: int = 0):
        from .csf import compute_channel

        if points < 1:
            raise HTTPException(422, "points must be >= 1")
        bundle = state.bundle(dataset)
        state.channel_or_404(dataset, channel)
        idx = state.scope_indices(dataset, study, run)
        run_data = bundle.runs[run]
        residuals = bundle.residuals(run)[idx]
        conf = compute_channel(run_data, channel, bundle.manifest.K)[idx]
        curve = rc_curve(residuals, conf, run_data.ids[idx])
        cov, risk = thin_curve(curve, points)
        return {"coverage": cov.tolist(), "risk": risk.tolist(),
                "study": study, "channel": channel, "run": run}

    @app.post("/api/embed", status_code=202)
    def embed(req: EmbedRequest):
        bundle = state.bundle(req.dataset)
        idx = state.scope_indices(req.dataset, req.scope, req.run)
        params = req.params()
        run_data = bundle.runs[req.run]
        key = cache_key(req.dataset, req.scope, req.run, run_data.ids[idx], params)
        with state.lock:
            if state.jobs.get(key) == "running":
                return {"key": key, "status": "running"}
            if load_frame(state.bundle_root / req.dataset, key) is not None:
                return {"key": key, "status": "done"}
            state.jobs[key] = "running"

        def work():
            try:
                frame = embed_scope(bundle, req.run, req.scope, idx, params)
                save_frame(frame, state.bundle_root / req.dataset, req.dataset)
                with state.lock:
                    state.jobs[key] = "done"
            except Exception as exc:  # surfaced via job status
                with state.lock:
                    state.jobs[key] = f"failed: {exc}"

        state.executor.submit(work)
        return {"key": key, "status": "running"}

    def _frame_or_409(dataset: str, scope: str, run: int, params: EmbeddingParams):
        bundle = state.bundle(dataset)
        idx = state.scope_indices(dataset, scope, run)
        key = cache_key(dataset, scope, run, bundle.runs[run].ids[idx], params)
        with state.lock:
            status = state.jobs.get(key)
        if status == "running":
            raise HTTPException(409, f"embedding {key} still computing")
        if status is not None and status.startswith("failed"):
            raise HTTPException(422, status)
        frame = load_frame(state.bundle_root / dataset, key)
        if frame is None:
            raise HTTPException(404, f"no embedding for this scope; POST /api/embed first")
        return bundle, idx, frame, key

    @app.get("/api/embedding")
    def embedding(dataset: str, scope: str = ALL_SCOPE, scheme: str = "class",
                  channel: Optional[str] = None, tau: Optional[float] = None,
                  run: int = 0, pca_dims: int = 50, perplexity: float = 30.0,
                  iterations: int = 1000, seed: int = 0, theta: float = 0.5):
        from .csf import compute_channel

        if tau is not None and not np.isfinite(tau):
            raise HTTPException(422, "tau must be finite")
        params = EmbeddingParams(pca_dims, perplexity, iterations, seed, theta)
        bundle, idx, frame, key = _frame_or_409(dataset, scope, run, params)
        if channel is not None:
            state.channel_or_404(dataset, channel)
        labels, tau_used = color_labels(bundle, run, idx, scheme, channel=channel, tau=tau)
        run_data = bundle.runs[run]
        confidence = None
        if channel is not None:
            confidence = compute_channel(run_data, channel, bundle.manifest.K)[idx].tolist()
        return {
            "key": key,
            "ids": [str(i) for i in frame.record_ids],
            "coords": frame.coords.tolist(),
            "labels": labels,
            "predictions": np.argmax(run_data.logits[idx], axis=1).tolist(),
            "true_labels": run_data.labels[idx].tolist(),
            "confidence": confidence,
            "scheme": scheme,
            "tau": tau_used,
            "kl_trace": frame.kl_trace,
        }

    @app.get("/api/clusters")
    def clusters(dataset: str, concept: str, scope: str = ALL_SCOPE, run: int = 0,
                 k: int = 9, seed: int = 0, pca_dims: int = 50, perplexity: float = 30.0,
                 iterations: int = 1000, theta: float = 0.5, embed_seed: int = 0):
        params = EmbeddingParams(pca_dims, perplexity, iterations, embed_seed, theta)
        bundle, idx, frame, _ = _frame_or_409(dataset, scope, run, params)
        cols = {t: v[idx] for t, v in bundle.runs[run].columns().items()}
        if concept == ALL_SCOPE:
            member_mask = np.ones(len(idx), dtype=bool)
        else:
            if "=" not in concept:
                raise HTTPException(422, "concept must be 'all' or 'tag=value'")
            tag, value = concept.split("=", 1)
            if tag not in cols:
                raise HTTPException(404, f"unknown concept tag {tag!r}")
            member_mask = np.asarray(cols[tag]) == value
        if not member_mask.any():
            raise HTTPException(404, f"concept {concept!r} has no members in scope")
        members = np.flatnonzero(member_mask)
        result = concept_clusters(frame.coords[members], frame.record_ids[members],
                                  concept, k=k, seed=seed)
        return {
            "concept": concept,
            "centers": result.centers.tolist(),
            "representative_ids": result.representative_ids,
            "sizes": result.sizes,
            "member_ids": result.member_ids,
        }

    @app.get("/api/failures")
    def failures(dataset: str, channel: str, scope: str = ALL_SCOPE,
                 top: int = 2, run: int = 0):
        bundle = state.bundle(dataset)
        state.channel_or_404(dataset, channel)
        idx = state.scope_indices(dataset, scope, run)
        hits = mine_silent_failures(bundle, run, idx, channel, top=top)
        return [h.__dict__ for h in hits]

    @app.get("/api/sweep")
    def sweep(dataset: str, id: str, kind: str, channel: str, run: int = 0):
        bundle = state.bundle(dataset)
        state.channel_or_404(dataset, channel)
        points = intensity_sweep(bundle, run, id, kind, channel)
        return [p.__dict__ for p in points]

    @app.get("/api/images/{record_id}")
    def image(record_id: str, dataset: Optional[str] = None):
        if dataset is None:
            names = state.dataset_names()
            if len(names) != 1:
                raise HTTPException(422, "dataset parameter required")
            dataset = names[0]
        bundle = state.bundle(dataset)
        path = bundle.image_path(record_id)
        if path is None or not path.is_file():
            raise HTTPException(404, f"no image for record {record_id!r}")
        return FileResponse(path, media_type="image/png")

    return app


def run_server(bundle_root: Optional[Path | str], port: int = 8000,
               host: str = "127.0.0.1", ui_dir: Optional[Path | str] = None) -> None:
    import uvicorn

    uvicorn.run(create_app(bundle_root, ui_dir=ui_dir), host=host, port=port,
                log_level="warning")
