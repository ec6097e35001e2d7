"""On-disk bundle format, loader/validator, and writer.

Layout::

    <bundle>/
      manifest.json
      images/                  # optional, <id>.png
      run_0/
        logits.f32             # n*K little-endian float32, row-major
        mcd_logits.f32         # n*T*K, only if T > 0
        latents.f32            # n*d
        dg_logits.f32          # n*(K+1), only if has_dg_logits
        labels.u32             # n little-endian uint32
        metadata.csv           # header: id,<tag>,... ; UTF-8
        ext_conf_<name>.f32    # n, one per declared channel
      run_1/ ...

Shapes live only in the manifest; a truncated or padded tensor file is a
ShapeMismatch. Any non-finite value is rejected at load with the first
offending record index.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import InferenceRecord, predict_all, residuals_all
from ..errors import (
    InvalidBundleError,
    MissingFileError,
    NonFiniteValueError,
    ShapeMismatchError,
    UnknownMetaTagError,
)
from .manifest import BundleManifest

MANIFEST_FILE = "manifest.json"
LOGITS_FILE = "logits.f32"
MCD_FILE = "mcd_logits.f32"
LATENTS_FILE = "latents.f32"
DG_FILE = "dg_logits.f32"
LABELS_FILE = "labels.u32"
METADATA_FILE = "metadata.csv"

# Pseudo-tags derived from arrays, usable in predicates next to real meta tags.
PSEUDO_TAGS = ("class", "pred", "correct")


@dataclass
class RunData:
    """All arrays of one training-seed replica. Treated as immutable after load."""

    ids: np.ndarray                      # (n,) str
    labels: np.ndarray                   # (n,) int64
    logits: np.ndarray                   # (n, K) float32
    latents: np.ndarray                  # (n, d) float32
    mcd: Optional[np.ndarray]            # (n, T, K) float32 or None
    dg_logits: Optional[np.ndarray]      # (n, K+1) float32 or None
    ext: dict[str, np.ndarray]           # name -> (n,) float32
    meta: dict[str, np.ndarray]          # tag -> (n,) str

    def columns(self) -> dict[str, np.ndarray]:
        """Meta columns plus derived pseudo-tags for predicate evaluation."""
        preds = predict_all(self.logits)
        cols = dict(self.meta)
        cols["class"] = self.labels.astype(str)
        cols["pred"] = preds.astype(str)
        cols["correct"] = (preds == self.labels).astype(int).astype(str)
        return cols

    def record(self, i: int, image_dir: Optional[str] = None) -> InferenceRecord:
        rid = str(self.ids[i])
        image_ref = f"{image_dir}/{rid}.png" if image_dir else None
        return InferenceRecord(
            id=rid,
            label=int(self.labels[i]),
            logits=self.logits[i],
            latent=self.latents[i],
            mcd=self.mcd[i] if self.mcd is not None else None,
            ext_conf={k: float(v[i]) for k, v in self.ext.items()},
            meta={k: str(v[i]) for k, v in self.meta.items()},
            image_ref=image_ref,
        )


@dataclass
class InferenceBundle:
    manifest: BundleManifest
    runs: list[RunData]
    path: Optional[Path] = None

    @property
    def n(self) -> int:
        return self.manifest.n

    def run(self, r: int) -> RunData:
        return self.runs[r]

    def image_path(self, record_id: str) -> Optional[Path]:
        if self.manifest.image_dir is None or self.path is None:
            return None
        return self.path / self.manifest.image_dir / f"{record_id}.png"

    def residuals(self, r: int = 0) -> np.ndarray:
        run = self.runs[r]
        return residuals_all(run.logits, run.labels)


def _read_f32(path: Path, count: int, shape: tuple[int, ...], row_width: int) -> np.ndarray:
    if not path.is_file():
        raise MissingFileError(path)
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != count:
        raise ShapeMismatchError(path, count, raw.size)
    bad = np.flatnonzero(~np.isfinite(raw))
    if bad.size:
        raise NonFiniteValueError(path, int(bad[0]) // row_width)
    return raw.reshape(shape)


def _read_u32(path: Path, count: int) -> np.ndarray:
    if not path.is_file():
        raise MissingFileError(path)
    raw = np.fromfile(path, dtype="<u4")
    if raw.size != count:
        raise ShapeMismatchError(path, count, raw.size)
    return raw.astype(np.int64)


def _read_metadata(path: Path, manifest: BundleManifest) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    if not path.is_file():
        raise MissingFileError(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise InvalidBundleError(f"{path}: first metadata column must be 'id'")
        declared = set(manifest.tag_names)
        for col in header[1:]:
            if col not in declared:
                raise UnknownMetaTagError(col)
        rows = list(reader)
    if len(rows) != manifest.n:
        raise ShapeMismatchError(path, manifest.n, len(rows))
    ids = np.array([r[0] for r in rows], dtype=object)
    if len(set(ids)) != len(ids):
        raise InvalidBundleError(f"{path}: record ids not unique within run")
    meta: dict[str, np.ndarray] = {}
    for j, col in enumerate(header[1:], start=1):
        values = np.array([r[j] for r in rows], dtype=object)
        spec = next(t for t in manifest.meta_schema if t.name == col)
        if spec.values is not None:
            allowed = set(spec.values)
            for i, v in enumerate(values):
                if v not in allowed:
                    raise InvalidBundleError(
                        f"{path}: record {i} tag {col}={v!r} not in declared values"
                    )
        meta[col] = values
    return ids, meta


def _validate_labels(labels: np.ndarray, K: int, path: Path) -> None:
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        bad = int(np.flatnonzero((labels < 0) | (labels >= K))[0])
        raise InvalidBundleError(f"{path}: label out of range at record {bad}")


def load_run(run_dir: Path, manifest: BundleManifest) -> RunData:
    n, K, T, d = manifest.n, manifest.K, manifest.T, manifest.d
    logits = _read_f32(run_dir / LOGITS_FILE, n * K, (n, K), K)
    latents = _read_f32(run_dir / LATENTS_FILE, n * d, (n, d), d)
    labels = _read_u32(run_dir / LABELS_FILE, n)
    _validate_labels(labels, K, run_dir / LABELS_FILE)
    mcd = None
    if T > 0:
        mcd = _read_f32(run_dir / MCD_FILE, n * T * K, (n, T, K), T * K)
    dg = None
    if manifest.has_dg_logits:
        dg = _read_f32(run_dir / DG_FILE, n * (K + 1), (n, K + 1), K + 1)
    ext = {
        name: _read_f32(run_dir / f"ext_conf_{name}.f32", n, (n,), 1)
        for name in manifest.channels
    }
    ids, meta = _read_metadata(run_dir / METADATA_FILE, manifest)
    missing = [t for t in manifest.tag_names if t not in meta]
    if missing:
        raise InvalidBundleError(f"{run_dir}: metadata missing declared tags {missing}")
    return RunData(ids=ids, labels=labels, logits=logits, latents=latents,
                   mcd=mcd, dg_logits=dg, ext=ext, meta=meta)


def load_bundle(path: Path | str) -> InferenceBundle:
    """Load and fully validate a bundle directory."""
    path = Path(path)
    manifest_path = path / MANIFEST_FILE
    if not manifest_path.is_file():
        raise MissingFileError(manifest_path)
    manifest = BundleManifest.load(manifest_path)
    manifest.validate()
    runs = [load_run(path / f"run_{r}", manifest) for r in range(manifest.runs)]
    if manifest.image_dir is not None and not (path / manifest.image_dir).is_dir():
        raise MissingFileError(path / manifest.image_dir)
    return InferenceBundle(manifest=manifest, runs=runs, path=path)


def write_run(run_dir: Path, run: RunData, manifest: BundleManifest) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    run.logits.astype("<f4").tofile(run_dir / LOGITS_FILE)
    run.latents.astype("<f4").tofile(run_dir / LATENTS_FILE)
    run.labels.astype("<u4").tofile(run_dir / LABELS_FILE)
    if run.mcd is not None:
        run.mcd.astype("<f4").tofile(run_dir / MCD_FILE)
    if run.dg_logits is not None:
        run.dg_logits.astype("<f4").tofile(run_dir / DG_FILE)
    for name, scores in run.ext.items():
        scores.astype("<f4").tofile(run_dir / f"ext_conf_{name}.f32")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    tags = list(manifest.tag_names)
    writer.writerow(["id"] + tags)
    for i in range(manifest.n):
        writer.writerow([str(run.ids[i])] + [str(run.meta[t][i]) for t in tags])
    (run_dir / METADATA_FILE).write_text(buf.getvalue(), encoding="utf-8")


def write_bundle(bundle: InferenceBundle, path: Path | str) -> Path:
    """Write a bundle directory; load_bundle(write_bundle(b)) reproduces b bit-exactly."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    bundle.manifest.save(path / MANIFEST_FILE)
    for r, run in enumerate(bundle.runs):
        write_run(path / f"run_{r}", run, bundle.manifest)
    if bundle.manifest.image_dir is not None:
        (path / bundle.manifest.image_dir).mkdir(parents=True, exist_ok=True)
    return path
