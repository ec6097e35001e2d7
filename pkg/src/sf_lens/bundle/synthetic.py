"""Synthetic inference-bundle generator.

Desk-scale stand-in for real inference exports: latent vectors come from K
unit-covariance Gaussian blobs whose means sit on a regular simplex with
edge length class_separation, labels are the blob identity, and logits are
a fixed linear readout of the latents plus noise. Target-domain records
are the same blobs translated by shift_offset along the direction from
class-0 mean to class-1 mean, which degrades the readout in a way that
mimics an acquisition shift. Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidSpecError
from ..studies import MatchAll, StudyDefinition, TagEq
from .io import InferenceBundle, RunData
from .manifest import BundleManifest, MetaTagSpec

DEFAULT_EXT_CHANNELS = ("confidnet", "devries", "random")


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 1000
    K: int = 2
    d: int = 16
    T: int = 4
    class_separation: float = 8.0
    shift_offset: float = 0.0
    seed: int = 0
    runs: int = 1
    logit_noise: float = 0.1
    mcd_noise: float = 0.25
    ext_channels: tuple[str, ...] = DEFAULT_EXT_CHANNELS
    with_dg: bool = True
    site_tags: bool = False  # emit a dermoscopy-like site column usable by split presets
    name: str = "synthetic"

    def validate(self) -> None:
        if self.n < self.K:
            raise InvalidSpecError(f"n={self.n} must be >= K={self.K}")
        if self.K < 2:
            raise InvalidSpecError("K must be >= 2")
        if self.d < self.K:
            raise InvalidSpecError(f"d={self.d} must be >= K={self.K} to place the class simplex")
        if self.T < 0 or self.runs < 1:
            raise InvalidSpecError("T must be >= 0 and runs >= 1")
        if self.class_separation < 0:
            raise InvalidSpecError("class_separation must be >= 0")


def _class_means(spec: SyntheticSpec) -> np.ndarray:
    # a * e_k gives pairwise distances a * sqrt(2) = class_separation
    means = np.zeros((spec.K, spec.d))
    a = spec.class_separation / np.sqrt(2.0)
    means[np.arange(spec.K), np.arange(spec.K)] = a
    return means


def _shift_direction(spec: SyntheticSpec) -> np.ndarray:
    u = np.zeros(spec.d)
    u[0], u[1] = -1.0, 1.0  # from class-0 mean toward class-1 mean
    return u / np.sqrt(2.0)


def _margins(logits: np.ndarray) -> np.ndarray:
    top2 = np.partition(logits, -2, axis=1)[:, -2:]
    return top2[:, 1] - top2[:, 0]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def generate_synthetic_bundle(spec: SyntheticSpec) -> InferenceBundle:
    spec.validate()
    ss = np.random.SeedSequence(spec.seed)
    base_rng = np.random.default_rng(ss.spawn(1)[0])
    run_seeds = ss.spawn(spec.runs + 1)[1:]

    # Balanced (label, domain) grid, then one shared shuffle.
    labels = np.arange(spec.n) % spec.K
    domains = (np.arange(spec.n) // spec.K) % 2  # 0 = source, 1 = target
    order = base_rng.permutation(spec.n)
    labels, domains = labels[order], domains[order]

    ids = np.array([f"r{i:05d}" for i in range(spec.n)], dtype=object)
    domain_col = np.where(domains == 1, "target", "source").astype(object)
    site_col = None
    if spec.site_tags:
        # shifted records come from one site so split presets recover the shift
        alt = np.where(np.arange(spec.n) % 2 == 0, "HCB", "VIENNA")
        site_col = np.where(domains == 1, "MSKCC", alt).astype(object)
    means = _class_means(spec)
    shift = _shift_direction(spec) * spec.shift_offset

    runs = []
    for r in range(spec.runs):
        rng = np.random.default_rng(run_seeds[r])
        latents = means[labels] + rng.standard_normal((spec.n, spec.d))
        latents[domains == 1] += shift
        logits = latents[:, : spec.K] + spec.logit_noise * rng.standard_normal((spec.n, spec.K))

        mcd = None
        if spec.T > 0:
            mcd = logits[:, None, :] + spec.mcd_noise * rng.standard_normal(
                (spec.n, spec.T, spec.K)
            )

        margins = _margins(logits)
        ext: dict[str, np.ndarray] = {}
        for name in spec.ext_channels:
            if name == "random":
                ext[name] = rng.uniform(0.0, 1.0, spec.n)
            elif name == "confidnet":
                ext[name] = _sigmoid(margins - 1.0 + 0.75 * rng.standard_normal(spec.n))
            elif name == "devries":
                ext[name] = _sigmoid(margins - 1.5 + 1.0 * rng.standard_normal(spec.n))
            else:
                raise InvalidSpecError(f"unknown synthetic ext channel {name!r}")

        dg = None
        if spec.with_dg:
            reservation = 1.0 - margins + 0.3 * rng.standard_normal(spec.n)
            dg = np.concatenate([logits, reservation[:, None]], axis=1)

        meta = {"domain": domain_col.copy()}
        if site_col is not None:
            meta["site"] = site_col.copy()
        runs.append(
            RunData(
                ids=ids.copy(),
                labels=labels.astype(np.int64),
                logits=logits.astype(np.float32),
                latents=latents.astype(np.float32),
                mcd=mcd.astype(np.float32) if mcd is not None else None,
                dg_logits=dg.astype(np.float32) if dg is not None else None,
                ext={k: v.astype(np.float32) for k, v in ext.items()},
                meta=meta,
            )
        )

    schema = [MetaTagSpec("domain", ("source", "target"))]
    if spec.site_tags:
        schema.append(MetaTagSpec("site", ("MSKCC", "HCB", "VIENNA")))
    manifest = BundleManifest(
        name=spec.name,
        n=spec.n,
        K=spec.K,
        T=spec.T,
        d=spec.d,
        runs=spec.runs,
        channels=tuple(spec.ext_channels),
        meta_schema=tuple(schema),
        has_dg_logits=spec.with_dg,
    )
    manifest.validate()
    return InferenceBundle(manifest=manifest, runs=runs)


def default_studies() -> list[StudyDefinition]:
    """Studies every synthetic bundle supports: iid source and the shifted target."""
    return [
        StudyDefinition("iid", "iid", TagEq("domain", "source")),
        StudyDefinition("shift-target", "acq", TagEq("domain", "target")),
    ]
