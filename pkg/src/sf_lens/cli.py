"""Batch driver for the whole pipeline.

Exit codes: 0 success, 1 validation/engine error, 2 usage error. Every
subcommand is deterministic given its seeds and never touches the network.
Relative bundle paths resolve against SF_LENS_BUNDLE_ROOT when set.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .analytics import (
    EmbeddingParams,
    concept_clusters,
    embed_scope,
    mine_silent_failures,
    save_frame,
)
from .bundle import (
    SyntheticSpec,
    default_studies,
    generate_synthetic_bundle,
    load_bundle,
    write_bundle,
)
from .csf import available_channels
from .errors import SfLensError
from .metrics import confusion_report, evaluate, rc_curve, thin_curve, curve_to_csv
from .service import ENV_BUNDLE_ROOT, run_server
from .shifts import KINDS, LEVELS, CorruptionSpec, apply_split, corrupt, preset_by_name
from .studies import MatchAll, StudyDefinition, study_list_from_json, study_list_to_json


def _resolve_bundle(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        root = os.environ.get(ENV_BUNDLE_ROOT)
        if root and (Path(root) / path).exists():
            return Path(root) / path
    return p


def _load(path: str):
    return load_bundle(_resolve_bundle(path))


def _studies_for(bundle_path: Path, studies_file: str | None) -> list[StudyDefinition]:
    candidate = Path(studies_file) if studies_file else bundle_path / "studies.json"
    if candidate.is_file():
        return study_list_from_json(json.loads(candidate.read_text()))
    return [StudyDefinition("all", "iid", MatchAll())]


def _channels_for(bundle, spec: str) -> list[str]:
    if spec == "all":
        return available_channels(bundle)
    return [c.strip() for c in spec.split(",") if c.strip()]


class EngineErrorGroup(click.Group):
    """Translate engine errors into exit code 1 with the message on stderr."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SfLensError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)


@click.group(cls=EngineErrorGroup)
def main():
    """sf-lens: silent-failure analytics over inference bundles."""


@main.command()
@click.argument("bundle", type=str)
def validate(bundle):
    """Load and fully validate a bundle directory."""
    loaded = _load(bundle)
    m = loaded.manifest
    click.echo(f"ok: {m.name} n={m.n} K={m.K} T={m.T} d={m.d} runs={m.runs} "
               f"channels={list(m.channels)}")


@main.command()
@click.option("--n", default=1000, show_default=True)
@click.option("--k", default=2, show_default=True)
@click.option("--d", default=16, show_default=True)
@click.option("--t", default=4, show_default=True)
@click.option("--separation", default=8.0, show_default=True)
@click.option("--offset", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--runs", default=1, show_default=True)
@click.option("--image-size", default=0, show_default=True,
              help="Emit <id>.png fixtures of this edge length (0 = none).")
@click.option("--site-tags", is_flag=True,
              help="Emit a site column (MSKCC/HCB/VIENNA) usable by split presets.")
@click.option("--out", required=True, type=click.Path())
def synth(n, k, d, t, separation, offset, seed, runs, image_size, site_tags, out):
    """Generate a synthetic inference bundle plus its default studies."""
    spec = SyntheticSpec(n=n, K=k, d=d, T=t, class_separation=separation,
                         shift_offset=offset, seed=seed, runs=runs, site_tags=site_tags)
    bundle = generate_synthetic_bundle(spec)
    out_path = Path(out)
    if image_size > 0:
        bundle.manifest = replace(bundle.manifest, image_dir="images")
    write_bundle(bundle, out_path)
    if image_size > 0:
        _write_fixture_images(bundle, out_path / "images", image_size, seed)
    (out_path / "studies.json").write_text(
        json.dumps(study_list_to_json(default_studies()), indent=2))
    click.echo(f"wrote bundle n={n} K={k} runs={runs} -> {out_path}")


def _write_fixture_images(bundle, image_dir: Path, size: int, seed: int):
    from PIL import Image

    image_dir.mkdir(parents=True, exist_ok=True)
    run = bundle.runs[0]
    k_max = max(int(bundle.manifest.K) - 1, 1)
    for i, rid in enumerate(run.ids):
        rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, 7, i]))
        base = 0.25 + 0.5 * (int(run.labels[i]) / k_max)
        img = np.clip(base + 0.15 * rng.standard_normal((size, size)), 0.0, 1.0)
        Image.fromarray((img * 255).round().astype(np.uint8), mode="L").save(
            image_dir / f"{rid}.png")


@main.command("corrupt")
@click.option("--images", "images_dir", required=True, type=click.Path(exists=True))
@click.option("--kind", "kinds", multiple=True, default=("all",), show_default=True,
              help="Corruption kind(s), or 'all'.")
@click.option("--levels", default="1,2,3,4,5", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def corrupt_cmd(images_dir, kinds, levels, seed, out):
    """Corrupt a directory of PNG images at the requested severity levels."""
    from PIL import Image

    chosen_kinds = list(KINDS) if "all" in kinds else list(kinds)
    for kind in chosen_kinds:
        if kind not in KINDS:
            raise click.UsageError(f"unknown corruption kind {kind!r}")
    try:
        chosen_levels = [int(v) for v in levels.split(",") if v.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --levels: {exc}")
    for lv in chosen_levels:
        if lv not in LEVELS:
            raise click.UsageError(f"levels must be within {LEVELS}")

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sources = sorted(Path(images_dir).glob("*.png"))
    if not sources:
        raise SfLensError(f"no .png images under {images_dir}")

    studies = []
    for kind in chosen_kinds:
        for lv in chosen_levels:
            members = []
            for src in sources:
                arr = np.asarray(Image.open(src).convert("RGB"), dtype=np.float64) / 255.0
                spec = CorruptionSpec(kind, lv, seed=seed)
                result = corrupt(arr, spec, src.stem)
                new_id = f"{src.stem}~{kind}~L{lv}"
                Image.fromarray((result * 255).round().astype(np.uint8)).save(
                    out_dir / f"{new_id}.png")
                members.append(new_id)
            studies.append({
                "study": f"cor-{kind}-L{lv}",
                "kind": "cor",
                "parameters": {"kind": kind, "level": lv, "seed": seed},
                "member_record_ids": members,
            })
    (out_dir / "corruption_studies.json").write_text(json.dumps(studies, indent=2))
    click.echo(f"corrupted {len(sources)} images x {len(chosen_kinds)} kinds "
               f"x {len(chosen_levels)} levels -> {out_dir}")


@main.command()
@click.option("--preset", required=True)
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--out", type=click.Path(), default=None,
              help="Output bundle directory (default: rewrite in place).")
def split(preset, bundle_path, out):
    """Apply a builtin source/target split preset to a bundle."""
    bundle = _load(bundle_path)
    try:
        chosen = preset_by_name(preset)
    except KeyError as exc:
        raise click.UsageError(str(exc))
    tagged, studies = apply_split(bundle, chosen)
    dest = Path(out) if out else _resolve_bundle(bundle_path)
    write_bundle(tagged, dest)
    existing = []
    studies_file = dest / "studies.json"
    if studies_file.is_file():
        existing = [s for s in json.loads(studies_file.read_text())
                    if s["name"] not in {x.name for x in studies}]
    studies_file.write_text(json.dumps(existing + study_list_to_json(studies), indent=2))
    click.echo(f"split {chosen.name}: " +
               ", ".join(f"{s.name} ({s.kind})" for s in studies))


@main.command("evaluate")
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--studies", "studies_file", type=click.Path(exists=True), default=None)
@click.option("--channels", default="all", show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Write JSON instead of CSV.")
@click.option("--confusion-out", type=click.Path(), default=None,
              help="Also write failure-detection confusion counts (CSV).")
def evaluate_cmd(bundle_path, studies_file, channels, out, as_json, confusion_out):
    """Risk-coverage evaluation over studies x channels x runs."""
    bundle = _load(bundle_path)
    studies = _studies_for(_resolve_bundle(bundle_path), studies_file)
    chans = _channels_for(bundle, channels)
    report = evaluate(bundle, studies, chans)
    Path(out).write_text(report.to_json() if as_json else report.to_csv())
    if confusion_out:
        rows = confusion_report(bundle, studies, chans)
        import csv as _csv
        with open(confusion_out, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    click.echo(f"evaluated {len(studies)} studies x {len(chans)} channels "
               f"x {bundle.manifest.runs} runs -> {out}")


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--study", default="all", show_default=True)
@click.option("--channel", required=True)
@click.option("--points", default=100, show_default=True)
@click.option("--run", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def curves(bundle_path, study, channel, points, run, out):
    """Export a thinned risk-coverage curve as CSV."""
    from .csf import compute_channel

    bundle = _load(bundle_path)
    studies = _studies_for(_resolve_bundle(bundle_path), None)
    if study == "all":
        idx = np.arange(bundle.n)
    else:
        match = [s for s in studies if s.name == study]
        if not match:
            raise SfLensError(f"no study named {study!r}")
        idx = match[0].select(bundle.runs[run].columns())
    run_data = bundle.runs[run]
    conf = compute_channel(run_data, channel, bundle.manifest.K)[idx]
    curve = rc_curve(bundle.residuals(run)[idx], conf, run_data.ids[idx])
    cov, risk = thin_curve(curve, points)
    Path(out).write_text(curve_to_csv(cov, risk))
    click.echo(f"wrote {points}-point curve for ({study}, {channel}) -> {out}")


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--scope", default="all", show_default=True)
@click.option("--run", default=0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--pca-dims", default=50, show_default=True)
@click.option("--perplexity", default=30.0, show_default=True)
@click.option("--iterations", default=1000, show_default=True)
@click.option("--theta", default=0.5, show_default=True)
def embed(bundle_path, scope, run, seed, pca_dims, perplexity, iterations, theta):
    """Compute and cache the 3D embedding of a scope."""
    bundle = _load(bundle_path)
    idx = _scope_indices(bundle, _resolve_bundle(bundle_path), scope, run)
    params = EmbeddingParams(pca_dims=pca_dims, perplexity=perplexity,
                             iterations=iterations, seed=seed, theta=theta)
    frame = embed_scope(bundle, run, scope, idx, params)
    key = save_frame(frame, _resolve_bundle(bundle_path), bundle.manifest.name)
    first = frame.kl_trace[0][1]
    last = frame.kl_trace[-1][1]
    click.echo(f"embedded {len(idx)} records ({frame.mode}) key={key} "
               f"kl {first:.4f} -> {last:.4f}")


def _scope_indices(bundle, bundle_dir: Path, scope: str, run: int) -> np.ndarray:
    if scope == "all":
        return np.arange(bundle.n)
    studies = _studies_for(bundle_dir, None)
    match = [s for s in studies if s.name == scope]
    if not match:
        raise SfLensError(f"no study named {scope!r}")
    idx = match[0].select(bundle.runs[run].columns())
    if idx.size == 0:
        raise SfLensError(f"study {scope!r} selects no records")
    return idx


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--concept", required=True, help="'all' or tag=value over meta/pseudo tags.")
@click.option("--scope", default="all", show_default=True)
@click.option("--run", default=0, show_default=True)
@click.option("--k", default=9, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--pca-dims", default=50, show_default=True)
@click.option("--perplexity", default=30.0, show_default=True)
@click.option("--iterations", default=1000, show_default=True)
def clusters(bundle_path, concept, scope, run, k, seed, pca_dims, perplexity, iterations):
    """Concept clusters over the embedded scope (computes the embedding if needed)."""
    bundle = _load(bundle_path)
    idx = _scope_indices(bundle, _resolve_bundle(bundle_path), scope, run)
    params = EmbeddingParams(pca_dims=pca_dims, perplexity=perplexity,
                             iterations=iterations, seed=seed)
    frame = embed_scope(bundle, run, scope, idx, params)
    cols = {t: v[idx] for t, v in bundle.runs[run].columns().items()}
    if concept == "all":
        mask = np.ones(len(idx), dtype=bool)
    else:
        if "=" not in concept:
            raise click.UsageError("concept must be 'all' or tag=value")
        tag, value = concept.split("=", 1)
        if tag not in cols:
            raise SfLensError(f"unknown concept tag {tag!r}")
        mask = np.asarray(cols[tag]) == value
    if not mask.any():
        raise SfLensError(f"concept {concept!r} has no members in scope")
    members = np.flatnonzero(mask)
    result = concept_clusters(frame.coords[members], frame.record_ids[members],
                              concept, k=k, seed=seed)
    click.echo(json.dumps({
        "concept": concept,
        "representative_ids": result.representative_ids,
        "sizes": result.sizes,
    }, indent=2))


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=str)
@click.option("--channel", default="msr", show_default=True)
@click.option("--top", default=2, show_default=True)
@click.option("--scope", default="all", show_default=True)
@click.option("--run", default=0, show_default=True)
def failures(bundle_path, channel, top, scope, run):
    """Print the most-confident misclassifications of a scope."""
    bundle = _load(bundle_path)
    idx = _scope_indices(bundle, _resolve_bundle(bundle_path), scope, run)
    hits = mine_silent_failures(bundle, run, idx, channel, top=top)
    click.echo(json.dumps([h.__dict__ for h in hits], indent=2))


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--bundle-root", default=None,
              help=f"Bundle root directory (fallback: ${ENV_BUNDLE_ROOT}).")
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="Serve the explorer's static files under /ui.")
def serve(port, host, bundle_root, ui_dir):
    """Serve the read-only HTTP API for the explorer UI."""
    run_server(bundle_root, port=port, host=host, ui_dir=ui_dir)


if __name__ == "__main__":
    main()
