"""Built-in source/target split presets and the split applicator.

The presets encode the benchmark's acquisition and manifestation shifts as
predicates over metadata tags. Tag names and values are conventions of the
ingest format (site, subclass, source_dataset, batch, spiculation_rating,
texture_rating); the microscopy batch split targets the last ten of the
51 batch names.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..bundle.io import InferenceBundle, RunData
from ..bundle.manifest import MetaTagSpec
from ..errors import MissingTagError
from ..studies import Predicate, StudyDefinition, TagEq, TagGt, TagIn, TagLt

import numpy as np

MICROSCOPY_TARGET_BATCHES = tuple(f"batch_{i:02d}" for i in range(41, 51))


@dataclass(frozen=True)
class SplitPreset:
    name: str
    family: str          # dermoscopy | chest-xray | fc-microscopy | lidc
    kind: str            # acq | man
    target: Predicate    # records matching this become the target domain


def builtin_presets() -> list[SplitPreset]:
    return [
        SplitPreset("mskcc-acq", "dermoscopy", "acq", TagEq("site", "MSKCC")),
        SplitPreset("hcb-acq", "dermoscopy", "acq", TagEq("site", "HCB")),
        SplitPreset(
            "keratosis-man", "dermoscopy", "man",
            TagIn("subclass", ("keratosis-like", "actinic keratosis")),
        ),
        SplitPreset("nih14-acq", "chest-xray", "acq", TagEq("source_dataset", "NIH14")),
        SplitPreset("chexpert-acq", "chest-xray", "acq", TagEq("source_dataset", "CheXpert")),
        SplitPreset("batch-acq", "fc-microscopy", "acq",
                    TagIn("batch", MICROSCOPY_TARGET_BATCHES)),
        SplitPreset("spiculation-man", "lidc", "man", TagGt("spiculation_rating", 2.0)),
        SplitPreset("texture-man", "lidc", "man", TagLt("texture_rating", 3.0)),
    ]


def preset_by_name(name: str) -> SplitPreset:
    for p in builtin_presets():
        if p.name == name:
            return p
    raise KeyError(f"no builtin preset named {name!r}")


def apply_split(bundle: InferenceBundle, preset: SplitPreset
                ) -> tuple[InferenceBundle, list[StudyDefinition]]:
    """Tag every record domain=source|target per the preset predicate.

    Returns a new bundle (inputs are immutable) plus study definitions for
    both domains. The partition is total and disjoint by construction.
    """
    declared = set(bundle.manifest.tag_names)
    for tag in preset.target.tags():
        if tag not in declared:
            raise MissingTagError(tag)

    new_runs = []
    for run in bundle.runs:
        mask = preset.target.mask(run.meta)
        domain = np.where(mask, "target", "source").astype(object)
        meta = dict(run.meta)
        meta["domain"] = domain
        new_runs.append(RunData(
            ids=run.ids, labels=run.labels, logits=run.logits, latents=run.latents,
            mcd=run.mcd, dg_logits=run.dg_logits, ext=run.ext, meta=meta,
        ))

    schema = list(bundle.manifest.meta_schema)
    if "domain" not in bundle.manifest.tag_names:
        schema.append(MetaTagSpec("domain", ("source", "target")))
    else:
        schema = [MetaTagSpec("domain", ("source", "target")) if t.name == "domain" else t
                  for t in schema]
    manifest = replace(bundle.manifest, meta_schema=tuple(schema))

    studies = [
        StudyDefinition(f"{preset.name}-source", "iid", TagEq("domain", "source")),
        StudyDefinition(f"{preset.name}-target", preset.kind, TagEq("domain", "target")),
    ]
    return InferenceBundle(manifest=manifest, runs=new_runs, path=bundle.path), studies
