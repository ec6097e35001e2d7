"""Bundle manifest: the single source of truth for every tensor shape.

Tensor files are headerless little-endian float32 (labels: uint32), so the
manifest must fully determine the shape of every file in the bundle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import InvalidBundleError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MetaTagSpec:
    """One declared metadata column; values=None leaves the tag open-valued."""

    name: str
    values: Optional[tuple[str, ...]] = None

    def to_json(self):
        out = {"name": self.name}
        if self.values is not None:
            out["values"] = list(self.values)
        return out

    @staticmethod
    def from_json(obj) -> "MetaTagSpec":
        values = obj.get("values")
        return MetaTagSpec(obj["name"], tuple(values) if values is not None else None)


@dataclass(frozen=True)
class BundleManifest:
    name: str = "bundle"
    n: int = 0
    K: int = 2
    T: int = 0
    d: int = 1
    runs: int = 1
    channels: tuple[str, ...] = ()
    meta_schema: tuple[MetaTagSpec, ...] = ()
    image_dir: Optional[str] = None
    has_dg_logits: bool = False
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> None:
        if self.n < 1 or self.K < 2 or self.d < 1 or self.runs < 1 or self.T < 0:
            raise InvalidBundleError(
                f"manifest dims out of range: n={self.n} K={self.K} T={self.T} "
                f"d={self.d} runs={self.runs}"
            )
        names = [t.name for t in self.meta_schema]
        if len(set(names)) != len(names):
            raise InvalidBundleError("duplicate meta tag names in manifest")

    @property
    def tag_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.meta_schema)

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "n": self.n,
            "K": self.K,
            "T": self.T,
            "d": self.d,
            "runs": self.runs,
            "channels": list(self.channels),
            "meta_schema": [t.to_json() for t in self.meta_schema],
            "image_dir": self.image_dir,
            "has_dg_logits": self.has_dg_logits,
        }

    @staticmethod
    def from_json(obj: dict) -> "BundleManifest":
        m = BundleManifest(
            name=obj["name"],
            n=int(obj["n"]),
            K=int(obj["K"]),
            T=int(obj.get("T", 0)),
            d=int(obj["d"]),
            runs=int(obj.get("runs", 1)),
            channels=tuple(obj.get("channels", [])),
            meta_schema=tuple(MetaTagSpec.from_json(t) for t in obj.get("meta_schema", [])),
            image_dir=obj.get("image_dir"),
            has_dg_logits=bool(obj.get("has_dg_logits", False)),
            schema_version=int(obj.get("schema_version", SCHEMA_VERSION)),
        )
        m.validate()
        return m

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path: Path) -> "BundleManifest":
        return BundleManifest.from_json(json.loads(path.read_text()))
