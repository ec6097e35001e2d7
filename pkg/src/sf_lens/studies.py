"""Study definitions: named record slices expressed as predicates over meta tags.

A predicate is a small AST (equality, set membership, numeric comparison,
and/or) evaluated vectorized against a bundle's metadata columns. Studies
carry the shift-family kind used by Table-1-style aggregation: iid, cor,
acq, or man.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import STUDY_KINDS
from .errors import UnknownMetaTagError

Columns = Mapping[str, np.ndarray]  # tag -> (n,) array of strings


class Predicate:
    def mask(self, columns: Columns) -> np.ndarray:
        raise NotImplementedError

    def tags(self) -> set[str]:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


def _column(columns: Columns, tag: str) -> np.ndarray:
    if tag not in columns:
        raise UnknownMetaTagError(tag)
    return np.asarray(columns[tag])


def _as_float(col: np.ndarray) -> np.ndarray:
    """Numeric view of a string column; non-parsable entries become NaN (compare False)."""
    out = np.full(len(col), np.nan)
    for i, v in enumerate(col):
        try:
            out[i] = float(v)
        except ValueError:
            pass
    return out


@dataclass(frozen=True)
class MatchAll(Predicate):
    def mask(self, columns):
        n = len(next(iter(columns.values()))) if columns else 0
        return np.ones(n, dtype=bool)

    def tags(self):
        return set()

    def to_json(self):
        return {"all_records": True}


@dataclass(frozen=True)
class TagEq(Predicate):
    tag: str
    value: str

    def mask(self, columns):
        return _column(columns, self.tag) == self.value

    def tags(self):
        return {self.tag}

    def to_json(self):
        return {"tag": self.tag, "eq": self.value}


@dataclass(frozen=True)
class TagIn(Predicate):
    tag: str
    values: tuple[str, ...]

    def mask(self, columns):
        return np.isin(_column(columns, self.tag), list(self.values))

    def tags(self):
        return {self.tag}

    def to_json(self):
        return {"tag": self.tag, "in": list(self.values)}


@dataclass(frozen=True)
class TagGt(Predicate):
    tag: str
    threshold: float

    def mask(self, columns):
        vals = _as_float(_column(columns, self.tag))
        return vals > self.threshold  # NaN (non-numeric) compares False

    def tags(self):
        return {self.tag}

    def to_json(self):
        return {"tag": self.tag, "gt": self.threshold}


@dataclass(frozen=True)
class TagLt(Predicate):
    tag: str
    threshold: float

    def mask(self, columns):
        vals = _as_float(_column(columns, self.tag))
        return vals < self.threshold

    def tags(self):
        return {self.tag}

    def to_json(self):
        return {"tag": self.tag, "lt": self.threshold}


@dataclass(frozen=True)
class And(Predicate):
    terms: tuple[Predicate, ...]

    def mask(self, columns):
        out = np.ones(len(next(iter(columns.values()))), dtype=bool)
        for t in self.terms:
            out &= t.mask(columns)
        return out

    def tags(self):
        return set().union(*(t.tags() for t in self.terms)) if self.terms else set()

    def to_json(self):
        return {"all": [t.to_json() for t in self.terms]}


@dataclass(frozen=True)
class Or(Predicate):
    terms: tuple[Predicate, ...]

    def mask(self, columns):
        out = np.zeros(len(next(iter(columns.values()))), dtype=bool)
        for t in self.terms:
            out |= t.mask(columns)
        return out

    def tags(self):
        return set().union(*(t.tags() for t in self.terms)) if self.terms else set()

    def to_json(self):
        return {"any": [t.to_json() for t in self.terms]}


def predicate_from_json(obj: dict) -> Predicate:
    if obj.get("all_records"):
        return MatchAll()
    if "all" in obj:
        return And(tuple(predicate_from_json(t) for t in obj["all"]))
    if "any" in obj:
        return Or(tuple(predicate_from_json(t) for t in obj["any"]))
    tag = obj["tag"]
    if "eq" in obj:
        return TagEq(tag, str(obj["eq"]))
    if "in" in obj:
        return TagIn(tag, tuple(str(v) for v in obj["in"]))
    if "gt" in obj:
        return TagGt(tag, float(obj["gt"]))
    if "lt" in obj:
        return TagLt(tag, float(obj["lt"]))
    raise ValueError(f"unrecognized predicate node: {obj!r}")


@dataclass(frozen=True)
class StudyDefinition:
    name: str
    kind: str  # iid | cor | acq | man
    predicate: Predicate

    def __post_init__(self):
        if self.kind not in STUDY_KINDS:
            raise ValueError(f"study kind must be one of {STUDY_KINDS}, got {self.kind!r}")

    def select(self, columns: Columns) -> np.ndarray:
        """Indices of the records this study covers, in bundle order."""
        return np.flatnonzero(self.predicate.mask(columns))

    def validate_tags(self, declared: Sequence[str]) -> None:
        for tag in self.predicate.tags():
            if tag not in declared:
                raise UnknownMetaTagError(tag)

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "predicate": self.predicate.to_json()}

    @staticmethod
    def from_json(obj: dict) -> "StudyDefinition":
        return StudyDefinition(
            name=obj["name"], kind=obj["kind"], predicate=predicate_from_json(obj["predicate"])
        )


def study_list_to_json(studies: Sequence[StudyDefinition]) -> list[dict]:
    return [s.to_json() for s in studies]


def study_list_from_json(objs: Sequence[dict]) -> list[StudyDefinition]:
    return [StudyDefinition.from_json(o) for o in objs]
