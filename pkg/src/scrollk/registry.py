"""Provenance-tagged family registry: persistence, validation, batch runs.

The registry is a single human-diffable JSON document.  Every populated
field of a record carries a provenance entry (tag ``paper``, ``derived`` or
``user`` plus a short note) so certificates produced from registry data can
be traced to their source.  Families without scroll data (H1-H3 style
stubs) are representable; every field is optional.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .branch import BranchLocalType, BranchPoly, infer_triple, parse
from .scroll import ScrollTriple
from .verdict import (
    AssertedHypotheses,
    DuValType,
    Hypothesis,
    Verdict,
    full_verdict,
)


class SchemaError(Exception):
    """A record violates a registry invariant; names the record and field."""

    def __init__(self, record_id: str, fieldname: str, message: str):
        super().__init__(f"record {record_id}, field {fieldname}: {message}")
        self.record_id = record_id
        self.fieldname = fieldname


PROVENANCE_TAGS = ("paper", "derived", "user")


@dataclass(frozen=True)
class Provenance:
    tag: str
    note: str = ""

    def __post_init__(self):
        if self.tag not in PROVENANCE_TAGS:
            raise ValueError(f"provenance tag must be one of {PROVENANCE_TAGS}")


@dataclass(frozen=True)
class FamilyRecord:
    id: str
    triple: Optional[ScrollTriple] = None
    degree: Optional[int] = None
    branch_text: Optional[str] = None
    branch_alt_text: Optional[str] = None
    p3_type: Optional[BranchLocalType] = None
    line_component: Optional[int] = None
    futaki: Optional[tuple[int, int, int]] = None
    singular_locus: tuple[DuValType, ...] = ()
    asserted: AssertedHypotheses = AssertedHypotheses()
    provenance: Mapping[str, Provenance] = field(default_factory=dict)

    _FIELDS = (
        "triple", "degree", "branch", "branch_alt", "p3_type",
        "line_component", "futaki", "singular_locus", "asserted",
    )

    def _populated_fields(self) -> set[str]:
        populated = set()
        if self.triple is not None:
            populated.add("triple")
        if self.degree is not None:
            populated.add("degree")
        if self.branch_text is not None:
            populated.add("branch")
        if self.branch_alt_text is not None:
            populated.add("branch_alt")
        if self.p3_type is not None:
            populated.add("p3_type")
        if self.line_component is not None:
            populated.add("line_component")
        if self.futaki is not None:
            populated.add("futaki")
        if self.singular_locus:
            populated.add("singular_locus")
        if self.asserted.flags:
            populated.add("asserted")
        return populated

    def branch_poly(self) -> Optional[BranchPoly]:
        if self.branch_text is None:
            return None
        return parse(self.branch_text)

    def validate(self) -> None:
        if self.degree is not None:
            if self.degree <= 0 or self.degree % 2 != 0:
                raise SchemaError(self.id, "degree", "degree must be a positive even integer")
            if self.triple is not None and self.degree != 2 * self.triple.total:
                raise SchemaError(
                    self.id, "degree",
                    f"degree {self.degree} != 2*(d1+d2+d3) = {2 * self.triple.total}",
                )
        for fieldname, text in (("branch", self.branch_text),
                                ("branch_alt", self.branch_alt_text)):
            if text is None:
                continue
            try:
                poly = parse(text)
            except Exception as exc:
                raise SchemaError(self.id, fieldname, f"does not parse: {exc}") from exc
            if self.triple is not None:
                candidates = infer_triple(poly.observations())
                if self.triple not in candidates:
                    raise SchemaError(
                        self.id, fieldname,
                        f"triple {self.triple} inconsistent with the equation's degrees",
                    )
        if self.line_component is not None and self.line_component not in (1, 2, 3):
            raise SchemaError(self.id, "line_component", "must be 1, 2 or 3")
        populated = self._populated_fields()
        missing = populated - set(self.provenance)
        if missing:
            raise SchemaError(
                self.id, sorted(missing)[0], "populated field lacks provenance"
            )
        stray = set(self.provenance) - populated
        if stray:
            raise SchemaError(
                self.id, sorted(stray)[0], "provenance given for an absent field"
            )

    def to_dict(self) -> dict:
        out: dict = {"id": self.id}
        if self.triple is not None:
            out["triple"] = list(self.triple.as_tuple())
        if self.degree is not None:
            out["degree"] = self.degree
        if self.branch_text is not None:
            out["branch"] = self.branch_text
        if self.branch_alt_text is not None:
            out["branch_alt"] = self.branch_alt_text
        if self.p3_type is not None:
            out["p3_type"] = self.p3_type.value
        if self.line_component is not None:
            out["line_component"] = self.line_component
        if self.futaki is not None:
            out["futaki"] = list(self.futaki)
        if self.singular_locus:
            out["singular_locus"] = [str(d) for d in self.singular_locus]
        if self.asserted.flags:
            out["asserted"] = self.asserted.to_list()
        if self.provenance:
            out["provenance"] = {
                name: {"tag": p.tag, "note": p.note}
                for name, p in sorted(self.provenance.items())
            }
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "FamilyRecord":
        rid = data.get("id")
        if not rid or not isinstance(rid, str):
            raise SchemaError(str(rid), "id", "missing or non-string id")
        known = {"id", "triple", "degree", "branch", "branch_alt", "p3_type",
                 "line_component", "futaki", "singular_locus", "asserted",
                 "provenance"}
        stray = set(data) - known
        if stray:
            raise SchemaError(rid, sorted(stray)[0], "unknown field")
        triple = None
        if "triple" in data:
            try:
                triple = ScrollTriple(*data["triple"])
            except (TypeError, ValueError) as exc:
                raise SchemaError(rid, "triple", str(exc)) from exc
        p3 = None
        if "p3_type" in data:
            try:
                p3 = BranchLocalType(data["p3_type"])
            except ValueError as exc:
                raise SchemaError(rid, "p3_type", str(exc)) from exc
        futaki = None
        if "futaki" in data:
            vec = data["futaki"]
            if len(vec) != 3 or not all(isinstance(c, int) for c in vec):
                raise SchemaError(rid, "futaki", "must be an integer 3-vector")
            futaki = tuple(vec)
        locus = []
        for text in data.get("singular_locus", []):
            try:
                locus.append(DuValType.parse(text))
            except ValueError as exc:
                raise SchemaError(rid, "singular_locus", str(exc)) from exc
        flags = []
        for text in data.get("asserted", []):
            try:
                flags.append(Hypothesis(text))
            except ValueError as exc:
                raise SchemaError(rid, "asserted", f"unknown hypothesis {text!r}") from exc
        provenance = {}
        for name, p in data.get("provenance", {}).items():
            try:
                provenance[name] = Provenance(p["tag"], p.get("note", ""))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(rid, f"provenance.{name}", str(exc)) from exc
        record = cls(
            id=rid,
            triple=triple,
            degree=data.get("degree"),
            branch_text=data.get("branch"),
            branch_alt_text=data.get("branch_alt"),
            p3_type=p3,
            line_component=data.get("line_component"),
            futaki=futaki,
            singular_locus=tuple(locus),
            asserted=AssertedHypotheses.of(*flags),
            provenance=provenance,
        )
        record.validate()
        return record


def _family_sort_key(rid: str):
    m = re.fullmatch(r"H(\d+)", rid)
    return (0, int(m.group(1)), rid) if m else (1, 0, rid)


@dataclass
class Registry:
    records: dict[str, FamilyRecord] = field(default_factory=dict)
    version: int = 1

    def get(self, rid: str) -> FamilyRecord:
        try:
            return self.records[rid]
        except KeyError:
            raise KeyError(f"no family {rid!r} in the registry") from None

    def ids(self) -> list[str]:
        return sorted(self.records, key=_family_sort_key)

    def add(self, record: FamilyRecord) -> None:
        """Insert a validated record, bumping the registry version."""
        record.validate()
        if record.id in self.records:
            raise SchemaError(record.id, "id", "duplicate id")
        self.records[record.id] = record
        self.version += 1

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "records": [self.records[rid].to_dict() for rid in self.ids()],
        }


def dumps(reg: Registry) -> str:
    return json.dumps(reg.to_dict(), indent=2, sort_keys=True) + "\n"


def load(path) -> Registry:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "records" not in data:
        raise SchemaError("<registry>", "records", "top level must hold a record list")
    reg = Registry(version=int(data.get("version", 1)))
    for raw in data["records"]:
        record = FamilyRecord.from_dict(raw)
        if record.id in reg.records:
            raise SchemaError(record.id, "id", "duplicate id")
        reg.records[record.id] = record
    return reg


def save(reg: Registry, path) -> None:
    """Whole-file replace via write-temp-then-rename (single-writer safe)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps(reg))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


DEFAULT_REGISTRY_PATH = Path(__file__).parent / "data" / "registry.json"


def load_default() -> Registry:
    return load(DEFAULT_REGISTRY_PATH)


@dataclass(frozen=True)
class BatchRow:
    id: str
    verdict: Optional[Verdict] = None
    error: str = ""


def batch_verdict(reg: Registry) -> list[BatchRow]:
    """full_verdict per record, in id order; per-record errors never abort."""
    rows = []
    for rid in reg.ids():
        try:
            rows.append(BatchRow(rid, full_verdict(reg.get(rid))))
        except Exception as exc:
            rows.append(BatchRow(rid, None, f"{type(exc).__name__}: {exc}"))
    return rows
