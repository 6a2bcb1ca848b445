"""Registry persistence, schema validation, batch verdicts."""

import json

import pytest

from scrollk.registry import (
    DEFAULT_REGISTRY_PATH,
    FamilyRecord,
    Provenance,
    Registry,
    SchemaError,
    batch_verdict,
    dumps,
    load,
    load_default,
    save,
)
from scrollk.scroll import ScrollTriple
from scrollk.verdict import VerdictStatus


class TestDefaultRegistry:
    def test_shipped_triples(self):
        reg = load_default()
        assert reg.get("H5").triple == ScrollTriple(2, 1, 0)
        assert reg.get("H7").triple == ScrollTriple(2, 2, 0)
        assert reg.get("H17").triple == ScrollTriple(4, 0, 0)
        assert reg.get("H10").triple == ScrollTriple(3, 0, 0)
        assert reg.get("H14").triple == ScrollTriple(3, 2, 1)

    def test_stubs_have_no_scroll_data(self):
        reg = load_default()
        for rid in ("H1", "H2", "H3"):
            assert reg.get(rid).triple is None

    def test_every_populated_field_has_provenance(self):
        reg = load_default()
        for rid in reg.ids():
            reg.get(rid).validate()

    def test_provenance_notes_nonempty_for_paper_fields(self):
        reg = load_default()
        for rid in reg.ids():
            for fieldname, p in reg.get(rid).provenance.items():
                if p.tag == "paper":
                    assert p.note, (rid, fieldname)

    def test_save_load_byte_equal(self, tmp_path):
        original = DEFAULT_REGISTRY_PATH.read_text(encoding="utf-8")
        reg = load_default()
        out = tmp_path / "registry.json"
        save(reg, out)
        assert out.read_text(encoding="utf-8") == original


class TestSchema:
    def _minimal(self, **kw):
        data = {"id": "H99"}
        data.update(kw)
        return data

    def test_odd_degree_rejected(self):
        with pytest.raises(SchemaError) as err:
            FamilyRecord.from_dict(self._minimal(
                degree=7, provenance={"degree": {"tag": "user", "note": ""}}
            ))
        assert err.value.fieldname == "degree"

    def test_degree_triple_mismatch(self):
        with pytest.raises(SchemaError):
            FamilyRecord.from_dict(self._minimal(
                triple=[2, 1, 0], degree=8,
                provenance={"triple": {"tag": "user", "note": ""},
                            "degree": {"tag": "user", "note": ""}},
            ))

    def test_branch_triple_consistency(self):
        with pytest.raises(SchemaError) as err:
            FamilyRecord.from_dict(self._minimal(
                triple=[2, 1, 0], branch="x1*(x2^3+x3^3)",
                provenance={"triple": {"tag": "user", "note": ""},
                            "branch": {"tag": "user", "note": ""}},
            ))
        assert err.value.fieldname == "branch"

    def test_h10_derived_record_accepted(self):
        record = FamilyRecord.from_dict(self._minimal(
            triple=[3, 0, 0], branch="x1*(t1*x2^3+t2*x3^3)",
            provenance={"triple": {"tag": "derived", "note": "degree inference"},
                        "branch": {"tag": "paper", "note": "family equation"}},
        ))
        assert record.triple == ScrollTriple(3, 0, 0)

    def test_missing_provenance(self):
        with pytest.raises(SchemaError) as err:
            FamilyRecord.from_dict(self._minimal(triple=[2, 1, 0]))
        assert err.value.fieldname == "triple"

    def test_stray_provenance(self):
        with pytest.raises(SchemaError):
            FamilyRecord.from_dict(self._minimal(
                provenance={"degree": {"tag": "user", "note": ""}}
            ))

    def test_unknown_field(self):
        with pytest.raises(SchemaError):
            FamilyRecord.from_dict(self._minimal(flavor="strawberry"))

    def test_bad_provenance_tag(self):
        with pytest.raises(SchemaError):
            FamilyRecord.from_dict(self._minimal(
                degree=6, provenance={"degree": {"tag": "guessed", "note": ""}}
            ))

    def test_duplicate_id_rejected(self, tmp_path):
        reg = load_default()
        with pytest.raises(SchemaError):
            reg.add(FamilyRecord(id="H5"))

    def test_load_rejects_duplicates(self, tmp_path):
        doc = {"version": 1, "records": [{"id": "H9"}, {"id": "H9"}]}
        path = tmp_path / "reg.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(SchemaError):
            load(path)


class TestMutation:
    def test_add_bumps_version_and_saves_atomically(self, tmp_path):
        path = tmp_path / "reg.json"
        save(load_default(), path)
        reg = load(path)
        v0 = reg.version
        reg.add(FamilyRecord(id="H40"))
        assert reg.version == v0 + 1
        save(reg, path)
        again = load(path)
        assert "H40" in again.records
        assert again.version == v0 + 1
        assert not list(tmp_path.glob("*.tmp"))


class TestBatchVerdict:
    def test_main_statuses(self):
        rows = {r.id: r for r in batch_verdict(load_default())}
        stable = {"H5", "H7", "H8", "H11", "H12", "H13"}
        for rid in stable:
            assert rows[rid].verdict.status is VerdictStatus.K_STABLE_CERTIFIED, rid
        for rid in ("H10", "H17"):
            assert rows[rid].verdict.status is VerdictStatus.K_POLYSTABLE_CERTIFIED
        assert rows["H14"].verdict.status is VerdictStatus.K_UNSTABLE
        assert rows["H14"].verdict.reason == "fiber-beta"
        for rid in ("H1", "H2", "H3"):
            assert rows[rid].verdict.status is VerdictStatus.INCONCLUSIVE

    def test_alpha_sweep(self):
        reg = Registry()
        for d1 in range(5, 9):
            reg.records[f"X{d1}"] = FamilyRecord(
                id=f"X{d1}", triple=ScrollTriple(d1, d1 // 2, 0),
                provenance={"triple": Provenance("user")},
            )
        rows = batch_verdict(reg)
        assert all(r.verdict.reason == "alpha-bound" for r in rows)

    def test_empty_registry(self):
        assert batch_verdict(Registry()) == []

    def test_errors_captured_per_row(self):
        reg = Registry()
        reg.records["BAD"] = FamilyRecord(
            id="BAD", triple=ScrollTriple(3, 0, 0),
            branch_text="x2^4",  # valid on (3,0,0)? t-degree mismatch -> error
            futaki=(0, 1, -3),
            provenance={"triple": Provenance("user"),
                        "branch": Provenance("user"),
                        "futaki": Provenance("user")},
        )
        rows = batch_verdict(reg)
        assert rows[0].verdict is None
        assert rows[0].error

    def test_deterministic(self):
        reg = load_default()
        first = [(r.id, r.verdict.to_dict() if r.verdict else r.error)
                 for r in batch_verdict(reg)]
        second = [(r.id, r.verdict.to_dict() if r.verdict else r.error)
                  for r in batch_verdict(reg)]
        assert first == second

    def test_id_order_numeric(self):
        reg = load_default()
        ids = [r.id for r in batch_verdict(reg)]
        assert ids == sorted(ids, key=lambda s: int(s[1:]))
