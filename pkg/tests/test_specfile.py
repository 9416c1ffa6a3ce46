"""Problem-file loading and proof-trace wire formats."""

import pytest

from conftest import teleport_spec_text

from hdql.calculus import ProofSession, check_proof
from hdql.specfile import (SpecLoadError, deserialize_trace, load_spec_text,
                           serialize_trace, trace_from_json, trace_to_json,
                           valuation_model)


class TestLoadSpec:
    def test_teleport_file_matches_the_frame(self):
        spec = load_spec_text(teleport_spec_text(0.6, 0.8))
        assert spec.sig.dim == 8
        assert set(spec.sig.unitaries) == {"u0", "u1", "s0", "s1", "d0", "d1"}
        assert set(spec.sig.measurements) == {"q00", "q01", "q10", "q11"}
        assert len(spec.axioms) == 4
        assert len(spec.goals) == 1
        for q in spec.sig.measurements.values():
            assert q.rank == 2

    def test_missing_dimension(self):
        with pytest.raises(SpecLoadError) as e:
            load_spec_text("VECTORS\n  v = (1, 0)\n")
        assert any("SPACE" in err for err in e.value.errors)

    def test_non_unitary_entry_reports_residual(self):
        text = "SPACE 2\nUNITARY\n  bad = [1, 0; 0, 2]\nPROPS\n  p\n"
        with pytest.raises(SpecLoadError) as e:
            load_spec_text(text)
        assert any("not unitary" in err and "3.0" in err for err in e.value.errors)

    def test_duplicate_measurement_basis_flagged(self):
        text = ("SPACE 2\nVECTORS\n  v = (1, 0)\nMEASURE\n  m = { v, (1, 0) }\n"
                "PROPS\n  p\n")
        with pytest.raises(SpecLoadError) as e:
            load_spec_text(text)
        assert any("duplicate" in err for err in e.value.errors)

    def test_parse_error_carries_line(self):
        text = "SPACE 2\nAXIOMS\n  p /\\\n"
        with pytest.raises(SpecLoadError) as e:
            load_spec_text(text)
        assert any(err.startswith("line 3") for err in e.value.errors)

    def test_undeclared_symbols_are_located(self):
        text = "SPACE 2\nPROPS\n  p\nAXIOMS\n  @(ghost) p /\\ q\n"
        with pytest.raises(SpecLoadError) as e:
            load_spec_text(text)
        assert any("undeclared proposition 'q'" in err for err in e.value.errors)
        assert any("undeclared vector name 'ghost'" in err for err in e.value.errors)

    def test_valuation_section(self):
        spec = load_spec_text(teleport_spec_text(0.6, 0.8, with_valuation=True))
        model = valuation_model(spec)
        region = model.valuation["p"]
        assert len(region.vectors) == 4

    def test_span_valuation(self):
        text = ("SPACE 2\nVECTORS\n  v = (1, 0)\nPROPS\n  r closed\n"
                "VALUATION\n  r = span { v }\n")
        spec = load_spec_text(text)
        assert spec.valuation["r"].rank == 1


class TestTraceFormats:
    def proof(self):
        spec = load_spec_text(teleport_spec_text(0.6, 0.8))
        session = ProofSession(spec.sig, spec.axioms)
        result = session.prove(*spec.goals[0])
        assert result.holds
        return spec, result.tree

    def test_text_round_trip_is_exact(self):
        spec, tree = self.proof()
        text = serialize_trace(tree.conclusion.gamma, tree)
        gamma, back = deserialize_trace(text)
        assert serialize_trace(gamma, back) == text
        assert check_proof(spec.sig, back).ok

    def test_json_round_trip_is_exact(self):
        spec, tree = self.proof()
        doc = trace_to_json(tree.conclusion.gamma, tree)
        gamma, back = trace_from_json(doc)
        assert trace_to_json(gamma, back) == doc
        assert check_proof(spec.sig, back).ok

    def test_identical_inputs_give_identical_traces(self):
        spec1, tree1 = self.proof()
        spec2, tree2 = self.proof()
        assert serialize_trace(tree1.conclusion.gamma, tree1) == \
            serialize_trace(tree2.conclusion.gamma, tree2)

    def test_star_certificate_survives_the_round_trip(self):
        text = ("SPACE 2\nVECTORS\n  v0 = (1, 0)\n  v1 = (0, 1)\n"
                "UNITARY\n  x = [0, 1; 1, 0]\nPROPS\n  p\n"
                "AXIOMS\n  @(v0) p\n  @(v1) p\nGOAL AT v0 PROVE [x*] p\n")
        spec = load_spec_text(text)
        session = ProofSession(spec.sig, spec.axioms)
        result = session.prove(*spec.goals[0])
        assert result.holds
        out = serialize_trace(result.tree.conclusion.gamma, result.tree)
        _, back = deserialize_trace(out)
        assert check_proof(spec.sig, back).ok
        assert "StarI" in out and "n=" in out
