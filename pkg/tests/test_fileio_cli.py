import json

import numpy as np
import pytest

from imkit import BipartiteState, DensityMatrix, KrausSet, ParseError, PureState
from imkit.cli import main
from imkit.fileio import dumps, loads, save
from imkit.random import rand_cptp_kraus, rand_covariant_kraus, rand_density, rand_pure

from oracles import ETA

PLUS_I = np.array([1.0, 1.0j]) / np.sqrt(2)


def write(tmp_path, name, obj):
    path = tmp_path / name
    save(obj, path)
    return str(path)


class TestRoundTrip:
    def test_pure(self):
        rng = np.random.default_rng(110)
        psi = rand_pure(3, rng=rng)
        again = loads(dumps(psi))
        assert isinstance(again, PureState)
        np.testing.assert_array_equal(again.vec, psi.vec)

    def test_density(self):
        rng = np.random.default_rng(111)
        rho = rand_density(3, rng=rng)
        again = loads(dumps(rho))
        assert isinstance(again, DensityMatrix)
        np.testing.assert_array_equal(again.mat, rho.mat)

    def test_bipartite(self):
        state = BipartiteState.from_matrix(ETA, (2, 2))
        again = loads(dumps(state))
        assert isinstance(again, BipartiteState)
        assert again.dims == (2, 2)
        np.testing.assert_array_equal(again.mat, state.mat)

    def test_kraus(self):
        rng = np.random.default_rng(112)
        k = rand_cptp_kraus(2, n_ops=3, rng=rng)
        again = loads(dumps(k))
        assert isinstance(again, KrausSet)
        assert again.trace_preserving
        for a, b in zip(again.ops, k.ops):
            np.testing.assert_array_equal(a, b)

    def test_serialize_parse_serialize_identity(self):
        rng = np.random.default_rng(113)
        for obj in (rand_pure(2, rng=rng), rand_density(3, rng=rng),
                    rand_cptp_kraus(2, rng=rng)):
            text = dumps(obj)
            assert dumps(loads(text)) == text


class TestParseErrors:
    def test_bad_json_location(self):
        with pytest.raises(ParseError, match="line"):
            loads("{\n 'kind': broken\n}")

    def test_unknown_kind(self):
        with pytest.raises(ParseError, match="kind"):
            loads(json.dumps({"kind": "wavefunction", "dims": [2], "entries": []}))

    def test_bad_entry_location(self):
        doc = {"kind": "pure", "dims": [2], "entries": [[1.0, 0.0], "oops"]}
        with pytest.raises(ParseError, match=r"entries\[1\]"):
            loads(json.dumps(doc))

    def test_wrong_row_count(self):
        doc = {"kind": "density", "dims": [2], "entries": [[[1.0, 0.0], [0.0, 0.0]]]}
        with pytest.raises(ParseError, match="rows"):
            loads(json.dumps(doc))

    def test_invariant_failure_is_not_parse_error(self):
        doc = {"kind": "density", "dims": [2],
               "entries": [[[0.9, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        with pytest.raises(ValueError, match="trace"):
            loads(json.dumps(doc))


class TestCliMeasure:
    def test_plus_i(self, tmp_path, capsys):
        path = write(tmp_path, "plus_i.json", PureState(PLUS_I))
        assert main(["measure", path]) == 0
        out = capsys.readouterr().out
        assert "geometric_imaginarity = 0.5" in out

    def test_eta_monotones(self, tmp_path, capsys):
        path = write(tmp_path, "eta.json", BipartiteState.from_matrix(ETA, (2, 2)))
        assert main(["measure", path, "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["trace_monotone_B"] == pytest.approx(2.0, abs=1e-9)
        assert doc["outputs"]["trace_monotone_A"] == pytest.approx(2.0, abs=1e-9)
        assert doc["outputs"]["infidelity_monotone_B"] == pytest.approx(1.0, abs=1e-9)
        assert doc["provenance"]["version"]

    def test_real_state_all_zero(self, tmp_path, capsys):
        rng = np.random.default_rng(114)
        path = write(tmp_path, "real.json", rand_density(3, rng=rng, real=True))
        assert main(["measure", path, "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["outputs"]["geometric_imaginarity"]) <= 1e-9


class TestCliConvert:
    def test_exact_ratio(self, tmp_path, capsys):
        src = write(tmp_path, "src.json",
                    PureState(np.array([np.cos(np.pi / 8), 1j * np.sin(np.pi / 8)])))
        dst = write(tmp_path, "dst.json", PureState(PLUS_I).density())
        assert main(["convert", src, dst, "--mode", "exact",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["probability"] == pytest.approx(0.2928932188134524, abs=1e-9)

    def test_feasible_reflexive(self, tmp_path, capsys):
        rng = np.random.default_rng(115)
        rho = rand_density(2, rng=rng)
        a = write(tmp_path, "a.json", rho)
        assert main(["convert", a, a, "--mode", "feasible",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["feasible"] is True
        assert doc["outputs"]["alpha"] == pytest.approx(1.0, abs=1e-6)

    def test_fidelity_at_low_prob_is_one(self, tmp_path, capsys):
        src = write(tmp_path, "s.json", PureState(PLUS_I))
        dst = write(tmp_path, "t.json",
                    PureState(np.array([np.cos(np.pi / 8), 1j * np.sin(np.pi / 8)])).density())
        assert main(["convert", src, dst, "--mode", "fidelity-at-prob",
                     "--prob", "0.5", "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["fidelity"] == 1.0

    def test_curve_is_monotone_and_csv(self, tmp_path, capsys):
        rng = np.random.default_rng(116)
        src = write(tmp_path, "s.json", rand_pure(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_density(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "prob-at-fidelity",
                     "--fidelity", "0.9", "--curve", "20", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "fidelity,probability"
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        assert len(rows) == 20
        probs = [r[1] for r in rows]
        assert all(a >= b - 1e-12 for a, b in zip(probs, probs[1:]))

    def test_sdp_fidelity(self, tmp_path, capsys):
        rng = np.random.default_rng(117)
        src = write(tmp_path, "s.json", rand_density(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_pure(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "sdp-fidelity",
                     "--prob", "0.8", "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.0 <= doc["outputs"]["fidelity"] <= 1.0 + 1e-7

    def test_mixed_source_rejected_with_pure_requirement(self, tmp_path, capsys):
        rng = np.random.default_rng(118)
        src = write(tmp_path, "s.json", rand_density(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_density(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "exact"]) == 3
        assert "pure" in capsys.readouterr().err

    def test_sdp_needs_pure_target(self, tmp_path, capsys):
        rng = np.random.default_rng(119)
        src = write(tmp_path, "s.json", rand_density(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_density(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "sdp-fidelity", "--prob", "0.5"]) == 3
        assert "pure" in capsys.readouterr().err

    def test_impossible_probability_exits_solver_code(self, tmp_path, capsys):
        rng = np.random.default_rng(120)
        src = write(tmp_path, "s.json", rand_density(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_pure(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "sdp-fidelity", "--prob", "1.5"]) == 4
        assert "solver" in capsys.readouterr().err

    def test_solver_gap_env_override(self, tmp_path, capsys, monkeypatch):
        rng = np.random.default_rng(121)
        rho = rand_density(2, rng=rng)
        a = write(tmp_path, "a.json", rho)
        monkeypatch.setenv("IMKIT_SOLVER_GAP", "1e-6")
        assert main(["convert", a, a, "--mode", "feasible",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["provenance"]["solver_gap"] == 1e-6

    def test_bad_solver_gap_env(self, tmp_path, capsys, monkeypatch):
        rng = np.random.default_rng(122)
        a = write(tmp_path, "a.json", rand_density(2, rng=rng))
        monkeypatch.setenv("IMKIT_SOLVER_GAP", "tight")
        assert main(["convert", a, a, "--mode", "feasible"]) == 3


class TestCliDecompose:
    def test_pure_single_member(self, tmp_path, capsys):
        rng = np.random.default_rng(123)
        path = write(tmp_path, "p.json", rand_pure(3, rng=rng))
        assert main(["decompose", path, "--kind", "conjugate-orthogonal",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["outputs"]["weights"]) == 1

    def test_real_mixed_eigenensemble(self, tmp_path, capsys):
        rng = np.random.default_rng(124)
        path = write(tmp_path, "r.json", rand_density(3, rng=rng, real=True))
        assert main(["decompose", path, "--kind", "conjugate-orthogonal",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["diag_sum"] == pytest.approx(1.0, abs=1e-9)
        assert max(doc["outputs"]["member_imaginarity"]) <= 1e-9

    def test_equal_imaginarity_members(self, tmp_path, capsys):
        rng = np.random.default_rng(125)
        path = write(tmp_path, "q.json", rand_density(2, rng=rng))
        assert main(["decompose", path, "--kind", "equal-imaginarity",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        target = doc["outputs"]["target_imaginarity"]
        for val in doc["outputs"]["member_imaginarity"]:
            assert val == pytest.approx(target, abs=1e-8)


class TestCliKraus:
    def test_check_real(self, tmp_path, capsys):
        rng = np.random.default_rng(126)
        path = write(tmp_path, "k.json", rand_cptp_kraus(2, rng=rng, real=True))
        assert main(["kraus", path, "--action", "check-real",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["is_real"] is True

    def test_check_covariant_phase_gate(self, tmp_path, capsys):
        path = write(tmp_path, "k.json", KrausSet((np.diag([1.0, 1.0j]),)))
        assert main(["kraus", path, "--action", "check-covariant",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["outputs"]["covariant"] is False
        assert doc["outputs"]["residual"] > 1e-3

    def test_realify_writes_file(self, tmp_path, capsys):
        rng = np.random.default_rng(127)
        path = write(tmp_path, "k.json", rand_covariant_kraus(2, rng=rng))
        out_path = tmp_path / "real.json"
        assert main(["kraus", path, "--action", "realify",
                     "--output", str(out_path)]) == 0
        realified = loads(out_path.read_text())
        assert realified.is_real()

    def test_realify_refuses_with_residual(self, tmp_path, capsys):
        path = write(tmp_path, "k.json", KrausSet((np.diag([1.0, 1.0j]),)))
        assert main(["kraus", path, "--action", "realify"]) == 3
        assert "residual" in capsys.readouterr().err

    def test_merge(self, tmp_path, capsys):
        z = KrausSet((np.diag([1.0, -1.0]).astype(complex),))
        ident = KrausSet((np.eye(2),))
        p1 = write(tmp_path, "a.json", ident)
        p2 = write(tmp_path, "b.json", z)
        assert main(["kraus", p1, p2, "--action", "merge",
                     "--format", "structured"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["outputs"]["operators"]) == 2


class TestCliErrors:
    def test_missing_file_is_parse_error(self, capsys):
        assert main(["measure", "/nonexistent/state.json"]) == 2

    def test_bad_json_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["measure", str(path)]) == 2
        assert "parse" in capsys.readouterr().err

    def test_invariant_exit_code(self, tmp_path, capsys):
        doc = {"kind": "density", "dims": [2],
               "entries": [[[0.9, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        path = tmp_path / "bad_state.json"
        path.write_text(json.dumps(doc))
        assert main(["measure", str(path)]) == 3
        assert "invariant" in capsys.readouterr().err

    def test_output_file_written(self, tmp_path, capsys):
        path = write(tmp_path, "p.json", PureState(PLUS_I))
        report_path = tmp_path / "report.json"
        assert main(["measure", path, "--format", "structured",
                     "--output", str(report_path)]) == 0
        doc = json.loads(report_path.read_text())
        assert doc["outputs"]["geometric_imaginarity"] == 0.5

    def test_curve_refused_for_exact(self, tmp_path, capsys):
        rng = np.random.default_rng(128)
        src = write(tmp_path, "s.json", rand_pure(2, rng=rng))
        dst = write(tmp_path, "t.json", rand_density(2, rng=rng))
        assert main(["convert", src, dst, "--mode", "exact", "--curve", "10"]) == 3

    def test_tol_flag_loosens_validation(self, tmp_path, capsys):
        doc = {"kind": "density", "dims": [2],
               "entries": [[[0.9999995, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}
        path = tmp_path / "loose.json"
        path.write_text(json.dumps(doc))
        assert main(["measure", str(path)]) == 3
        capsys.readouterr()
        assert main(["measure", str(path), "--tol", "1e-5"]) == 0

    def test_merge_dim_mismatch_exit_code(self, tmp_path, capsys):
        rng = np.random.default_rng(129)
        p1 = write(tmp_path, "a.json", rand_cptp_kraus(2, rng=rng))
        p2 = write(tmp_path, "b.json", rand_cptp_kraus(3, rng=rng))
        assert main(["kraus", p1, p2, "--action", "merge"]) == 3
        assert "shapes differ" in capsys.readouterr().err
