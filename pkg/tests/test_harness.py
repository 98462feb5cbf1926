import csv
import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from lohesim.harness import (
    ERROR,
    FAIL,
    PASS,
    UNADJUDICATED,
    RunConfig,
    SweepConfig,
    adjudicate,
    check,
    compare_reduction,
    compare_splitting,
    complex_array,
    encode_complex,
    readjudicate,
    run,
    sweep,
)
from lohesim.integrate import ConfigError, DriftError
from lohesim.sphere import rotation_generator
from lohesim.theorems import COMPLETE, NO_GUARANTEE, PRACTICAL


def base(**model):
    m = {"N": 3, "d": 2, "kappa0": 1.0, **model}
    return {
        "model": m,
        "history": {"kind": "generator", "seed": 1, "spread": 0.3},
        "integrator": {"h": 0.01, "t_end": 1.0},
    }


def test_defaults_are_materialized():
    tree = RunConfig.from_dict(base(tau=0.05)).to_dict()
    assert tree["integrator"]["projection"] == "off"
    assert tree["integrator"]["norm_budget"] == 1e-7
    assert tree["adjudication"] == {"theorem": None, "complete_tol": 1e-5, "practical_slack": 0.02}
    assert tree["diagnostics"]["tail_fraction"] == 0.2
    raw = base(tau=0.05)
    del raw["integrator"]
    tree = RunConfig.from_dict(raw).to_dict()
    assert tree["integrator"]["h"] == pytest.approx(1e-3) and tree["integrator"]["t_end"] == 100.0


@pytest.mark.parametrize("mutate", [
    lambda c: c.pop("history"),
    lambda c: c["history"].pop("seed"),
    lambda c: c["model"].pop("kappa0"),
    lambda c: c.update(extra={}),
    lambda c: c["model"].update(omegas={"kind": "wobble"}),
    lambda c: c["model"].update(adjacency={"kind": "star"}),
    lambda c: c.update(adjudication={"theorem": "thm99"}),
    lambda c: c["integrator"].update(projection="sometimes"),
])
def test_invalid_configs(mutate):
    raw = base()
    mutate(raw)
    with pytest.raises((ConfigError, ValueError, KeyError)):
        RunConfig.from_dict(raw)


def test_memory_budget():
    raw = base()
    raw["integrator"] = {"h": 1e-4, "t_end": 1000.0}
    raw["memory_budget_mb"] = 1
    with pytest.raises(ConfigError):
        run(raw)


def test_complex_encoding_roundtrip():
    a = np.array([[1 + 2j, 3.0]])
    np.testing.assert_array_equal(complex_array(encode_complex(a)), a)
    np.testing.assert_array_equal(complex_array([[1.0, 0.0]]), [[1.0, 0.0]])


def test_omega_kinds():
    for spec in ({"kind": "rotation", "nu": 1.0}, {"kind": "random", "seed": 3, "norm": 0.5},
                 {"kind": "perturbed", "seed": 3, "norm": 0.5, "spread": 0.1},
                 {"kind": "common", "matrix": rotation_generator(2.0).tolist()}):
        p = RunConfig.from_dict(base(omegas=spec)).params()
        assert p.omegas.shape == (3, 2, 2)
    p = RunConfig.from_dict(base(omegas={"kind": "perturbed", "seed": 3, "norm": 0.5, "spread": 0.1})).params()
    assert max(np.abs(p.omegas[i] - p.omegas[j]).sum(axis=1).max() for i in range(3) for j in range(3)) <= 0.1


def test_adjudicate_table():
    assert adjudicate(COMPLETE, 1e-6, 0.0, None, 1e-5, 0.02) == PASS
    assert adjudicate(COMPLETE, 1e-4, 0.0, None, 1e-5, 0.02) == FAIL
    assert adjudicate(PRACTICAL, 0.0, 0.11, 0.1, 1e-5, 0.02) == PASS
    assert adjudicate(PRACTICAL, 0.0, 0.13, 0.1, 1e-5, 0.02) == FAIL
    assert adjudicate(NO_GUARANTEE, 1.0, 1.0, None, 1e-5, 0.02) == UNADJUDICATED


def test_consensus_run_passes():
    raw = base(form="sl", tau=0.05)
    raw["history"] = {"kind": "constant", "states": [[0.6, 0.8]] * 5}
    raw["model"]["N"] = 5
    raw["adjudication"] = {"theorem": "thm31"}
    res = run(raw)
    assert np.all(res.diagnostics.D == 0.0)
    assert res.report.prediction == COMPLETE and res.verdict == PASS


def test_two_particles_unadjudicated():
    raw = base(N=2, form="sl", tau=0.01)
    raw["adjudication"] = {"theorem": "thm31"}
    res = run(raw)
    assert res.report.prediction == NO_GUARANTEE
    assert res.verdict == UNADJUDICATED
    assert res.trajectory.n_steps == 100


def test_run_writes_outputs_deterministically(tmp_path):
    raw = base(kappa1=0.2, tau=0.05, omegas={"kind": "random", "seed": 2, "norm": 1.0})
    raw["adjudication"] = {"theorem": "thm41"}
    run(raw, tmp_path / "a")
    run(raw, tmp_path / "b")
    for name in ("trajectory.csv", "diagnostics.csv", "report.json", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["config"]["integrator"]["scheme"] == "rk4"
    assert report["theorem"]["theorem"] == "thm41"
    assert "verdict=" in (tmp_path / "a" / "report.txt").read_text()


def test_drift_error_flushes_partial_outputs(tmp_path):
    raw = base(kappa0=4.0, kappa1=1.0, tau=0.2)
    raw["history"]["spread"] = 2.0
    raw["history"]["seed"] = 2
    raw["integrator"] = {"h": 0.1, "t_end": 5.0, "norm_budget": 1e-12}
    with pytest.raises(DriftError):
        run(raw, tmp_path)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"] == ERROR
    assert (tmp_path / "trajectory.csv").exists() and (tmp_path / "diagnostics.csv").exists()


def test_check_without_integration():
    raw = base(N=5, form="sl", tau=0.05)
    raw["history"] = {"kind": "generator", "seed": 1, "spread": 0.12}
    reports = check(raw)
    assert [r.theorem for r in reports] == ["thm31", "thm32", "thm41", "thm42", "prop21", "prop22"]
    raw["adjudication"] = {"theorem": "thm31"}
    assert check(raw)[0].prediction == COMPLETE


def sweep_raw(**kw):
    raw = base(kappa1=0.3)
    raw["history"] = {"kind": "gram_defect", "seed": 5, "target": 0.1}
    raw["adjudication"] = {"theorem": "thm41"}
    return {"base": raw, "axes": {"tau": [0.02, 0.01]}, **kw}


def test_sweep_rows_and_readjudication(tmp_path):
    rows = sweep(sweep_raw(), tmp_path)
    assert [r["tau"] for r in rows] == [0.02, 0.01]
    assert [r["index"] for r in rows] == [0, 1]
    lines = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(lines) == 2
    assert readjudicate(tmp_path / "sweep.csv") == [r["verdict"] for r in rows]
    assert json.loads((tmp_path / "sweep.json").read_text())["axes"] == {"tau": [0.02, 0.01]}


def test_single_point_sweep_equals_run():
    raw = sweep_raw(axes={"tau": [0.01]})
    row = sweep(raw)[0]
    tree = json.loads(json.dumps(raw["base"]))
    tree["model"]["tau"] = 0.01
    res = run(tree)
    assert row["tail_sup_Lmax"] == res.summary["tail_sup_Lmax"]
    assert row["verdict"] == res.verdict and row["bound"] == res.report.bound


def test_sweep_product_and_zip_shapes():
    cfg = SweepConfig.from_dict(sweep_raw(axes={"tau": [0.01, 0.02], "kappa0": [1.0, 2.0, 3.0]}))
    assert len(cfg.points()) == 6
    cfg = SweepConfig.from_dict(sweep_raw(axes={"tau": [0.01, 0.02], "kappa0": [1.0, 2.0]}, mode="zip"))
    assert cfg.points() == [{"tau": 0.01, "kappa0": 1.0}, {"tau": 0.02, "kappa0": 2.0}]
    with pytest.raises(ConfigError):
        SweepConfig.from_dict(sweep_raw(axes={"tau": [0.01] * 5, "seed": list(range(300))}))
    with pytest.raises(ConfigError):
        SweepConfig.from_dict(sweep_raw(axes={"tau": [0.01], "kappa0": [1, 2]}, mode="zip"))


def test_sweep_isolates_failures(tmp_path):
    rows = sweep(sweep_raw(axes={"target": [0.1, 5.0, 0.2]}), tmp_path)
    assert [r["verdict"] for r in rows][1] == ERROR
    assert rows[1]["error"]
    assert rows[0]["verdict"] != ERROR and rows[2]["verdict"] != ERROR
    clean = sweep(sweep_raw(axes={"target": [0.1, 0.2]}))
    assert rows[0]["tail_sup_Lmax"] == clean[0]["tail_sup_Lmax"]
    assert rows[2]["tail_sup_Lmax"] == clean[1]["tail_sup_Lmax"]


def test_parallel_sweep_matches_serial(tmp_path):
    serial = sweep(sweep_raw(), tmp_path / "s")
    par = sweep(sweep_raw(), tmp_path / "p", parallel=2)
    assert serial == par
    assert (tmp_path / "s" / "sweep.csv").read_bytes() == (tmp_path / "p" / "sweep.csv").read_bytes()


def reduction_raw(**model):
    raw = base(kappa1=0.3, **model)
    raw["history"] = {"kind": "generator", "seed": 4, "spread": 1.0, "real": True}
    return raw


def test_compare_reduction_real_instance():
    raw = reduction_raw(N=6, d=3, omegas={"kind": "random", "seed": 1, "norm": 1.0, "real": True})
    out = compare_reduction(raw)
    assert out["complex_vs_ls"] <= 1e-10 and out["imag_residue"] <= 1e-10
    assert out["kuramoto"] is None and "kuramoto_skipped" in out
    assert out["verdict"] == PASS


def test_compare_reduction_preconditions():
    raw = reduction_raw()
    raw["history"]["real"] = False
    with pytest.raises(ConfigError):
        compare_reduction(raw)
    with pytest.raises(ConfigError):
        compare_reduction(reduction_raw(omegas={"kind": "random", "seed": 1}))


def test_compare_reduction_closed_form():
    raw = reduction_raw(N=2)
    raw["history"] = {"kind": "angles", "angles": [0.0, math.pi / 2]}
    raw["integrator"] = {"h": 1e-3, "t_end": 1.0}
    out = compare_reduction(raw)
    assert out["kuramoto"]["closed_form_phase"] == pytest.approx(2 * math.atan(math.exp(-1)), abs=1e-15)
    assert max(out["kuramoto"]["closed_form_error"].values()) <= 1e-6
    assert out["verdict"] == PASS


def test_compare_splitting_identity_flow():
    raw = base(N=4, kappa1=0.2)
    out = compare_splitting(raw)
    assert out["discrepancy"] <= 1e-12 and out["verdict"] == PASS


def test_compare_splitting_single_particle_closed_form():
    om = np.array([[0.5j, -1.0], [1.0, -0.3j]])
    raw = base(N=1, omegas={"kind": "common", "matrix": encode_complex(om)})
    raw["integrator"] = {"h": 1e-3, "t_end": 2.0}
    cfg = RunConfig.from_dict(raw)
    z0 = cfg.sphere_history().initial()[0]
    res = run(raw)
    assert np.abs(res.trajectory.states[-1, 0] - expm(2.0 * om) @ z0).max() <= 1e-8
    assert compare_splitting(raw)["discrepancy"] <= 1e-8


def test_compare_splitting_preconditions():
    with pytest.raises(ConfigError):
        compare_splitting(base(tau=0.1))
    with pytest.raises(ConfigError):
        compare_splitting(base(omegas={"kind": "rotation", "nu": [1.0, 2.0, 3.0]}))
    with pytest.raises(ConfigError):
        compare_splitting(base(adjacency={"kind": "ring_chords"}))
