import json

import numpy as np
import pytest

from qratio.experiments import EXPERIMENTS, ExperimentConfig, child_seed, run_experiment


def test_child_seed_stable():
    assert child_seed(3, 1, 4) == child_seed(3, 1, 4)
    assert child_seed(3, 1, 4) != child_seed(3, 4, 1)


def test_unknown_experiment():
    with pytest.raises(ValueError):
        ExperimentConfig(name="fig9")


def test_fig1_small(tmp_path):
    cfg = ExperimentConfig(
        name="fig1_hist",
        seed=1,
        out_dir=str(tmp_path),
        params={"n_matrices": 3, "restarts": 5, "m": 10, "N": 15, "qs": (2.0,)},
    )
    manifest = run_experiment(cfg)
    data = (tmp_path / "fig1_hist_data.csv").read_text().strip().splitlines()
    assert data[0] == "q,matrix_index,cmsv"
    assert len(data) == 1 + 3  # one row per (matrix, q)
    assert manifest["config"]["seed"] == 1
    assert manifest["caveats"]
    assert (tmp_path / "fig1_hist_manifest.json").exists()
    assert (tmp_path / "fig1_hist_timing.txt").exists()


def test_table1_small(tmp_path):
    cfg = ExperimentConfig(
        name="table1",
        seed=2,
        out_dir=str(tmp_path),
        params={"draws": 2, "m_list": (12,), "N": 16, "ccp_qs": (2.0,)},
    )
    manifest = run_experiment(cfg)
    rows = (tmp_path / "table1_data.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 2 * 2  # (linf + ccp_2) x draws
    meds = {r["method"]: r["median_k_max"] for r in manifest["results"]}
    assert set(meds) == {"linf", "ccp_2"}


def test_fig5_small(tmp_path):
    cfg = ExperimentConfig(
        name="fig5_bounds",
        seed=3,
        out_dir=str(tmp_path),
        params={"k_list": (1,), "N": 16, "m_step": 16, "ric_samples": 30, "restarts": 5},
    )
    manifest = run_experiment(cfg)
    rows = (tmp_path / "fig5_bounds_data.csv").read_text().strip().splitlines()
    assert rows[0] == "k,m,s,rho,cmsv_bound,delta,ric_bound"
    assert len(manifest["caveats"]) == 2


def test_manifest_schema_and_reproducibility(tmp_path):
    params = {"m_list": (8,), "N": 12, "qs": (2.0,), "s_list": (2.0,), "restarts": 4}
    outs = []
    for run in (1, 2):
        d = tmp_path / f"r{run}"
        run_experiment(
            ExperimentConfig(name="fig2_cmsv_vs_s", seed=9, out_dir=str(d), params=params)
        )
        outs.append(
            (
                (d / "fig2_cmsv_vs_s_data.csv").read_bytes(),
                (d / "fig2_cmsv_vs_s_manifest.json").read_bytes(),
            )
        )
    assert outs[0] == outs[1]
    manifest = json.loads(outs[0][1])
    assert set(manifest) >= {"config", "results", "caveats"}
    assert "fig2_cmsv_vs_s_data.csv" in manifest["outputs"]


def test_all_experiments_registered():
    assert set(EXPERIMENTS) == {
        "fig1_hist",
        "table1",
        "table2",
        "fig2_cmsv_vs_s",
        "fig3_cmsv_vs_m",
        "fig4_cmsv_vs_q",
        "fig5_bounds",
    }
