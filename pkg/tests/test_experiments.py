import dataclasses
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from pocs.bpdn import SolverConfig
from pocs.experiments import (
    CS,
    CSV_COLUMNS,
    PO_CS,
    EpsilonPolicy,
    ExperimentConfig,
    emit_results,
    read_csv,
    run_noise_sweep,
    run_phase_transition,
    snr_db,
    snr_slope,
    transition_point,
    write_csv,
    write_svg,
)

SMALL = ExperimentConfig(n=20, s=2, m_grid=(6, 12), trials=4, master_seed=3)


@pytest.fixture(scope="module")
def small_result():
    return run_phase_transition(SMALL)


def test_rows_cover_grid_and_rates_are_multiples(small_result):
    assert {(r.m, r.arm) for r in small_result.rows} == {(m, a) for m in (6, 12) for a in (PO_CS, CS)}
    for r in small_result.rows:
        assert 0 <= r.success_rate <= 1
        assert abs(r.success_rate * r.trials - round(r.success_rate * r.trials)) < 1e-12
        assert r.m_over_s == r.m / 2


def test_single_nonzero_is_easy():
    res = run_phase_transition(ExperimentConfig(n=30, s=1, m_grid=(30,), trials=20, master_seed=1))
    assert all(r.success_rate >= 0.99 for r in res.rows)


def test_trial_seeds_are_isolated():
    a = run_phase_transition(dataclasses.replace(SMALL, trials=2))
    b = run_phase_transition(dataclasses.replace(SMALL, trials=4))
    first = [o for o in b.outcomes if o.trial < 2]
    assert [(o.m, o.arm, o.trial, o.rel_error) for o in a.outcomes] == [
        (o.m, o.arm, o.trial, o.rel_error) for o in first
    ]


def test_arms_are_independent(small_result):
    other = run_phase_transition(dataclasses.replace(SMALL, po_solver=SolverConfig(opt_tol=1e-4)))
    cs_a = [o.rel_error for o in small_result.outcomes if o.arm == CS]
    cs_b = [o.rel_error for o in other.outcomes if o.arm == CS]
    assert cs_a == cs_b


def test_csv_is_deterministic_across_jobs(tmp_path, small_result):
    p1 = write_csv(small_result, tmp_path / "a.csv")
    p2 = write_csv(run_phase_transition(SMALL, jobs=2), tmp_path / "b.csv")
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_round_trip(tmp_path, small_result):
    path = write_csv(small_result, tmp_path / "pt.csv")
    text = path.read_text()
    assert text.startswith("#")
    assert ",".join(CSV_COLUMNS) in text
    config, rows = read_csv(path)
    assert config["master_seed"] == 3
    assert [(r.m, r.arm, r.success_rate, r.mean_snr_db) for r in rows] == [
        (r.m, r.arm, r.success_rate, r.mean_snr_db) for r in small_result.rows
    ]


def test_single_row_table(tmp_path):
    res = run_phase_transition(dataclasses.replace(SMALL, m_grid=(8,), trials=1))
    res.rows = res.rows[:1]
    data = [l for l in write_csv(res, tmp_path / "one.csv").read_text().splitlines() if not l.startswith("#")]
    assert len(data) == 2


def test_svg_is_standalone_with_both_curves(tmp_path, small_result):
    path = write_svg(small_result, tmp_path / "pt.svg")
    text = path.read_text()
    root = ET.fromstring(text)
    ids = {el.get("id") for el in root.iter()}
    assert {"curve-po-cs", "curve-cs"} <= ids
    assert "href=\"http" not in text and "<image" not in text
    assert "<dc:date>" not in text
    again = write_svg(small_result, tmp_path / "again.svg").read_bytes()
    assert again == path.read_bytes()


def test_emit_results_reports_bad_directory(tmp_path, small_result):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_results(small_result, blocker / "sub")
    paths = emit_results(small_result, tmp_path / "out")
    assert sorted(p.suffix for p in paths) == [".csv", ".svg"]


def test_transition_point_interpolates():
    res = run_phase_transition(dataclasses.replace(SMALL, m_grid=(4, 30), trials=4))
    m50 = transition_point(res, CS)
    assert 4 <= m50 <= 30


def test_epsilon_policy_parsing():
    assert EpsilonPolicy.parse("theoretical") == EpsilonPolicy("theoretical", 0.2)
    assert EpsilonPolicy.parse("theoretical:0.5").value == 0.5
    assert EpsilonPolicy.parse("fixed:0.01").radius(1.0) == 0.01
    assert EpsilonPolicy.parse("oracle").radius(0.1, defect=0.03) == 0.03
    for bad in ("fixed", "oracle:1", "theoretical:1.5", "magic"):
        with pytest.raises(ValueError):
            EpsilonPolicy.parse(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(n=5, s=6)
    with pytest.raises(ValueError):
        run_phase_transition(dataclasses.replace(SMALL, tau_grid=(0.1,)))
    with pytest.raises(ValueError):
        run_noise_sweep(dataclasses.replace(SMALL, tau_grid=(math.pi,)))


def test_snr_floor():
    x = np.ones(3)
    assert np.isfinite(snr_db(x, x))
    assert abs(snr_db(x, 0.9 * x) - 20) < 1e-12


def test_noise_sweep_behaviour(tmp_path):
    cfg = ExperimentConfig(n=40, s=4, m_grid=(12, 24), tau_grid=(1e-6 * math.pi, 1e-2 * math.pi, 1e-1 * math.pi),
                           trials=6, master_seed=2)
    res = run_noise_sweep(cfg)
    tiny = {r.m: r for r in res.rows_for(tau=1e-6 * math.pi)}
    assert tiny[24].success_rate == 1.0
    for tau in cfg.tau_grid:
        rows = {r.m: r.mean_snr_db for r in res.rows_for(tau=tau)}
        assert rows[24] >= rows[12]
    assert snr_slope(res, 24) > 10
    svg = write_svg(res, tmp_path / "ns.svg").read_text()
    assert svg.count('id="curve-tau-') == 3
