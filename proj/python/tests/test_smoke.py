import math
from pathlib import Path

import pytest

import pfsq

MODELS = Path(__file__).resolve().parents[2] / "models"


def test_parallel_and_tandem_agree():
    para = pfsq.parallel_array_residence(2.0, 0.25, 4)
    serial = pfsq.tandem_residence(2.0, 0.25, 4)
    assert para == pytest.approx(2.0 / 7.0, rel=1e-12)
    assert serial == pytest.approx(para, rel=1e-12)
    assert pfsq.feedback_residence(2.0, 0.0625, 4) > serial


def test_solve_method_b():
    report = pfsq.solve(pfsq.build_parallel_method_b(2.0, 0.25, 4))
    assert [n.name for n in report.nodes] == ["ParaQ1", "ParaQ2", "ParaQ3", "ParaQ4"]
    assert report.nodes[0].throughput == pytest.approx(0.5)
    assert report.nodes[0].utilization == pytest.approx(0.125)
    assert report.system_residence == pytest.approx(2.0 / 7.0)


def test_transforms_round_trip():
    parallel = pfsq.build_parallel_method_b(2.0, 0.25, 4)
    serial = pfsq.serialize_transform(parallel)
    assert pfsq.solve(serial).system_residence == pytest.approx(2.0 / 7.0, rel=1e-12)
    back = pfsq.parallel_equivalent_transform(serial)
    assert pfsq.solve(back).system_residence == pytest.approx(2.0 / 7.0, rel=1e-12)
    faster = pfsq.parallelize_transform(serial, keep_stage_load=True)
    assert pfsq.solve(faster).system_residence == pytest.approx(2.0 / 7.0 / 4, rel=1e-12)


def test_model_file_and_report():
    network = pfsq.load_network(MODELS / "four_parallel.model")
    assert network.arrival_rate == 2.0
    text = pfsq.render_report(network)
    assert "Utilization     ParaQ1       Requests        12.5000   Percent" in text


def test_optimizers():
    dual = pfsq.optimize_dual(166.67, 0.005, 0.015)
    assert dual.routing[0] == pytest.approx(0.819612, abs=1e-4)
    assert dual.response_time == pytest.approx(0.017857, abs=1e-5)

    times = [0.005, 0.015, 0.020, 0.020]
    quad = pfsq.optimize(166.67, times)
    assert quad.converged
    assert sum(quad.routing) == pytest.approx(1.0, abs=1e-12)
    assert quad.routing[2] == quad.routing[3]
    assert quad.response_time == pytest.approx(pfsq.objective(166.67, times, quad.routing))
    g = pfsq.gradient(166.67, times, quad.routing)
    assert max(g) - min(g) < 1e-6
    assert "R*_4" in pfsq.render_optimum(166.67, times, quad)


def test_errors_map_to_python(tmp_path):
    with pytest.raises(pfsq.SaturationError):
        pfsq.mm1_residence(5.0, 0.25)
    with pytest.raises(ValueError):
        pfsq.parallel_array_residence(1.0, -0.25, 4)
    feasible, capacity = pfsq.feasibility(300.0, [0.005, 0.015])
    assert not feasible and capacity == pytest.approx(800.0 / 3.0)
    with pytest.raises(pfsq.InfeasibleError):
        pfsq.optimize(300.0, [0.005, 0.015])
    with pytest.raises(pfsq.ValidationError):
        pfsq.load_network(MODELS / "does-not-exist.model")
    bad = tmp_path / "bad.model"
    bad.write_text("[network]\narrival_rate = 1\n[parallel]\ncount = 2\nspeed = 3\n")
    with pytest.raises(pfsq.ParseError, match="line 5"):
        pfsq.load_network(bad)


def test_simulation_brackets_analytic():
    result = pfsq.compare_analytic(2.0, pfsq.ParallelRoute([0.25] * 4), seed=7, completions=50_000)
    assert result.passed
    stats = result.stats
    assert stats.completions == 50_000
    assert stats.fifo_violations == 0
    assert abs(stats.mean_residence - result.analytic) <= stats.half_width_95
    again = pfsq.simulate(2.0, pfsq.ParallelRoute([0.25] * 4), seed=7, completions=50_000)
    assert again.batch_means == stats.batch_means
    tandem = pfsq.simulate(2.0, pfsq.TandemRoute([0.0625] * 4), completions=20_000)
    assert math.isfinite(tandem.mean_residence)
    assert len(pfsq.simulate(1.0, pfsq.FeedbackRoute(0.1, 3), completions=5_000).per_node_utilization) == 1
