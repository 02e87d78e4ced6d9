import json

import numpy as np
import pytest

from greedypursuit import atoms as A
from greedypursuit import geometry, harness
from greedypursuit.errors import DomainError
from greedypursuit.objectives import LeastSquares, QuadraticObjective
from greedypursuit.solvers import ActiveSet, SolverSpec, gmp_step, run


def test_check_envelope_flags_doctored_trace():
    S = A.l1_vertices(5)
    obj = LeastSquares(np.arange(5.0))
    tr = run(SolverSpec("fw", 0, T=30), obj, S)
    b = geometry.rate_bound("thm1", L=1, diam=S.diameter, eps0=tr.subopt[0])
    assert harness.check_envelope(tr, b).passed
    tr.records[10].subopt = b.value(10) * 1.01
    rep = harness.check_envelope(tr, b)
    assert not rep.passed and rep.aggregates["first_violations"][0]["t"] == 10


def test_check_envelope_linear_and_lower_kinds():
    tr = harness.run_corollary2(6).traces["mp"]
    assert harness.check_envelope(tr, geometry.rate_bound("cor2", d=6), eps_floor=1e-14).passed
    assert harness.check_envelope(tr, geometry.rate_bound("thm4", L=1, mu=1), eps_floor=1e-14).passed
    # cross polytope width is 1/sqrt(d), a linear factor that must hold as an upper bound too
    b = geometry.rate_bound("thm3", L=1, mu=1, mdw=1 / np.sqrt(6), radius=1)
    assert harness.check_envelope(tr, b, eps_floor=1e-14).passed
    too_fast = geometry.rate_bound("thm3", L=1, mu=1, mdw=0.99, radius=1)
    assert not harness.check_envelope(tr, too_fast, eps_floor=1e-14).passed


def test_l1_vertex_decay_report():
    rep = harness.run_corollary2(10)
    assert rep.passed
    eps = rep.aggregates["eps"]
    assert eps[0] == 5.0 and eps[-1] <= 1e-12
    for t in range(9):
        assert eps[t + 1] / eps[t] == pytest.approx(1 - 1 / (10 - t), abs=1e-12)
    with pytest.raises(DomainError):
        harness.run_corollary2(1)


def tightness_reference(theta, seed_seq, n_inits, T, tiny=1e-14):
    """Per-start replay of the tightness study with the library's step function."""
    S = A.theta_pair(theta)
    x_star = np.array([-1.0, 1.0])
    obj = QuadraticObjective(2 * np.eye(2), 2 * x_star, 2.0)
    fac = geometry.rate_bound("thm3", L=2, mu=2, mdw=geometry.mdw(S).value, radius=S.radius).factor()
    rng = np.random.default_rng(seed_seq)
    X = rng.dirichlet(np.ones(S.n), size=n_inits) @ S.vectors
    mins, means = [], []
    for x in X:
        ratios = []
        eps = float((x - x_star) @ (x - x_star))
        act = ActiveSet.start(x)
        for t in range(T):
            if eps < tiny:
                break
            x, act, _ = gmp_step(obj, x, act, S, 0, t=t)
            new = float((x - x_star) @ (x - x_star))
            ratios.append((eps - new) / (eps * (1 - fac)))
            eps = new
        mins.append(min(ratios))
        means.append(np.mean(ratios))
    return mins, means


def test_batched_tightness_loop_matches_step_function():
    seq = np.random.SeedSequence(5)
    row = harness._appendix_a_theta((0.7, 6, seq, 400, 1e-14))
    mins, means = tightness_reference(0.7, np.random.SeedSequence(5), 6, 400)
    np.testing.assert_allclose(row["min_ratio"], mins, rtol=1e-9)
    np.testing.assert_allclose(row["mean_ratio"], means, rtol=1e-9)


def test_appendix_a_small_grid_and_jobs():
    grid = [0.3, 1.0, np.pi / 2]
    one = harness.run_appendix_a(grid, n_inits=4, seed=1)
    two = harness.run_appendix_a(grid, n_inits=4, seed=1, jobs=2)
    assert one.aggregates == two.aggregates
    assert one.verdicts["ratios_at_least_one"]
    with pytest.raises(DomainError):
        harness.run_appendix_a([2.0])
    assert len(harness.appendix_a_grid()) == 16


def test_tightness_ratios_on_square_closed_form():
    # on {±e1, ±e2} MP clears the larger coordinate error, then the other one
    seq = np.random.SeedSequence(0)
    row = harness._appendix_a_theta((np.pi / 2, 8, seq, 100, 1e-14))
    X = np.random.default_rng(np.random.SeedSequence(0)).dirichlet(np.ones(4), size=8) @ A.theta_pair(np.pi / 2).vectors
    err = (X - np.array([-1.0, 1.0])) ** 2
    first = 2 * err.max(axis=1) / err.sum(axis=1)
    assert row["steps"] == [2] * 8
    np.testing.assert_allclose(row["mean_ratio"], (first + 2) / 2, rtol=1e-12)
    np.testing.assert_allclose(row["min_ratio"], first, rtol=1e-12)


def test_fw_to_mp():
    rep = harness.run_fw_to_mp()
    assert rep.passed
    assert -1.2 <= rep.aggregates["slope"] <= -0.8
    assert rep.aggregates["inadmissible"] >= 2
    with pytest.raises(DomainError):
        harness.run_fw_to_mp([2.0])


def test_envelope_small():
    rep = harness.run_envelope(d_fw=8, T_fw=40, d=6, n=12, T_mp=40)
    assert rep.passed and rep.aggregates["runs"] == 17


def test_linear_rate_small():
    rep = harness.run_linear_rate(d=6, n=12, T=60)
    assert rep.passed and rep.aggregates["runs"] == 8


def test_coherence_mdw_small():
    rep = harness.run_coherence_mdw(6, seed=3, restarts=50)
    assert rep.passed and len(rep.runs) == 6


def test_mp_instances_shape():
    S, objs = harness.mp_instances(20, 40, seed=0)
    assert S.n == 40 and S.symmetric
    assert set(objs) == {"least-squares", "quadratic"}
    q = harness.random_quadratic(5, 0, cond=10)
    assert q.L / q.mu == pytest.approx(10)


def test_run_experiment_dispatch_and_report_json():
    rep = harness.run_experiment("corollary2", {"d": 4})
    doc = json.loads(rep.to_json())
    assert doc["name"] == "corollary2" and doc["verdicts"]["factor_exact"]
    with pytest.raises(DomainError):
        harness.run_experiment("nope")
