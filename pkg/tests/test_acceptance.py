"""Exit criteria. Each test prints one PASS/FAIL line, also collected into the
terminal summary. Runtime limits are checked alongside the numbers."""

import json
import math
import time

import numpy as np
import pytest

from conftest import RESULTS
from fpiter import cli, golden
from fpiter.analysis import theoretical_ratio
from fpiter.catalog import get_map, get_problem
from fpiter.integral import IntegralProblem, NotAContractionError, bound_56, certify_contraction, solve
from fpiter.quadrature import QuadratureGrid, quadrature
from fpiter.schemes import ParamSchedule, SchemeId, iterate, step_classical

pytestmark = pytest.mark.acceptance

SQ = get_map("sqrt-quadratic")


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, detail


def sq(c):
    return math.sqrt(c * c - 6 * c + 30)


def test_table1_reproduction():
    t0 = time.perf_counter()
    cols = cli.table1_columns(golden.START, ParamSchedule(golden.DELTA, golden.ZETA, golden.GAMMA), 30)
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for step, *cells in golden.TABLE1:
        for name, cell in zip(golden.COLUMNS, cells):
            worst = max(worst, abs(cols[name][step - 1] - float(cell)))
    # the first New column entries against a plain scalar recursion
    c, ref = 40.0, [40.0]
    for _ in range(29):
        a = sq(c)
        c = sq(0.05 * a + 0.95 * sq(a))
        ref.append(c)
    scalar_gap = max(abs(x - y) for x, y in zip(ref, cols["new"]))
    ok = worst <= 5e-10 and scalar_gap <= 1e-12 and elapsed < 1.0 and cli.verify_table1(cols) is None
    record("table1", ok, f"150 cells, max |diff| = {worst:.2e} (tol 5e-10), scalar New gap {scalar_gap:.1e}, {elapsed:.3f}s")


def _compare_steps(capsys, a, b):
    code = cli.main(["compare", "--scheme", a, "--scheme", b, "--format", "json"])
    out, _ = capsys.readouterr()
    assert code == 0
    return json.loads(out)["diagnostics"]["steps_to_tolerance"]


@pytest.fixture
def steps(capsys):
    found = {}
    found.update(_compare_steps(capsys, "new", "thakur"))
    found.update(_compare_steps(capsys, "abbas_nazir", "agarwal"))
    found.update(_compare_steps(capsys, "noor", "new"))
    return found


def test_speed_ordering_new_thakur_abbas(steps):
    ok = (
        steps["new"] == 17
        and steps["thakur"] == 21
        and abs(steps["abbas_nazir"] - 24) <= 1
        and steps["new"] < steps["thakur"] < steps["abbas_nazir"] < min(steps["noor"], steps["agarwal"])
    )
    record("speed ordering (New 17, Thakur 21, Abbas 24 +-1, ordering)", ok, f"steps {steps}")


def test_speed_ordering_noor_agarwal_limits(steps):
    # +-1 step allowance on the stated limits
    ok = steps["noor"] <= 27 and steps["agarwal"] <= 31
    record("speed ordering (Noor <= 26, Agarwal <= 30, +-1)", ok,
           f"Noor {steps['noor']}, Agarwal {steps['agarwal']}")


def _ratio_draws():
    rng = np.random.default_rng(20240531)
    return rng.uniform(0.05, 0.95, size=(200, 3))


def test_rate_ratio_positive_and_decreasing():
    t0 = time.perf_counter()
    bad = 0
    for xi, d, z in _ratio_draws():
        r = np.array([theoretical_ratio(xi, d, z, 1.0, 1.0, n) for n in range(1, 51)])
        if not (np.all(r > 0) and np.all(np.diff(r) < 0)):
            bad += 1
    elapsed = time.perf_counter() - t0
    record("rate ratio positive, strictly decreasing n=1..50", bad == 0 and elapsed < 1.0,
           f"{bad}/200 draws violate, {elapsed:.3f}s")


def test_rate_ratio_small_by_200():
    r200 = np.array([theoretical_ratio(xi, d, z, 1.0, 1.0, 200) for xi, d, z in _ratio_draws()])
    bad = int(np.sum(~(r200 < 1e-3)))
    record("rate ratio < 1e-3 at n=200", bad == 0, f"{bad}/200 draws at or above 1e-3, worst {r200.max():.3g}")


def test_fejer_and_residual_on_benchmark_map():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    bad = []
    for c1, d in zip(rng.uniform(1, 50, 50), rng.uniform(0.05, 0.95, 50)):
        it = iterate(SchemeId.NEW, SQ, SQ.space.point(c1), ParamSchedule(delta=d), 30)
        err = np.array([abs(p.scalar - 5.0) for p in it])
        res = np.array([abs(sq(p.scalar) - p.scalar) for p in it])
        if np.any(np.diff(err) > 1e-12) or not np.any(res < 1e-8):
            bad.append((c1, d))
    elapsed = time.perf_counter() - t0
    record("error non-increasing, residual < 1e-8 within 30 steps", not bad and elapsed < 1.0,
           f"{len(bad)}/50 draws violate, {elapsed:.3f}s")


def test_fixed_point_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0
    for d, z, g in rng.uniform(1e-3, 1 - 1e-3, size=(20, 3)):
        for scheme in SchemeId:
            out = step_classical(scheme, SQ, SQ.fixed_point, d, z, g).scalar
            worst = max(worst, abs(out - 5.0) / np.spacing(5.0))
    elapsed = time.perf_counter() - t0
    record("fixed-point invariance", worst <= 4 and elapsed < 1.0,
           f"20 draws x {len(SchemeId)} schemes, worst {worst:.0f} ulp, {elapsed:.3f}s")


def test_integral_equation_convergence():
    t0 = time.perf_counter()
    P = get_problem("mvf-linear-1d")
    g = QuadratureGrid(((0.0, 1.0),), (65,), "simpson")
    res = solve(P, g, ParamSchedule(delta=0.95), c0=np.zeros(65), tol=1e-8, max_iters=60)
    elapsed = time.perf_counter() - t0
    p = g.nodes[:, 0]
    final = float(np.max(np.abs(res.solution.value - p)))
    e = res.errors
    prod, _ = bound_56(e[0], 0.75, [0.95] * len(e))
    dominated = all(e[n + 1] <= prod[n] + res.quadrature_slack for n in range(len(e) - 1))
    ok = res.converged and len(e) <= 60 and final < 1e-8 and dominated and elapsed < 5.0
    record("integral equation convergence", ok,
           f"{len(e)} iterates, final error {final:.2e}, bound dominated: {dominated}, "
           f"slack {res.quadrature_slack:.1e}, {elapsed:.3f}s")


def test_product_vs_exponential_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(1000):
        theta = rng.uniform(0, 1)
        deltas = rng.uniform(0, 1, 100)
        prod, expo = bound_56(rng.uniform(0, 10), theta, deltas)
        bad += int(np.sum(prod > expo))
    elapsed = time.perf_counter() - t0
    record("product bound <= exponential bound", bad == 0 and elapsed < 1.0,
           f"1000 draws x 100 steps, {bad} violations, {elapsed:.3f}s")


def test_quadrature_orders():
    t0 = time.perf_counter()
    exact = math.e - 1
    ratios = {}
    for rule in ("trapezoid", "simpson"):
        errs = []
        for n in (5, 9, 17, 33, 65):
            g = QuadratureGrid(((0.0, 1.0),), (n,), rule)
            errs.append(abs(quadrature(g, np.exp(g.nodes[:, 0])) - exact))
        ratios[rule] = [errs[i] / errs[i + 1] for i in range(4)]
    elapsed = time.perf_counter() - t0
    ok = (
        all(abs(r - 16) <= 0.2 * 16 for r in ratios["simpson"])
        and all(abs(r - 4) <= 0.1 * 4 for r in ratios["trapezoid"])
        and elapsed < 1.0
    )
    fmt = lambda rs: ", ".join(f"{r:.3f}" for r in rs)
    record("quadrature orders", ok, f"Simpson [{fmt(ratios['simpson'])}], trapezoid [{fmt(ratios['trapezoid'])}]")


def test_contraction_certificate():
    t0 = time.perf_counter()
    P = get_problem("mvf-linear-1d")
    theta = certify_contraction(P, QuadratureGrid(P.box, (65,), "simpson"))
    rejected = []
    for consts in [(0.5, 0.25, 0.25, 1, 1), (0.9, 0.1, 0.1, 1, 1), (0.0, 1.0, 1.0, 2, 2)]:
        try:
            certify_contraction(IntegralProblem(((0.0, 1.0),), None, None, None, *consts))
            rejected.append(False)
        except NotAContractionError:
            rejected.append(True)
    elapsed = time.perf_counter() - t0
    ok = theta == 0.75 and all(rejected) and elapsed < 1.0
    record("contraction certificate", ok, f"theta = {theta}, rejected {sum(rejected)}/3 with theta >= 1, {elapsed:.3f}s")
