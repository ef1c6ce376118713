"""Acceptance criteria, one test each; the terminal summary prints PASS/FAIL per criterion."""

import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from radial_euler import cli
from radial_euler.affine import (AffineMotion, AffineSolution, boundary_conclusions,
                                 check_admissibility, integrate_motion)
from radial_euler.characters import characters_from_gradients, riccati_coeffs
from radial_euler.gas import FlowField, GasParams, sound_speed, uniform_grid
from radial_euler.profiles import SteadyFlow
from radial_euler.solver import Boundary, SolverConfig, evolve
from radial_euler.verify import (blowup_time_bound, compute_ledger, eps_grid, ledger_t_star,
                                 verify_run)

from conftest import RAREFACTION_MATRIX

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _affine_errors(m, sizes):
    p = GasParams(2.0, 1.0, m)
    sol = AffineSolution.build(AffineMotion(1.0, 3.0, 1.0, p), 0.5, limit=1.99)
    bc = Boundary("prescribed", "prescribed", left_state=sol.state, right_state=sol.state)
    errs = []
    for n in sizes:
        r = uniform_grid(0.6, 1.6, n)
        f = evolve(FlowField(0.0, r, *sol.state(r, 0.0), p), SolverConfig(), 0.5, bc)
        rho, u = sol.state(r, 0.5)
        errs.append(max(np.max(np.abs(f.rho - rho)), np.max(np.abs(f.u - u))))
    return np.array(errs)


@pytest.mark.slow
@pytest.mark.criterion(1, "affine exactness: L-inf order >= 1.8 over three refinements")
def test_affine_convergence(record_property):
    start = time.perf_counter()
    sizes = (256, 512, 1024, 2048)
    details = []
    for m in (1, 2):
        errs = _affine_errors(m, sizes)
        orders = np.log2(errs[:-1] / errs[1:])
        details.append(f"m={m} orders " + " ".join(f"{o:.3f}" for o in orders))
        assert np.all(orders >= 1.8), details[-1]
    elapsed = time.perf_counter() - start
    record_property("detail", "; ".join(details) + f"; {elapsed:.0f}s")
    assert max(sizes) <= 4096
    assert elapsed < 120.0


@pytest.mark.criterion(2, "affine first integral drift <= 1e-10 on [0, 50], 24 cases, < 5 s")
def test_affine_first_integral(record_property):
    start = time.perf_counter()
    worst = 0.0
    for v_a in (0.5, 1.0, 3.0):
        for g in (1.2, 1.4, 2.0, 2.5):
            for m in (1, 2):
                tr = integrate_motion(AffineMotion(1.0, v_a, 1.0, GasParams(g, 1.0, m)), 50.0)
                assert tr.t[-1] == 50.0
                worst = max(worst, float(np.max(np.abs(tr.residual))))
    elapsed = time.perf_counter() - start
    record_property("detail", f"max drift {worst:.2e}; {elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed < 5.0


def _random_states(rng, n):
    gamma = rng.uniform(1.01, 2.99, n)
    m = rng.integers(1, 3, n)
    r = rng.uniform(0.05, 20.0, n)
    u = rng.uniform(0.01, 10.0, n)
    h = rng.uniform(0.0, 1.0, n) * 0.5 * (gamma - 1.0) * u
    return gamma, m, r, h, u


@pytest.mark.criterion(3, "coefficient identities on 1e4 random admissible states")
def test_coefficient_identities(rng, record_property):
    gamma, m, r, h, u = _random_states(rng, 10_000)
    assert np.all(h > 0.0)
    worst_exact = Fraction(0)
    worst_operand = worst_float = 0.0
    for i in range(gamma.size):
        p = GasParams(gamma[i], 1.0, int(m[i]))
        # exact rational evaluation of the implemented formulas
        ex = riccati_coeffs(*(np.array([Fraction(float(x))], dtype=object) for x in (r[i], h[i], u[i])), p)
        for B, A, d in ((ex.B1, ex.A1, ex.d1), (ex.B2, ex.A2, ex.d2)):
            worst_exact = max(worst_exact, abs((B[0] - A[0] - d[0]) / d[0]))
        co = riccati_coeffs(r[i], h[i], u[i], p)
        assert min(co.A1, co.A2, co.d1, co.d2) >= 0.0
        for B, A, d in ((co.B1, co.A1, co.d1), (co.B2, co.A2, co.d2)):
            worst_operand = max(worst_operand, abs(B - A - d) / max(abs(A), abs(B)))
            worst_float = max(worst_float, abs(B - A - d) / d)
    record_property("detail", f"exact relative residual {float(worst_exact):.1e}; float64 "
                    f"operand-scale {worst_operand:.1e}, d-relative {worst_float:.1e}")
    assert worst_exact <= Fraction(1, 10**10)
    assert worst_operand <= 1e-10


@pytest.mark.slow
@pytest.mark.criterion(4, "Riccati cross-validation within 5% on 10 traces, improving")
def test_riccati_cross_validation(runs, record_property):
    opts = cli.VerifyOptions(traces=10)
    worst = []
    for n in (1000, 2000):
        rec = runs.rarefaction(2.0, 1, n)
        check, rows = cli.riccati_checks(rec, opts)
        assert len({row[0] for row in rows}) == 10
        worst.append(opts.riccati_tolerance - check.worst_margin)
    record_property("detail", f"max deviation {worst[0]:.4f} at 1000 cells, {worst[1]:.4f} at 2000")
    assert worst[0] <= 0.05
    assert worst[1] < worst[0]


@pytest.mark.slow
@pytest.mark.criterion(5, "invariant domain on the rarefaction matrix, eps_grid halves")
def test_invariant_domain(runs, record_property):
    notes = []
    for g, m in RAREFACTION_MATRIX:
        under, eps = [], []
        for n in (1000, 2000):
            rec = runs.rarefaction(g, m, n)
            assert rec.cause == "horizon reached"
            assert rec.final.t == pytest.approx(rec.scenario.T)
            ledger = compute_ledger(rec)
            assert ledger.M == pytest.approx(ledger.M0 + 1e-6)
            rep = verify_run(rec, ledger)
            assert rep.get("character_lower_bound").passed, (g, m, n)
            assert rep.get("character_upper_bound").passed, (g, m, n)
            assert max(rep.series["max_character"]) < ledger.M0 + 1e-6
            e = eps_grid(rec.snapshots[0].r)
            assert min(rep.series["min_character"]) >= -e
            under.append(max(0.0, -min(rep.series["min_character"])))
            eps.append(e)
        assert eps[1] / eps[0] == pytest.approx(0.5, rel=0.2)
        notes.append(f"{g:g}/{m}: {under[0]:.1e}->{under[1]:.1e}")
    record_property("detail", "undershoot " + ", ".join(notes))


@pytest.mark.slow
@pytest.mark.criterion(6, "supersonic region: zero violations on all rarefaction runs")
def test_supersonic_region(runs, record_property):
    worst = np.inf
    for g, m in RAREFACTION_MATRIX:
        rec = runs.rarefaction(g, m)
        check = verify_run(rec).get("supersonic_region")
        assert check.passed, (g, m, check.line())
        worst = min(worst, check.worst_margin)
    record_property("detail", f"smallest margin {worst:.3g}")


@pytest.mark.slow
@pytest.mark.criterion(7, "density floors: rarefaction and pre-blowup compressive")
def test_density_floors(runs, record_property):
    for g, m in RAREFACTION_MATRIX:
        rep = verify_run(runs.rarefaction(g, m))
        assert rep.get("density_floor_rarefaction").passed, (g, m)
        assert rep.get("density_floor_general").passed, (g, m)
    margins = []
    for k in (1, 2, 4):
        rec = runs.compressive(k)
        rep = verify_run(rec)
        check = rep.get("density_floor_general")
        assert check.passed, (k, check.line())
        assert all(t < rec.blowup_time for t in rep.series["t"])
        margins.append(check.worst_margin)
    record_property("detail", "compressive floor margins " + ", ".join(f"{x:.3g}" for x in margins))


@pytest.mark.slow
@pytest.mark.criterion(8, "blowup before t* for seeds -N, -2N, -4N; t* -> 0")
def test_blowup_bound(runs, record_property):
    N = runs.compressive_threshold()
    times, bounds = [], []
    for k in (1, 2, 4):
        rec = runs.compressive(k)
        assert rec.cause == "blowup detected", rec.cause
        times.append(rec.blowup_time)
        bounds.append(ledger_t_star(-k * N, compute_ledger(rec)))
    record_property("detail", f"N={N:.4g}; blowup " + ", ".join(f"{t:.4g}" for t in times)
                    + "; t* " + ", ".join(f"{t:.4g}" for t in bounds))
    assert all(t > 0.0 for t in times)
    assert times[0] > times[1] > times[2]
    assert all(t <= ts for t, ts in zip(times, bounds))
    ts = [blowup_time_bound(-(10.0**k), 1.0, 1.0, 1.0, 1, 2.0) for k in range(1, 9)]
    assert all(a > b for a, b in zip(ts, ts[1:]))
    assert ts[-1] < 1e-3


@pytest.mark.criterion(9, "steady Bernoulli oracle: |alpha|, |beta| <= 1e-8")
def test_steady_oracle(record_property):
    worst = 0.0
    for g, m in RAREFACTION_MATRIX:
        p = GasParams(g, 1.0, m)
        flow = SteadyFlow.through(p, 1.0, 0.2, 3.0)
        r = np.linspace(1.0, 4.0, 31)
        d = 1e-6 * r
        rho, u = flow(r)
        (rp, up), (rm, um) = flow(r + d), flow(r - d)
        h_r = (sound_speed(rp, p) - sound_speed(rm, p)) / (2 * d)
        u_r = (up - um) / (2 * d)
        a, b = characters_from_gradients(r, sound_speed(rho, p), u, h_r, u_r, p)
        worst = max(worst, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    record_property("detail", f"max |character| {worst:.1e}")
    assert worst <= 1e-8


@pytest.mark.criterion(10, "admissibility logic and boundary conclusions on B_b(t)")
def test_admissibility(record_property):
    p = GasParams(2.0, 1.0, 1)
    good = AffineMotion(1.0, 3.0, 1.0, p)
    rep = check_admissibility(good)
    assert rep.ok
    bad = check_admissibility(AffineMotion(1.0, 2.0, 1.0, p))
    assert bad.violated == ["corner_beta_nonnegative", "boundary_supersonic"]
    out = boundary_conclusions(AffineSolution.build(good, 2.0))
    assert out["alpha_min_on_boundary"] > 0.0
    assert out["z_min_on_boundary"] >= 0.0
    assert out["c1_min_on_boundary"] > 0.0
    record_property("detail", ", ".join(f"{k}={v:.3g}" for k, v in out.items()))


@pytest.mark.slow
@pytest.mark.criterion(11, "repeated runs give byte-identical data files")
def test_determinism(tmp_path, record_property):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert cli.main(["run", str(CONFIGS / "rarefaction.ini"), "--out", str(out)]) == 0
    files = [{p.relative_to(o): p.read_bytes() for p in o.rglob("*") if p.is_file()} for o in outs]
    assert files[0].keys() == files[1].keys()
    data = [k for k in files[0] if k.name != "manifest.txt"]
    assert all(files[0][k] == files[1][k] for k in data)
    man = [cli.read_kv(o / "manifest.txt") for o in outs]
    differing = sorted(k for k in man[0] if man[0][k] != man[1].get(k))
    assert differing in ([], ["wall_clock_seconds"])
    record_property("detail", f"{len(data)} data files identical")
