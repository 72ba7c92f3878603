import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pcdiff import verify as vf
from pcdiff.kernels import GridMismatchError, KernelPair, TimeGrid, sample_cell_averages
from pcdiff.nonlocal_time import NonlocalOperator
from pcdiff.report import Check, Report, relative_slack
from pcdiff.solver import Nonlinearity, ProblemSpec, Solution, SolverConfig, solve
from pcdiff.spatial import CoefficientField, Mesh1D

mp.mp.dps = 40


def ml_oracle(a, x):
    """Mittag-Leffler series with working precision sized to the cancellation."""
    # the largest term is about exp(x^(1/a)) near k = x^(1/a)/a
    scale = x ** (1 / a)
    with mp.workdps(int(scale / 2.3) + 40):
        xm, am = mp.mpf(x), mp.mpf(a)
        n = ml_oracle_terms(a, x)
        return float(mp.fsum((-xm) ** k * mp.rgamma(am * k + 1) for k in range(n)))


def ml_oracle_terms(a, x):
    return int((8 * x ** (1 / a) + 60) / a)


def tfpm(Nx=16, N=32, u0=None, f=None, coeff=None):
    mesh = Mesh1D(1.0, Nx)
    u0 = np.sin(np.pi * mesh.interior) if u0 is None else u0
    return ProblemSpec(mesh, TimeGrid(1.0, N), KernelPair.fractional(0.5),
                       coeff or CoefficientField.constant(1.0), Nonlinearity.porous_medium(3), u0, f)


# --- report plumbing ---------------------------------------------------------


def test_check_pass_iff_margin_within_tolerance():
    assert Check("a", 1.0, 1.0, 0.0).passed
    assert Check("a", 1.0 + 1e-9, 1.0, 1e-8).passed
    assert not Check("a", 1.1, 1.0, 1e-8).passed
    assert Check("a", 2.0, 5.0, 0.0).margin == 3.0


def test_report_serialization_is_stable():
    r = Report()
    r.add(Check("x", 0.5, 1.0, 0.0, runtime=3.2, details={"arr": np.arange(3), "v": np.float64(2)}))
    r.add(Check("y", 2.0, 1.0, 0.0))
    js = r.to_json()
    payload = json.loads(js)
    assert "runtime" not in payload["checks"][0]
    assert payload["checks"][0]["details"] == {"arr": [0, 1, 2], "v": 2.0}
    assert "runtime" in json.loads(r.to_json(with_runtime=True))["checks"][0]
    assert r.n_failed == 1 and not r.passed
    assert r["y"].lhs == 2.0
    with pytest.raises(KeyError):
        r["z"]
    assert "1 of 2 checks failed" in r.to_text()


def test_relative_slack():
    assert relative_slack(1.0, 2.0) == pytest.approx(1e-8 * 4.0)


# --- data hypotheses -----------------------------------------------------------


def test_exponents_admissible_example():
    h = vf.check_exponents(2.0, 8.0, 4.0, 2)
    assert h.beta == pytest.approx(0.5)
    assert h.p_conj == 2.0
    assert vf.check_exponents(1.5, 8.0, 1.0, 1).beta == pytest.approx(0.125)


@pytest.mark.parametrize(
    "args,constraint",
    [((2.0, math.inf, math.inf, 2), "beta"), ((2.0, math.inf, math.inf, 1), "beta"),
     ((1.0, 8, 4, 2), "p"), ((2.0, 0.5, 4, 2), "q1"), ((2.0, 8, 4, 0), "d"),
     ((2.0, 8, 0.5, 1), "q2")],
)
def test_exponents_violations_name_constraint(args, constraint):
    with pytest.raises(vf.HypothesisViolation) as info:
        vf.check_exponents(*args)
    assert info.value.constraint == constraint


@given(st.floats(1.01, 10), st.floats(1, 1e3), st.floats(1, 1e3), st.integers(1, 4))
@settings(max_examples=100, deadline=None)
def test_exponents_relation_holds_when_accepted(p, q1, q2, d):
    try:
        h = vf.check_exponents(p, q1, q2, d)
    except vf.HypothesisViolation:
        return
    pc = p / (p - 1)
    assert pc / q1 + d / (2 * q2) == pytest.approx(1 - h.beta, rel=1e-12, abs=1e-14)
    assert 0 < h.beta < (1.0 if d >= 2 else 0.5)


# --- Mittag-Leffler -------------------------------------------------------------


def test_ml_identities():
    for a in (0.1, 0.5, 0.9, 1.0):
        assert vf.mittag_leffler(a, 0.0) == 1.0
    assert vf.mittag_leffler(1.0, -1.0) == pytest.approx(0.36787944117144233, rel=1e-15)
    assert vf.mittag_leffler(0.5, -1.0) == pytest.approx(0.42758357615580705, rel=1e-13)


@pytest.mark.parametrize("x", [1e-8, 0.3, 1.0, 2.5, 3.4, 3.5, 7.0, 30.0, 200.0, 1e4])
def test_ml_half_against_erfcx(x):
    assert vf.mittag_leffler(0.5, -x) == pytest.approx(special.erfcx(x), rel=1e-10)


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.75, 0.9, 0.99])
@pytest.mark.parametrize("x", [0.05, 0.7, 2.0, 5.0, 12.0])
def test_ml_against_high_precision_series(a, x):
    if ml_oracle_terms(a, x) > 20000:
        pytest.skip("series oracle needs more than 20000 terms")
    assert vf.mittag_leffler(a, -x) == pytest.approx(ml_oracle(a, x), rel=1e-10)


@pytest.mark.parametrize("a", [0.1, 0.3, 0.8])
@pytest.mark.parametrize("x", [1e3, 1e10, 1e50])
def test_ml_large_argument_asymptotics(a, x):
    am = mp.mpf(a)
    asy = float(mp.fsum((-1) ** (k + 1) * mp.mpf(x) ** (-k) * mp.rgamma(1 - am * k) for k in range(1, 6)))
    assert vf.mittag_leffler(a, -x) == pytest.approx(asy, rel=1e-10)


@given(st.floats(0.05, 0.99), st.floats(0, 40))
@settings(max_examples=60, deadline=None)
def test_ml_series_self_consistency(a, x):
    if not vf.in_series_domain(a, x) or x == 0:
        return
    one = vf.mittag_leffler_series(a, -x)
    two = vf.mittag_leffler_series(a, -x, factor=2)
    assert abs(one - two) <= 1e-12
    assert vf.mittag_leffler(a, -x) == one


@given(st.floats(0.05, 0.99), st.floats(0, 1e4), st.floats(0, 1e4))
@settings(max_examples=60, deadline=None)
def test_ml_completely_monotone_in_x(a, x, y):
    lo, hi = sorted((x, y))
    e_lo, e_hi = vf.mittag_leffler(a, -lo), vf.mittag_leffler(a, -hi)
    assert 0 < e_hi <= e_lo * (1 + 1e-10) <= 1 + 1e-10


@pytest.mark.parametrize("a,z", [(0.0, -1.0), (1.2, -1.0), (0.5, 1.0), (0.5, math.nan), (0.5, -1e120)])
def test_ml_rejects(a, z):
    with pytest.raises(ValueError):
        vf.mittag_leffler(a, z)


# --- L-infinity -----------------------------------------------------------------


def test_linfty_zero_solution():
    spec = tfpm(u0=np.zeros(15), N=4)
    sol = solve(spec)
    chk = vf.linfty_check(sol, 1.0, spec.u0)
    assert chk.passed and chk.details["C_star"] == 0.0


def test_linfty_max_principle_and_cstar():
    spec = tfpm()
    sol = solve(spec, SolverConfig(picard_tol=1e-12))
    chk = vf.linfty_check(sol, spec.phi.R, spec.u0, unforced=True)
    assert chk.passed
    assert chk.details["C_star"] <= 1 / 2 + 1e-12


def test_cstar_stable_with_forcing():
    spec = tfpm(f=lambda t, x: 2 * np.cos(3 * x))
    sol = solve(spec, SolverConfig(picard_tol=1e-12))
    assert vf.linfty_check(sol, 1.0, spec.u0).passed
    chk = vf.cstar_stability_check(sol, spec)
    assert chk.passed, chk.details


def test_linfty_flags_nonfinite():
    spec = tfpm(N=4)
    sol = solve(spec)
    sol.u[2, 3] = np.inf
    assert not vf.linfty_check(sol, 1.0, spec.u0).passed


# --- contraction ------------------------------------------------------------------


def test_contraction_identical_data():
    spec = tfpm(N=8)
    sol = solve(spec)
    chk = vf.l1_contraction_check(sol, spec, sol, spec)
    assert chk.lhs == 0 and chk.rhs == 0 and chk.passed


def test_contraction_symmetric_and_reports_displayed_form():
    s1 = tfpm(N=16)
    s2 = tfpm(N=16, u0=0.5 * s1.u0, f=lambda t, x: 0.3 + 0 * x)
    a, b = solve(s1), solve(s2)
    c12 = vf.l1_contraction_check(a, s1, b, s2)
    c21 = vf.l1_contraction_check(b, s2, a, s1)
    assert (c12.lhs, c12.rhs) == (c21.lhs, c21.rhs)
    assert c12.passed
    T, l1 = 1.0, KernelPair.fractional(0.5).l1_norm_l(1.0)
    assert l1 == pytest.approx(1 / math.gamma(1.5))
    assert c12.details["rhs_displayed_form"] == pytest.approx(T * c12.details["u0_diff_L1"] + l1)
    assert c12.details["f_diff_L1"] == pytest.approx(0.3 * (15 / 16), rel=1e-12)


def test_contraction_bump_difference():
    mesh = Mesh1D(1.0, 16)
    x = mesh.interior
    delta = 0.2
    bump = ((x > 0.3) & (x < 0.7)).astype(float)
    s1 = tfpm(N=16)
    s2 = tfpm(N=16, u0=s1.u0 + delta * bump)
    chk = vf.l1_contraction_check(solve(s1), s1, solve(s2), s2)
    assert chk.rhs == pytest.approx(1.0 * delta * mesh.h * bump.sum())
    assert chk.passed


def test_contraction_grid_mismatch():
    s1, s2 = tfpm(N=8), tfpm(N=16)
    with pytest.raises(GridMismatchError):
        vf.l1_contraction_check(solve(s1), s1, solve(s2), s2)


# --- energy -------------------------------------------------------------------------


def test_energy_zero_data():
    spec = tfpm(u0=np.zeros(15), N=4)
    chk = vf.energy_check(solve(spec), spec)
    assert chk.lhs == 0 and chk.rhs == 0 and chk.passed


def test_energy_linear_unforced():
    mesh = Mesh1D(1.0, 32)
    spec = ProblemSpec(mesh, TimeGrid(1.0, 64), KernelPair.fractional(0.5), CoefficientField.constant(1.0),
                       Nonlinearity.identity(), np.sin(np.pi * mesh.interior))
    chk = vf.energy_check(solve(spec), spec)
    knorm = 1 / math.gamma(1.5)
    assert chk.rhs == pytest.approx(2 * knorm * 0.5 * 0.5, rel=1e-12)
    assert chk.passed


def test_energy_forced_discontinuous_coefficient():
    spec = tfpm(coeff=CoefficientField.piecewise(0.1, 1.0, 0.5), f=lambda t, x: 1 + t + 0 * x)
    chk = vf.energy_check(solve(spec), spec)
    assert chk.passed and chk.details["nu"] == 0.1


# --- translation --------------------------------------------------------------------


def test_translation_zero_lag_and_constant():
    spec = tfpm(N=16)
    sol = solve(spec)
    assert vf.translation_modulus_check(sol, spec, 0.0).lhs == 0.0
    const = Solution(np.tile(sol.u[0], (17, 1)), sol.v, [], 0.0, sol.phi_used)
    chk = vf.translation_modulus_check(const, spec, 4 / 16)
    assert chk.lhs == 0.0 and chk.passed


def test_translation_rejects_off_grid_lag():
    spec = tfpm(N=16)
    sol = solve(spec)
    with pytest.raises(ValueError):
        vf.translation_modulus_check(sol, spec, 0.3 / 16)


def test_translation_l_pieces_closed_form():
    grid = TimeGrid(1.0, 64)
    l = sample_cell_averages(KernelPair.fractional(0.5), "L", grid)
    for s in (1, 2, 8):
        shift, head = vf._l_translation_norms(l, s)
        h = s * grid.tau
        assert head == pytest.approx(h**0.5 / math.gamma(1.5), rel=1e-12)
        # g_alpha decreasing: |l(.+h) - l|_1 on the grid telescopes to head minus the tail mass
        tail = (1 - (1 - h) ** 0.5) / math.gamma(1.5)
        assert shift == pytest.approx(head - tail, rel=1e-10)


def test_translation_sweep_monotone_rhs():
    spec = tfpm()
    sol = solve(spec, SolverConfig(picard_tol=1e-12))
    checks = vf.translation_sweep(sol, spec)
    assert all(c.passed for c in checks)
    rhs = [c.rhs for c in checks]
    assert all(b >= a for a, b in zip(rhs, rhs[1:]))
    assert rhs[0] / rhs[-1] < 1


# --- continuation, convexity ------------------------------------------------------------


def test_continuation_check():
    spec = tfpm()
    sol = solve(spec, SolverConfig(picard_tol=1e-12))
    chk = vf.continuation_check(sol, spec)
    assert chk.passed
    d = chk.details["differences"]
    assert len(d) == len(sol.continuation) - 1


@pytest.mark.parametrize("pair", [KernelPair.fractional(0.5), KernelPair.tempered(0.5, 1.0),
                                  KernelPair.distributed_order()], ids=lambda p: p.family)
def test_convexity_suite(pair):
    op = NonlocalOperator(sample_cell_averages(pair, "K", TimeGrid(1.0, 128)))
    chk = vf.convexity_suite(op, 50, seed=3)
    assert chk.passed and chk.details["trials"] == 50
    again = vf.convexity_suite(op, 50, seed=3)
    assert again.rhs == chk.rhs


# --- benchmark, kernel checks ------------------------------------------------------------


def test_exact_solution_initial_row():
    mesh, grid = Mesh1D(1.0, 8), TimeGrid(1.0, 4)
    ex = vf.exact_linear_solution(0.5, mesh, grid)
    np.testing.assert_allclose(ex[0], np.sin(np.pi * mesh.interior), rtol=1e-15)


def test_benchmark_converges_both_alphas():
    for a in (0.1, 0.9):
        t = vf.exact_linear_benchmark(a, Mesh1D(1.0, 32), TimeGrid(1.0, 256), levels=3)
        assert [r.N for r in t.rows] == [64, 128, 256]
        assert all(q > 1 for q in t.ratios("final_l2_error"))


def test_resolvent_and_yosida_checks():
    grid = TimeGrid(1.0, 512)
    p = KernelPair.fractional(0.5)
    l, k = sample_cell_averages(p, "L", grid), sample_cell_averages(p, "K", grid)
    for g in (0.1, 1.0, 10.0):
        chk = vf.resolvent_check(l, k, g)
        assert chk.passed and chk.details["h_minus_gamma_r"] <= 1e-13
    y = vf.yosida_check(l)
    assert y.passed and len(y.details["errors"]) == 4


def test_random_data_is_seeded():
    mesh = Mesh1D(1.0, 16)
    a = vf.random_data(np.random.default_rng(5), mesh)
    b = vf.random_data(np.random.default_rng(5), mesh)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1](0.3, mesh.interior), b[1](0.3, mesh.interior))
    assert np.abs(a[0]).max() <= 1.0


def test_run_suite_small():
    spec = tfpm(Nx=8, N=128)
    opts = vf.SuiteOptions(convexity_trials=5, contraction_pairs=1)
    rep = vf.run_suite(spec, SolverConfig(picard_tol=1e-12), 1, opts)
    names = [c.name for c in rep]
    for n in ("pc_identity_l1", "yosida_monotone", "linfty_max_principle", "energy",
              "translation_lag_8", "eps_continuation", "l1_contraction_0", "data_hypotheses"):
        assert n in names
    assert rep.passed, rep.to_text()
