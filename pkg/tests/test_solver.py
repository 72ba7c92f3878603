import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcdiff.kernels import KernelPair, TimeGrid, sample_cell_averages
from pcdiff.nonlocal_time import NonlocalOperator, apply
from pcdiff.solver import (
    AdaptiveBound,
    FixedBound,
    Nonlinearity,
    PicardConvergenceError,
    ProblemSpec,
    SolverConfig,
    TruncationBudgetError,
    cell_slopes,
    default_eps_schedule,
    linear_step,
    picard_step,
    primitive_mass,
    regularize,
    solution_rows,
    solve,
    truncate,
    working_nonlinearity,
)
from pcdiff.spatial import CoefficientField, Mesh1D, assemble

CUBE = Nonlinearity.porous_medium(3)


def laplacian_dense(Nx, L=1.0):
    """Dirichlet second-difference matrix written out independently of the package."""
    h = L / Nx
    n = Nx - 1
    A = np.zeros((n, n))
    for i in range(n):
        A[i, i] = 2.0
        if i > 0:
            A[i, i - 1] = -1.0
        if i < n - 1:
            A[i, i + 1] = -1.0
    return A / h**2


def spec_for(pair, phi, Nx=16, N=16, u0=None, f=None, coeff=None, T=1.0):
    mesh = Mesh1D(1.0, Nx)
    x = mesh.interior
    u0 = np.sin(np.pi * x) if u0 is None else u0
    return ProblemSpec(mesh, TimeGrid(T, N), pair, coeff or CoefficientField.constant(1.0), phi, u0, f)


# --- nonlinearity plumbing ---------------------------------------------------


def test_truncate_examples():
    lin = Nonlinearity.identity()
    assert truncate(lin, 0.5) is lin
    t = truncate(CUBE, 2.0)
    assert float(t.phi(np.array(3.0))) == pytest.approx(20.0)
    assert float(t.phi(np.array(-3.0))) == pytest.approx(-20.0)
    assert float(t.phi(np.array(1.5))) == pytest.approx(1.5**3)
    for M in (2.0, -2.0):
        for d in (1e-4, 1e-6):
            slope = (t.phi(np.array(M + d)) - t.phi(np.array(M - d))) / (2 * d)
            # phi'' jumps at M, so the centered difference is only O(d)
            assert slope == pytest.approx(12.0, abs=4 * d)
    r = np.linspace(-5, 5, 1001)
    assert t.dphi(r).max() == pytest.approx(12.0)
    t.validate()


def test_truncate_warns_below_R():
    with pytest.warns(UserWarning):
        truncate(Nonlinearity.porous_medium(2, R=2.0), 1.0)
    with pytest.raises(ValueError):
        truncate(CUBE, 0.0)


def test_regularize_examples():
    with pytest.raises(ValueError):
        regularize(CUBE, 0.0)
    zero = Nonlinearity(lambda r: 0 * r, lambda r: 0 * r, lambda r: 0 * r, mu=0.0, R=1.0)
    ident = regularize(zero, 1.0)
    r = np.linspace(-2, 2, 9)
    np.testing.assert_array_equal(ident.phi(r), r)
    pe = regularize(truncate(CUBE, 2.0), 0.1)
    assert float(pe.dphi(np.array(0.0))) == pytest.approx(0.1)
    outer = np.linspace(1, 5, 50)
    assert np.all(pe.dphi(outer) >= CUBE.mu + 0.1 - 1e-12)
    assert pe.nondegenerate and pe.c0 == pytest.approx(0.1)
    pe.validate()


@given(st.floats(1.1, 5.0), st.floats(0.2, 3.0))
@settings(max_examples=30, deadline=None)
def test_porous_medium_hypotheses(m, R):
    phi = Nonlinearity.porous_medium(m, R)
    phi.validate()
    r = np.linspace(-2, 2, 41)
    d = 1e-6
    np.testing.assert_allclose((phi.Phi(r + d) - phi.Phi(r - d)) / (2 * d), phi.phi(r), atol=1e-6)


def test_primitive_mass_examples():
    m = Mesh1D(2.0, 10)
    assert primitive_mass(CUBE, np.zeros(9), m) == 0.0
    assert primitive_mass(Nonlinearity.identity(), np.full(9, 3.0), m) == pytest.approx(9 * 0.2 * 4.5)
    assert float(CUBE.Phi(np.array(2.0))) == pytest.approx(4.0)


def test_solver_config_validation():
    assert SolverConfig().eps_schedule == default_eps_schedule()
    assert default_eps_schedule()[-1] == 1e-6
    for kw in [dict(picard_tol=0), dict(damping=0), dict(damping=1.5), dict(eps_schedule=(1, 1)),
               dict(eps_schedule=(0.1, 0.5)), dict(eps_schedule=()), dict(linearization="bfgs")]:
        with pytest.raises(ValueError):
            SolverConfig(**kw)


def test_problem_spec_validation():
    mesh, grid = Mesh1D(1.0, 8), TimeGrid(1.0, 4)
    pair, a = KernelPair.fractional(0.5), CoefficientField.constant(1.0)
    full = np.concatenate([[0], np.ones(7), [0]])
    s = ProblemSpec(mesh, grid, pair, a, CUBE, full)
    assert s.u0.shape == (7,)
    bad = full.copy()
    bad[0] = 1.0
    with pytest.raises(ValueError):
        ProblemSpec(mesh, grid, pair, a, CUBE, bad)
    with pytest.raises(ValueError):
        ProblemSpec(mesh, grid, pair, a, CUBE, np.ones(5))
    with pytest.raises(ValueError):
        ProblemSpec(Mesh1D(1.0, 2), grid, pair, a, CUBE, np.ones(1))
    with pytest.raises(ValueError):
        ProblemSpec(mesh, grid, pair, a, CUBE, np.ones(7), np.ones((3, 7)))
    tab = ProblemSpec(mesh, grid, pair, a, CUBE, np.ones(7), np.ones((5, 9)))
    assert tab.forcing(2).shape == (7,)


# --- single steps -------------------------------------------------------------


def test_linear_step_eigenmode_oracle():
    spec = spec_for(KernelPair.fractional(0.5), Nonlinearity.identity(), Nx=3, N=4)
    k1 = spec.kernel().weights[0]
    lam = spec.mesh.lambda1
    u1 = linear_step(spec, 1, np.ones(3), spec.u0[None, :])
    np.testing.assert_allclose(u1, k1 * spec.u0 / (k1 + lam), rtol=1e-14)


def test_linear_step_rejects_bad_slopes():
    spec = spec_for(KernelPair.fractional(0.5), Nonlinearity.identity(), Nx=4, N=2)
    with pytest.raises(ValueError):
        linear_step(spec, 1, np.ones(3), spec.u0[None, :])
    with pytest.raises(ValueError):
        linear_step(spec, 1, np.array([1, 0, 1, 1.0]), spec.u0[None, :])


def test_picard_linear_one_iteration():
    spec = spec_for(KernelPair.tempered(0.5, 1.0), Nonlinearity.linear_map(2.0), Nx=8, N=4)
    u, its, res = picard_step(spec, SolverConfig(), 1, spec.u0[None, :])
    assert its == 1 and res <= 1e-12


def test_picard_guesses_reach_same_fixed_point():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=16, N=8)
    cfg = SolverConfig(picard_tol=1e-12)
    phi = working_nonlinearity(spec, cfg, eps=1e-3, M=3.0)
    hist = spec.u0[None, :]
    a, ia, ra = picard_step(spec, cfg, 1, hist, phi)
    b, ib, rb = picard_step(spec, cfg, 1, hist, phi, guess=np.zeros(spec.mesh.size))
    assert ra <= 1e-12 and rb <= 1e-12
    assert np.abs(a - b).max() <= 10 * cfg.picard_tol * np.abs(a).max()


def test_newton_agrees_with_picard():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=16, N=16, f=lambda t, x: np.cos(2 * x))
    tol = 1e-12
    a = solve(spec, SolverConfig(picard_tol=tol))
    b = solve(spec, SolverConfig(picard_tol=tol, linearization="newton"))
    assert np.abs(a.u - b.u).max() <= 10 * tol * np.abs(a.u).max()


def test_picard_failure_reports_history():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=16, N=4)
    cfg = SolverConfig(picard_tol=1e-15, picard_maxit=1)
    phi = working_nonlinearity(spec, SolverConfig(), eps=1e-6, M=3.0)
    with pytest.raises(PicardConvergenceError) as info:
        picard_step(spec, cfg, 1, spec.u0[None, :], phi)
    assert info.value.step == 1 and len(info.value.residuals) == 2


def test_cell_slopes_divided_differences():
    w = np.array([0.5, 0.5, -1.0])
    s = cell_slopes(CUBE, w)
    wp = np.array([0, 0.5, 0.5, -1.0, 0])
    ref = []
    for a, b in zip(wp[:-1], wp[1:]):
        ref.append(3 * a * a if a == b else (b**3 - a**3) / (b - a))
    np.testing.assert_allclose(s, ref, rtol=1e-14)


# --- full solves ------------------------------------------------------------------


def test_zero_data_zero_solution():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, u0=np.zeros(15))
    sol = solve(spec)
    assert not sol.u.any()
    assert all(not U.any() for _, U in sol.continuation)


def test_heat_reduction_matches_backward_euler():
    N, Nx, T = 64, 32, 0.5
    rng = np.random.default_rng(11)
    x = np.linspace(0, 1, Nx + 1)[1:-1]
    c = rng.normal(size=3)
    u0 = sum(ci * np.sin((i + 1) * np.pi * x) for i, ci in enumerate(c))
    f = lambda t, xx: np.exp(-t) * xx * (1 - xx)  # noqa: E731
    spec = spec_for(KernelPair.classical(), Nonlinearity.identity(), Nx=Nx, N=N, u0=u0, f=f, T=T)
    sol = solve(spec, SolverConfig(picard_tol=1e-14))
    tau = T / N
    A = laplacian_dense(Nx)
    U = [u0]
    for n in range(1, N + 1):
        U.append(np.linalg.solve(np.eye(Nx - 1) / tau + A, U[-1] / tau + f(n * tau, x)))
    U = np.array(U)
    assert np.abs(sol.interior - U).max() <= 1e-12 * np.abs(U).max()


def test_unit_kernel_reduction_matches_dense_oracle():
    # k = 1: u_n - u_0 + A u_n = f_n
    N, Nx = 16, 20
    x = np.linspace(0, 1, Nx + 1)[1:-1]
    u0 = x * (1 - x)
    f = lambda t, xx: t * np.cos(xx)  # noqa: E731
    spec = spec_for(KernelPair.integral(), Nonlinearity.identity(), Nx=Nx, N=N, u0=u0, f=f)
    sol = solve(spec, SolverConfig(picard_tol=1e-14))
    B = np.eye(Nx - 1) + laplacian_dense(Nx)
    for n in range(1, N + 1):
        ref = np.linalg.solve(B, u0 + f(n / N, x))
        assert np.abs(sol.interior[n] - ref).max() <= 1e-12 * np.abs(ref).max()


def test_fixed_point_solves_nonlinear_scheme():
    coeff = CoefficientField.piecewise(0.2, 1.0, 0.4)
    spec = spec_for(KernelPair.tempered(0.5, 2.0), CUBE, Nx=16, N=16, coeff=coeff,
                    f=lambda t, x: 1 + 0 * x)
    sol = solve(spec, SolverConfig(picard_tol=1e-13))
    U = sol.interior
    D = apply(NonlocalOperator(spec.kernel()), U, U[0])
    for n in range(1, spec.grid.N + 1):
        K = assemble(spec.mesh, coeff, spec.grid.nodes[n])
        r = D[n] + K.matvec(sol.phi_used.phi(U[n])) - spec.forcing(n)
        assert np.abs(r).max() <= 1e-10 * (1 + np.abs(D[n]).max())


def test_boundary_and_initial_values():
    spec = spec_for(KernelPair.distributed_order(), CUBE, Nx=8, N=8)
    sol = solve(spec)
    assert not sol.u[:, 0].any() and not sol.u[:, -1].any()
    np.testing.assert_array_equal(sol.interior[0], spec.u0)
    np.testing.assert_allclose(sol.v, sol.phi_used.phi(sol.u))


@pytest.mark.parametrize("pair", [KernelPair.fractional(0.5), KernelPair.tempered(0.3, 1.0),
                                  KernelPair.distributed_order(), KernelPair.classical()],
                         ids=lambda p: p.family)
def test_maximum_principle_unforced(pair):
    x = np.linspace(0, 1, 17)[1:-1]
    u0 = np.sin(np.pi * x) - 0.6 * np.sin(3 * np.pi * x)
    sol = solve(spec_for(pair, CUBE, u0=u0))
    assert np.abs(sol.u).max() <= np.abs(u0).max() + 1e-10


def test_maximum_principle_brute_force_small_grid():
    levels = (-1.0, -0.4, 0.7, 1.0)
    cfg = SolverConfig(eps_schedule=(1.0, 1e-2, 1e-4, 1e-6))
    worst = -math.inf
    for vals in itertools.product(levels, repeat=3):
        u0 = np.array(vals)
        sol = solve(spec_for(KernelPair.fractional(0.5), CUBE, Nx=4, N=4, u0=u0), cfg)
        worst = max(worst, np.abs(sol.u).max() - np.abs(u0).max())
    assert worst <= 1e-10


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=8, deadline=None)
def test_comparison_nonnegative_data(seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 1, 13)[1:-1]
    u0 = rng.uniform(0, 1) * np.sin(np.pi * x) ** 2
    amp = rng.uniform(0, 2)
    spec = spec_for(KernelPair.fractional(rng.uniform(0.2, 0.8)), CUBE, Nx=12, N=8, u0=u0,
                    f=lambda t, xx: amp * xx, coeff=CoefficientField.piecewise(0.1, 1.0, 0.5))
    sol = solve(spec)
    assert sol.u.min() >= -1e-10


def test_nondegenerate_skips_continuation():
    spec = spec_for(KernelPair.fractional(0.5), Nonlinearity.linear_map(0.5))
    sol = solve(spec)
    assert sol.eps == 0.0 and len(sol.continuation) == 1 and sol.M is None


def test_continuation_differences_shrink():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=16, N=16)
    sol = solve(spec, SolverConfig(picard_tol=1e-12))
    d = [np.sqrt((np.diff([U for _, U in sol.continuation], axis=0)[i] ** 2).sum())
         for i in range(len(sol.continuation) - 1)]
    assert d[-1] <= d[-2] <= d[-3]
    assert not sol.truncation_active


def test_adaptive_truncation_escalates():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=8, N=8, f=lambda t, x: 500 + 0 * x,
                    u0=np.zeros(7))
    sol = solve(spec, SolverConfig(eps_schedule=(1.0, 1e-3)))
    assert sol.escalations >= 1 and not sol.truncation_active
    assert sol.M > 3.0 and np.abs(sol.u).max() < sol.M
    with pytest.raises(TruncationBudgetError):
        solve(spec, SolverConfig(eps_schedule=(1.0, 1e-3), truncation=AdaptiveBound(1.5, 0)))
    with pytest.warns(UserWarning, match="does not exceed"):
        fixed = solve(spec, SolverConfig(eps_schedule=(1.0, 1e-3), truncation=FixedBound(1.0)))
    assert fixed.truncation_active and fixed.M == 1.0


def test_solution_rows_order():
    spec = spec_for(KernelPair.fractional(0.5), Nonlinearity.identity(), Nx=4, N=2)
    sol = solve(spec)
    rows = list(solution_rows(spec, sol))
    assert len(rows) == 3 * 5
    assert rows[0][:4] == (0, 0.0, 0, 0.0)
    assert rows[-1][0] == 2 and rows[-1][2] == 4 and rows[-1][3] == 1.0


def test_kernel_cache_matches_sampling():
    spec = spec_for(KernelPair.fractional(0.5), CUBE, Nx=4, N=8)
    np.testing.assert_array_equal(spec.kernel().weights,
                                  sample_cell_averages(spec.pair, "K", spec.grid).weights)
