"""Executable checks of the quantitative estimates on computed solutions.

Every check returns a :class:`~pcdiff.report.Check` (``lhs <= rhs`` up to a
tolerance).  Inequalities use the relative slack ``1e-8 (1 + |lhs| + |rhs|)``,
sign and monotonicity checks use ``1e-10`` absolute.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from . import kernels as kn
from .kernels import DiscreteKernel, KernelPair, TimeGrid, sample_cell_averages
from .nonlocal_time import NonlocalOperator, apply, convexity_margin
from .report import Check, Report, relative_slack
from .solver import (
    Nonlinearity,
    ProblemSpec,
    Solution,
    SolverConfig,
    primitive_mass,
    solve,
)
from .spatial import CoefficientField, Mesh1D, gradient, hminus1_norms

INEQ_REL = 1e-8
SIGN_TOL = 1e-10
ML_MAX_ARG = 1e100  # the integral form squares x


class HypothesisViolation(ValueError):
    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


@dataclass(frozen=True)
class DataHypotheses:
    p: float
    q1: float
    q2: float
    beta: float
    d: int

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


def check_exponents(p: float, q1: float, q2: float, d: int) -> DataHypotheses:
    """Validate ``p'/q1 + d/(2 q2) = 1 - beta`` and the exponent windows."""
    if not p > 1:
        raise HypothesisViolation("p", f"need p > 1, got {p}")
    if d < 1 or int(d) != d:
        raise HypothesisViolation("d", f"dimension must be a positive integer, got {d}")
    for name, q in (("q1", q1), ("q2", q2)):
        if not q >= 1:
            raise HypothesisViolation(name, f"need {name} in [1, inf], got {q}")
    pc = p / (p - 1.0)
    beta = 1.0 - pc * _inv(q1) - d * _inv(q2) / 2.0
    hi = 1.0 if d >= 2 else 0.5
    if not 0.0 < beta < hi:
        raise HypothesisViolation("beta", f"beta = {beta:g} outside (0, {hi:g})")
    if q1 < pc / (1.0 - beta) * (1 - 1e-12):
        raise HypothesisViolation("q1", f"q1 below p'/(1-beta) = {pc / (1 - beta):g}")
    if d >= 2:
        if q2 < d / (2.0 * (1.0 - beta)) * (1 - 1e-12):
            raise HypothesisViolation("q2", f"q2 below d/(2(1-beta)) = {d / (2 * (1 - beta)):g}")
    else:
        upper = 2.0 * pc / (1.0 - 2.0 * beta)
        if q1 > upper * (1 + 1e-12):
            raise HypothesisViolation("q1", f"q1 above 2p'/(1-2beta) = {upper:g}")
    return DataHypotheses(p, q1, q2, beta, int(d))


# ---------------------------------------------------------------------------
# Mittag-Leffler function


def _series_terms(alpha: float, x: float, nterms: int) -> np.ndarray:
    k = np.arange(nterms, dtype=float)
    with np.errstate(divide="ignore"):
        logmag = k * math.log(x) - special.gammaln(alpha * k + 1.0)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.exp(logmag)


def _series_length(alpha: float, x: float) -> int:
    # terms decay once alpha*k outgrows x^(1/alpha); stop when below 1e-20
    n = 8
    while True:
        k = float(n)
        if k * math.log(max(x, 1e-300)) - math.lgamma(alpha * k + 1.0) < -46.0 and alpha * k > x ** (1.0 / alpha):
            return n
        n += 8


def _max_term(alpha: float, x: float) -> float:
    n = _series_length(alpha, x)
    k = np.arange(n, dtype=float)
    return float(np.exp(np.max(k * math.log(x) - special.gammaln(alpha * k + 1.0))))


def _ml_series(alpha: float, x: float, factor: int = 1) -> float:
    n = factor * _series_length(alpha, x)
    return math.fsum(_series_terms(alpha, x, n))


def _ml_integral(alpha: float, x: float) -> float:
    # E_a(-x) = sin(a pi)/(a pi) * int_0^inf exp(-w^(1/a)) x / (w^2 + 2 w x cos(a pi) + x^2) dw
    c = math.cos(alpha * math.pi)
    pref = math.sin(alpha * math.pi) / (alpha * math.pi)

    def f(w):
        return math.exp(-(w ** (1.0 / alpha))) * x / (w * w + 2.0 * w * x * c + x * x)

    cut = 60.0**alpha  # exp(-60) beyond
    pts = sorted({min(x, cut * 0.999), 1.0})
    pieces = [0.0] + [p for p in pts if 0 < p < cut] + [cut]
    total = 0.0
    for a, b in zip(pieces, pieces[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=400)
        total += val
    tail, _ = integrate.quad(f, cut, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return pref * (total + tail)


def mittag_leffler(alpha: float, z: float) -> float:
    """``E_alpha(z)`` for 0 < alpha <= 1 and real z <= 0.

    Compensated power series while its largest term stays below 1e3 (so the
    cancellation loss is under ~1e-12), otherwise the Laplace-type integral
    representation of the completely monotone function ``E_alpha(-x)``.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not (math.isfinite(z) and z <= 0):
        raise ValueError(f"z must be finite and nonpositive, got {z}")
    x = -float(z)
    if x > ML_MAX_ARG:
        raise ValueError(f"|z| = {x:g} beyond the validity of the integral representation ({ML_MAX_ARG:g})")
    if x == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(-x)
    if in_series_domain(alpha, x):
        return _ml_series(alpha, x)
    return _ml_integral(alpha, x)


def in_series_domain(alpha: float, x: float) -> bool:
    """True when the largest series term of ``E_alpha(-x)`` is at most 1e3."""
    if x <= 0.0:
        return True
    # the largest term is roughly exp(x^(1/alpha))
    if math.log(x) / alpha > math.log(12.0):
        return False
    return _max_term(alpha, x) <= 1e3


def mittag_leffler_series(alpha: float, z: float, factor: int = 1) -> float:
    """Plain truncated series (``factor`` times the default number of terms)."""
    return _ml_series(alpha, -float(z), factor)


# ---------------------------------------------------------------------------
# checks on solutions


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        chk = fn(*args, **kwargs)
        chk.runtime = time.perf_counter() - t0
        return chk

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def linfty_constant(sol: Solution, R: float, u0: np.ndarray) -> float:
    u0max = float(np.abs(u0).max(initial=0.0))
    return float(np.abs(sol.u).max(initial=0.0)) / (1.0 + max(R, u0max))


@_timed
def linfty_check(sol: Solution, R: float, u0: np.ndarray, unforced: bool = False) -> Check:
    """Measured bound constant ``C* = |u|_inf / (1 + max(R, |u0|_inf))``.

    Finiteness is what is asserted; with ``unforced=True`` the discrete maximum
    principle ``max_n |u_n|_inf <= |u0|_inf`` is asserted instead.
    """
    cstar = linfty_constant(sol, R, u0)
    umax = float(np.abs(sol.u).max(initial=0.0))
    u0max = float(np.abs(u0).max(initial=0.0))
    if unforced:
        return Check("linfty_max_principle", umax, u0max, SIGN_TOL, details={"C_star": cstar})
    rhs = cstar if math.isfinite(cstar) else -1.0
    return Check("linfty_bound_finite", cstar, rhs, 0.0, details={"C_star": cstar, "R": R})


@_timed
def l1_contraction_check(sol1: Solution, spec1: ProblemSpec, sol2: Solution, spec2: ProblemSpec) -> Check:
    """``|u1-u2|_{L1(Q)} <= T |u01-u02|_{L1} + |l|_{L1(0,T)} |f1-f2|_{L1(Q)}``."""
    if spec1.grid != spec2.grid or spec1.mesh != spec2.mesh:
        raise kn.GridMismatchError("contraction check needs identical grids")
    grid, mesh = spec1.grid, spec1.mesh
    tau, h, T = grid.tau, mesh.h, grid.T
    lhs = tau * h * float(np.abs(sol1.interior[1:] - sol2.interior[1:]).sum())
    du0 = h * float(np.abs(spec1.u0 - spec2.u0).sum())
    df = tau * h * float(np.abs(spec1.forcing_table()[1:] - spec2.forcing_table()[1:]).sum())
    lnorm = spec1.pair.l1_norm_l(T)
    rhs = T * du0 + lnorm * df
    displayed = T * du0 + lnorm
    return Check(
        "l1_contraction",
        lhs,
        rhs,
        relative_slack(lhs, rhs, INEQ_REL),
        details={
            "u0_diff_L1": du0,
            "f_diff_L1": df,
            "l_L1": lnorm,
            "rhs_displayed_form": displayed,
            "note": "rhs uses |l|_1 * |f1-f2|_1; the displayed estimate omits the forcing factor",
        },
    )


def gradient_energy(sol: Solution, spec: ProblemSpec) -> float:
    """``tau sum_n |grad v_n|^2_{L2}`` over n = 1..N."""
    g = gradient(spec.mesh, sol.v_interior[1:])
    return float(spec.grid.tau * spec.mesh.h * (g * g).sum())


@_timed
def energy_check(sol: Solution, spec: ProblemSpec) -> Check:
    """Gradient energy of ``v = phi_eps(u)`` against data."""
    nu = spec.coeff.nu
    T = spec.grid.T
    knorm = spec.pair.l1_norm_k(T)
    mass = primitive_mass(sol.phi_used, spec.u0, spec.mesh)
    F = spec.forcing_table()[1:]
    fnorm2 = float(spec.grid.tau * spec.mesh.h * (F * F).sum())
    CP = spec.mesh.poincare
    lhs = gradient_energy(sol, spec)
    rhs = 2.0 / nu * knorm * mass + CP**2 / nu**2 * fnorm2
    return Check(
        "energy",
        lhs,
        rhs,
        relative_slack(lhs, rhs, INEQ_REL),
        details={"k_L1": knorm, "Phi_mass_u0": mass, "f_L2_sq": fnorm2, "nu": nu, "C_P": CP},
    )


def _l_translation_norms(l: DiscreteKernel, s: int) -> tuple[float, float]:
    tau = l.grid.tau
    w = l.weights
    N = len(w)
    shift = tau * float(np.abs(w[s:] - w[: N - s]).sum()) if s < N else 0.0
    head = tau * float(w[:s].sum())
    return shift, head


@_timed
def translation_modulus_check(sol: Solution, spec: ProblemSpec, h_lag: float) -> Check:
    """``|u(.+h) - u|_{L2(0,T-h; H^-1)} <= 2 m (|l(.+h) - l|_1 + |l 1_(0,h)|_1)``.

    ``m`` bounds ``|u|_{L2(H^1)} + |d/dt k*(u-u0)|_{L2(H^-1)}``.
    """
    grid, mesh = spec.grid, spec.mesh
    tau = grid.tau
    s = int(round(h_lag / tau))
    if s < 0 or abs(s * tau - h_lag) > 1e-9 * tau or s > grid.N:
        raise ValueError(f"lag {h_lag} is not a nonnegative multiple of tau={tau}")
    U = sol.interior
    op = NonlocalOperator(spec.kernel())
    V = apply(op, U, U[0])
    grad_u = gradient(mesh, U[1:])
    m = math.sqrt(tau * mesh.h * float((grad_u * grad_u).sum()))
    m += math.sqrt(tau * float((hminus1_norms(mesh, V[1:]) ** 2).sum()))
    if s == 0:
        lhs = 0.0
    else:
        diff = U[1 + s :] - U[1 : grid.N + 1 - s]
        lhs = math.sqrt(tau * float((hminus1_norms(mesh, diff) ** 2).sum())) if len(diff) else 0.0
    l = sample_cell_averages(spec.pair, "L", grid)
    shift, head = _l_translation_norms(l, s)
    rhs = 2.0 * m * (shift + head)
    return Check(
        f"translation_lag_{s}",
        lhs,
        rhs,
        relative_slack(lhs, rhs, INEQ_REL),
        details={"lag_steps": s, "m": m, "l_shift_L1": shift, "l_head_L1": head},
    )


def translation_sweep(sol: Solution, spec: ProblemSpec, lags: Sequence[int] = (1, 2, 4, 8)) -> list[Check]:
    tau = spec.grid.tau
    return [translation_modulus_check(sol, spec, s * tau) for s in lags]


@_timed
def continuation_check(sol: Solution, spec: ProblemSpec, tail: int = 3) -> Check:
    """Successive eps-run differences in L2(Q) must not increase over the tail.

    ``lhs`` is the largest increase between consecutive differences (0 if they
    are nonincreasing).
    """
    runs = sol.continuation
    tau, h = spec.grid.tau, spec.mesh.h
    diffs = [
        math.sqrt(tau * h * float(((b[1:] - a[1:]) ** 2).sum()))
        for (_, a), (_, b) in zip(runs, runs[1:])
    ]
    last = diffs[-tail:]
    incr = max([b - a for a, b in zip(last, last[1:])] + [0.0])
    return Check(
        "eps_continuation",
        incr,
        0.0,
        SIGN_TOL,
        details={"eps": [e for e, _ in runs], "differences": diffs},
    )


def cstar_by_eps(sol: Solution, spec: ProblemSpec) -> list[float]:
    R = spec.phi.R
    u0max = float(np.abs(spec.u0).max(initial=0.0))
    return [float(np.abs(U).max()) / (1.0 + max(R, u0max)) for _, U in sol.continuation]


# ---------------------------------------------------------------------------
# discrete convexity inequality


def _h_family(rng: np.random.Generator) -> tuple[str, Callable, Callable]:
    kind = int(rng.integers(3))
    if kind == 0:
        return "square", (lambda y: y * y), (lambda y: 2.0 * y)
    if kind == 1:
        eps = float(10 ** rng.uniform(-3, 0))
        return (
            f"smooth_abs({eps:.3g})",
            lambda y: np.sqrt(y * y + eps * eps) - eps,
            lambda y: y / np.sqrt(y * y + eps * eps),
        )
    return "exp", np.exp, np.exp


def random_trajectory(rng: np.random.Generator, N: int) -> np.ndarray:
    kind = int(rng.integers(3))
    if kind == 0:
        v = rng.uniform(-1, 1, N + 1)
    elif kind == 1:
        v = np.cumsum(rng.normal(0, 0.2, N + 1))
        v = np.clip(v, -1, 1)
    else:
        t = np.linspace(0, 1, N + 1)
        v = np.sin(2 * np.pi * rng.uniform(0.5, 4) * t + rng.uniform(0, 2 * np.pi))
    return v


@_timed
def convexity_suite(op: NonlocalOperator, trials: int, seed: int, name: str = "convexity") -> Check:
    """Smallest normalized margin ``(H'(v) D_v - D_H(v)) / (1 + |v|_inf^2)``."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    worst_case = None
    for _ in range(trials):
        label, H, dH = _h_family(rng)
        v = random_trajectory(rng, op.grid.N)
        m = convexity_margin(op, H, dH, v, v[0]) / (1.0 + float(np.abs(v).max()) ** 2)
        if m < worst:
            worst, worst_case = m, label
    return Check(name, 0.0, worst, SIGN_TOL, details={"trials": trials, "worst_H": worst_case})


# ---------------------------------------------------------------------------
# exact linear benchmark


@dataclass
class BenchmarkRow:
    N: int
    Nx: int
    linf_error: float
    final_l2_error: float


@dataclass
class BenchmarkTable:
    alpha: float
    rows: list[BenchmarkRow] = field(default_factory=list)

    def ratios(self, key: str = "linf_error") -> list[float]:
        vals = [getattr(r, key) for r in self.rows]
        return [a / b if b > 0 else math.inf for a, b in zip(vals, vals[1:])]


def exact_linear_solution(alpha: float, mesh: Mesh1D, grid: TimeGrid) -> np.ndarray:
    """``E_alpha(-(pi/L)^2 t^alpha) sin(pi x / L)`` on interior nodes."""
    lam = (math.pi / mesh.L) ** 2
    amp = np.array([mittag_leffler(alpha, -lam * t**alpha) for t in grid.nodes])
    return amp[:, None] * np.sin(math.pi * mesh.interior / mesh.L)[None, :]


def linear_benchmark_problem(alpha: float, mesh: Mesh1D, grid: TimeGrid) -> ProblemSpec:
    return ProblemSpec(
        mesh,
        grid,
        KernelPair.fractional(alpha),
        CoefficientField.constant(1.0),
        Nonlinearity.identity(),
        np.sin(math.pi * mesh.interior / mesh.L),
    )


def exact_linear_benchmark(
    alpha: float, mesh: Mesh1D, grid: TimeGrid, levels: int = 1, refine_space: bool = False
) -> BenchmarkTable:
    """Errors against the Mittag-Leffler solution on ``levels`` nested time grids.

    The finest level is ``(grid.N, mesh.Nx)``; coarser levels halve N (and Nx
    when ``refine_space``).
    """
    table = BenchmarkTable(alpha)
    for lev in reversed(range(levels)):
        N = grid.N // 2**lev
        Nx = mesh.Nx // 2**lev if refine_space else mesh.Nx
        g_, m_ = TimeGrid(grid.T, N), Mesh1D(mesh.L, Nx)
        spec = linear_benchmark_problem(alpha, m_, g_)
        sol = solve(spec, SolverConfig(picard_tol=1e-13))
        exact = exact_linear_solution(alpha, m_, g_)
        err = sol.interior - exact
        linf = float(np.abs(err).max())
        l2 = math.sqrt(m_.h * float((err[-1] ** 2).sum()))
        table.rows.append(BenchmarkRow(N, Nx, linf, l2))
    return table


# ---------------------------------------------------------------------------
# kernel-level checks


@_timed
def resolvent_check(l: DiscreteKernel, k: DiscreteKernel, gamma: float) -> Check:
    """Worst of: negativity of h, r; monotonicity of s; ``h - gamma r`` (normwise)."""
    res = kn.resolvent_kernel(l, gamma)
    kg = kn.kernel_convolve(k, res.h)
    neg = max(res.h.negativity_defect(), res.r.negativity_defect())
    mono = res.s.monotonicity_defect()
    prop = float(np.abs(res.h.weights - gamma * res.r.weights).max() / max(np.abs(res.h.weights).max(), 1e-300))
    disc = float(l.grid.tau * np.abs(kg.weights - gamma * res.s.weights).sum())
    return Check(
        f"resolvent_gamma_{gamma:g}",
        max(neg, mono),
        0.0,
        SIGN_TOL,
        details={"h_minus_gamma_r": prop, "k_gamma_vs_gamma_s_L1": disc, "kgamma_pc_shaped": kg.is_pc_shaped()},
    )


@_timed
def yosida_check(l: DiscreteKernel, gammas: Sequence[float] = (1, 10, 100, 1000)) -> Check:
    """Largest increase of the Yosida L1 errors along increasing gamma."""
    t = l.grid.nodes
    f = np.sin(2 * np.pi * t / l.grid.T)
    errs = kn.yosida_convergence(l, f, gammas)
    incr = max(b - a for a, b in zip(errs, errs[1:]))
    # negative tolerance makes the decrease strict
    tol = -float(np.finfo(float).tiny)
    return Check("yosida_monotone", incr, 0.0, tol, details={"errors": errs, "gammas": list(gammas)})


@_timed
def cstar_stability_check(sol: Solution, spec: ProblemSpec, tail: int = 3, rel: float = 0.05) -> Check:
    """Relative spread of ``C*`` over the last ``tail`` eps levels, against ``rel``."""
    cs = cstar_by_eps(sol, spec)[-tail:]
    top = max(cs)
    spread = (top - min(cs)) / top if top > 0 else 0.0
    ok = all(math.isfinite(c) for c in cs)
    return Check(
        "linfty_cstar_stable",
        spread if ok else math.inf,
        rel,
        0.0,
        details={"C_star_tail": cs},
    )


# ---------------------------------------------------------------------------
# random data pairs and the suite runner


def random_data(rng: np.random.Generator, mesh: Mesh1D, amp: float = 1.0) -> tuple[np.ndarray, Callable]:
    """Smooth random ``u0`` (interior values, ``|u0| <= amp``) and a bounded forcing."""
    x = mesh.interior / mesh.L
    modes = rng.integers(1, 4, size=2)
    c = rng.uniform(-1, 1, size=2)
    u0 = c[0] * np.sin(np.pi * modes[0] * x) + 0.5 * c[1] * np.sin(np.pi * modes[1] * x)
    u0 *= amp / max(1.5, float(np.abs(u0).max()))
    fa, fb, fw = rng.uniform(-1, 1), rng.uniform(-1, 1), float(rng.uniform(0.5, 3))

    def f(t, xx):
        return fa * np.cos(fw * np.pi * xx / mesh.L) + fb * t

    return u0, f


def contraction_pairs(spec: ProblemSpec, cfg: SolverConfig, pairs: int, seed: int) -> list[Check]:
    """L1 contraction on ``pairs`` seeded random data pairs sharing the grids of ``spec``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(pairs):
        specs = []
        for _ in range(2):
            u0, f = random_data(rng, spec.mesh)
            specs.append(ProblemSpec(spec.mesh, spec.grid, spec.pair, spec.coeff, spec.phi, u0, f))
        s1, s2 = specs
        chk = l1_contraction_check(solve(s1, cfg), s1, solve(s2, cfg), s2)
        chk.name = f"l1_contraction_{i}"
        out.append(chk)
    return out


@dataclass
class SuiteOptions:
    gammas: tuple[float, ...] = (0.1, 1.0, 10.0)
    yosida_gammas: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    convexity_trials: int = 100
    lags: tuple[int, ...] = (1, 2, 4, 8)
    contraction_pairs: int = 3
    exponents: tuple[float, float, float, int] = (1.5, 8.0, 1.0, 1)


def _convexity_families() -> list[tuple[str, KernelPair]]:
    return [
        ("fractional", KernelPair.fractional(0.5)),
        ("tempered", KernelPair.tempered(0.5, 1.0)),
        ("distributed", KernelPair.distributed_order()),
    ]


def run_suite(spec: ProblemSpec, cfg: SolverConfig, seed: int, opts: SuiteOptions | None = None) -> Report:
    """Every check on one problem; the report is deterministic given ``seed``."""
    opts = opts or SuiteOptions()
    grid = spec.grid
    report = Report()

    report.extend(kn.verify_pc_pair(spec.pair, grid, 1e-2, norm="l1"))
    k = sample_cell_averages(spec.pair, "K", grid)
    l = sample_cell_averages(spec.pair, "L", grid)
    for gam in opts.gammas:
        report.add(resolvent_check(l, k, gam))
    report.add(yosida_check(l, opts.yosida_gammas))
    for i, (name, pair) in enumerate(_convexity_families()):
        op = NonlocalOperator(sample_cell_averages(pair, "K", grid))
        report.add(convexity_suite(op, opts.convexity_trials, seed + i, f"convexity_{name}"))

    sol = solve(spec, cfg)
    forced = spec.f is not None and bool(np.any(spec.forcing_table()))
    report.add(linfty_check(sol, spec.phi.R, spec.u0, unforced=not forced))
    if forced:
        report.add(cstar_stability_check(sol, spec))
    report.add(energy_check(sol, spec))
    lag_checks = translation_sweep(sol, spec, opts.lags)
    for c in lag_checks:
        report.add(c)
    rhs = [c.rhs for c in lag_checks]
    incr = max([a - b for a, b in zip(rhs, rhs[1:])] + [0.0])
    report.add(Check("translation_rhs_monotone", incr, 0.0, SIGN_TOL, details={"rhs": rhs}))
    if len(sol.continuation) > 1:
        report.add(continuation_check(sol, spec))
    for c in contraction_pairs(spec, cfg, opts.contraction_pairs, seed):
        report.add(c)

    p, q1, q2, d = opts.exponents
    try:
        hyp = check_exponents(p, q1, q2, d)
        report.add(Check("data_hypotheses", 0.0, 0.0, 0.0, details={"beta": hyp.beta}))
    except HypothesisViolation as err:
        report.add(Check("data_hypotheses", 1.0, 0.0, 0.0, details={"violated": err.constraint}))
    return report
