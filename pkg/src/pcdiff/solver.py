"""Time marching for ``d/dt(k*[u-u0]) - (a(t,x) phi(u)_x)_x = f``.

The degenerate nonlinearity is handled the way the existence argument does it:
``phi`` is extended affinely outside ``[-M, M]`` (truncation), made strictly
increasing by adding ``eps * r``, and each implicit step is solved by the
frozen-coefficient (Picard) iteration.  A decreasing schedule of ``eps`` with
warm starts takes the place of the limit passage.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernels import DiscreteKernel, KernelPair, TimeGrid, sample_cell_averages
from .nonlocal_time import history_sum
from .spatial import CoefficientField, Mesh1D, StiffnessMatrix, solve_tridiagonal

log = logging.getLogger(__name__)

Scalar = Callable[[np.ndarray], np.ndarray]


class PicardConvergenceError(RuntimeError):
    def __init__(self, n: int, residuals: Sequence[float]):
        super().__init__(
            f"Picard iteration did not converge at step {n}; last residual {residuals[-1]:.3e}"
        )
        self.step = n
        self.residuals = list(residuals)


class TruncationBudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# nonlinearities


@dataclass(frozen=True)
class Nonlinearity:
    """Monotone ``phi`` with derivative and primitive ``Phi(r) = int_0^r phi``.

    ``mu`` and ``R`` encode ``phi'(r) >= mu`` for ``|r| >= R``; ``c0``/``c1``
    are slope bounds when the nonlinearity is known to be nondegenerate.
    """

    phi: Scalar
    dphi: Scalar
    Phi: Scalar
    mu: float
    R: float
    c0: float | None = None
    c1: float | None = None
    linear: bool = False
    name: str = "phi"

    @property
    def nondegenerate(self) -> bool:
        return self.c0 is not None and self.c0 > 0

    @classmethod
    def identity(cls) -> "Nonlinearity":
        return cls.linear_map(1.0)

    @classmethod
    def linear_map(cls, slope: float) -> "Nonlinearity":
        if not slope > 0:
            raise ValueError("slope must be positive")
        return cls(
            lambda r: slope * np.asarray(r, dtype=float),
            lambda r: np.full_like(np.asarray(r, dtype=float), slope),
            lambda r: 0.5 * slope * np.asarray(r, dtype=float) ** 2,
            mu=slope,
            R=1.0,
            c0=slope,
            c1=slope,
            linear=True,
            name=f"linear({slope:g})",
        )

    @classmethod
    def porous_medium(cls, m: float, R: float = 1.0) -> "Nonlinearity":
        """``phi(r) = |r|^(m-1) r`` with m > 1."""
        if not m > 1:
            raise ValueError("porous medium exponent must exceed 1")
        return cls(
            lambda r: np.sign(r) * np.abs(r) ** m,
            lambda r: m * np.abs(r) ** (m - 1.0),
            lambda r: np.abs(r) ** (m + 1.0) / (m + 1.0),
            mu=m * R ** (m - 1.0),
            R=R,
            name=f"porous_medium({m:g})",
        )

    def validate(self, samples: np.ndarray | None = None) -> None:
        """Spot-check the structural hypotheses on a sample of points."""
        r = np.linspace(-3 * self.R, 3 * self.R, 601) if samples is None else np.asarray(samples)
        if abs(float(self.phi(np.zeros(1))[0])) > 1e-14:
            raise ValueError("phi(0) must vanish")
        d = self.dphi(r)
        if np.any(d < -1e-14):
            raise ValueError("phi must be nondecreasing")
        outer = np.abs(r) >= self.R
        if np.any(d[outer] < self.mu * (1 - 1e-12)):
            raise ValueError("phi' >= mu fails outside [-R, R]")
        if np.any(self.Phi(r) < -1e-14):
            raise ValueError("primitive must be nonnegative")
        eps = 1e-6 * max(1.0, self.R)
        fd = (self.Phi(r + eps) - self.Phi(r - eps)) / (2 * eps)
        scale = 1.0 + np.abs(self.phi(r))
        if np.max(np.abs(fd - self.phi(r)) / scale) > 1e-5:
            raise ValueError("Phi' does not match phi")


def truncate(phi: Nonlinearity, M: float) -> Nonlinearity:
    """Keep ``phi`` on ``[-M, M]`` and continue it affinely (C^1) outside."""
    if not M > 0:
        raise ValueError("truncation level must be positive")
    if phi.linear:
        return phi
    if M <= phi.R:
        warnings.warn(f"truncation level M={M} does not exceed R={phi.R}", stacklevel=2)
    pM, pmM = float(phi.phi(np.array(M))), float(phi.phi(np.array(-M)))
    dM, dmM = float(phi.dphi(np.array(M))), float(phi.dphi(np.array(-M)))
    PM, PmM = float(phi.Phi(np.array(M))), float(phi.Phi(np.array(-M)))

    def f(r):
        r = np.asarray(r, dtype=float)
        if np.abs(r).max(initial=0.0) <= M:
            return phi.phi(r)
        inner = phi.phi(np.clip(r, -M, M))
        return np.where(r > M, pM + dM * (r - M), np.where(r < -M, pmM + dmM * (r + M), inner))

    def df(r):
        r = np.asarray(r, dtype=float)
        return np.where(r > M, dM, np.where(r < -M, dmM, phi.dphi(np.clip(r, -M, M))))

    def F(r):
        r = np.asarray(r, dtype=float)
        inner = phi.Phi(np.clip(r, -M, M))
        up = PM + pM * (r - M) + 0.5 * dM * (r - M) ** 2
        lo = PmM + pmM * (r + M) + 0.5 * dmM * (r + M) ** 2
        return np.where(r > M, up, np.where(r < -M, lo, inner))

    grid = np.linspace(-M, M, 2001)
    c1 = float(np.max(phi.dphi(grid)))
    return Nonlinearity(f, df, F, phi.mu, phi.R, phi.c0, c1, False, f"{phi.name}|M={M:g}")


def regularize(phi: Nonlinearity, eps: float) -> Nonlinearity:
    """``phi + eps * id``; lower slope bound becomes eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    c0 = eps + (phi.c0 or 0.0)
    c1 = None if phi.c1 is None else phi.c1 + eps
    return Nonlinearity(
        lambda r: phi.phi(r) + eps * np.asarray(r, dtype=float),
        lambda r: phi.dphi(r) + eps,
        lambda r: phi.Phi(r) + 0.5 * eps * np.asarray(r, dtype=float) ** 2,
        phi.mu + eps,
        phi.R,
        c0,
        c1,
        phi.linear,
        f"{phi.name}+{eps:g}r",
    )


def primitive_mass(phi: Nonlinearity, u: np.ndarray, mesh: Mesh1D) -> float:
    """``h * sum_i Phi(u_i)``."""
    return float(mesh.h * np.sum(phi.Phi(np.asarray(u, dtype=float))))


# ---------------------------------------------------------------------------
# problem / configuration


@dataclass(frozen=True)
class FixedBound:
    value: float


@dataclass(frozen=True)
class AdaptiveBound:
    safety: float = 1.5
    max_escalations: int = 5


def default_eps_schedule() -> tuple[float, ...]:
    return tuple(4.0**-k for k in range(10)) + (1e-6,)


@dataclass
class SolverConfig:
    picard_tol: float = 1e-10
    picard_maxit: int = 200
    damping: float = 1.0
    eps_schedule: tuple[float, ...] = field(default_factory=default_eps_schedule)
    truncation: FixedBound | AdaptiveBound = field(default_factory=AdaptiveBound)
    linearization: str = "picard"

    def __post_init__(self):
        if not (self.picard_tol > 0 and self.picard_maxit >= 1):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        sched = tuple(float(e) for e in self.eps_schedule)
        if not sched or any(e <= 0 for e in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("eps_schedule must be positive and strictly decreasing")
        self.eps_schedule = sched
        if self.linearization not in ("picard", "newton"):
            raise ValueError("linearization must be 'picard' or 'newton'")


Forcing = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class ProblemSpec:
    mesh: Mesh1D
    grid: TimeGrid
    pair: KernelPair
    coeff: CoefficientField
    phi: Nonlinearity
    u0: np.ndarray
    f: Forcing | np.ndarray | None = None

    def __post_init__(self):
        if self.mesh.Nx < 3:
            raise ValueError("need at least 3 cells")
        if self.grid.N < 1:
            raise ValueError("need at least one time step")
        u0 = np.asarray(self.u0, dtype=float)
        P = self.mesh.size
        if u0.shape == (P + 2,):
            if abs(u0[0]) > 1e-14 or abs(u0[-1]) > 1e-14:
                raise ValueError("u0 must vanish at the boundary nodes")
            u0 = u0[1:-1]
        elif u0.shape != (P,):
            raise ValueError(f"u0 must have {P} interior or {P + 2} nodal values")
        if not np.all(np.isfinite(u0)):
            raise ValueError("u0 must be finite")
        self.u0 = u0
        if isinstance(self.f, np.ndarray):
            f = np.asarray(self.f, dtype=float)
            if f.shape == (self.grid.N + 1, P + 2):
                f = f[:, 1:-1]
            if f.shape != (self.grid.N + 1, P):
                raise ValueError("tabulated forcing must have shape (N+1, Nx-1)")
            self.f = f

    def forcing(self, n: int) -> np.ndarray:
        if self.f is None:
            return np.zeros(self.mesh.size)
        if isinstance(self.f, np.ndarray):
            return self.f[n]
        t = self.grid.nodes[n]
        return np.broadcast_to(
            np.asarray(self.f(t, self.mesh.interior), dtype=float), (self.mesh.size,)
        ).copy()

    def forcing_table(self) -> np.ndarray:
        return np.array([self.forcing(n) for n in range(self.grid.N + 1)])

    def kernel(self) -> DiscreteKernel:
        return sample_cell_averages(self.pair, "K", self.grid)


@dataclass(frozen=True)
class StepDiagnostics:
    n: int
    iterations: int
    residual: float
    eps: float


@dataclass
class Solution:
    """Nodal trajectories including the (zero) boundary columns."""

    u: np.ndarray
    v: np.ndarray
    diagnostics: list[StepDiagnostics]
    eps: float
    phi_used: Nonlinearity
    M: float | None = None
    truncation_active: bool = False
    escalations: int = 0
    continuation: list[tuple[float, np.ndarray]] = field(default_factory=list)

    @property
    def interior(self) -> np.ndarray:
        return self.u[:, 1:-1]

    @property
    def v_interior(self) -> np.ndarray:
        return self.v[:, 1:-1]

    @property
    def total_iterations(self) -> int:
        return sum(d.iterations for d in self.diagnostics)


# ---------------------------------------------------------------------------
# stepping


def cell_slopes(phi: Nonlinearity, w: np.ndarray, phi_w: np.ndarray | None = None) -> np.ndarray:
    """Divided differences of ``phi`` across each cell (zero boundary values).

    With these slopes the frozen-coefficient flux ``c (w_i - w_{i-1})`` equals
    ``phi(w_i) - phi(w_{i-1})``, so a fixed point solves the nonlinear scheme.
    ``phi_w`` may carry ``phi(w)`` when the caller already has it.
    """
    wp = np.zeros(len(w) + 2)
    wp[1:-1] = w
    pp = np.zeros_like(wp)
    pp[1:-1] = phi.phi(w) if phi_w is None else phi_w
    dw = wp[1:] - wp[:-1]
    dp = pp[1:] - pp[:-1]
    close = np.abs(dw) <= 1e-12 * (1.0 + np.abs(wp[1:]) + np.abs(wp[:-1]))
    if not close.any():
        return dp / dw
    mid = 0.5 * (wp[1:] + wp[:-1])
    s = np.empty_like(dw)
    s[~close] = dp[~close] / dw[~close]
    s[close] = phi.dphi(mid[close])
    return s


class _Stepper:
    def __init__(self, spec: ProblemSpec, kbar: DiscreteKernel | None = None):
        self.spec = spec
        self.k = (kbar if kbar is not None else spec.kernel()).weights
        self.diag = float(self.k[0])
        self._stiff: dict[int, StiffnessMatrix] = {}
        self._a: dict[int, np.ndarray] = {}

    def coefficients(self, n: int) -> np.ndarray:
        if n not in self._a:
            t = self.spec.grid.nodes[n]
            self._a[n] = self.spec.coeff.cell_values(self.spec.mesh, t)
        return self._a[n]

    def stiffness(self, n: int, slopes: np.ndarray | None = None) -> StiffnessMatrix:
        a = self.coefficients(n)
        if slopes is None:
            if n not in self._stiff:
                self._stiff[n] = StiffnessMatrix.from_cell_coefficients(
                    self.spec.mesh, a, self.spec.grid.nodes[n]
                )
            return self._stiff[n]
        return StiffnessMatrix.from_cell_coefficients(
            self.spec.mesh, a * slopes, self.spec.grid.nodes[n]
        )

    def rhs(self, n: int, u_prev: np.ndarray, dU: np.ndarray) -> np.ndarray:
        hist = history_sum(self.k, dU, n)
        return self.spec.forcing(n) + self.diag * u_prev - hist

    def _residual(self, n, w, phi_w, rhs) -> float:
        r = self.diag * w + self.stiffness(n).matvec(phi_w) - rhs
        scale = max(float(np.abs(rhs).max()), self.diag * float(np.abs(w).max()), 1e-300)
        return float(np.abs(r).max()) / scale

    def residual(self, n: int, phi: Nonlinearity, w: np.ndarray, rhs: np.ndarray) -> float:
        return self._residual(n, w, phi.phi(w), rhs)

    def linear_solve(self, n: int, slopes: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        c = self.coefficients(n) * slopes / self.spec.mesh.h**2
        off = -c[1:-1]
        return solve_tridiagonal(off, self.diag + c[:-1] + c[1:], off, rhs)

    def picard(self, n, phi, rhs, guess, cfg: SolverConfig) -> tuple[np.ndarray, int, float]:
        theta = cfg.damping
        history: list[float] = []
        for attempt in range(2):
            w = np.array(guess, dtype=float)
            pw = phi.phi(w)
            for it in range(1, cfg.picard_maxit + 1):
                new = self.linear_solve(n, cell_slopes(phi, w, pw), rhs)
                if theta < 1.0:
                    new = theta * new + (1.0 - theta) * w
                upd = float(np.abs(new - w).max()) / max(float(np.abs(new).max()), 1e-300)
                w = new
                pw = phi.phi(w)
                res = self._residual(n, w, pw, rhs)
                history.append(res)
                if res <= cfg.picard_tol or upd <= cfg.picard_tol:
                    return w, it, res
            log.warning("step %d: Picard stalled at residual %.3e, halving damping", n, res)
            theta *= 0.5
        raise PicardConvergenceError(n, history)

    def newton(self, n, phi, rhs, guess, cfg: SolverConfig) -> tuple[np.ndarray, int, float]:
        theta = cfg.damping
        history: list[float] = []
        K = self.stiffness(n)
        for attempt in range(2):
            w = guess.copy()
            for it in range(1, cfg.picard_maxit + 1):
                F = self.diag * w + K.matvec(phi.phi(w)) - rhs
                s = phi.dphi(w)
                # Jacobian k[1] I + K diag(phi'(w)) is tridiagonal, not symmetric
                step = solve_tridiagonal(K.off * s[:-1], K.diag * s + self.diag, K.off * s[1:], F)
                new = w - theta * step
                upd = float(np.abs(new - w).max()) / max(float(np.abs(new).max()), 1e-300)
                res = self.residual(n, phi, new, rhs)
                history.append(res)
                w = new
                if res <= cfg.picard_tol or upd <= cfg.picard_tol:
                    return w, it, res
            theta *= 0.5
        raise PicardConvergenceError(n, history)

    def march(
        self,
        phi: Nonlinearity,
        cfg: SolverConfig,
        eps: float,
        warm: np.ndarray | None = None,
    ) -> tuple[np.ndarray, list[StepDiagnostics]]:
        spec = self.spec
        N, P = spec.grid.N, spec.mesh.size
        U = np.zeros((N + 1, P))
        dU = np.zeros((N, P))
        U[0] = spec.u0
        diags = []
        inner = self.picard if cfg.linearization == "picard" else self.newton
        for n in range(1, N + 1):
            rhs = self.rhs(n, U[n - 1], dU)
            guess = U[n - 1] if warm is None else warm[n]
            U[n], its, res = inner(n, phi, rhs, guess, cfg)
            dU[n - 1] = U[n] - U[n - 1]
            diags.append(StepDiagnostics(n, its, res, eps))
        return U, diags


def linear_step(
    spec: ProblemSpec,
    n: int,
    slopes: np.ndarray,
    history: np.ndarray,
    kbar: DiscreteKernel | None = None,
) -> np.ndarray:
    """One frozen-coefficient solve ``k[1] u + K(a * slopes) u = f_n + rhs_history``.

    ``slopes`` holds one value per cell (Nx of them) and must be positive;
    ``history`` is the interior trajectory prefix ``u[0..n-1]``.
    """
    slopes = np.asarray(slopes, dtype=float)
    if slopes.shape != (spec.mesh.Nx,) or np.any(slopes <= 0):
        raise ValueError("need Nx positive cell slopes")
    st = _Stepper(spec, kbar)
    history = np.asarray(history, dtype=float)
    if history.shape[0] != n:
        raise ValueError("history must contain u[0..n-1]")
    rhs = st.rhs(n, history[-1], np.diff(history, axis=0))
    return st.linear_solve(n, slopes, rhs)


def working_nonlinearity(spec: ProblemSpec, cfg: SolverConfig, eps: float | None = None,
                         M: float | None = None) -> Nonlinearity:
    """The (truncated, regularized) nonlinearity actually used for a run."""
    if spec.phi.nondegenerate:
        return spec.phi
    phi = spec.phi if M is None else truncate(spec.phi, M)
    return regularize(phi, cfg.eps_schedule[-1] if eps is None else eps)


def picard_step(
    spec: ProblemSpec,
    cfg: SolverConfig,
    n: int,
    history: np.ndarray,
    phi: Nonlinearity | None = None,
    guess: np.ndarray | None = None,
) -> tuple[np.ndarray, int, float]:
    """Solve step ``n`` given the interior prefix ``u[0..n-1]``."""
    phi = working_nonlinearity(spec, cfg) if phi is None else phi
    history = np.asarray(history, dtype=float)
    st = _Stepper(spec)
    rhs = st.rhs(n, history[-1], np.diff(history, axis=0))
    g0 = history[-1] if guess is None else np.asarray(guess, dtype=float)
    if cfg.linearization == "newton":
        return st.newton(n, phi, rhs, g0, cfg)
    return st.picard(n, phi, rhs, g0, cfg)


def _initial_bound(spec: ProblemSpec, cfg: SolverConfig) -> float | None:
    tr = cfg.truncation
    if isinstance(tr, FixedBound):
        return float(tr.value)
    u0max = float(np.abs(spec.u0).max(initial=0.0))
    return tr.safety * (1.0 + max(spec.phi.R, u0max))


def solve(spec: ProblemSpec, cfg: SolverConfig | None = None) -> Solution:
    cfg = SolverConfig() if cfg is None else cfg
    stepper = _Stepper(spec)
    if spec.phi.nondegenerate:
        U, diags = stepper.march(spec.phi, cfg, 0.0)
        return _pack(spec, U, spec.phi, diags, 0.0, None, False, 0, [(0.0, U)])

    M = _initial_bound(spec, cfg)
    escalations = 0
    while True:
        trunc = truncate(spec.phi, M)
        runs: list[tuple[float, np.ndarray]] = []
        warm = None
        for eps in cfg.eps_schedule:
            phi_eps = regularize(trunc, eps)
            U, diags = stepper.march(phi_eps, cfg, eps, warm)
            runs.append((eps, U))
            warm = U
            log.info("eps=%g: max|u|=%.6g, iterations=%d", eps, np.abs(U).max(),
                     sum(d.iterations for d in diags))
        active = bool(np.abs(U).max() >= M * (1.0 - 1e-6))
        if not active or isinstance(cfg.truncation, FixedBound):
            return _pack(spec, U, phi_eps, diags, eps, M, active, escalations, runs)
        if escalations >= cfg.truncation.max_escalations:
            raise TruncationBudgetError(f"truncation level escalated {escalations} times (M={M:g})")
        escalations += 1
        M *= cfg.truncation.safety
        log.info("solution reached truncation level; restarting with M=%g", M)


def _pack(spec, U, phi, diags, eps, M, active, escalations, runs) -> Solution:
    full = np.pad(U, ((0, 0), (1, 1)))
    v = np.pad(phi.phi(U), ((0, 0), (1, 1)))
    return Solution(full, v, diags, eps, phi, M, active, escalations, runs)


def solution_rows(spec: ProblemSpec, sol: Solution):
    """Rows ``(n, t, i, x, u, v)`` in the fixed CSV column order."""
    t = spec.grid.nodes
    x = spec.mesh.nodes
    for n in range(sol.u.shape[0]):
        for i in range(sol.u.shape[1]):
            yield n, t[n], i, x[i], sol.u[n, i], sol.v[n, i]

