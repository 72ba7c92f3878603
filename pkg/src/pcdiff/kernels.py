"""PC kernel pairs, cell-average sampling, discrete convolution and resolvents.

A pair ``(k, l)`` is of PC type when ``k`` is nonnegative and nonincreasing and
``k * l = 1`` on the positive half line.  Everything here lives on a uniform
time grid ``t_n = n * tau`` and represents kernels by their cell averages

    w[j] = (1 / tau) * int_{t_{j-1}}^{t_j} w(s) ds,    j = 1..N,

stored zero-based (``weights[0]`` is cell 1).  One product rule is used for
every convolution: lag cell ``j`` is paired with the right endpoint value
``v[n - j + 1]``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

from .report import Check, Report

TOL_NN = 1e-10

FRACTIONAL = "fractional"
TEMPERED = "tempered"
DISTRIBUTED = "distributed"
CLASSICAL = "classical"
INTEGRAL = "integral"
FAMILIES = (FRACTIONAL, TEMPERED, DISTRIBUTED, CLASSICAL, INTEGRAL)


class GridMismatchError(ValueError):
    pass


class KernelQuadratureError(RuntimeError):
    def __init__(self, cell: int, message: str):
        super().__init__(f"cell {cell}: {message}")
        self.cell = cell


class KernelShapeWarning(UserWarning):
    """A sampled kernel violates nonnegativity or monotonicity beyond TOL_NN."""


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.N + 1) * self.tau
        t[-1] = self.T
        return t

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.N * factor)


def _check_same_grid(a: TimeGrid, b: TimeGrid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# closed-form pieces


def _power_increments(t: np.ndarray, beta: float) -> np.ndarray:
    """``t[j]**beta - t[j-1]**beta`` on a uniform grid starting at 0.

    Written through expm1/log1p so that late cells keep full relative accuracy.
    """
    tau = t[1] - t[0]
    j = np.arange(1, len(t), dtype=float)
    out = np.empty(len(t) - 1)
    out[0] = tau**beta
    jj = j[1:]
    out[1:] = -(tau * jj) ** beta * np.expm1(beta * np.log1p(-1.0 / jj))
    return out


def _reg_gamma_increment(shape: float, x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """``P(shape, x1) - P(shape, x0)`` for the regularized lower incomplete gamma."""
    lower = special.gammainc(shape, x1) - special.gammainc(shape, x0)
    upper = special.gammaincc(shape, x0) - special.gammaincc(shape, x1)
    return np.where(x0 > shape, upper, lower)


def scaled_exp1(t) -> np.ndarray:
    """``exp(t) * E1(t)`` for t > 0, i.e. ``int_0^inf exp(-s t) / (1 + s) ds``."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t <= 500.0
    out[small] = np.exp(t[small]) * special.exp1(t[small])
    big = t[~small]
    if big.size:
        # asymptotic series, truncation error ~ 12!/t^13
        acc = np.zeros_like(big)
        term = np.ones_like(big)
        for n in range(12):
            acc += term
            term = -term * (n + 1) / big
        out[~small] = acc / big
    return out


def _gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelPair:
    """Analytic descriptor of a PC pair ``(k, l)``.

    Families:
      * ``fractional``: ``k = g_{1-alpha}``, ``l = g_alpha``.
      * ``tempered``: ``k = g_{1-alpha} e^{-rate t}``,
        ``l = g_alpha e^{-rate t} + rate * (1 * [g_alpha e^{-rate .}])``.
      * ``distributed``: ``k = int_0^1 g_beta dbeta``,
        ``l = int_0^inf e^{-s t} / (1 + s) ds = e^t E1(t)``.
      * ``classical``: ``k`` the Dirac mass at 0 and ``l = g_1 = 1`` (the limit
        alpha -> 1), which turns the nonlocal derivative into ``d/dt``; the
        scheme is then backward Euler.
      * ``integral``: ``k = g_1 = 1`` and ``l`` the Dirac mass, so that
        ``d/dt (k * [v - v0]) = v - v0``.

    A Dirac mass has no density on t > 0; its antiderivative is 1 there and
    its cell averages are ``(1/tau, 0, 0, ...)``.
    """

    family: str
    alpha: float | None = None
    rate: float | None = None
    quad_nodes: int = field(default=64, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family in (FRACTIONAL, TEMPERED):
            if self.alpha is None or not (0.0 < self.alpha < 1.0):
                raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.family == TEMPERED:
            if self.rate is None or not self.rate > 0:
                raise ValueError(f"tempering rate must be positive, got {self.rate}")

    @classmethod
    def fractional(cls, alpha: float) -> "KernelPair":
        return cls(FRACTIONAL, alpha=alpha)

    @classmethod
    def tempered(cls, alpha: float, rate: float) -> "KernelPair":
        return cls(TEMPERED, alpha=alpha, rate=rate)

    @classmethod
    def distributed_order(cls) -> "KernelPair":
        return cls(DISTRIBUTED)

    @classmethod
    def classical(cls) -> "KernelPair":
        return cls(CLASSICAL)

    @classmethod
    def integral(cls) -> "KernelPair":
        return cls(INTEGRAL)

    @property
    def _dirac(self) -> str:
        """Which member of the pair is a Dirac mass ("K", "L" or "")."""
        return {CLASSICAL: "K", INTEGRAL: "L"}.get(self.family, "")

    # pointwise evaluators -------------------------------------------------

    def k(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == FRACTIONAL:
            return g(1.0 - self.alpha, t)
        if self.family == TEMPERED:
            return g(1.0 - self.alpha, t) * np.exp(-self.rate * t)
        if self.family == DISTRIBUTED:
            b, w = _gauss_legendre_01(self.quad_nodes)
            return np.tensordot(w, g(b[:, None], t[None, ...]), axes=1)
        return np.zeros_like(t) if self._dirac == "K" else np.ones_like(t)

    def l(self, t) -> np.ndarray:  # noqa: E743
        t = np.asarray(t, dtype=float)
        if self.family == FRACTIONAL:
            return g(self.alpha, t)
        if self.family == TEMPERED:
            a, c = self.alpha, self.rate
            head = g(a, t) * np.exp(-c * t)
            return head + c * c ** (-a) * special.gammainc(a, c * t)
        if self.family == DISTRIBUTED:
            return scaled_exp1(t)
        return np.zeros_like(t) if self._dirac == "L" else np.ones_like(t)

    # antiderivatives from 0 -----------------------------------------------

    def k_integral(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == FRACTIONAL:
            return g(2.0 - self.alpha, t)
        if self.family == TEMPERED:
            a, c = self.alpha, self.rate
            return c ** (a - 1.0) * special.gammainc(1.0 - a, c * t)
        if self.family == DISTRIBUTED:
            b, w = _gauss_legendre_01(self.quad_nodes)
            return np.tensordot(w, g(b[:, None] + 1.0, t[None, ...]), axes=1)
        return (t > 0).astype(float) if self._dirac == "K" else t.copy()

    def l_integral(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == FRACTIONAL:
            return g(1.0 + self.alpha, t)
        if self.family == TEMPERED:
            a, c = self.alpha, self.rate
            G = c ** (-a) * special.gammainc(a, c * t)
            return G * (1.0 + c * t) - a * c ** (-a) * special.gammainc(a + 1.0, c * t)
        if self.family == DISTRIBUTED:
            out = np.zeros_like(t)
            pos = t > 0
            out[pos] = scaled_exp1(t[pos]) + np.log(t[pos]) + np.euler_gamma
            return out
        return (t > 0).astype(float) if self._dirac == "L" else t.copy()

    def l1_norm_l(self, T: float) -> float:
        """``|l|_{L1((0,T))}``; all families have nonnegative ``l``."""
        return float(self.l_integral(np.array([T]))[0])

    def l1_norm_k(self, T: float) -> float:
        return float(self.k_integral(np.array([T]))[0])


def g(beta, t) -> np.ndarray:
    """Riemann-Liouville kernel ``t^(beta-1) / Gamma(beta)``; zero for t <= 0."""
    t = np.asarray(t, dtype=float)
    beta = np.asarray(beta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(t > 0, np.power(np.where(t > 0, t, 1.0), beta - 1.0), 0.0)
    return val * special.rgamma(beta)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    weights: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} weights, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.grid.N

    def __getitem__(self, j):
        return self.weights[j]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def scaled(self, c: float) -> "DiscreteKernel":
        return DiscreteKernel(c * self.weights, self.grid)

    def l1_norm(self) -> float:
        return float(self.grid.tau * np.abs(self.weights).sum())

    def negativity_defect(self) -> float:
        return float(max(0.0, -self.weights.min()))

    def monotonicity_defect(self) -> float:
        if self.grid.N < 2:
            return 0.0
        return float(max(0.0, np.diff(self.weights).max()))

    def is_pc_shaped(self, tol: float = TOL_NN) -> bool:
        return self.negativity_defect() <= tol and self.monotonicity_defect() <= tol

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "weight"])
            for j, val in enumerate(self.weights, start=1):
                w.writerow([j, repr(float(val))])

    @classmethod
    def from_csv(cls, path, grid: TimeGrid) -> "DiscreteKernel":
        with open(Path(path), newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["j"]))
        return cls(np.array([float(r["weight"]) for r in rows]), grid)


@dataclass(frozen=True)
class ResolventSet:
    gamma: float
    h: DiscreteKernel
    s: DiscreteKernel
    r: DiscreteKernel


def sample_cell_averages(pair: KernelPair, which: str, grid: TimeGrid) -> DiscreteKernel:
    """Cell averages of ``k`` (``which="K"``) or ``l`` (``which="L"``)."""
    which = which.upper()
    if which not in ("K", "L"):
        raise ValueError(f"which must be 'K' or 'L', got {which!r}")
    t = grid.nodes
    tau = grid.tau
    if pair.family == FRACTIONAL:
        beta = 1.0 - pair.alpha if which == "K" else pair.alpha
        inc = _power_increments(t, beta) / math.gamma(beta + 1.0)
    elif pair.family == TEMPERED:
        a, c = pair.alpha, pair.rate
        x0, x1 = c * t[:-1], c * t[1:]
        if which == "K":
            inc = c ** (a - 1.0) * _reg_gamma_increment(1.0 - a, x0, x1)
        else:
            inc = np.diff(pair.l_integral(t))
    elif pair.family == DISTRIBUTED:
        if which == "K":
            inc = _distributed_k_increments(t, pair.quad_nodes)
        else:
            inc = np.diff(pair.l_integral(t))
    elif pair._dirac == which:
        inc = np.eye(1, grid.N).ravel()
    else:
        inc = tau * np.ones(grid.N)
    w = inc / tau
    bad = np.flatnonzero(~np.isfinite(w))
    if bad.size:
        raise KernelQuadratureError(int(bad[0]) + 1, "non-finite cell average")
    return DiscreteKernel(w, grid)


def _distributed_k_increments(t: np.ndarray, nodes: int) -> np.ndarray:
    def rule(n):
        b, wts = _gauss_legendre_01(n)
        rows = [_power_increments(t, beta) / math.gamma(beta + 1.0) for beta in b]
        return wts @ np.array(rows)

    fine = rule(nodes)
    coarse = rule(max(8, nodes // 2))
    err = np.abs(fine - coarse) > 1e-9 * np.abs(fine) + 1e-300
    if err.any():
        raise KernelQuadratureError(int(np.argmax(err)) + 1, "beta-quadrature not converged")
    return fine


# ---------------------------------------------------------------------------
# discrete convolution


def convolve(a: DiscreteKernel, v: np.ndarray, grid: TimeGrid | None = None) -> np.ndarray:
    """``c[n] = tau * sum_{j=1..n} a[j] v[n-j+1]``, ``c[0] = 0``.

    ``v`` holds node values ``v[0..N]``; trailing axes are carried along.
    """
    if grid is not None:
        _check_same_grid(a.grid, grid)
    v = np.asarray(v, dtype=float)
    N = a.grid.N
    if v.shape[0] != N + 1:
        raise GridMismatchError(f"trajectory has {v.shape[0]} nodes, grid needs {N + 1}")
    out = np.zeros_like(v)
    if v.ndim == 1:
        out[1:] = a.grid.tau * np.convolve(a.weights, v[1:])[:N]
    else:
        flat = v[1:].reshape(N, -1)
        res = np.stack([np.convolve(a.weights, col)[:N] for col in flat.T], axis=1)
        out[1:] = a.grid.tau * res.reshape(v[1:].shape)
    return out


def kernel_convolve(a: DiscreteKernel, b: DiscreteKernel) -> DiscreteKernel:
    """``c[m] = tau * sum_{j=1..m} a[j] b[m-j+1]`` (piecewise-constant convolution at t_m)."""
    _check_same_grid(a.grid, b.grid)
    N = a.grid.N
    return DiscreteKernel(a.grid.tau * np.convolve(a.weights, b.weights)[:N], a.grid)


def _volterra_solve(l_bar: np.ndarray, gamma: float, tau: float, rhs: np.ndarray) -> np.ndarray:
    """Solve ``x + gamma * (l * x) = rhs`` by forward substitution (rhs columns)."""
    N = len(l_bar)
    x = np.zeros_like(rhs)
    c = gamma * tau
    pivot = 1.0 + c * l_bar[0]
    x[0] = rhs[0] / pivot
    for m in range(1, N):
        hist = l_bar[1 : m + 1] @ x[m - 1 :: -1]
        x[m] = (rhs[m] - c * hist) / pivot
    return x


def resolvent_kernel(l: DiscreteKernel, gamma: float) -> ResolventSet:
    """Discrete ``h_gamma``, ``s_gamma``, ``r_gamma`` for the kernel ``l``.

    Solves ``s + gamma l*s = 1``, ``r + gamma l*r = l`` and
    ``h + gamma h*l = gamma l`` with the ``kernel_convolve`` product rule.
    """
    if gamma < 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be a nonnegative number, got {gamma}")
    grid = l.grid
    lw = l.weights
    if gamma == 0:
        return ResolventSet(
            0.0,
            DiscreteKernel(np.zeros(grid.N), grid),
            DiscreteKernel(np.ones(grid.N), grid),
            DiscreteKernel(lw.copy(), grid),
        )
    rhs = np.column_stack([gamma * lw, np.ones(grid.N), lw])
    sol = _volterra_solve(lw, gamma, grid.tau, rhs)
    return ResolventSet(
        float(gamma),
        DiscreteKernel(sol[:, 0], grid),
        DiscreteKernel(sol[:, 1], grid),
        DiscreteKernel(sol[:, 2], grid),
    )


def regularized_kernel(k: DiscreteKernel, res: ResolventSet) -> DiscreteKernel:
    """``k_gamma = k * h_gamma``; warns if the result is not PC-shaped."""
    out = kernel_convolve(k, res.h)
    if res.gamma > 0 and not out.is_pc_shaped(TOL_NN):
        warnings.warn(
            f"k_gamma (gamma={res.gamma}) violates nonnegativity/monotonicity: "
            f"neg={out.negativity_defect():.3e}, mono={out.monotonicity_defect():.3e}",
            KernelShapeWarning,
            stacklevel=2,
        )
    return out


def pc_defect(k: DiscreteKernel, l: DiscreteKernel) -> np.ndarray:
    """Pointwise defect ``(k * l)[m] - 1`` for m = 1..N."""
    return kernel_convolve(k, l).weights - 1.0


def verify_pc_pair(
    pair: KernelPair | tuple[DiscreteKernel, DiscreteKernel],
    grid: TimeGrid,
    tol: float,
    norm: str = "l1",
) -> Report:
    """Check the discrete PC structure of a pair.

    ``norm="l1"`` measures the identity defect as ``(1/T) tau sum |k*l - 1|``;
    ``norm="max"`` uses ``max_m |k*l - 1|``.  The max defect never drops below
    ``|1 - 1/(Gamma(2-alpha) Gamma(1+alpha))|`` in the fractional family (the
    first cell is scale invariant), so it is always reported in ``details``.
    """
    if isinstance(pair, KernelPair):
        k = sample_cell_averages(pair, "K", grid)
        l = sample_cell_averages(pair, "L", grid)
    else:
        k, l = pair
        _check_same_grid(k.grid, grid)
        _check_same_grid(l.grid, grid)
    d = np.abs(pc_defect(k, l))
    max_defect = float(d.max())
    l1_defect = float(grid.tau * d.sum() / grid.T)
    if norm == "max":
        identity = max_defect
    elif norm == "l1":
        identity = l1_defect
    else:
        raise ValueError(f"norm must be 'l1' or 'max', got {norm!r}")
    report = Report()
    report.add(
        Check(
            f"pc_identity_{norm}",
            identity,
            tol,
            0.0,
            details={"max_defect": max_defect, "l1_defect": l1_defect, "argmax": int(d.argmax()) + 1},
        )
    )
    report.add(Check("pc_k_monotone", k.monotonicity_defect(), tol, 0.0))
    report.add(Check("pc_l_nonnegative", l.negativity_defect(), tol, 0.0))
    return report


def yosida_convergence(
    l: DiscreteKernel, f: np.ndarray, gammas: Sequence[float]
) -> list[float]:
    """L1 distance ``tau sum_n |(h_gamma * f)[n] - f[n]|`` for each gamma."""
    gammas = [float(x) for x in gammas]
    if any(x <= 0 for x in gammas) or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gammas must be positive and strictly increasing")
    f = np.asarray(f, dtype=float)
    tau = l.grid.tau
    errors = []
    for gam in gammas:
        h = resolvent_kernel(l, gam).h
        c = convolve(h, f)
        errors.append(float(tau * np.abs(c[1:] - f[1:]).sum()))
    return errors


def tabulated(weights: Sequence[float], grid: TimeGrid) -> DiscreteKernel:
    """Wrap user-supplied cell averages."""
    return DiscreteKernel(np.asarray(weights, dtype=float), grid)

