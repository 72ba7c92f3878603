"""Discrete nonlocal derivative ``d/dt (k * [v - v0])`` (L1-type scheme).

With ``v`` interpolated piecewise linearly between nodes,

    D[n] = sum_{j=1..n} k[n-j+1] (v[j] - v[j-1]),

which is exact for that interpolant when ``k`` is given by its cell averages.
For ``k = g_{1-alpha}`` these are the classical L1 coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import DiscreteKernel, GridMismatchError, TOL_NN


@dataclass(frozen=True)
class NonlocalOperator:
    k: DiscreteKernel

    def __post_init__(self):
        if not self.k.is_pc_shaped(TOL_NN):
            raise ValueError(
                "kernel must be nonnegative and nonincreasing "
                f"(neg={self.k.negativity_defect():.2e}, mono={self.k.monotonicity_defect():.2e})"
            )

    @property
    def grid(self):
        return self.k.grid


def _prepare(op: NonlocalOperator, v, v0) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != op.grid.N + 1:
        raise GridMismatchError(f"trajectory has {v.shape[0]} nodes, grid needs {op.grid.N + 1}")
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), v.shape[1:])
    if np.max(np.abs(v[0] - v0), initial=0.0) > 1e-14:
        raise ValueError("trajectory must start at v0")
    return v


def apply(op: NonlocalOperator, v, v0) -> np.ndarray:
    """Return ``D`` with ``D[0] = 0`` and ``D[n]`` as above for n = 1..N.

    ``v`` has shape ``(N+1,)`` or ``(N+1, P)``; the time axis comes first.
    """
    v = _prepare(op, v, v0)
    N = op.grid.N
    dv = np.diff(v, axis=0)
    out = np.zeros_like(v)
    kw = op.k.weights
    if v.ndim == 1:
        out[1:] = np.convolve(kw, dv)[:N]
    else:
        flat = dv.reshape(N, -1)
        cols = [np.convolve(kw, c)[:N] for c in flat.T]
        out[1:] = np.stack(cols, axis=1).reshape(dv.shape)
    return out


def history_sum(k: np.ndarray, dv: np.ndarray, n: int) -> np.ndarray:
    """``sum_{j=1..n-1} k[n-j+1] (v[j] - v[j-1])`` given ``dv[j-1] = v[j] - v[j-1]``."""
    if n <= 1:
        return np.zeros(dv.shape[1:])
    return k[n - 1 : 0 : -1] @ dv[: n - 1]


def implicit_split(op: NonlocalOperator, history) -> tuple[float, np.ndarray | float]:
    """Split ``D[n] = diag * v[n] - rhs_history`` given ``history = v[0..n-1]``."""
    history = np.asarray(history, dtype=float)
    n = history.shape[0]
    if n < 1:
        raise ValueError("history must contain at least v[0]")
    if n > op.grid.N:
        raise GridMismatchError("history longer than the grid")
    kw = op.k.weights
    diag = float(kw[0])
    hist = history_sum(kw, np.diff(history, axis=0), n)
    rhs = diag * history[-1] - hist
    return diag, (float(rhs) if history.ndim == 1 else rhs)


def convexity_margin(
    op: NonlocalOperator,
    H: Callable[[np.ndarray], np.ndarray],
    dH: Callable[[np.ndarray], np.ndarray],
    v,
    v0,
) -> float:
    """``min_n [H'(v[n]) D_v[n] - D_{H(v)}[n]]`` over n = 1..N (and nodes)."""
    v = _prepare(op, v, v0)
    Hv = H(v)
    lhs = dH(v) * apply(op, v, v[0])
    rhs = apply(op, Hv, Hv[0])
    return float(np.min(lhs[1:] - rhs[1:]))
