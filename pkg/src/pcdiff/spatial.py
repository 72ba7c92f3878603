"""1-D finite-volume discretization of ``-(a(t, x) u_x)_x`` on (0, L), Dirichlet.

Cells are ``[x_{i-1}, x_i]`` for i = 1..Nx; unknowns live on the interior nodes
x_1..x_{Nx-1}.  The coefficient is sampled once per cell at its midpoint, so
each face difference carries the value of its own cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lapack


class CoefficientBoundError(ValueError):
    def __init__(self, t: float, cell: int, value: float, lo: float, hi: float):
        super().__init__(f"a(t={t:g}, cell {cell}) = {value:g} outside [{lo:g}, {hi:g}]")
        self.t = t
        self.cell = cell


@dataclass(frozen=True)
class Mesh1D:
    L: float
    Nx: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if int(self.Nx) != self.Nx or self.Nx < 2:
            raise ValueError(f"Nx must be an integer >= 2, got {self.Nx}")
        object.__setattr__(self, "Nx", int(self.Nx))

    @property
    def h(self) -> float:
        return self.L / self.Nx

    @property
    def nodes(self) -> np.ndarray:
        """All nodes x_0..x_Nx including the boundary."""
        return np.linspace(0.0, self.L, self.Nx + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def midpoints(self) -> np.ndarray:
        x = self.nodes
        return 0.5 * (x[1:] + x[:-1])

    @property
    def size(self) -> int:
        return self.Nx - 1

    @property
    def poincare(self) -> float:
        return self.L / math.pi

    @property
    def poincare_discrete(self) -> float:
        return 1.0 / math.sqrt(self.lambda1)

    @property
    def lambda1(self) -> float:
        """Smallest eigenvalue of the unit-coefficient stiffness."""
        return 4.0 / self.h**2 * math.sin(math.pi * self.h / (2.0 * self.L)) ** 2


@dataclass(frozen=True)
class CoefficientField:
    a: Callable[[float, np.ndarray], np.ndarray]
    nu: float
    a_max: float

    def __post_init__(self):
        if not (0 < self.nu <= self.a_max):
            raise ValueError(f"need 0 < nu <= a_max, got nu={self.nu}, a_max={self.a_max}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "CoefficientField":
        return cls(lambda t, x: np.full_like(x, value), value, value)

    @classmethod
    def piecewise(cls, left: float, right: float, split: float) -> "CoefficientField":
        """``left`` on x < split, ``right`` on x >= split."""
        return cls(
            lambda t, x: np.where(x < split, left, right),
            min(left, right),
            max(left, right),
        )

    def cell_values(self, mesh: Mesh1D, t: float) -> np.ndarray:
        vals = np.broadcast_to(np.asarray(self.a(t, mesh.midpoints), dtype=float), (mesh.Nx,))
        bad = np.flatnonzero(~((vals >= self.nu) & (vals <= self.a_max)))
        if bad.size:
            i = int(bad[0])
            raise CoefficientBoundError(t, i + 1, float(vals[i]), self.nu, self.a_max)
        return np.array(vals)


@dataclass(frozen=True)
class StiffnessMatrix:
    """Symmetric tridiagonal matrix over interior nodes.

    ``diag`` has length Nx-1 and ``off`` (super = sub diagonal) length Nx-2.
    """

    diag: np.ndarray
    off: np.ndarray
    t: float = 0.0

    @classmethod
    def from_cell_coefficients(cls, mesh: Mesh1D, c: np.ndarray, t: float = 0.0) -> "StiffnessMatrix":
        c = np.asarray(c, dtype=float)
        h2 = mesh.h**2
        return cls((c[:-1] + c[1:]) / h2, -c[1:-1] / h2, t)

    @property
    def n(self) -> int:
        return len(self.diag)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def banded(self, shift: float | np.ndarray = 0.0) -> np.ndarray:
        """``(shift I + K)`` in the (1, 1) band layout used by ``solve_banded``."""
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.off
        ab[1] = self.diag + shift
        ab[2, :-1] = self.off
        return ab

    def solve(self, rhs: np.ndarray, shift: float | np.ndarray = 0.0) -> np.ndarray:
        return solve_tridiagonal(self.off, self.diag + shift, self.off, rhs)


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Gaussian elimination with partial pivoting (LAPACK gtsv); rhs may be 2-D."""
    *_, x, info = lapack.dgtsv(lower, diag, upper, rhs)
    if info != 0:
        raise np.linalg.LinAlgError(f"singular tridiagonal system (gtsv info={info})")
    return x


def assemble(mesh: Mesh1D, coeff: CoefficientField, t: float) -> StiffnessMatrix:
    return StiffnessMatrix.from_cell_coefficients(mesh, coeff.cell_values(mesh, t), t)


def unit_stiffness(mesh: Mesh1D) -> StiffnessMatrix:
    return StiffnessMatrix.from_cell_coefficients(mesh, np.ones(mesh.Nx))


def hminus1_norm(mesh: Mesh1D, w: np.ndarray) -> float:
    """Discrete dual norm ``sqrt(h * w^T K1^{-1} w)`` of an interior node vector."""
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return 0.0
    z = unit_stiffness(mesh).solve(w)
    return math.sqrt(max(mesh.h * float(w @ z), 0.0))


def hminus1_norms(mesh: Mesh1D, W: np.ndarray) -> np.ndarray:
    """Row-wise ``hminus1_norm`` for a stack of interior vectors."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    Z = unit_stiffness(mesh).solve(W.T).T
    return np.sqrt(np.maximum(mesh.h * np.einsum("ij,ij->i", W, Z), 0.0))


def gradient(mesh: Mesh1D, w: np.ndarray) -> np.ndarray:
    """Forward differences over all Nx cells with zero boundary values."""
    w = np.asarray(w, dtype=float)
    pad = [(0, 0)] * (w.ndim - 1) + [(1, 1)]
    return np.diff(np.pad(w, pad), axis=-1) / mesh.h


def norms(mesh: Mesh1D, w: np.ndarray, tau: float | None = None) -> dict[str, float]:
    """L1, L2, Linf and L2-of-gradient of a field or a trajectory.

    A trajectory has shape ``(N+1, Nx-1)``; time sums use the right-endpoint
    rule over n = 1..N with weight ``tau``.
    """
    w = np.asarray(w, dtype=float)
    h = mesh.h
    if w.ndim == 1:
        gw = gradient(mesh, w)
        return {
            "L1": float(h * np.abs(w).sum()),
            "L2": float(math.sqrt(h * (w * w).sum())),
            "Linf": float(np.abs(w).max(initial=0.0)),
            "grad_L2": float(math.sqrt(h * (gw * gw).sum())),
        }
    if tau is None:
        raise ValueError("trajectory norms need the time step tau")
    body = w[1:]
    gw = gradient(mesh, body)
    return {
        "L1": float(tau * h * np.abs(body).sum()),
        "L2": float(math.sqrt(tau * h * (body * body).sum())),
        "Linf": float(np.abs(w).max(initial=0.0)),
        "grad_L2": float(math.sqrt(tau * h * (gw * gw).sum())),
    }
