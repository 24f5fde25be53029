"""Pauli (Fano) decomposition of two-qubit states and Bell-diagonal geometry.

A Bell-diagonal state is fixed by the diagonal of its correlation matrix,
``c = (c_xx, c_yy, c_zz)``. Valid states fill the tetrahedron spanned by the
four Bell vertices; the separable ones fill the octahedron ``|c|_1 <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .operators import IDENTITY2, PAULIS, DimensionError, as_density

IMAG_TOL = 1e-12
GEOMETRY_TOL = 1e-9

# rows in (phi+, phi-, psi+, psi-) order
BELL_C_VECTORS = np.array([
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, -1.0],
])
BELL_C_VECTORS.setflags(write=False)

OCTAHEDRON_VERTICES = np.vstack([np.eye(3), -np.eye(3)])
OCTAHEDRON_VERTICES.setflags(write=False)

_LOCAL_A = [np.kron(s, IDENTITY2) for s in PAULIS]
_LOCAL_B = [np.kron(IDENTITY2, s) for s in PAULIS]
_CORR = [[np.kron(si, sj) for sj in PAULIS] for si in PAULIS]


class Region(Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"

    @property
    def closed_member(self) -> bool:
        return self is not Region.OUTSIDE


@dataclass(frozen=True)
class FanoForm:
    a: np.ndarray
    b: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        b = np.asarray(self.b, dtype=float).reshape(3)
        C = np.asarray(self.C, dtype=float).reshape(3, 3)
        for arr in (a, b, C):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "C", C)

    @property
    def c_vector(self) -> np.ndarray:
        return np.diag(self.C).copy()

    def is_bell_diagonal(self, tol: float = 1e-12) -> bool:
        off = self.C - np.diag(np.diag(self.C))
        return bool(np.max(np.abs(self.a)) <= tol and np.max(np.abs(self.b)) <= tol
                    and np.max(np.abs(off)) <= tol)


def _expect(rho: np.ndarray, op: np.ndarray) -> float:
    val = complex(np.trace(rho @ op))
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"expectation value has imaginary residue {val.imag:.3e}")
    return val.real


def fano_decompose(rho) -> FanoForm:
    """Local Bloch vectors and correlation matrix of a two-qubit state."""
    rho = as_density(rho)
    M = rho.matrix
    if M.shape != (4, 4):
        raise DimensionError(f"Fano decomposition needs a 4x4 operator, got {M.shape}")
    a = [_expect(M, op) for op in _LOCAL_A]
    b = [_expect(M, op) for op in _LOCAL_B]
    C = [[_expect(M, op) for op in row] for row in _CORR]
    return FanoForm(a, b, C)


def fano_reconstruct(f: FanoForm) -> np.ndarray:
    """Operator ``(1 + a.s x 1 + 1 x b.s + sum c_ij s_i x s_j) / 4``; not validated."""
    M = np.eye(4, dtype=complex)
    for i in range(3):
        M = M + f.a[i] * _LOCAL_A[i] + f.b[i] * _LOCAL_B[i]
        for j in range(3):
            M = M + f.C[i, j] * _CORR[i][j]
    return M / 4


def bell_diagonal_fano(c) -> FanoForm:
    return FanoForm(np.zeros(3), np.zeros(3), np.diag(np.asarray(c, dtype=float)))


def bell_weights_from_c(c) -> np.ndarray:
    """Bell mixing weights ``p_k = (1 + c . c_k) / 4`` reproducing ``c``."""
    c = np.asarray(c, dtype=float).reshape(3)
    return (1.0 + BELL_C_VECTORS @ c) / 4.0


def c_from_bell_weights(p) -> np.ndarray:
    return np.asarray(p, dtype=float) @ BELL_C_VECTORS


def _band(value: float, tol: float) -> Region:
    # value > 0 strictly inside, < 0 outside
    if value > tol:
        return Region.INSIDE
    if value < -tol:
        return Region.OUTSIDE
    return Region.BOUNDARY


def in_octahedron(c, tol: float = GEOMETRY_TOL) -> Region:
    c = np.asarray(c, dtype=float).reshape(3)
    return _band(1.0 - float(np.sum(np.abs(c))), tol)


def in_tetrahedron(c, tol: float = GEOMETRY_TOL) -> Region:
    c = np.asarray(c, dtype=float).reshape(3)
    return _band(float(np.min(1.0 + BELL_C_VECTORS @ c)), tol)


def _l1(point: np.ndarray) -> float:
    return float(np.sum(np.abs(point)))


def path_crossing(c_start, c_end, tol: float = 1e-12) -> Optional[float]:
    """Smallest ``t`` in [0, 1] where ``(1-t) c_start + t c_end`` has unit L1 norm.

    The L1 norm is linear between the points where a coordinate changes sign,
    so each such piece is solved in closed form. Returns ``None`` when the
    segment never reaches the octahedron surface.
    """
    s = np.asarray(c_start, dtype=float).reshape(3)
    d = np.asarray(c_end, dtype=float).reshape(3) - s
    knots = {0.0, 1.0}
    for si, di in zip(s, d):
        if di != 0.0:
            t = -si / di
            if 0.0 < t < 1.0:
                knots.add(t)
    knots = sorted(knots)

    def g(t: float) -> float:
        return _l1(s + t * d) - 1.0

    if abs(g(0.0)) <= tol:
        return 0.0
    for t0, t1 in zip(knots[:-1], knots[1:]):
        g0, g1 = g(t0), g(t1)
        if abs(g1) <= tol:
            return t1
        if g0 * g1 < 0.0:
            return t0 + (t1 - t0) * g0 / (g0 - g1)
    return None


def crossing_point(c_start, c_end) -> Optional[np.ndarray]:
    t = path_crossing(c_start, c_end)
    if t is None:
        return None
    s = np.asarray(c_start, dtype=float)
    return s + t * (np.asarray(c_end, dtype=float) - s)
