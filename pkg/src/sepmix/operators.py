"""Dense complex-matrix kernel for small bipartite systems.

Basis convention: qubit ``e0 = |up>``, ``e1 = |down>``; tensor products are
A-major, so ``tensor(A, B)[i*dB + k, j*dB + l] == A[i, j] * B[k, l]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-9
NORM_TOL = 1e-12
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 64

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


class Side(Enum):
    A = 0
    B = 1


class DimensionError(ValueError):
    pass


class DensityError(ValueError):
    """A matrix failed density-operator validation.

    ``invariant`` names the violated property and ``magnitude`` how badly it
    was violated (max entrywise asymmetry, trace deviation, or the most
    negative eigenvalue).
    """

    invariant = "density"

    def __init__(self, magnitude: float, message: str | None = None):
        self.magnitude = float(magnitude)
        super().__init__(message or f"{self.invariant} violated (magnitude {self.magnitude:.3e})")


class HermiticityError(DensityError):
    invariant = "hermiticity"


class TraceError(DensityError):
    invariant = "trace"


class PositivityError(DensityError):
    invariant = "positivity"


def as_matrix(M) -> np.ndarray:
    """Coerce to a finite 2-D complex array (copy)."""
    arr = np.array(M, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def _square(M: np.ndarray) -> int:
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M.shape[0]


def _bipartite(M: np.ndarray, dims) -> tuple[int, int]:
    d_a, d_b = (int(d) for d in dims)
    if d_a < 1 or d_b < 1 or _square(M) != d_a * d_b:
        raise DimensionError(f"matrix of shape {M.shape} does not factor as {d_a}x{d_b}")
    return d_a, d_b


def tensor(A, B) -> np.ndarray:
    """Kronecker product, ``A`` as the slow index."""
    return np.kron(as_matrix(A), as_matrix(B))


def ket(vector) -> np.ndarray:
    return np.asarray(vector, dtype=complex).reshape(-1)


def projector(vector) -> np.ndarray:
    v = ket(vector)
    return np.outer(v, v.conj())


def partial_trace(M, dims, keep: Side = Side.A) -> np.ndarray:
    """Reduced operator on the ``keep`` factor of a ``d_A x d_B`` operator."""
    M = as_matrix(M)
    d_a, d_b = _bipartite(M, dims)
    t = M.reshape(d_a, d_b, d_a, d_b)
    if Side(keep) is Side.A:
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def partial_transpose(M, dims, side: Side = Side.B) -> np.ndarray:
    M = as_matrix(M)
    d_a, d_b = _bipartite(M, dims)
    t = M.reshape(d_a, d_b, d_a, d_b)
    if Side(side) is Side.B:
        t = t.transpose(0, 3, 2, 1)
    else:
        t = t.transpose(2, 1, 0, 3)
    return t.reshape(d_a * d_b, d_a * d_b)


def _check_hermitian(M: np.ndarray, tol: float) -> float:
    asym = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if asym > tol:
        raise HermiticityError(asym)
    return asym


def jacobi_eigh(M, tol: float = JACOBI_OFF_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS,
                vectors: bool = True):
    """Cyclic complex Jacobi diagonalisation of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns (``None`` when ``vectors`` is false). Iterates until the off-diagonal Frobenius norm
    falls below ``tol * max(1, ||M||_F)``.
    """
    M = as_matrix(M)
    n = _square(M)
    _check_hermitian(M, HERMITIAN_TOL * max(1.0, float(np.max(np.abs(M)))))
    # symmetrise, then work on plain Python lists: for n <= 8 this beats
    # numpy's per-call overhead by a wide margin
    H = 0.5 * (M + M.conj().T)
    a = [[complex(H[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = max(1.0, math.sqrt(sum(abs(x) ** 2 for row in a for x in row)))
    threshold = tol * scale

    for _ in range(max_sweeps):
        off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                # phase rotation makes a_pq real, then a real Givens rotation kills it
                phase = apq / r
                app = a[p][p].real
                aqq = a[q][q].real
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = [[c, s], [-s*conj(phase), c*conj(phase)]] acting on columns (p, q)
                gp0, gp1 = c, s
                gq0, gq1 = -s * phase.conjugate(), c * phase.conjugate()
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = akp * gp0 + akq * gq0
                    a[k][q] = akp * gp1 + akq * gq1
                if vectors:
                    for k in range(n):
                        vkp, vkq = v[k][p], v[k][q]
                        v[k][p] = vkp * gp0 + vkq * gq0
                        v[k][q] = vkp * gp1 + vkq * gq1
                cg0, cg1 = gp0, gq0.conjugate()
                ch0, ch1 = gp1, gq1.conjugate()
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = cg0 * apk + cg1 * aqk
                    a[q][k] = ch0 * apk + ch1 * aqk
                a[p][q] = 0j
                a[q][p] = 0j
                a[p][p] = complex(a[p][p].real, 0.0)
                a[q][q] = complex(a[q][q].real, 0.0)
    else:
        off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off >= threshold:
            raise ArithmeticError(f"Jacobi did not converge (off-diagonal norm {off:.3e})")

    evals = np.array([a[i][i].real for i in range(n)])
    order = np.argsort(evals, kind="stable")
    vecs = np.array(v, dtype=complex)[:, order] if vectors else None
    return evals[order], vecs


def hermitian_eigenvalues(M) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending, with multiplicity."""
    return jacobi_eigh(M, vectors=False)[0]


def min_eigenvalue(M) -> float:
    return float(hermitian_eigenvalues(M)[0])


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = ket(self.amplitudes).copy()
        if amp.size == 0 or not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be a finite non-empty vector")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm {norm!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, vector) -> "PureState":
        v = ket(vector)
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self, dims=None) -> "DensityOperator":
        return DensityOperator(projector(self.amplitudes), dims)


def _default_dims(dim: int):
    return (2, 2) if dim == 4 else None


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, PSD matrix. Validated on construction."""

    matrix: np.ndarray
    dims: tuple[int, int] | None = None
    tol_psd: float = field(default=PSD_TOL, repr=False, compare=False)

    def __post_init__(self):
        M = as_matrix(self.matrix)
        n = _square(M)
        _check_hermitian(M, HERMITIAN_TOL)
        tr = complex(np.trace(M))
        dev = abs(tr - 1.0)
        if dev > TRACE_TOL:
            raise TraceError(dev, f"trace violated: trace is {tr.real:.17g} (deviation {dev:.3e})")
        lo = min_eigenvalue(M)
        if lo < -self.tol_psd:
            raise PositivityError(lo, f"positivity violated: minimum eigenvalue {lo:.17g}")
        dims = self.dims if self.dims is not None else _default_dims(n)
        if dims is not None:
            dims = (int(dims[0]), int(dims[1]))
            _bipartite(M, dims)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduced(self, keep: Side = Side.A) -> np.ndarray:
        if self.dims is None:
            raise DimensionError("operator has no bipartite factorisation")
        return partial_trace(self.matrix, self.dims, keep)


def validate_density(M, tol_psd: float = PSD_TOL, dims=None) -> DensityOperator:
    """Validate ``M`` as a density operator.

    Raises a ``HermiticityError``, ``TraceError`` or ``PositivityError``
    (all ``DensityError``) naming the first violated invariant.
    """
    if isinstance(M, DensityOperator):
        M = M.matrix
    return DensityOperator(M, dims, tol_psd)


def as_density(state, dims=None) -> DensityOperator:
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, PureState):
        return state.density(dims)
    return validate_density(state, dims=dims)


def trace_distance(A, B) -> float:
    """Half the trace norm of ``A - B`` (Hermitian inputs)."""
    if isinstance(A, DensityOperator):
        A = A.matrix
    if isinstance(B, DensityOperator):
        B = B.matrix
    return 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(as_matrix(A) - as_matrix(B)))))


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(v)


__all__ = [
    "IDENTITY2", "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "PAULIS", "Side",
    "DimensionError", "DensityError", "HermiticityError", "TraceError", "PositivityError",
    "as_matrix", "tensor", "ket", "projector", "partial_trace", "partial_transpose",
    "jacobi_eigh", "hermitian_eigenvalues", "min_eigenvalue",
    "PureState", "DensityOperator", "validate_density", "as_density",
    "trace_distance", "random_pure_state",
]
