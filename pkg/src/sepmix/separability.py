"""Separability verdicts for two-qubit (and qubit-qutrit) states and mixtures.

In 2x2 and 2x3 a negative partial transpose is equivalent to entanglement, so
the PPT test decides separability exactly there and nowhere else; other
dimensions are refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .fano import fano_decompose, in_octahedron
from .operators import (
    PSD_TOL,
    DensityOperator,
    DimensionError,
    Side,
    as_density,
    hermitian_eigenvalues,
    partial_transpose,
)
from .states import MixtureSpec, Provenance, mix

ZERO_WEIGHT = 1e-12
SUPPORTED_DIMS = {(2, 2), (2, 3), (3, 2)}


class Status(Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"


class Method(Enum):
    PPT = "PPT"
    OCTAHEDRON = "OctahedronGeometry"


class Verdict(Enum):
    ENTANGLED = "Entangled"
    PROPERLY_SEPARABLE = "ProperlySeparable"
    IMPROPERLY_SEPARABLE = "ImproperlySeparable"
    SEPARABLE_UNKNOWN_COMPOSITION = "SeparableUnknownComposition"


class UnsupportedDimensionsError(DimensionError):
    pass


class NoSignChangeError(ValueError):
    pass


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


@dataclass(frozen=True)
class SeparabilityVerdict:
    status: Status
    witness: float
    method: Method = Method.PPT

    @property
    def entangled(self) -> bool:
        return self.status is Status.ENTANGLED


@dataclass(frozen=True)
class CHSHReport:
    M: float
    max_chsh: float
    violates: bool


@dataclass(frozen=True)
class ComponentVerdict:
    tag: int
    weight: float
    verdict: SeparabilityVerdict
    chsh: CHSHReport | None


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    per_component: tuple[ComponentVerdict, ...]
    ensemble: SeparabilityVerdict

    def __post_init__(self):
        comps = [c.verdict for c in self.per_component]
        ok = True
        if self.verdict is Verdict.IMPROPERLY_SEPARABLE:
            ok = not self.ensemble.entangled and any(v.entangled for v in comps)
        elif self.verdict is Verdict.PROPERLY_SEPARABLE:
            ok = not self.ensemble.entangled and not any(v.entangled for v in comps)
        elif self.verdict is Verdict.ENTANGLED:
            ok = self.ensemble.entangled
        if not ok:
            raise InvariantError(f"inconsistent classification {self.verdict.value}")


def ppt_witness(rho, dims=None, side: Side = Side.B) -> float:
    """Minimum eigenvalue of the partial transpose."""
    rho = as_density(rho)
    dims = tuple(dims or rho.dims or ())
    if dims not in SUPPORTED_DIMS:
        raise UnsupportedDimensionsError(
            f"PPT decides separability only for 2x2 and 2x3 systems, got dims {dims or None}")
    return float(hermitian_eigenvalues(partial_transpose(rho.matrix, dims, side))[0])


def ppt_classify(rho, tol: float = PSD_TOL, dims=None, side: Side = Side.B) -> SeparabilityVerdict:
    w = ppt_witness(rho, dims, side)
    status = Status.ENTANGLED if w < -tol else Status.SEPARABLE
    return SeparabilityVerdict(status, w, Method.PPT)


def octahedron_classify(c, tol: float = 1e-9) -> SeparabilityVerdict:
    """Geometric verdict for a Bell-diagonal state given its c-vector.

    The witness here is ``1 - |c|_1`` (negative outside the octahedron).
    """
    c = np.asarray(c, dtype=float)
    region = in_octahedron(c, tol)
    status = Status.SEPARABLE if region.closed_member else Status.ENTANGLED
    return SeparabilityVerdict(status, 1.0 - float(np.abs(c).sum()), Method.OCTAHEDRON)


def chsh_m(rho) -> float:
    """Sum of the two largest eigenvalues of ``C^T C``."""
    C = fano_decompose(rho).C
    ev = hermitian_eigenvalues(C.T @ C)
    return float(ev[-1] + ev[-2])


def chsh_criterion(rho, tol: float = PSD_TOL) -> CHSHReport:
    """Maximal CHSH value over all local spin settings, ``2 sqrt(M)``."""
    M = chsh_m(rho)
    return CHSHReport(M, 2.0 * math.sqrt(max(M, 0.0)), M > 1.0 + tol)


def classify_mixture(spec: MixtureSpec, tol: float = PSD_TOL) -> Classification:
    """Proper/improper separability of a declared mixture.

    The ensemble verdict comes from the mixed density operator alone. Only a
    proper preparation lets the component states be asked about; a reduced
    description that is separable has no composition to inspect.
    """
    ensemble = ppt_classify(mix(spec), tol)
    per_component = []
    for comp in spec.components:
        if comp.weight <= ZERO_WEIGHT:
            continue
        rho = comp.density()
        chsh = chsh_criterion(rho, tol) if rho.dim == 4 else None
        per_component.append(ComponentVerdict(comp.tag, comp.weight, ppt_classify(rho, tol), chsh))

    if ensemble.entangled:
        verdict = Verdict.ENTANGLED
    elif spec.provenance is Provenance.REDUCED_ONLY:
        verdict = Verdict.SEPARABLE_UNKNOWN_COMPOSITION
    elif any(c.verdict.entangled for c in per_component):
        verdict = Verdict.IMPROPERLY_SEPARABLE
    else:
        verdict = Verdict.PROPERLY_SEPARABLE
    return Classification(verdict, tuple(per_component), ensemble)


Score = Callable[[DensityOperator], float]


def _ppt_score(rho: DensityOperator) -> float:
    return ppt_witness(rho)


def _chsh_score(rho: DensityOperator) -> float:
    return 1.0 - chsh_m(rho)


CRITERIA: dict[str, Score] = {"ppt": _ppt_score, "chsh": _chsh_score}


def separability_boundary(family: Callable[[float], DensityOperator], lo: float, hi: float,
                          tol: float = 1e-9, criterion: Union[str, Score] = "ppt") -> float:
    """Bisect for the parameter where ``criterion`` changes sign along ``family``.

    ``criterion`` maps a state to a score that is nonnegative on the
    "classical" side: the PPT witness by default, or ``1 - M`` for the CHSH
    criterion. Raises ``NoSignChangeError`` when both ends agree.
    """
    score = CRITERIA[criterion] if isinstance(criterion, str) else criterion

    def side(x: float) -> bool:
        return score(family(x)) < 0.0

    lo, hi = float(lo), float(hi)
    s_lo, s_hi = side(lo), side(hi)
    if s_lo == s_hi:
        raise NoSignChangeError(f"criterion does not change sign on [{lo}, {hi}]")
    while hi - lo > tol:
        midpoint = 0.5 * (lo + hi)
        if midpoint in (lo, hi):
            break
        if side(midpoint) == s_lo:
            lo = midpoint
        else:
            hi = midpoint
    return 0.5 * (lo + hi)
