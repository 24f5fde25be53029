"""Named two-qubit states and convex mixing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .fano import BELL_C_VECTORS
from .operators import PAULIS, DensityOperator, PureState, as_density, projector

WEIGHT_TOL = 1e-12

_R = 1.0 / math.sqrt(2.0)


class BellKind(Enum):
    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self) -> str:
        return _BELL_LABELS[self]


_BELL_LABELS = {
    BellKind.PHI_PLUS: "phi+",
    BellKind.PHI_MINUS: "phi-",
    BellKind.PSI_PLUS: "psi+",
    BellKind.PSI_MINUS: "psi-",
}

_BELL_AMPLITUDES = {
    BellKind.PHI_PLUS: (_R, 0, 0, _R),
    BellKind.PHI_MINUS: (_R, 0, 0, -_R),
    BellKind.PSI_PLUS: (0, _R, _R, 0),
    BellKind.PSI_MINUS: (0, _R, -_R, 0),
}


def bell_state(kind: BellKind) -> PureState:
    return PureState(np.array(_BELL_AMPLITUDES[BellKind(kind)], dtype=complex))


def bell_basis() -> list[PureState]:
    return [bell_state(k) for k in BellKind]


def product_state(*bits: int) -> PureState:
    """Computational basis state, 0 = up, 1 = down; ``product_state(0, 1)`` is |up down>."""
    index = 0
    for b in bits:
        index = 2 * index + int(b)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[index] = 1.0
    return PureState(v)


def product_basis() -> list[PureState]:
    return [product_state(i, j) for i in (0, 1) for j in (0, 1)]


def maximally_mixed(dim: int = 4) -> DensityOperator:
    return DensityOperator(np.eye(dim, dtype=complex) / dim)


class Provenance(Enum):
    """Whether a mixture was declared by a preparation (proper) or only known
    as a reduced description (improper)."""

    PROPER_PREPARATION = "proper"
    REDUCED_ONLY = "reduced"


State = Union[PureState, DensityOperator]


@dataclass(frozen=True)
class Component:
    weight: float
    state: State
    tag: int

    def density(self) -> DensityOperator:
        return as_density(self.state)


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple[Component, ...]
    provenance: Provenance = Provenance.PROPER_PREPARATION

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        weights = np.array([c.weight for c in comps], dtype=float)
        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError(f"weights must be finite and nonnegative, got {weights.tolist()}")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        tags = [c.tag for c in comps]
        if len(set(tags)) != len(tags):
            raise ValueError(f"component tags must be unique, got {tags}")
        dims = {_state_dim(c.state) for c in comps}
        if len(dims) != 1:
            raise ValueError(f"components have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @classmethod
    def of(cls, weights: Sequence[float], states: Sequence[State], tags: Sequence[int] | None = None,
           provenance: Provenance = Provenance.PROPER_PREPARATION) -> "MixtureSpec":
        if tags is None:
            tags = range(len(states))
        if not (len(weights) == len(states) == len(tags)):
            raise ValueError("weights, states and tags must have equal length")
        comps = tuple(Component(float(w), s, int(t)) for w, s, t in zip(weights, states, tags))
        return cls(comps, provenance)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def tags(self) -> list[int]:
        return [c.tag for c in self.components]

    @property
    def dim(self) -> int:
        return _state_dim(self.components[0].state)

    def component(self, tag: int) -> Component:
        for c in self.components:
            if c.tag == tag:
                return c
        raise KeyError(tag)

    def is_pure(self) -> bool:
        return all(isinstance(c.state, PureState) for c in self.components)


def _state_dim(state: State) -> int:
    return state.dim


def _state_matrix(state: State) -> np.ndarray:
    if isinstance(state, PureState):
        return projector(state.amplitudes)
    return state.matrix


def mix(spec: MixtureSpec) -> DensityOperator:
    """The ensemble density operator ``sum_j w_j rho_j``."""
    rho = sum(c.weight * _state_matrix(c.state) for c in spec.components)
    dims = next((c.state.dims for c in spec.components if isinstance(c.state, DensityOperator)), None)
    return DensityOperator(rho, dims)


def werner(lam: float) -> DensityOperator:
    """``lam |psi-><psi-| + (1 - lam) 1/4``, for ``lam`` in [0, 1]."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {lam!r}")
    singlet = projector(bell_state(BellKind.PSI_MINUS).amplitudes)
    return DensityOperator(lam * singlet + (1.0 - lam) * np.eye(4) / 4)


def werner_bell_weights(lam: float) -> np.ndarray:
    q = (1.0 - lam) / 4
    return np.array([q, q, q, (1.0 + 3.0 * lam) / 4])


def bell_diagonal(p: Sequence[float]) -> DensityOperator:
    """``sum_k p_k |bell_k><bell_k|`` with ``p`` in (phi+, phi-, psi+, psi-) order."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"need four Bell weights, got shape {p.shape}")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or abs(p.sum() - 1.0) > WEIGHT_TOL:
        raise ValueError(f"Bell weights must be a probability vector, got {p.tolist()}")
    # built from the diagonal correlation form, which is exact for dyadic weights
    c = p @ BELL_C_VECTORS
    rho = np.eye(4, dtype=complex)
    for ck, s in zip(c, PAULIS):
        rho = rho + ck * np.kron(s, s)
    return DensityOperator(rho / 4)
