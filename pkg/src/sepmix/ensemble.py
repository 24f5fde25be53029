"""Simulated preparation procedures: tagged runs, place selection, Born sampling.

A preparation device picks component ``j`` with probability ``w_j`` on every
run; the run's tag records which one. Whoever holds the tags sees a proper
mixture and can sort the runs; a tag-blind observer only has ``mix(spec)``.

Randomness is counter-based (Philox4x64 keyed by the master seed), so the
draw for run ``r`` is a pure function of ``(seed, r)`` and any chunking or
parallel evaluation reproduces the same record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .fano import fano_decompose
from .operators import (
    IDENTITY2,
    PAULIS,
    DensityOperator,
    PureState,
    as_density,
    jacobi_eigh,
    partial_trace,
    Side,
)
from .states import MixtureSpec, Provenance, mix

RNG_ALGORITHMS = ("philox4x64",)
UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12
TYPICALITY_CAP = 1000
_U64 = 1 << 64


class TagAccessError(PermissionError):
    """A tag-aware operation was attempted on a tag-blind view."""


# -- randomness ---------------------------------------------------------------

def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _check_algorithm(name: str) -> str:
    if name not in RNG_ALGORITHMS:
        raise ValueError(f"unknown rng_algorithm {name!r}; known: {', '.join(RNG_ALGORITHMS)}")
    return name


def per_run_seeds(seed: int, n_runs: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit Philox outputs for runs ``start .. start + n_runs - 1``."""
    block, offset = divmod(int(start), 4)
    bg = np.random.Philox(key=_check_seed(seed), counter=block)
    return bg.random_raw(offset + int(n_runs))[offset:].astype(np.uint64)


def per_run_seed(seed: int, run_id: int) -> int:
    return int(per_run_seeds(seed, 1, run_id)[0])


def _uniforms(raw: np.ndarray) -> np.ndarray:
    # same 53-bit mapping numpy uses for Generator.random()
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _draw_indices(weights: np.ndarray, raw: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights)[:-1]
    return np.searchsorted(cum, _uniforms(raw), side="right")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for auxiliary sampling (measurements etc.)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed), spawn_key=key)))


# -- preparation records -----------------------------------------------------------

@dataclass(frozen=True)
class PreparationConfig:
    spec: MixtureSpec
    n_runs: int
    seed: int
    rng_algorithm: str = "philox4x64"

    def __post_init__(self):
        if int(self.n_runs) < 1:
            raise ValueError("n_runs must be at least 1")
        object.__setattr__(self, "n_runs", int(self.n_runs))
        object.__setattr__(self, "seed", _check_seed(self.seed))
        _check_algorithm(self.rng_algorithm)


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    tag: int
    per_run_seed: int


@dataclass(frozen=True, eq=False)
class EnsembleRecord:
    config: PreparationConfig
    tags: np.ndarray
    per_run_seeds: np.ndarray

    def __post_init__(self):
        tags = np.asarray(self.tags, dtype=np.int64)
        if tags.shape != (self.config.n_runs,):
            raise ValueError("one tag per run required")
        unknown = set(np.unique(tags).tolist()) - set(self.config.spec.tags)
        if unknown:
            raise ValueError(f"tags {sorted(unknown)} are not spec tags")
        tags.setflags(write=False)
        object.__setattr__(self, "tags", tags)

    def __eq__(self, other):
        if not isinstance(other, EnsembleRecord):
            return NotImplemented
        return (self.config == other.config and np.array_equal(self.tags, other.tags)
                and np.array_equal(self.per_run_seeds, other.per_run_seeds))

    __hash__ = None

    @property
    def n_runs(self) -> int:
        return self.config.n_runs

    @property
    def run_ids(self) -> np.ndarray:
        return np.arange(self.n_runs)

    @cached_property
    def records(self) -> list[RunRecord]:
        return [RunRecord(i, int(t), int(s))
                for i, (t, s) in enumerate(zip(self.tags, self.per_run_seeds))]

    def blind_view(self) -> "BlindEnsemble":
        return BlindEnsemble(self.n_runs, mix(self.config.spec))

    def sub(self, run_ids) -> "SubEnsemble":
        return SubEnsemble(self, np.asarray(run_ids, dtype=np.int64))

    def tag_counts(self) -> dict[int, int]:
        return {t: int(np.count_nonzero(self.tags == t)) for t in self.config.spec.tags}


@dataclass(frozen=True)
class BlindEnsemble:
    """What an observer uncorrelated with the preparation has: run ids and the
    ensemble density operator, no tags."""

    n_runs: int
    density: DensityOperator

    @property
    def run_ids(self) -> np.ndarray:
        return np.arange(self.n_runs)


@dataclass(frozen=True, eq=False)
class SubEnsemble:
    parent: EnsembleRecord
    run_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.run_ids)

    @property
    def tags(self) -> np.ndarray:
        return self.parent.tags[self.run_ids]


def run_preparation(config: PreparationConfig) -> EnsembleRecord:
    _check_algorithm(config.rng_algorithm)
    raw = per_run_seeds(config.seed, config.n_runs)
    idx = _draw_indices(config.spec.weights, raw)
    tags = np.asarray(config.spec.tags, dtype=np.int64)[idx]
    return EnsembleRecord(config, tags, raw)


def build_joint_state(spec: MixtureSpec) -> PureState:
    """Die-and-object state ``sum_j sqrt(w_j) |d_j> |psi_j>`` (die as the left factor)."""
    if not spec.is_pure():
        raise ValueError("joint die-object state needs pure components")
    n = len(spec.components)
    psi = np.zeros(n * spec.dim, dtype=complex)
    for j, comp in enumerate(spec.components):
        die = np.zeros(n)
        die[j] = 1.0
        psi += math.sqrt(comp.weight) * np.kron(die, comp.state.amplitudes)
    return PureState(psi)


def reduce_joint_state(spec: MixtureSpec) -> np.ndarray:
    """Object-system operator obtained by tracing the die out of the joint state."""
    joint = build_joint_state(spec).amplitudes
    return partial_trace(np.outer(joint, joint.conj()), (len(spec.components), spec.dim), Side.B)


# -- place selection ---------------------------------------------------------------

@dataclass(frozen=True)
class TagEquals:
    """Tag-aware predicate: selects the runs prepared as component ``tag``."""

    tag: int


@dataclass(frozen=True)
class TagBlind:
    """Tag-blind predicate; ``fn`` sees only the run id."""

    fn: Callable[[int], bool]


def even_runs() -> TagBlind:
    return TagBlind(lambda run_id: run_id % 2 == 0)


def random_half(seed: int) -> TagBlind:
    raw = {}

    def pick(run_id: int) -> bool:
        if run_id not in raw:
            raw[run_id] = per_run_seed(seed ^ 0x5DEECE66D, run_id) & 1
        return bool(raw[run_id])

    return TagBlind(pick)


Predicate = Union[TagEquals, TagBlind, Callable[[int], bool]]
Source = Union[EnsembleRecord, BlindEnsemble, SubEnsemble]


def _ids_of(source: Source) -> np.ndarray:
    return np.asarray(source.run_ids, dtype=np.int64)


def place_select(source: Source, predicate: Predicate) -> tuple[np.ndarray, np.ndarray]:
    """Split run ids into ``(selected, rest)``; the two parts partition the source."""
    ids = _ids_of(source)
    if isinstance(predicate, TagEquals):
        if isinstance(source, BlindEnsemble):
            raise TagAccessError("tag-aware selection needs access to the preparation record")
        tags = source.tags
        mask = tags == predicate.tag
    else:
        fn = predicate.fn if isinstance(predicate, TagBlind) else predicate
        mask = np.fromiter((bool(fn(int(r))) for r in ids), dtype=bool, count=len(ids))
    return ids[mask], ids[~mask]


def split_by_tag(ens: EnsembleRecord) -> dict[int, SubEnsemble]:
    return {t: ens.sub(place_select(ens, TagEquals(t))[0]) for t in ens.config.spec.tags}


def _resolve(ens, subset) -> tuple[EnsembleRecord, np.ndarray]:
    if isinstance(ens, SubEnsemble):
        base, ids = ens.parent, ens.run_ids
    elif isinstance(ens, BlindEnsemble):
        raise TagAccessError("empirical frequencies need the preparation record")
    else:
        base, ids = ens, ens.run_ids
    if subset is not None:
        ids = np.asarray(subset.run_ids if isinstance(subset, SubEnsemble) else subset, dtype=np.int64)
    return base, ids


def tag_frequencies(ens, subset=None) -> dict[int, float]:
    base, ids = _resolve(ens, subset)
    if len(ids) == 0:
        raise ValueError("empty selection")
    tags = base.tags[ids]
    return {t: np.count_nonzero(tags == t) / len(ids) for t in base.config.spec.tags}


def empirical_density(ens, subset=None) -> DensityOperator:
    """``sum_j f_j rho_j`` with ``f_j`` the tag frequencies over the selection."""
    base, _ = _resolve(ens, subset)
    freqs = tag_frequencies(ens, subset)
    spec = base.config.spec
    present = [(f, spec.component(t)) for t, f in freqs.items() if f > 0]
    rho = sum(f * comp.density().matrix for f, comp in present)
    # renormalise away float round-off in the frequencies
    rho = rho / np.trace(rho).real
    return DensityOperator(rho, present[0][1].density().dims)


# -- measurement ------------------------------------------------------------------

def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise ValueError(f"direction {v.tolist()} is not a unit vector")
    return v


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class MeasurementSetting:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _unit(self.a))
        object.__setattr__(self, "b", _unit(self.b))


@dataclass(frozen=True)
class CHSHSettings:
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, _unit(getattr(self, name)))

    def pairs(self) -> list[tuple[MeasurementSetting, int]]:
        """The four settings with their sign in ``S``."""
        return [
            (MeasurementSetting(self.a, self.b), 1),
            (MeasurementSetting(self.a, self.b_prime), 1),
            (MeasurementSetting(self.a_prime, self.b), 1),
            (MeasurementSetting(self.a_prime, self.b_prime), -1),
        ]


def standard_chsh_settings() -> CHSHSettings:
    r = 1.0 / math.sqrt(2.0)
    return CHSHSettings(a=[0, 0, 1], a_prime=[1, 0, 0], b=[r, 0, r], b_prime=[-r, 0, r])


def optimal_chsh_settings(rho) -> CHSHSettings:
    """Settings attaining ``2 sqrt(M)`` for ``rho``.

    With ``e1, e2`` the top eigenvectors of ``C^T C`` (eigenvalues u1 >= u2):
    ``b, b' = cos t e1 +- sin t e2`` with ``tan t = sqrt(u2/u1)``, and
    ``a, a'`` along ``C e1`` and ``C e2``.
    """
    C = fano_decompose(rho).C
    evals, evecs = jacobi_eigh(C.T @ C)
    u1, u2 = max(evals[-1], 0.0), max(evals[-2], 0.0)
    if u1 <= 1e-15:
        return standard_chsh_settings()
    e1, e2 = evecs[:, -1].real, evecs[:, -2].real
    theta = math.atan2(math.sqrt(u2), math.sqrt(u1))
    b = math.cos(theta) * e1 + math.sin(theta) * e2
    b_prime = math.cos(theta) * e1 - math.sin(theta) * e2
    a = unit(C @ e1)
    ce2 = C @ e2
    if np.linalg.norm(ce2) > 1e-12:
        a_prime = unit(ce2)
    else:
        # any direction works when u2 = 0; take one orthogonal to a
        trial = np.eye(3)[int(np.argmin(np.abs(a)))]
        a_prime = unit(trial - (trial @ a) * a)
    return CHSHSettings(a, a_prime, unit(b), unit(b_prime))


def _spin_projector(n: np.ndarray, sign: int) -> np.ndarray:
    return 0.5 * (IDENTITY2 + sign * sum(ni * s for ni, s in zip(n, PAULIS)))


OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def outcome_probabilities(state, setting: MeasurementSetting) -> np.ndarray:
    """Born probabilities of ``(+,+), (+,-), (-,+), (-,-)``."""
    rho = as_density(state).matrix
    probs = np.array([
        np.trace(rho @ np.kron(_spin_projector(setting.a, sa), _spin_projector(setting.b, sb))).real
        for sa, sb in OUTCOMES
    ])
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_local_measurement(state, setting: MeasurementSetting,
                             rng: np.random.Generator) -> tuple[int, int]:
    k = int(rng.choice(4, p=outcome_probabilities(state, setting)))
    return OUTCOMES[k]


@dataclass(frozen=True)
class CHSHEstimate:
    value: float
    stderr: float
    correlators: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))
    shots_per_setting: tuple[int, int, int, int] = field(default=(0, 0, 0, 0))


def _split_shots(shots: int) -> list[int]:
    base, extra = divmod(int(shots), 4)
    return [base + (1 if i < extra else 0) for i in range(4)]


def _correlator(counts: np.ndarray) -> tuple[float, float]:
    n = int(counts.sum())
    if n == 0:
        return 0.0, 0.0
    E = (counts[0] - counts[1] - counts[2] + counts[3]) / n
    return float(E), float((1.0 - E * E) / n)


def estimate_chsh(source, settings: CHSHSettings, shots: int,
                  rng: np.random.Generator) -> CHSHEstimate:
    """Estimate ``S = E(a,b) + E(a,b') + E(a',b) - E(a',b')``.

    ``source`` is a density operator (every shot drawn from it) or a recorded
    (sub-)ensemble, whose runs are measured in order, cycling if ``shots``
    exceeds its size. Each run is measured in the state it was prepared in.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    per_setting = _split_shots(shots)
    ensemble = isinstance(source, (EnsembleRecord, SubEnsemble))
    if ensemble:
        base, ids = _resolve(source, None)
        if len(ids) == 0:
            raise ValueError("empty ensemble")
        spec = base.config.spec
        comp_rho = {t: spec.component(t).density() for t in spec.tags}
    else:
        rho = as_density(source)

    values, variances = [], []
    start = 0
    total = 0.0
    for (setting, sign), n in zip(settings.pairs(), per_setting):
        if ensemble:
            shot_tags = base.tags[ids[np.arange(start, start + n) % len(ids)]]
            counts = np.zeros(4, dtype=np.int64)
            for t in spec.tags:
                k = int(np.count_nonzero(shot_tags == t))
                if k:
                    counts += rng.multinomial(k, outcome_probabilities(comp_rho[t], setting))
        else:
            counts = rng.multinomial(n, outcome_probabilities(rho, setting))
        E, var = _correlator(counts)
        values.append(E)
        variances.append(var)
        total += sign * E
        start += n
    return CHSHEstimate(total, math.sqrt(sum(variances)), tuple(values), tuple(per_setting))


def analytic_chsh(state, settings: CHSHSettings) -> float:
    C = fano_decompose(state).C
    return float(sum(sign * (s.a @ C @ s.b) for s, sign in settings.pairs()))


# -- typicality ----------------------------------------------------------------

def _allowed_counts(p: Fraction, m: int, eps: Fraction) -> range:
    lo = max(0, math.ceil((p - eps) * m))
    hi = min(m, math.floor((p + eps) * m))
    return range(lo, hi + 1)


def typical_weight(p: Sequence[float], m: int, epsilon: float, cap: int = TYPICALITY_CAP,
                   exact: bool = False):
    """Squared-amplitude weight of length-``m`` preparation sequences whose
    tag frequencies are all within ``epsilon`` of ``p``.

    Equals the multinomial probability of the count box
    ``|k_j/m - p_j| <= epsilon``; computed in exact rational arithmetic by
    folding components in one at a time. Returns a ``Fraction`` if ``exact``.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    if m > cap:
        raise ValueError(f"m={m} exceeds the enumeration cap {cap}")
    probs = [Fraction(float(x)) for x in p]
    if any(x < 0 for x in probs) or abs(float(sum(probs)) - 1.0) > 1e-12:
        raise ValueError(f"p must be a probability vector, got {list(p)}")
    # float inputs like (0.3, 0.7) sum to 1 only up to round-off
    total = sum(probs)
    probs = [x / total for x in probs]
    eps = Fraction(float(epsilon))

    # dp[s] = sum over allowed (k_1..k_j) with sum s of s!/prod(k_i!) * prod p_i^k_i
    dp = {0: Fraction(1)}
    for pj in probs[:-1]:
        nxt: dict[int, Fraction] = {}
        powers = {k: pj ** k for k in _allowed_counts(pj, m, eps)}
        for s, val in dp.items():
            for k, pk in powers.items():
                t = s + k
                if t > m:
                    break
                nxt[t] = nxt.get(t, Fraction(0)) + val * math.comb(t, k) * pk
        dp = nxt
    # the last count is forced to m - s
    last = probs[-1]
    allowed = _allowed_counts(last, m, eps)
    weight = sum((val * math.comb(m, m - s) * last ** (m - s)
                  for s, val in dp.items() if (m - s) in allowed), Fraction(0))
    return weight if exact else float(weight)


# -- effective collapse -----------------------------------------------------------

def promote_by_measurement(rho, basis: Sequence[PureState], n_runs: int, seed: int,
                           tags: Iterable[int] | None = None,
                           rng_algorithm: str = "philox4x64") -> EnsembleRecord:
    """Measure ``rho`` in an orthonormal ``basis``, yielding a proper mixture of
    the basis states with weights ``<b_k|rho|b_k>``."""
    rho = as_density(rho)
    B = np.column_stack([b.amplitudes for b in basis])
    gram = B.conj().T @ B
    dev = float(np.max(np.abs(gram - np.eye(len(basis)))))
    if dev > ORTHO_TOL:
        raise ValueError(f"basis is not orthonormal (Gram deviation {dev:.3e})")
    weights = np.real(np.einsum("ik,ij,jk->k", B.conj(), rho.matrix, B))
    weights = np.clip(weights, 0.0, None)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("basis does not span the support of rho")
    weights = weights / weights.sum()
    tags = list(range(len(basis))) if tags is None else list(tags)
    spec = MixtureSpec.of(weights.tolist(), list(basis), tags, Provenance.PROPER_PREPARATION)
    return run_preparation(PreparationConfig(spec, n_runs, seed, rng_algorithm))


def dephase(rho, basis: Sequence[PureState]) -> np.ndarray:
    """Basis-diagonal part of ``rho``: ``sum_k <b_k|rho|b_k> |b_k><b_k|``."""
    M = as_density(rho).matrix
    out = np.zeros_like(M)
    for b in basis:
        v = b.amplitudes
        out += (v.conj() @ M @ v).real * np.outer(v, v.conj())
    return out


# -- serialisation ---------------------------------------------------------------

def ensemble_to_dict(ens: EnsembleRecord) -> dict:
    cfg = ens.config
    return {
        "config": {
            "weights": [float(w) for w in cfg.spec.weights],
            "component_ids": list(cfg.spec.tags),
            "n_runs": cfg.n_runs,
            "seed": cfg.seed,
            "rng_algorithm": cfg.rng_algorithm,
        },
        "records": [{"run_id": i, "tag": int(t)} for i, t in enumerate(ens.tags)],
    }


def ensemble_from_dict(payload: dict, spec: MixtureSpec, verify: bool = True) -> EnsembleRecord:
    """Rebuild a record from its JSON form; ``spec`` supplies the component states."""
    cfg = payload["config"]
    if list(cfg["component_ids"]) != spec.tags:
        raise ValueError("component ids do not match the mixture")
    if not np.allclose(cfg["weights"], spec.weights, rtol=0, atol=1e-15):
        raise ValueError("weights do not match the mixture")
    config = PreparationConfig(spec, cfg["n_runs"], cfg["seed"], cfg["rng_algorithm"])
    records = sorted(payload["records"], key=lambda r: r["run_id"])
    if [r["run_id"] for r in records] != list(range(config.n_runs)):
        raise ValueError("run ids must be dense and unique")
    tags = np.array([r["tag"] for r in records], dtype=np.int64)
    ens = EnsembleRecord(config, tags, per_run_seeds(config.seed, config.n_runs))
    if verify and not np.array_equal(ens.tags, run_preparation(config).tags):
        raise ValueError("records do not reproduce from (seed, rng_algorithm, spec)")
    return ens
