import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sepmix.fano import c_from_bell_weights, in_octahedron
from sepmix.operators import DensityOperator, PureState, tensor
from sepmix.separability import (
    InvariantError,
    NoSignChangeError,
    Classification,
    Status,
    UnsupportedDimensionsError,
    Verdict,
    chsh_criterion,
    classify_mixture,
    octahedron_classify,
    ppt_classify,
    separability_boundary,
)
from sepmix.states import (
    BellKind,
    Component,
    MixtureSpec,
    Provenance,
    bell_basis,
    bell_diagonal,
    bell_state,
    product_state,
    werner,
)

from conftest import random_density

seeds = st.integers(0, 2**32 - 1)
PHI_P = bell_state(BellKind.PHI_PLUS)
PHI_M = bell_state(BellKind.PHI_MINUS)
UPUP, DOWNDOWN = product_state(0, 0), product_state(1, 1)


def _oracle_min_pt(M, dims=(2, 2)):
    # independent index-loop partial transpose + numpy eigensolver
    dA, dB = dims
    T = np.zeros_like(M)
    for i, k, j, l in itertools.product(range(dA), range(dB), range(dA), range(dB)):
        T[i * dB + k, j * dB + l] = M[i * dB + l, j * dB + k]
    return np.linalg.eigvalsh(T)[0]


# -- PPT -----------------------------------------------------------------------

def test_ppt_maximally_mixed():
    assert ppt_classify(np.eye(4) / 4).status is Status.SEPARABLE


def test_ppt_phi_plus():
    rho = PHI_P.density()
    v = ppt_classify(rho)
    assert v.status is Status.ENTANGLED
    assert v.witness == pytest.approx(_oracle_min_pt(rho.matrix), abs=1e-12)
    assert v.witness == pytest.approx(-0.5, abs=1e-12)


def test_ppt_werner_half():
    v = ppt_classify(werner(0.5))
    assert v.status is Status.ENTANGLED
    assert v.witness == pytest.approx(_oracle_min_pt(werner(0.5).matrix), abs=1e-12)
    assert v.witness == pytest.approx(-1 / 8, abs=1e-12)


def test_ppt_qubit_qutrit(rng):
    a = random_density(rng, 2)
    b = random_density(rng, 3)
    assert ppt_classify(DensityOperator(tensor(a, b), (2, 3))).status is Status.SEPARABLE
    # |0>|0> + |1>|1> on 2x3 is entangled
    v = np.zeros(6)
    v[0] = v[4] = 1 / math.sqrt(2)
    rho = PureState(v).density((2, 3))
    w = ppt_classify(rho)
    assert w.status is Status.ENTANGLED
    assert w.witness == pytest.approx(_oracle_min_pt(rho.matrix, (2, 3)), abs=1e-12)


def test_ppt_refuses_larger_systems():
    with pytest.raises(UnsupportedDimensionsError):
        ppt_classify(DensityOperator(np.eye(9) / 9, (3, 3)))
    with pytest.raises(UnsupportedDimensionsError):
        ppt_classify(DensityOperator(np.eye(8) / 8))


@given(seeds)
def test_ppt_witness_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
    assert ppt_classify(rho).witness == pytest.approx(_oracle_min_pt(rho), abs=1e-10)


# -- CHSH -------------------------------------------------------------------------

def test_chsh_phi_plus():
    C = np.diag([1.0, -1.0, 1.0])
    oracle_M = np.sort(np.linalg.eigvalsh(C.T @ C))[-2:].sum()
    r = chsh_criterion(PHI_P.density())
    assert r.M == pytest.approx(oracle_M, abs=1e-12) and r.M == pytest.approx(2, abs=1e-12)
    assert r.max_chsh == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert r.violates


def test_chsh_classical_correlations():
    r = chsh_criterion(bell_diagonal([0.5, 0.5, 0, 0]))
    assert r.M == pytest.approx(1.0, abs=1e-12)
    assert not r.violates


@pytest.mark.parametrize("lam,violates", [(0.5, False), (0.7, False), (0.71, True), (1.0, True)])
def test_chsh_werner(lam, violates):
    r = chsh_criterion(werner(lam))
    assert r.M == pytest.approx(2 * lam**2, abs=1e-12)
    assert r.violates is violates


def test_chsh_werner_distance_threshold():
    # CHSH violation sets in at distance sqrt(3/2) from the origin along the singlet line
    lam = separability_boundary(werner, 0, 1, tol=1e-12, criterion="chsh")
    assert lam * math.sqrt(3) == pytest.approx(math.sqrt(3) / math.sqrt(2), abs=1e-9)


@given(seeds)
def test_chsh_violation_implies_entanglement(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank=int(rng.integers(1, 3)))
    r = chsh_criterion(rho)
    assert 0 <= r.M <= 2 + 1e-12
    assert r.max_chsh <= 2 * math.sqrt(2) + 1e-9
    if r.violates:
        assert ppt_classify(rho).status is Status.ENTANGLED


# -- oracle equivalence -------------------------------------------------------------

@given(seeds)
def test_ppt_agrees_with_octahedron(seed):
    p = np.random.default_rng(seed).dirichlet(np.ones(4))
    c = c_from_bell_weights(p)
    l1 = np.abs(c).sum()
    if abs(l1 - 1) > 1e-6:
        assert ppt_classify(bell_diagonal(p)).status is octahedron_classify(c).status
        assert (ppt_classify(bell_diagonal(p)).status is Status.SEPARABLE) == in_octahedron(c).closed_member


# -- mixtures --------------------------------------------------------------------

def test_classify_phi_mix_is_improperly_separable():
    cls = classify_mixture(MixtureSpec.of([0.5, 0.5], [PHI_P, PHI_M]))
    assert cls.verdict is Verdict.IMPROPERLY_SEPARABLE
    assert cls.ensemble.status is Status.SEPARABLE
    assert all(c.verdict.entangled for c in cls.per_component)
    assert all(c.chsh.violates for c in cls.per_component)


def test_classify_product_mix_is_properly_separable():
    cls = classify_mixture(MixtureSpec.of([0.5, 0.5], [UPUP, DOWNDOWN]))
    assert cls.verdict is Verdict.PROPERLY_SEPARABLE


def test_classify_reduced_only():
    spec = MixtureSpec.of([0.5, 0.5], [PHI_P, PHI_M], provenance=Provenance.REDUCED_ONLY)
    assert classify_mixture(spec).verdict is Verdict.SEPARABLE_UNKNOWN_COMPOSITION


def test_classify_entangled_ensemble():
    spec = MixtureSpec.of([0.9, 0.1], [PHI_P, PHI_M])
    assert classify_mixture(spec).verdict is Verdict.ENTANGLED
    spec = MixtureSpec.of([0.9, 0.1], [PHI_P, PHI_M], provenance=Provenance.REDUCED_ONLY)
    assert classify_mixture(spec).verdict is Verdict.ENTANGLED


def test_classify_ignores_zero_weight_components():
    spec = MixtureSpec.of([0.5, 0.5, 0.0], [UPUP, DOWNDOWN, PHI_P])
    cls = classify_mixture(spec)
    assert cls.verdict is Verdict.PROPERLY_SEPARABLE
    assert [c.tag for c in cls.per_component] == [0, 1]


def test_classify_mixed_components_werner_noise():
    # singlet diluted below the separable threshold, with the noise itself
    # prepared as an equal Bell mixture
    lam = 0.3
    weights = [lam + (1 - lam) / 4] + [(1 - lam) / 4] * 3
    states = [bell_state(BellKind.PSI_MINUS)] + [bell_state(k) for k in list(BellKind)[:3]]
    cls = classify_mixture(MixtureSpec.of(weights, states))
    assert cls.verdict is Verdict.IMPROPERLY_SEPARABLE
    # a proper mixture of entangled-but-Bell-local Werner states
    spec = MixtureSpec.of([0.5, 0.5], [werner(0.5), DensityOperator(np.eye(4) / 4)])
    cls = classify_mixture(spec)
    assert cls.verdict is Verdict.IMPROPERLY_SEPARABLE
    werner_part = cls.per_component[0]
    assert werner_part.verdict.entangled and not werner_part.chsh.violates


@given(seeds)
def test_classify_permutation_and_merge_invariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    states = [bell_basis()[int(k)] for k in rng.integers(0, 4, n)]
    w = rng.dirichlet(np.ones(n))
    base = classify_mixture(MixtureSpec.of(w, states)).verdict
    perm = rng.permutation(n)
    permuted = MixtureSpec.of(w[perm], [states[i] for i in perm], tags=list(perm))
    assert classify_mixture(permuted).verdict is base
    # merge duplicates by summing weights
    merged = {}
    for wi, s in zip(w, states):
        key = s.amplitudes.tobytes()
        merged[key] = (merged.get(key, (0.0, s))[0] + wi, s)
    mw, ms = zip(*merged.values())
    assert classify_mixture(MixtureSpec.of(list(mw), list(ms))).verdict is base


@given(seeds)
def test_product_components_never_entangled(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    states = []
    for _ in range(n):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        states.append(PureState.normalized(np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))))
    cls = classify_mixture(MixtureSpec.of(rng.dirichlet(np.ones(n)), states))
    assert cls.verdict is Verdict.PROPERLY_SEPARABLE


def test_classification_invariant_enforced():
    sep = ppt_classify(np.eye(4) / 4)
    with pytest.raises(InvariantError):
        Classification(Verdict.IMPROPERLY_SEPARABLE, (), sep)


# -- boundary -----------------------------------------------------------------------

def test_boundary_werner_ppt():
    assert separability_boundary(werner, 0, 1) == pytest.approx(1 / 3, abs=1e-6)


def test_boundary_werner_chsh():
    assert separability_boundary(werner, 0, 1, criterion="chsh") == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_boundary_reversed_orientation():
    assert separability_boundary(lambda x: werner(1 - x), 0, 1) == pytest.approx(2 / 3, abs=1e-6)


def test_boundary_no_sign_change():
    with pytest.raises(NoSignChangeError):
        separability_boundary(lambda x: werner(0.2 * x), 0, 1)


def test_boundary_custom_score():
    # along c = (0, 0, -t): weights stay valid and the state is always separable
    with pytest.raises(NoSignChangeError):
        separability_boundary(lambda t: bell_diagonal([(1 - t) / 4, (1 - t) / 4, (1 + t) / 4, (1 + t) / 4]),
                              0, 0.9, criterion=lambda rho: ppt_classify(rho).witness)


def test_component_dataclass_roundtrip():
    comp = Component(1.0, PHI_P, 5)
    assert comp.density().dims == (2, 2)
