import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sepmix.fano import fano_decompose
from sepmix.operators import IDENTITY2, DensityOperator, Side, partial_trace, projector
from sepmix.states import (
    BellKind,
    Component,
    MixtureSpec,
    Provenance,
    bell_basis,
    bell_diagonal,
    bell_state,
    mix,
    product_state,
    werner,
    werner_bell_weights,
)

from conftest import random_density

R = 1 / math.sqrt(2)
UPUP_DOWNDOWN = np.diag([0.5, 0, 0, 0.5])


def test_bell_kind_order():
    assert [k.name for k in BellKind] == ["PHI_PLUS", "PHI_MINUS", "PSI_PLUS", "PSI_MINUS"]


def test_bell_amplitudes():
    assert np.allclose(bell_state(BellKind.PHI_PLUS).amplitudes, [R, 0, 0, R], atol=0)
    assert np.allclose(bell_state(BellKind.PSI_MINUS).amplitudes, [0, R, -R, 0], atol=0)


def test_bell_states_orthonormal():
    B = np.column_stack([b.amplitudes for b in bell_basis()])
    assert np.allclose(B.conj().T @ B, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("kind", list(BellKind))
def test_bell_reduced_states_maximally_mixed(kind):
    rho = projector(bell_state(kind).amplitudes)
    for keep in Side:
        assert np.allclose(partial_trace(rho, (2, 2), keep), IDENTITY2 / 2, atol=1e-12)


def test_product_state_ordering():
    assert np.array_equal(product_state(0, 1).amplitudes, [0, 1, 0, 0])
    assert np.array_equal(product_state(1, 1).amplitudes, [0, 0, 0, 1])


def test_equal_bell_mixture_is_maximally_mixed():
    spec = MixtureSpec.of([0.25] * 4, bell_basis())
    assert np.max(np.abs(mix(spec).matrix - np.eye(4) / 4)) <= 1e-12


def test_phi_plus_phi_minus_half_half():
    spec = MixtureSpec.of([0.5, 0.5], [bell_state(BellKind.PHI_PLUS), bell_state(BellKind.PHI_MINUS)])
    assert np.max(np.abs(mix(spec).matrix - UPUP_DOWNDOWN)) <= 1e-12


def test_single_component_mix(rng):
    rho = DensityOperator(random_density(rng))
    assert np.array_equal(mix(MixtureSpec.of([1.0], [rho])).matrix, rho.matrix)


def test_mix_accepts_mixed_components():
    spec = MixtureSpec.of([0.5, 0.5], [werner(0.3), bell_state(BellKind.PHI_PLUS)])
    expected = 0.5 * werner(0.3).matrix + 0.5 * projector(bell_state(BellKind.PHI_PLUS).amplitudes)
    assert np.allclose(mix(spec).matrix, expected, atol=1e-15)


def test_spec_validation():
    phi = bell_state(BellKind.PHI_PLUS)
    with pytest.raises(ValueError, match="sum"):
        MixtureSpec.of([0.5, 0.4], [phi, phi])
    with pytest.raises(ValueError, match="nonnegative"):
        MixtureSpec.of([1.5, -0.5], [phi, phi])
    with pytest.raises(ValueError, match="unique"):
        MixtureSpec.of([0.5, 0.5], [phi, phi], tags=[3, 3])
    with pytest.raises(ValueError, match="dimension"):
        MixtureSpec.of([0.5, 0.5], [phi, product_state(0)])


def test_spec_default_provenance():
    spec = MixtureSpec((Component(1.0, product_state(0, 0), 7),))
    assert spec.provenance is Provenance.PROPER_PREPARATION


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_mix_is_affine(seed, t):
    rng = np.random.default_rng(seed)
    states = [DensityOperator(random_density(rng)) for _ in range(4)]
    w1 = rng.dirichlet(np.ones(2))
    w2 = rng.dirichlet(np.ones(2))
    s1 = MixtureSpec.of(w1, states[:2])
    s2 = MixtureSpec.of(w2, states[2:])
    outer = MixtureSpec.of(np.concatenate([t * w1, (1 - t) * w2]), states)
    expected = t * mix(s1).matrix + (1 - t) * mix(s2).matrix
    assert np.max(np.abs(mix(outer).matrix - expected)) <= 1e-12


def test_werner_endpoints():
    assert np.allclose(werner(0).matrix, np.eye(4) / 4, atol=1e-15)
    assert np.allclose(werner(1).matrix, projector(bell_state(BellKind.PSI_MINUS).amplitudes), atol=1e-15)


def test_werner_third_c_vector():
    c = fano_decompose(werner(1 / 3)).c_vector
    assert np.allclose(c, [-1 / 3] * 3, atol=1e-12)
    assert abs(np.abs(c).sum() - 1) < 1e-12


@pytest.mark.parametrize("lam", [-0.1, 1.01])
def test_werner_range(lam):
    with pytest.raises(ValueError):
        werner(lam)


@given(st.floats(0, 1))
def test_werner_is_bell_diagonal(lam):
    assert np.max(np.abs(bell_diagonal(werner_bell_weights(lam)).matrix - werner(lam).matrix)) <= 1e-12


def test_bell_diagonal_examples():
    assert np.allclose(bell_diagonal([1, 0, 0, 0]).matrix,
                       projector(bell_state(BellKind.PHI_PLUS).amplitudes), atol=1e-15)
    assert np.allclose(bell_diagonal([0.25] * 4).matrix, np.eye(4) / 4, atol=1e-15)
    assert np.allclose(bell_diagonal([0.5, 0.5, 0, 0]).matrix, UPUP_DOWNDOWN, atol=1e-15)


@pytest.mark.parametrize("p", [[0.5, 0.5, 0.5, -0.5], [0.2, 0.2, 0.2, 0.2], [1, 0, 0]])
def test_bell_diagonal_rejects_non_simplex(p):
    with pytest.raises(ValueError):
        bell_diagonal(p)
