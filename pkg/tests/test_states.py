import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpoly.states import (
    DensityOperator,
    Ensemble,
    InvalidStateError,
    PureState,
    SubsystemLayout,
    basis_state,
    bell_state,
    ghz_state,
    maximally_mixed,
    partial_trace,
    permute,
    purify,
    random_density,
    random_pure,
    reduced_matrix,
    spectral_decompose,
    state_from_dict,
    state_to_dict,
    tensor_product,
)

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=3)


def test_layout_defaults_and_lookup():
    lay = SubsystemLayout.of([2, 3, 2])
    assert lay.labels == ("A", "B", "C")
    assert lay.dim == 12
    assert lay.dim_of(["B", "C"]) == 6
    with pytest.raises(InvalidStateError) as err:
        lay.index("Z")
    assert err.value.invariant == "layout"


def test_pure_state_rejects_bad_norm():
    with pytest.raises(InvalidStateError) as err:
        PureState(np.array([1.0, 1.0]), [2])
    assert err.value.invariant == "normalization"


@pytest.mark.parametrize("matrix, invariant", [
    (np.array([[0.5, 0.1], [0.0, 0.5]]), "hermiticity"),
    (np.diag([0.5, 0.4]), "trace"),
    (np.diag([1.2, -0.2]), "positivity"),
])
def test_density_rejects_invalid(matrix, invariant):
    with pytest.raises(InvalidStateError) as err:
        DensityOperator(matrix, [2])
    assert err.value.invariant == invariant


def test_density_is_immutable():
    rho = maximally_mixed([2])
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_bell_reduction_is_maximally_mixed():
    rho_a = partial_trace(bell_state(2), ["A"])
    assert np.allclose(rho_a.matrix, np.eye(2) / 2, atol=1e-14)
    rho_b = partial_trace(bell_state(3), ["B"])
    assert np.allclose(rho_b.matrix, np.eye(3) / 3, atol=1e-14)


def test_ghz_two_party_reduction():
    rho_ab = partial_trace(ghz_state(3), ["A", "B"]).matrix
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert np.allclose(rho_ab, expected, atol=1e-14)


def test_partial_trace_of_product_recovers_factor():
    a = random_density([2], seed=1)
    b = random_density([3], seed=2)
    ab = tensor_product(a, DensityOperator(b.matrix, SubsystemLayout((3,), ("B",))))
    assert np.allclose(partial_trace(ab, ["A"]).matrix, a.matrix, atol=1e-13)
    assert np.allclose(partial_trace(ab, ["B"]).matrix, b.matrix, atol=1e-13)


def test_permute_swaps_subsystems():
    psi = tensor_product(basis_state([0], [2]), PureState(np.array([0, 0, 1.0]), SubsystemLayout((3,), ("B",))))
    swapped = permute(psi, ["B", "A"])
    assert swapped.layout.labels == ("B", "A")
    assert swapped.layout.dims == (3, 2)
    assert abs(swapped.amplitudes[4]) == 1.0


@given(dims_strategy, st.integers(0, 10_000))
def test_partial_traces_are_states(dims, seed):
    rho = random_density(dims, seed=seed)
    for label in rho.layout.labels:
        red = reduced_matrix(rho, [label])
        assert abs(np.trace(red).real - 1) < 1e-10
        assert np.linalg.eigvalsh(red)[0] > -1e-10
        assert np.max(np.abs(red - red.conj().T)) < 1e-12


@given(dims_strategy, st.integers(0, 10_000))
def test_trace_out_in_steps_matches_at_once(dims, seed):
    rho = random_density(dims, seed=seed)
    labels = rho.layout.labels
    first = partial_trace(rho, labels[:-1])
    assert np.allclose(reduced_matrix(first, [labels[0]]), reduced_matrix(rho, [labels[0]]), atol=1e-12)


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_spectral_decomposition_properties(n, seed):
    rho = random_density([n], rank=max(1, n - 1), seed=seed)
    sd = spectral_decompose(rho)
    assert np.all(np.diff(sd.eigenvalues) <= 1e-15)
    assert abs(sd.eigenvalues.sum() - 1) < 1e-12
    assert np.allclose(sd.reconstruct(), rho.matrix, atol=1e-10)
    v = sd.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-10)


def test_spectral_phase_convention_is_deterministic():
    sd1 = spectral_decompose(np.eye(3) / 3)
    sd2 = spectral_decompose(np.eye(3) / 3)
    assert np.array_equal(sd1.eigenvectors, sd2.eigenvectors)
    for col in sd1.eigenvectors.T:
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert abs(first.imag) < 1e-15 and first.real > 0


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_purify_reproduces_state(seed, rank):
    rho = random_density([2, 2], rank=rank, seed=seed)
    psi = purify(rho)
    assert psi.layout.dims == (2, 2, rank)
    assert np.allclose(reduced_matrix(psi, ["A", "B"]), rho.matrix, atol=1e-10)


def test_ensemble_checks_reconstruction():
    members = (basis_state([0], [2]).density(), basis_state([1], [2]).density())
    ens = Ensemble([0.5, 0.5], members, parent=maximally_mixed([2]))
    assert np.allclose(ens.average(), np.eye(2) / 2)
    with pytest.raises(InvalidStateError) as err:
        Ensemble([0.7, 0.3], members, parent=maximally_mixed([2]))
    assert err.value.invariant == "ensemble"


def test_random_states_reproducible():
    a = random_pure([2, 2, 2], seed=7)
    b = random_pure([2, 2, 2], seed=7)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert random_density([2, 2], rank=2, seed=3).rank() == 2


@pytest.mark.parametrize("state", [bell_state(2), random_density([2, 3], seed=5)])
def test_json_round_trip(state):
    obj = json.loads(json.dumps(state_to_dict(state)))
    back = state_from_dict(obj)
    assert type(back) is type(state)
    assert back.layout == state.layout
    a = back.amplitudes if isinstance(back, PureState) else back.matrix
    b = state.amplitudes if isinstance(state, PureState) else state.matrix
    assert np.array_equal(a, b)
