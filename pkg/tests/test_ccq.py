import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpoly import ccq as ccq_mod
from qpoly.ccq import (
    apply_m0,
    apply_m1,
    build_ccq,
    ccq_mutual_closed_form,
    ccq_mutual_direct,
    gap_report,
    generalized_paulis,
    subadditivity_gap,
)
from qpoly.states import (
    DensityOperator,
    NumericError,
    SubsystemLayout,
    bell_state,
    partial_trace,
    random_density,
    reduced_matrix,
)


def test_qubit_paulis_in_computational_basis():
    p = generalized_paulis(np.diag([0.7, 0.3]))
    assert np.allclose(p.z_op, np.diag([1, -1]), atol=1e-12)
    assert np.allclose(p.x_op, np.array([[0, 1], [1, 0]]), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_relations(d):
    rho_b = random_density([d], seed=d)
    p = generalized_paulis(rho_b)
    E = p.basis
    for j in range(d):
        assert np.allclose(p.z_op @ E[:, j], p.omega**j * E[:, j], atol=1e-10)
        assert np.allclose(p.x_op @ E[:, j], E[:, (j + 1) % d], atol=1e-10)
    eye = np.eye(d)
    assert np.allclose(np.linalg.matrix_power(p.x_op, d), eye, atol=1e-10)
    assert np.allclose(np.linalg.matrix_power(p.z_op, d), eye, atol=1e-10)
    assert np.allclose(p.z_op @ p.x_op, p.omega * p.x_op @ p.z_op, atol=1e-10)
    F = p.fourier_basis
    assert np.allclose(F.conj().T @ F, eye, atol=1e-10)
    assert np.allclose(p.power("x", -1), np.linalg.inv(p.x_op), atol=1e-10)


def test_degenerate_spectrum_is_reproducible():
    a = generalized_paulis(np.eye(3) / 3)
    b = generalized_paulis(np.eye(3) / 3)
    assert np.array_equal(a.x_op, b.x_op)


def _closed_dephased(rho, which):
    """sum_i sigma^i (x) p_i |b_i><b_i| built from the measured ensembles."""
    c = build_ccq(rho)
    basis = c.paulis.basis if which == 0 else c.paulis.fourier_basis
    ens = c.e0 if which == 0 else c.e1
    da, d = rho.layout.dims
    out = np.zeros((da * d, da * d), dtype=complex)
    probs = np.real(np.einsum("ji,jk,ki->i", basis.conj(), reduced_matrix(rho, ["B"]), basis))
    members = iter(ens.members)
    for i in range(d):
        if probs[i] < 1e-14:
            continue
        b = basis[:, i]
        out += probs[i] * np.kron(next(members).matrix, np.outer(b, b.conj()))
    return out


@pytest.mark.parametrize("dims", [(2, 2), (3, 3), (2, 3)])
def test_dephasing_matches_closed_form(dims):
    rho = random_density(list(dims), seed=sum(dims))
    for which, fn in ((0, apply_m0), (1, apply_m1)):
        out = fn(rho)
        assert abs(np.trace(out.matrix) - 1) < 1e-12
        assert np.allclose(out.matrix, _closed_dephased(rho, which), atol=1e-10)
        paulis = generalized_paulis(reduced_matrix(rho, ["B"]))
        assert np.allclose(fn(out, paulis).matrix, out.matrix, atol=1e-10)


def test_bell_dephasing_examples():
    bell = bell_state(2).density()
    m0 = apply_m0(bell).matrix
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    p = generalized_paulis(reduced_matrix(bell, ["B"]))
    V = np.kron(np.eye(2), p.basis)
    assert np.allclose(V.conj().T @ m0 @ V, expected, atol=1e-12)
    m1 = apply_m1(bell)
    assert np.allclose(reduced_matrix(m1, ["B"]), np.eye(2) / 2, atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (3, 3), (3, 2)])
def test_ccq_structure(dims):
    rho = random_density(list(dims), seed=7)
    c = build_ccq(rho)
    omega = c.omega_xyab
    d = dims[1]
    assert omega.layout.labels == ("X", "Y", "A", "B")
    assert abs(np.trace(omega.matrix) - 1) < 1e-12
    assert np.allclose(reduced_matrix(omega, ["X"]), np.eye(d) / d, atol=1e-12)
    assert np.allclose(reduced_matrix(omega, ["Y"]), np.eye(d) / d, atol=1e-12)
    # Omega_XAB: X-conjugates of the M0-dephased state
    m0 = apply_m0(rho).matrix
    expected = np.zeros((d, dims[0] * d, d, dims[0] * d), dtype=complex)
    for x in range(d):
        V = np.kron(np.eye(dims[0]), c.paulis.power("x", x))
        expected[x, :, x, :] = V @ m0 @ V.conj().T / d
    n = d * dims[0] * d
    assert np.allclose(reduced_matrix(omega, ["X", "A", "B"]), expected.reshape(n, n), atol=1e-9)
    # Omega_YAB: Z-conjugates of the M1-dephased state
    m1 = apply_m1(rho).matrix
    expected = np.zeros((d, dims[0] * d, d, dims[0] * d), dtype=complex)
    for y in range(d):
        V = np.kron(np.eye(dims[0]), c.paulis.power("z", y))
        expected[y, :, y, :] = V @ m1 @ V.conj().T / d
    assert np.allclose(reduced_matrix(omega, ["Y", "A", "B"]), expected.reshape(n, n), atol=1e-9)
    # tracing out the registers leaves rho_A (x) I/d
    ab = reduced_matrix(omega, ["A", "B"])
    assert np.allclose(ab, np.kron(reduced_matrix(rho, ["A"]), np.eye(d) / d), atol=1e-10)


def test_bell_closed_forms_q2():
    c = build_ccq(bell_state(2))
    assert ccq_mutual_closed_form(c, "XY", 2) == pytest.approx(0.75, abs=1e-12)
    assert ccq_mutual_closed_form(c, "X", 2) == pytest.approx(0.5, abs=1e-12)
    assert ccq_mutual_closed_form(c, "Y", 2) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        ccq_mutual_closed_form(c, "Z", 2)


def test_q1_xy_form():
    rho = random_density([3, 3], seed=4)
    c = build_ccq(rho)
    expected = math.log(3) + partial_trace_entropy(rho, ["A"]) - partial_trace_entropy(rho, ["A", "B"])
    assert ccq_mutual_closed_form(c, "XY", 1) == pytest.approx(expected, abs=1e-12)
    assert ccq_mutual_direct(c, "XY", 1) == pytest.approx(expected, abs=1e-6)


def partial_trace_entropy(rho, keep):
    w = np.linalg.eigvalsh(reduced_matrix(rho, keep))
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_dual_path_agreement(seed, d, q):
    c = build_ccq(random_density([d, d], seed=seed))
    for which in ("XY", "X", "Y"):
        assert abs(ccq_mutual_closed_form(c, which, q) - ccq_mutual_direct(c, which, q)) <= 1e-8


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_premise_forms_equivalent(seed, d, q):
    rep = gap_report(random_density([d, d], seed=seed), q)
    c = 1.0 if q == 1.0 else d ** (1 - q)
    assert abs(rep.chi_slack - rep.gap / c) <= 1e-9
    assert (rep.gap >= -1e-9) == (rep.chi_slack >= -1e-9 / c)


def test_bell_gap_values():
    assert subadditivity_gap(bell_state(2), 2) == pytest.approx(-0.25, abs=1e-9)
    assert subadditivity_gap(bell_state(2), 1) == pytest.approx(0.0, abs=1e-9)
    assert not gap_report(bell_state(2), 2).holds


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_q1_gap_nonnegative(seed, d):
    assert subadditivity_gap(random_density([d, d], seed=seed), 1) >= -1e-9


def test_canonical_ensembles_are_the_canonical_measurements():
    rho = random_density([2, 2], seed=3)
    c = build_ccq(rho)
    lam = np.sort(np.linalg.eigvalsh(reduced_matrix(rho, ["B"])))[::-1]
    assert np.allclose(c.e0.weights, lam, atol=1e-12)
    assert np.allclose(c.e1.weights, [0.5, 0.5], atol=1e-12)


def test_dual_path_disagreement_raises(monkeypatch):
    real = ccq_mod.ccq_mutual_closed_form
    monkeypatch.setattr(ccq_mod, "ccq_mutual_closed_form", lambda c, w, q: real(c, w, q) + (1e-6 if w == "X" else 0))
    with pytest.raises(NumericError):
        subadditivity_gap(random_density([2, 2], seed=0), 2)


def test_rejects_non_bipartite():
    with pytest.raises(ValueError):
        build_ccq(random_density([2, 2, 2], seed=0))
