"""
Generalized Pauli operators and the four-party classical-classical-quantum state.

For a two-party state ``rho_AB`` with ``d = dim B`` the Weyl operators are
built on the eigenbasis ``{e_j}`` of ``rho_B``. Conjugating B by
``X^x Z^y`` and recording ``(x, y)`` in two classical registers gives

    Omega_XYAB = d^-2 sum_{x,y} |x><x| (x) |y><y| (x) X^x Z^y rho X^-x Z^-y

whose Tsallis mutual entropies have closed forms in terms of entropies of
``rho_AB`` and the Tsallis-q differences of the two ensembles produced by
measuring B in the eigenbasis (E0) and in its Fourier basis (E1).

The subadditivity gap ``I(XY:AB) - I(X:AB) - I(Y:AB)`` is always computed
twice, from the closed forms and from the assembled state, and the two
must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import Rank1Measurement, induced_ensemble
from .states import (
    DensityOperator,
    Ensemble,
    InvalidStateError,
    NumericError,
    SubsystemLayout,
    as_density,
    reduced_matrix,
    spectral_decompose,
)
from .tsallis import as_param, max_tsallis_entropy, q_mutual_entropy, tsallis_entropy, tsallis_q_difference

DUAL_PATH_TOL = 1e-8
PREMISE_TOL = 1e-9


@dataclass(frozen=True)
class GeneralizedPauli:
    z_op: np.ndarray
    x_op: np.ndarray
    omega: complex
    basis: np.ndarray

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def fourier_basis(self) -> np.ndarray:
        """Columns ``(1/sqrt d) sum_k omega^{jk} e_k``."""
        d = self.d
        F = self.omega ** np.outer(np.arange(d), np.arange(d)) / np.sqrt(d)
        return self.basis @ F

    def power(self, op: str, n: int) -> np.ndarray:
        """``Z^n`` or ``X^n`` via the spectral form, valid for negative ``n``."""
        if op == "z":
            U, phases = self.basis, self.omega ** (n * np.arange(self.d))
        elif op == "x":
            U, phases = self.fourier_basis, self.omega ** (-n * np.arange(self.d))
        else:
            raise ValueError("op must be 'z' or 'x'")
        return (U * phases) @ U.conj().T


def generalized_paulis(rho_b) -> GeneralizedPauli:
    """Weyl operators ``Z``, ``X`` on the eigenbasis of a single-qudit state.

    The eigenbasis comes from :func:`spectral_decompose`, so degenerate
    spectra still give a reproducible choice.
    """
    m = rho_b.matrix if isinstance(rho_b, DensityOperator) else np.asarray(rho_b)
    if isinstance(rho_b, DensityOperator) and len(rho_b.layout) != 1:
        raise InvalidStateError("layout", "expected a single-qudit state")
    E = np.asarray(spectral_decompose(m).eigenvectors)
    d = E.shape[0]
    omega = np.exp(2j * np.pi / d)
    F = omega ** np.outer(np.arange(d), np.arange(d)) / np.sqrt(d)
    Et = E @ F
    Z = (E * omega ** np.arange(d)) @ E.conj().T
    X = (Et * omega ** (-np.arange(d))) @ Et.conj().T
    return GeneralizedPauli(Z, X, complex(omega), E)


def _two_party(rho_ab) -> DensityOperator:
    rho = as_density(rho_ab)
    if len(rho.layout) != 2:
        raise InvalidStateError("layout", f"expected a two-party state, got {rho.layout.labels}")
    # internal work always uses the labels A, B
    return DensityOperator(rho.matrix, SubsystemLayout(rho.layout.dims, ("A", "B")))


def _conjugate_b(matrix: np.ndarray, da: int, U: np.ndarray) -> np.ndarray:
    """``(I (x) U) rho (I (x) U^dagger)``."""
    V = np.kron(np.eye(da), U)
    return V @ matrix @ V.conj().T


def _dephase(rho_ab, op: str, paulis) -> DensityOperator:
    rho = _two_party(rho_ab)
    da, d = rho.layout.dims
    if paulis is None:
        paulis = generalized_paulis(reduced_matrix(rho, ["B"]))
    out = sum(_conjugate_b(rho.matrix, da, paulis.power(op, k)) for k in range(d)) / d
    return DensityOperator(out, as_density(rho_ab).layout)


def apply_m0(rho_ab, paulis: GeneralizedPauli | None = None) -> DensityOperator:
    """Average of B-conjugations by ``Z^b``: dephases B in the eigenbasis of ``rho_B``.

    ``paulis`` fixes the operators; by default they are built from ``rho_B``
    of the input, so applying the channel again needs them passed along.
    """
    return _dephase(rho_ab, "z", paulis)


def apply_m1(rho_ab, paulis: GeneralizedPauli | None = None) -> DensityOperator:
    """Average of B-conjugations by ``X^a``: dephases B in the Fourier basis."""
    return _dephase(rho_ab, "x", paulis)


@dataclass(frozen=True)
class CcqState:
    omega_xyab: DensityOperator
    source: DensityOperator
    paulis: GeneralizedPauli
    e0: Ensemble
    e1: Ensemble

    @property
    def d(self) -> int:
        return self.paulis.d


def build_ccq(rho_ab) -> CcqState:
    """Assemble the ccq state on registers X, Y and subsystems A, B."""
    rho = _two_party(rho_ab)
    da, d = rho.layout.dims
    paulis = generalized_paulis(reduced_matrix(rho, ["B"]))
    n = da * d
    big = np.zeros((d, d, n, d, d, n), dtype=np.complex128)
    for x in range(d):
        Xx = paulis.power("x", x)
        for y in range(d):
            U = Xx @ paulis.power("z", y)
            big[x, y, :, x, y, :] = _conjugate_b(rho.matrix, da, U) / d**2
    omega = DensityOperator(big.reshape(d * d * n, d * d * n), SubsystemLayout((d, d, da, d), ("X", "Y", "A", "B")))
    e0 = induced_ensemble(rho, Rank1Measurement.from_basis(paulis.basis), "B")
    e1 = induced_ensemble(rho, Rank1Measurement.from_basis(paulis.fourier_basis), "B")
    return CcqState(omega, rho, paulis, e0, e1)


def _scale(d: int, q) -> float:
    qp = as_param(q)
    return 1.0 if qp.is_limit else float(d) ** (1.0 - qp.q)


def ccq_mutual_closed_form(ccq: CcqState, which: str, q) -> float:
    """``I_q(XY:AB)``, ``I_q(X:AB)`` or ``I_q(Y:AB)`` from quantities of ``rho_AB``."""
    d = ccq.d
    c = _scale(d, q)
    s_max = max_tsallis_entropy(d, q)
    rho = ccq.source
    if which == "XY":
        s_a = tsallis_entropy(reduced_matrix(rho, ["A"]), q)
        return s_max + c * s_a - c * c * tsallis_entropy(rho, q)
    if which == "X":
        s_b = tsallis_entropy(reduced_matrix(rho, ["B"]), q)
        return s_max - c * s_b + c * tsallis_q_difference(ccq.e0, q)
    if which == "Y":
        return (1.0 - c) * s_max + c * tsallis_q_difference(ccq.e1, q)
    raise ValueError(f"which must be one of XY, X, Y; got {which!r}")


_PARTIES = {"XY": (["X", "Y"], ["A", "B"]), "X": (["X"], ["A", "B"]), "Y": (["Y"], ["A", "B"])}


def ccq_mutual_direct(ccq: CcqState, which: str, q) -> float:
    """The same mutual entropies evaluated on the assembled state."""
    try:
        parties = _PARTIES[which]
    except KeyError:
        raise ValueError(f"which must be one of XY, X, Y; got {which!r}") from None
    return q_mutual_entropy(ccq.omega_xyab, q, parties=parties)


@dataclass(frozen=True)
class GapReport:
    gap: float
    gap_direct: float
    chi_slack: float
    mutual: dict
    holds: bool


def gap_report(rho_ab, q, tol: float = PREMISE_TOL) -> GapReport:
    """Subadditivity gap by both routes, plus the equivalent Holevo-type form.

    ``chi_slack`` is the right side minus the left side of
    ``chi(E0) + chi(E1) <= S(A) + S(B) - c S(AB) + (c - 1)^2 / (c (1 - q))``
    with ``c = d^(1-q)``; it equals ``gap / c``.
    """
    ccq = build_ccq(rho_ab)
    closed = {w: ccq_mutual_closed_form(ccq, w, q) for w in _PARTIES}
    direct = {w: ccq_mutual_direct(ccq, w, q) for w in _PARTIES}
    gap = closed["XY"] - closed["X"] - closed["Y"]
    gap_direct = direct["XY"] - direct["X"] - direct["Y"]
    if abs(gap - gap_direct) > DUAL_PATH_TOL or any(abs(closed[w] - direct[w]) > DUAL_PATH_TOL for w in closed):
        raise NumericError(f"closed-form and direct ccq mutual entropies disagree: {closed} vs {direct}")
    qp = as_param(q)
    rho = ccq.source
    c = _scale(ccq.d, qp)
    extra = 0.0 if qp.is_limit else (c - 1.0) ** 2 / (c * (1.0 - qp.q))
    rhs = (tsallis_entropy(reduced_matrix(rho, ["A"]), qp) + tsallis_entropy(reduced_matrix(rho, ["B"]), qp)
           - c * tsallis_entropy(rho, qp) + extra)
    lhs = tsallis_q_difference(ccq.e0, qp) + tsallis_q_difference(ccq.e1, qp)
    return GapReport(gap, gap_direct, rhs - lhs, closed, gap >= -tol)


def subadditivity_gap(rho_ab, q) -> float:
    """``I_q(XY:AB) - I_q(X:AB) - I_q(Y:AB)``; the premise holds when this is >= -1e-9.

    Raises :class:`NumericError` when the closed forms and the direct
    evaluation disagree by more than 1e-8.
    """
    return gap_report(rho_ab, q).gap
