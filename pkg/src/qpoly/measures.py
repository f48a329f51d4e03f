"""
Optimization-defined correlation measures.

q-E and q-EOA optimize over pure-state decompositions, parameterized by
isometries acting on the eigen-decomposition of the state. q-CC and q-UE
optimize over rank-1 measurements on one subsystem; q-D and q-UD subtract
those from the Tsallis mutual entropy.

Optimizer outputs are one-sided. Each result is a :class:`BoundedValue`
whose ``direction`` says which side of the true extremum the reported
number lies on, and whose ``witness`` reproduces the number exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _stiefel
from .states import (
    DensityOperator,
    Ensemble,
    InvalidStateError,
    PureState,
    SubsystemLayout,
    as_density,
    haar_isometry,
    permute,
    reduced_matrix,
    spectral_decompose,
)
from .tsallis import as_param, q_mutual_entropy, tsallis_entropy, tsallis_q_difference

ZERO_WEIGHT = 1e-14
RANK_TOL = 1e-12


class Direction(enum.Enum):
    EXACT = "EXACT"
    LOWER_BOUND_OF_MAX = "LOWER_BOUND_OF_MAX"
    UPPER_BOUND_OF_MIN = "UPPER_BOUND_OF_MIN"

    def flipped(self) -> "Direction":
        """Direction of ``c - x`` given the direction of ``x``."""
        if self is Direction.LOWER_BOUND_OF_MAX:
            return Direction.UPPER_BOUND_OF_MIN
        if self is Direction.UPPER_BOUND_OF_MIN:
            return Direction.LOWER_BOUND_OF_MAX
        return self


@dataclass(frozen=True)
class BoundedValue:
    value: float
    direction: Direction
    budget_used: int = 0
    witness: Any = None
    info: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {"value": float(self.value), "direction": self.direction.value}


@dataclass(frozen=True)
class OptimizationBudget:
    restarts: int = 32
    max_iterations: int = 400
    convergence_tol: float = 1e-8
    rng_seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1 or not self.convergence_tol > 0:
            raise ValueError("budget entries must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")

    def restart_rng(self, k: int) -> np.random.Generator:
        # restart k always sees the same stream, whatever the restart count
        return np.random.default_rng(np.random.SeedSequence(self.rng_seed, spawn_key=(k,)))


@dataclass(frozen=True)
class Rank1Measurement:
    """Rank-1 measurement ``{|v_x><v_x|}`` given by (possibly subnormalized) vectors."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128, copy=True)
        if v.ndim != 2:
            raise InvalidStateError("layout", "vectors must be an (outcomes, dim) array")
        err = np.max(np.abs(v.T @ v.conj() - np.eye(v.shape[1])))
        if err > 1e-9:
            raise InvalidStateError("completeness", f"elements sum to identity only within {err:.3e}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def from_isometry(cls, W: np.ndarray) -> "Rank1Measurement":
        return cls(np.conj(W))

    @classmethod
    def from_basis(cls, U: np.ndarray) -> "Rank1Measurement":
        """Projective measurement onto the columns of the unitary ``U``."""
        return cls(np.asarray(U).T)

    @property
    def outcomes(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def isometry(self) -> np.ndarray:
        return np.conj(self.vectors)

    def elements(self) -> np.ndarray:
        v = self.vectors
        return v[:, :, None] * v.conj()[:, None, :]


@dataclass(frozen=True)
class DecompositionCandidate:
    """``m x r`` isometry mixing the ``r`` weighted eigenvectors of a state."""

    isometry: np.ndarray

    def __post_init__(self):
        W = np.array(self.isometry, dtype=np.complex128, copy=True)
        if W.ndim != 2 or W.shape[0] < W.shape[1]:
            raise InvalidStateError("isometry", f"need an m x r matrix with m >= r, got {W.shape}")
        err = np.max(np.abs(W.conj().T @ W - np.eye(W.shape[1])))
        if err > 1e-10:
            raise InvalidStateError("isometry", f"columns orthonormal only within {err:.3e}")
        W.setflags(write=False)
        object.__setattr__(self, "isometry", W)

    @property
    def size(self) -> int:
        return self.isometry.shape[0]


# ---------------------------------------------------------------------------
# helpers


def _side(layout: SubsystemLayout, labels) -> list[str]:
    if labels is None:
        return [layout.labels[0]]
    if isinstance(labels, str):
        labels = [labels]
    labels = [x for x in layout.labels if x in set(labels)]
    for x in labels:
        layout.index(x)
    if not labels or len(labels) == len(layout):
        raise InvalidStateError("layout", "a bipartite split needs both sides nonempty")
    return labels


def _bipartite(state, split):
    """(matrix ordered as side|rest, d_side, d_rest)."""
    layout = state.layout
    a = _side(layout, split)
    b = [x for x in layout.labels if x not in a]
    ordered = permute(as_density(state), a + b)
    return ordered.matrix, layout.dim_of(a), layout.dim_of(b), a, b


def _measured(layout: SubsystemLayout, measured) -> tuple[list[str], list[str]]:
    if measured is None:
        measured = [layout.labels[-1]]
    elif isinstance(measured, str):
        measured = [measured]
    m = _side(layout, measured)
    rest = [x for x in layout.labels if x not in m]
    return rest, m


def _eigen_weighted(matrix: np.ndarray) -> np.ndarray:
    """Rows ``sqrt(l_k) e_k`` for the nonzero part of the spectrum."""
    sd = spectral_decompose(matrix)
    r = max(1, int(np.sum(sd.eigenvalues > RANK_TOL)))
    return (sd.eigenvectors[:, :r] * np.sqrt(sd.eigenvalues[:r])).T


def _decomposition_tensor(matrix, da, db):
    T = _eigen_weighted(matrix)
    r = T.shape[0]
    T = T.reshape(r, da, db)
    if da <= db:
        K = np.einsum("kab,lcb->klac", T, T.conj())
    else:
        K = np.einsum("kab,lac->klbc", T, T.conj())
    return T, K


def _measurement_tensor(matrix, d_rest, d_meas):
    R = matrix.reshape(d_rest, d_meas, d_rest, d_meas)
    return R.transpose(1, 3, 0, 2)


def _pad(W: np.ndarray, m: int) -> np.ndarray:
    if W.shape[0] == m:
        return W
    out = np.zeros((m, W.shape[1]), dtype=np.complex128)
    out[: W.shape[0]] = W
    return out


def _search(K, m, q, maximize, budget: OptimizationBudget, starts=()):
    qp = as_param(q)
    r = K.shape[0]
    problem = _stiefel.Problem(K, qp.q, qp.is_limit)
    inits = [_pad(np.asarray(s, dtype=np.complex128), m) for s in starts]
    inits += [haar_isometry(m, r, budget.restart_rng(k)) for k in range(budget.restarts)]
    W0 = np.stack(inits)
    W, vals, evals = _stiefel.ascend(problem, W0, 1.0 if maximize else -1.0,
                                     max_iter=budget.max_iterations, tol=budget.convergence_tol)
    best = int(np.argmax(vals) if maximize else np.argmin(vals))
    return W[best], evals


def canonical_bases(rho_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenbasis of ``rho_b`` and its Fourier transform, as unitary columns."""
    E = spectral_decompose(rho_b).eigenvectors
    d = E.shape[0]
    omega = np.exp(2j * np.pi / d)
    F = omega ** np.outer(np.arange(d), np.arange(d)) / np.sqrt(d)
    return np.asarray(E), E @ F


# ---------------------------------------------------------------------------
# decompositions


def decomposition_from_isometry(rho: DensityOperator, cand: DecompositionCandidate | np.ndarray) -> Ensemble:
    """Pure-state ensemble ``{p_i, |psi_i>}`` with ``psi_i ~ sum_k W_ik sqrt(l_k) e_k``."""
    if not isinstance(cand, DecompositionCandidate):
        cand = DecompositionCandidate(cand)
    T = _eigen_weighted(rho.matrix)
    W = cand.isometry
    if W.shape[1] != T.shape[0]:
        raise InvalidStateError("isometry", f"state has rank {T.shape[0]} but candidate has {W.shape[1]} columns")
    U = W @ T
    p = np.sum(np.abs(U) ** 2, axis=1)
    keep = p >= ZERO_WEIGHT
    members = []
    for u, pk in zip(U[keep], p[keep]):
        v = u / np.sqrt(pk)
        members.append(DensityOperator(np.outer(v, v.conj()), rho.layout))
    return Ensemble(p[keep], tuple(members), parent=rho)


def expected_entanglement(ens: Ensemble, split, q) -> float:
    """``sum_i p_i^q E_q(psi_i)`` for an ensemble of pure states."""
    qp = as_param(q)
    layout = ens.members[0].layout
    a = _side(layout, split)
    b = [x for x in layout.labels if x not in a]
    side = a if layout.dim_of(a) <= layout.dim_of(b) else b
    total = 0.0
    for p, m in zip(ens.weights, ens.members):
        if p < ZERO_WEIGHT:
            continue
        w = p if qp.is_limit else p**qp.q
        total += w * tsallis_entropy(reduced_matrix(m, side), qp)
    return total


def _pure_entanglement(state, split, q) -> float:
    layout = state.layout
    a = _side(layout, split)
    return tsallis_entropy(reduced_matrix(state, a), q)


def _is_pure(state) -> bool:
    return isinstance(state, PureState) or state.rank(RANK_TOL) == 1


def _decomposition_measure(state, split, q, budget, cap, maximize):
    budget = budget or OptimizationBudget()
    name = "q-eoa" if maximize else "q-e"
    if _is_pure(state):
        return BoundedValue(_pure_entanglement(state, split, q), Direction.EXACT, 0,
                            witness=None, info={"measure": name, "pure": True})
    rho = as_density(state)
    matrix, da, db, a, _ = _bipartite(rho, split)
    T, K = _decomposition_tensor(matrix, da, db)
    r = T.shape[0]
    m = r * r if cap is None else int(cap)
    if m < r:
        raise ValueError(f"cap {m} is below the rank {r}")
    W, evals = _search(K, m, q, maximize, budget, starts=[np.eye(r)])
    cand = DecompositionCandidate(W)
    value = expected_entanglement(decomposition_from_isometry(rho, cand), a, q)
    direction = Direction.LOWER_BOUND_OF_MAX if maximize else Direction.UPPER_BOUND_OF_MIN
    return BoundedValue(value, direction, evals, witness=cand,
                        info={"measure": name, "cap": m, "rank": r, "restarts": budget.restarts})


def q_entanglement(state, split=None, q=1.0, budget: OptimizationBudget | None = None,
                   cap: int | None = None) -> BoundedValue:
    """q-expected entanglement.

    Pure states give ``S_q`` of the reduction (exact). Mixed states give the
    smallest ``sum p_i^q E_q(psi_i)`` found over decompositions with at most
    ``cap`` members (default ``rank**2``), an upper bound of the minimum.

    For q > 1 splitting members lowers the weights ``sum p_i^q``, so the value
    depends on ``cap``; it is recorded in ``info``.
    """
    return _decomposition_measure(state, split, q, budget, cap, maximize=False)


def q_eoa(state, split=None, q=1.0, budget: OptimizationBudget | None = None,
          cap: int | None = None) -> BoundedValue:
    """q-expected entanglement of assistance; a lower bound of the maximum."""
    return _decomposition_measure(state, split, q, budget, cap, maximize=True)


def replay_decomposition(rho, witness: DecompositionCandidate, split, q) -> float:
    return expected_entanglement(decomposition_from_isometry(as_density(rho), witness), split, q)


# ---------------------------------------------------------------------------
# measurements


def induced_ensemble(rho_ab, meas: Rank1Measurement, on=None) -> Ensemble:
    """Ensemble of the unmeasured reduction produced by measuring ``on``.

    ``on`` defaults to the last subsystem. Outcomes with probability below
    1e-14 are dropped.
    """
    rho = as_density(rho_ab)
    layout = rho.layout
    rest, measured = _measured(layout, on)
    d_rest, d_meas = layout.dim_of(rest), layout.dim_of(measured)
    if meas.dim != d_meas:
        raise InvalidStateError("completeness", f"measurement acts on dimension {meas.dim}, subsystem has {d_meas}")
    matrix = permute(rho, rest + measured).matrix
    R = matrix.reshape(d_rest, d_meas, d_rest, d_meas)
    v = meas.vectors
    blocks = np.einsum("xb,abcd,xd->xac", v.conj(), R, v)
    p = np.real(np.einsum("xaa->x", blocks))
    keep = p >= ZERO_WEIGHT
    sub = layout.select(rest)
    members = tuple(DensityOperator(b / pk, sub) for b, pk in zip(blocks[keep], p[keep]))
    parent = DensityOperator(reduced_matrix(rho, rest), sub)
    return Ensemble(p[keep], members, parent=parent)


def _measurement_measure(rho_ab, q, budget, measured, cap, maximize_chi):
    budget = budget or OptimizationBudget()
    name = "q-cc" if maximize_chi else "q-ue"
    layout = rho_ab.layout
    rest, meas = _measured(layout, measured)
    d_rest, d_meas = layout.dim_of(rest), layout.dim_of(meas)
    if _is_pure(rho_ab):
        # every rank-1 measurement leaves pure conditional states
        s = tsallis_entropy(reduced_matrix(rho_ab, rest), q)
        witness = Rank1Measurement.from_basis(np.eye(d_meas))
        return BoundedValue(s, Direction.EXACT, 0, witness=witness, info={"measure": name, "pure": True})
    rho = as_density(rho_ab)
    matrix = permute(rho, rest + meas).matrix
    K = _measurement_tensor(matrix, d_rest, d_meas)
    m = d_meas * d_meas if cap is None else int(cap)
    if m < d_meas:
        raise ValueError(f"cap {m} is below the measured dimension {d_meas}")
    E, F = canonical_bases(reduced_matrix(rho, meas))
    starts = [np.eye(d_meas), np.conj(E.T), np.conj(F.T)]
    # maximizing chi means minimizing the conditional-entropy sum
    W, evals = _search(K, m, q, not maximize_chi, budget, starts=starts)
    witness = Rank1Measurement.from_isometry(W)
    value = tsallis_q_difference(induced_ensemble(rho, witness, meas), q)
    direction = Direction.LOWER_BOUND_OF_MAX if maximize_chi else Direction.UPPER_BOUND_OF_MIN
    return BoundedValue(value, direction, evals, witness=witness,
                        info={"measure": name, "cap": m, "measured": meas, "restarts": budget.restarts})


def q_cc(rho_ab, q=1.0, budget: OptimizationBudget | None = None, measured=None,
         cap: int | None = None) -> BoundedValue:
    """One-way classical q-correlation: largest Tsallis-q difference found.

    Outcome count is capped at ``d**2`` by default; for q > 1 and mixed
    conditionals the supremum grows with the cap, so the cap is reported.
    """
    return _measurement_measure(rho_ab, q, budget, measured, cap, maximize_chi=True)


def q_ue(rho_ab, q=1.0, budget: OptimizationBudget | None = None, measured=None,
         cap: int | None = None) -> BoundedValue:
    """One-way unlocalizable q-entanglement: smallest Tsallis-q difference found."""
    return _measurement_measure(rho_ab, q, budget, measured, cap, maximize_chi=False)


def replay_measurement(rho_ab, witness: Rank1Measurement, q, measured=None) -> float:
    return tsallis_q_difference(induced_ensemble(rho_ab, witness, measured), q)


def _minus_from_mutual(rho_ab, q, inner: BoundedValue, measured, name) -> BoundedValue:
    rest, meas = _measured(rho_ab.layout, measured)
    i_q = q_mutual_entropy(rho_ab, q, parties=(rest, meas))
    info = dict(inner.info, measure=name, mutual_entropy=i_q)
    return BoundedValue(i_q - inner.value, inner.direction.flipped(), inner.budget_used,
                        witness=inner.witness, info=info)


def q_discord(rho_ab, q=1.0, budget: OptimizationBudget | None = None, measured=None,
              cap: int | None = None) -> BoundedValue:
    """Quantum q-discord ``I_q - J_q``; an upper bound of the true value."""
    inner = q_cc(rho_ab, q, budget, measured, cap)
    return _minus_from_mutual(rho_ab, q, inner, measured, "q-d")


def q_ud(rho_ab, q=1.0, budget: OptimizationBudget | None = None, measured=None,
         cap: int | None = None) -> BoundedValue:
    """One-way unlocalizable q-discord ``I_q - uE_q``; a lower bound of the true value."""
    inner = q_ue(rho_ab, q, budget, measured, cap)
    return _minus_from_mutual(rho_ab, q, inner, measured, "q-ud")


MEASURES = {
    "q-e": q_entanglement,
    "q-eoa": q_eoa,
    "q-cc": q_cc,
    "q-ue": q_ue,
    "q-d": q_discord,
    "q-ud": q_ud,
}


def measure(measure_id: str, state, q=1.0, budget=None, **kwargs) -> BoundedValue:
    try:
        fn = MEASURES[measure_id]
    except KeyError:
        raise ValueError(f"unknown measure {measure_id!r}; choose from {sorted(MEASURES)}") from None
    if measure_id in ("q-e", "q-eoa"):
        return fn(state, q=q, budget=budget, **kwargs)
    return fn(state, q, budget, **kwargs)
