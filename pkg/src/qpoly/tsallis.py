"""Generalized logarithm, Tsallis q-entropy and the quantities built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import DensityOperator, Ensemble, InvalidStateError, PureState, as_density, reduced_matrix

ZERO_EIG = 1e-14


@dataclass(frozen=True)
class EntropyParameter:
    """The entropic index ``q``.

    Within ``limit_epsilon`` of 1 every function switches to the natural-log
    (von Neumann) branch, since the closed forms lose precision there.
    """

    q: float
    limit_epsilon: float = 1e-9

    def __post_init__(self):
        q = float(self.q)
        if not q >= 0 or not math.isfinite(q):
            raise ValueError(f"q must be a finite nonnegative real, got {self.q!r}")
        object.__setattr__(self, "q", q)

    @property
    def is_limit(self) -> bool:
        return abs(self.q - 1.0) < self.limit_epsilon


def as_param(q) -> EntropyParameter:
    if isinstance(q, EntropyParameter):
        return q
    return EntropyParameter(q)


def q_log(x, q) -> float | np.ndarray:
    """``(x**(1-q) - 1) / (1 - q)``, and ``ln x`` on the q=1 branch."""
    qp = as_param(q)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("q_log is only defined for x > 0")
    if qp.is_limit:
        out = np.log(x)
    else:
        out = np.expm1((1.0 - qp.q) * np.log(x)) / (1.0 - qp.q)
    return float(out) if out.ndim == 0 else out


def entropy_from_spectrum(eigenvalues, q) -> float:
    """Tsallis entropy of a probability vector; entries below 1e-14 count as zero."""
    qp = as_param(q)
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > ZERO_EIG]
    if lam.size == 0:
        return 0.0
    if qp.is_limit:
        return float(-np.sum(lam * np.log(lam)))
    return float((1.0 - np.sum(lam**qp.q)) / (qp.q - 1.0))


def _spectrum(state) -> np.ndarray:
    if isinstance(state, PureState):
        return np.array([1.0])
    m = state.matrix if isinstance(state, DensityOperator) else np.asarray(state)
    w = np.linalg.eigvalsh(m)
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def tsallis_entropy(rho, q) -> float:
    """Tsallis q-entropy ``-sum_i l_i^q ln_q l_i`` over the spectrum of ``rho``.

    ``rho`` may be a :class:`DensityOperator`, a :class:`PureState` or a raw
    density matrix. q=1 gives the von Neumann entropy in nats.
    """
    return entropy_from_spectrum(_spectrum(rho), q)


def max_tsallis_entropy(d: int, q) -> float:
    """Entropy of the maximally mixed state ``I/d``: ``(1 - d**(1-q)) / (q - 1)``."""
    qp = as_param(q)
    if d < 1:
        raise ValueError("d must be positive")
    if qp.is_limit:
        return math.log(d)
    return -math.expm1((1.0 - qp.q) * math.log(d)) / (qp.q - 1.0)


def q_mutual_entropy(rho_ab, q, parties=None) -> float:
    """``S_q(A) + S_q(B) - S_q(AB)`` for a bipartite state.

    With more than two subsystems, ``parties`` gives the two groups of labels.
    Tsallis entropy is only pseudo-additive, so product states with mixed
    factors have nonzero mutual entropy when q != 1.
    """
    layout = rho_ab.layout
    if parties is None:
        if len(layout) != 2:
            raise InvalidStateError("layout", f"expected a bipartite layout, got {layout.labels}")
        parties = ([layout.labels[0]], [layout.labels[1]])
    a, b = ([x] if isinstance(x, str) else list(x) for x in parties)
    if set(a) & set(b):
        raise InvalidStateError("layout", "the two parties overlap")
    s_a = tsallis_entropy(reduced_matrix(rho_ab, a), q)
    s_b = tsallis_entropy(reduced_matrix(rho_ab, b), q)
    if len(a) + len(b) == len(layout):
        s_ab = tsallis_entropy(as_density(rho_ab), q)
    else:
        s_ab = tsallis_entropy(reduced_matrix(rho_ab, a + b), q)
    return s_a + s_b - s_ab


def tsallis_q_difference(ens: Ensemble, q) -> float:
    """``S_q(parent) - sum_i p_i^q S_q(member_i)``; the Holevo quantity at q=1."""
    if ens.parent is None:
        raise InvalidStateError("ensemble", "the ensemble has no declared parent state")
    qp = as_param(q)
    p = ens.weights
    keep = p > ZERO_EIG
    weights = p[keep] if qp.is_limit else p[keep] ** qp.q
    member_s = np.array([tsallis_entropy(m, qp) for m, k in zip(ens.members, keep) if k])
    return tsallis_entropy(ens.parent, qp) - float(np.dot(weights, member_s))
