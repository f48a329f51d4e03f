"""
Executable checks of the trade-off identities and the monogamy / polygamy
inequalities, with verdicts that respect one-sided optimizer output.

Every term enters a verdict as an interval ``[lo, hi]`` known to contain the
true value. An EXACT term is a point. A LOWER_BOUND_OF_MAX term is
``[reported, ceiling]`` and an UPPER_BOUND_OF_MIN term is
``[floor, reported]``, where floors and ceilings are analytic bounds
(nonnegativity, ``E^a_q(rho_AB) <= min(S_q(A), S_q(B))`` and so on).
For ``small <= big``:

* CERTIFIED when ``hi(small) <= lo(big) + tol``;
* VIOLATED when ``lo(small) > hi(big) + tol``;
* INCONCLUSIVE otherwise.

So a violation is only reported when no refinement of the optimizer could
remove it, and a larger budget can only turn INCONCLUSIVE into CERTIFIED.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .ccq import PREMISE_TOL, gap_report
from .measures import (
    BoundedValue,
    Direction,
    OptimizationBudget,
    Rank1Measurement,
    _minus_from_mutual,
    induced_ensemble,
    q_cc,
    q_eoa,
    q_ue,
)
from .states import (
    DensityOperator,
    InvalidStateError,
    PureState,
    SubsystemLayout,
    as_density,
    haar_isometry,
    partial_trace,
    permute,
    reduced_matrix,
)
from .tsallis import as_param, q_mutual_entropy, tsallis_entropy, tsallis_q_difference

IDENTITY_TOL = 1e-9
CERTIFY_TOL = 1e-6
POOL_SIZE = 100
MAX_AMBIENT_DIM = 256
# spawn key for random measurement pools; restarts use keys (0,), (1,), ...
_POOL_KEY = 2**31


class Status(enum.Enum):
    CERTIFIED = "CERTIFIED"
    INCONCLUSIVE = "INCONCLUSIVE"
    VIOLATED = "VIOLATED"


class PremiseStatus(enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    NOT_APPLICABLE = "NOT_APPLICABLE"


class SizeGuardError(ValueError):
    pass


_SEVERITY = {Status.CERTIFIED: 0, Status.INCONCLUSIVE: 1, Status.VIOLATED: 2}


@dataclass(frozen=True)
class Bound:
    """A reported value together with an interval known to hold the true value."""

    value: float
    lo: float
    hi: float

    @classmethod
    def exact(cls, v: float) -> "Bound":
        return cls(v, v, v)

    @classmethod
    def of(cls, bv: BoundedValue, floor: float = -math.inf, ceiling: float = math.inf) -> "Bound":
        v = float(bv.value)
        if bv.direction is Direction.EXACT:
            return cls(v, v, v)
        if bv.direction is Direction.LOWER_BOUND_OF_MAX:
            return cls(v, v, max(v, ceiling))
        return cls(v, min(v, floor), v)

    def __add__(self, other: "Bound") -> "Bound":
        return Bound(self.value + other.value, self.lo + other.lo, self.hi + other.hi)

    def scaled(self, c: float) -> "Bound":
        if c >= 0:
            return Bound(c * self.value, c * self.lo, c * self.hi)
        return Bound(c * self.value, c * self.hi, c * self.lo)


def compare(small: Bound, big: Bound, tol: float = CERTIFY_TOL) -> tuple[Status, float]:
    """Status and reported margin ``big - small`` for the inequality ``small <= big``."""
    if small.hi <= big.lo + tol:
        status = Status.CERTIFIED
    elif small.lo > big.hi + tol:
        status = Status.VIOLATED
    else:
        status = Status.INCONCLUSIVE
    return status, big.value - small.value


def worst(*statuses: Status) -> Status:
    return max(statuses, key=_SEVERITY.__getitem__)


@dataclass(frozen=True)
class Verdict:
    check: str
    q: float
    dims: tuple
    seed: int
    status: Status
    premise_status: PremiseStatus
    margin: float
    components: dict
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "q": self.q,
            "dims": list(self.dims),
            "seed": self.seed,
            "status": self.status.value,
            "premise_status": self.premise_status.value,
            "margin": self.margin,
            "components": {k: v.as_dict() for k, v in self.components.items()},
            "details": self.details,
        }


def _premise(gaps: list[float], tol: float = PREMISE_TOL) -> PremiseStatus:
    if not gaps:
        return PremiseStatus.NOT_APPLICABLE
    return PremiseStatus.HOLDS if min(gaps) >= -tol else PremiseStatus.FAILS


def _exact(v: float, **info) -> BoundedValue:
    return BoundedValue(float(v), Direction.EXACT, info=info)


def _budget(budget) -> OptimizationBudget:
    return budget or OptimizationBudget()


def _require_q(q, check):
    qp = as_param(q)
    if qp.q < 1.0 and not qp.is_limit:
        raise ValueError(f"{check} needs q >= 1, got {qp.q}")
    return qp


def _three_party_pure(psi, check) -> PureState:
    if not isinstance(psi, PureState):
        if isinstance(psi, DensityOperator) and psi.is_pure(1e-10):
            w, v = np.linalg.eigh(psi.matrix)
            psi = PureState.normalized(v[:, -1], psi.layout)
        else:
            raise InvalidStateError("normalization", f"{check} needs a pure state")
    if len(psi.layout) != 3:
        raise InvalidStateError("layout", f"{check} needs three parties, got {psi.layout.labels}")
    return psi


def _pair(state, labels) -> DensityOperator:
    """Reduced state on ``labels``, in the order given."""
    return permute(partial_trace(state, labels), labels)


def _pad_to(rho: DensityOperator, d: int) -> DensityOperator:
    """Embed every subsystem of ``rho`` into dimension ``d``."""
    dims = rho.layout.dims
    if all(x == d for x in dims):
        return rho
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    out = np.zeros((d,) * (2 * n), dtype=np.complex128)
    out[tuple(slice(0, x) for x in dims + dims)] = t
    return DensityOperator(out.reshape(d**n, d**n), SubsystemLayout((d,) * n, rho.layout.labels))


def _gap(rho_pair: DensityOperator, q, d: int | None = None):
    d = d or max(rho_pair.layout.dims)
    return gap_report(_pad_to(rho_pair, d), q).gap


def _random_pool(d: int, budget: OptimizationBudget, size: int) -> list[Rank1Measurement]:
    rng = np.random.default_rng(np.random.SeedSequence(budget.rng_seed, spawn_key=(_POOL_KEY,)))
    return [Rank1Measurement.from_isometry(haar_isometry(d * d, d, rng)) for _ in range(size)]


# ---------------------------------------------------------------------------
# identities


def _identity_verdict(check, qp, psi, budget, components, residuals_a, residual_b, premise=PremiseStatus.NOT_APPLICABLE):
    worst_a = max(residuals_a) if residuals_a else 0.0
    worst_b = max(abs(r) for r in residual_b)
    status = Status.VIOLATED if worst_a > IDENTITY_TOL else (
        Status.CERTIFIED if worst_b <= IDENTITY_TOL else Status.INCONCLUSIVE)
    details = {"pool_size": len(residuals_a), "worst_candidate_residual": worst_a,
               "optimized_residual": worst_b}
    return Verdict(check, qp.q, psi.layout.dims, budget.rng_seed, status, premise,
                   -max(worst_a, worst_b), components, details)


def prop1_candidate_residual(psi: PureState, meas: Rank1Measurement, q) -> float:
    """``chi_q(A | meas on B) + sum p^q S_q(A of conditional) - S_q(A)`` for one measurement.

    ``psi`` has layout A, B, C and ``meas`` acts on B.
    """
    a, b, c = psi.layout.labels
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), q)
    chi = tsallis_q_difference(induced_ensemble(_pair(psi, [a, b]), meas, b), q)
    return chi + _conditional_entanglement(psi, meas, q) - s_a


def _conditional_entanglement(psi, meas, q) -> float:
    """Expected A-entropy of the pure AC states left by measuring B."""
    qp = as_param(q)
    a, b, c = psi.layout.labels
    ens = induced_ensemble(as_density(psi), meas, b)
    p = ens.weights if qp.is_limit else ens.weights**qp.q
    ents = [tsallis_entropy(reduced_matrix(m, [a]), qp) for m in ens.members]
    return float(np.dot(p, ents))


def check_prop1(psi_abc, q, budget: OptimizationBudget | None = None, pool_size: int = POOL_SIZE) -> Verdict:
    """Both trade-off identities between one-way classical correlation and entanglement.

    ``S_q(A) = J_q(rho_AB) + E_q(rho_AC)`` and ``S_q(A) = uE_q(rho_AB) + E^a_q(rho_AC)``.

    (a) every measurement of a random pool on B satisfies the per-candidate
    identity; (b) the optimized measurements on B, together with the random
    pool, form one shared candidate pool. Each candidate induces both an
    ensemble on A and a pure-state decomposition of AC, so the optimum of one
    side is attained by the same candidate as the optimum of the other.
    """
    qp = _require_q(q, "prop1")
    psi = _three_party_pure(psi_abc, "prop1")
    budget = _budget(budget)
    a, b, c = psi.layout.labels
    d_b = psi.layout.dim_of([b])
    rho_ab = _pair(psi, [a, b])
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), qp)
    pool = _random_pool(d_b, budget, pool_size)
    residuals_a = [abs(prop1_candidate_residual(psi, m, qp)) for m in pool]

    opt_cc = q_cc(rho_ab, qp, budget, measured=b)
    opt_ue = q_ue(rho_ab, qp, budget, measured=b)
    shared = pool + [w for w in (opt_cc.witness, opt_ue.witness) if isinstance(w, Rank1Measurement)]
    chis = np.array([tsallis_q_difference(induced_ensemble(rho_ab, m, b), qp) for m in shared])
    ents = np.array([_conditional_entanglement(psi, m, qp) for m in shared])
    i_max, i_min = int(np.argmax(chis)), int(np.argmin(chis))
    j = _pool_bound(chis[i_max], Direction.LOWER_BOUND_OF_MAX, opt_cc, "J")
    ue = _pool_bound(chis[i_min], Direction.UPPER_BOUND_OF_MIN, opt_ue, "uE")
    e = _exact_or(ents.min(), Direction.UPPER_BOUND_OF_MIN, "E")
    ea = _exact_or(ents.max(), Direction.LOWER_BOUND_OF_MAX, "Ea")
    residual_b = [j.value + e.value - s_a, ue.value + ea.value - s_a]
    components = {"S_A": _exact(s_a), "J_AB": j, "E_AC": e, "uE_AB": ue, "Ea_AC": ea}
    if opt_cc.direction is Direction.EXACT:
        components = {k: BoundedValue(v.value, Direction.EXACT) for k, v in components.items()}
    return _identity_verdict("prop1", qp, psi, budget, components, residuals_a, residual_b)


def _pool_bound(v, direction, opt: BoundedValue, name) -> BoundedValue:
    if opt.direction is Direction.EXACT:
        return BoundedValue(float(opt.value), Direction.EXACT, opt.budget_used, info={"term": name})
    return BoundedValue(float(v), direction, opt.budget_used, info={"term": name})


def _exact_or(v, direction, name) -> BoundedValue:
    return BoundedValue(float(v), direction, info={"term": name})


def prop2_candidate_residual(psi: PureState, meas: Rank1Measurement, q) -> float:
    """``I_q(B:A) - chi_q(B | meas on A) + chi_q(C | meas on A) - S_q(A)``."""
    a, b, c = psi.layout.labels
    rho_ba, rho_ca = _pair(psi, [b, a]), _pair(psi, [c, a])
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), q)
    i_ba = q_mutual_entropy(rho_ba, q)
    chi_b = tsallis_q_difference(induced_ensemble(rho_ba, meas, a), q)
    chi_c = tsallis_q_difference(induced_ensemble(rho_ca, meas, a), q)
    return i_ba - chi_b + chi_c - s_a


def check_prop2(psi_abc, q, budget: OptimizationBudget | None = None, pool_size: int = POOL_SIZE) -> Verdict:
    """``S_q(A) = u-delta_q(rho_BA) + uE_q(rho_CA)`` with measurements on A.

    Per candidate, ``chi(B) - chi(C) = S_q(B) - S_q(C)``, so one measurement
    minimizes both Tsallis-q differences and the shared pool is exact.
    """
    qp = _require_q(q, "prop2")
    psi = _three_party_pure(psi_abc, "prop2")
    budget = _budget(budget)
    a, b, c = psi.layout.labels
    d_a = psi.layout.dim_of([a])
    rho_ba, rho_ca = _pair(psi, [b, a]), _pair(psi, [c, a])
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), qp)
    i_ba = q_mutual_entropy(rho_ba, qp)
    pool = _random_pool(d_a, budget, pool_size)
    residuals_a = [abs(prop2_candidate_residual(psi, m, qp)) for m in pool]

    opt_b = q_ue(rho_ba, qp, budget, measured=a)
    opt_c = q_ue(rho_ca, qp, budget, measured=a)
    shared = pool + [w for w in (opt_b.witness, opt_c.witness) if isinstance(w, Rank1Measurement)]
    chi_b = np.array([tsallis_q_difference(induced_ensemble(rho_ba, m, a), qp) for m in shared])
    chi_c = np.array([tsallis_q_difference(induced_ensemble(rho_ca, m, a), qp) for m in shared])
    k = int(np.argmin(chi_b))
    ue_b = _pool_bound(chi_b[k], Direction.UPPER_BOUND_OF_MIN, opt_b, "uE_BA")
    ue_c = _pool_bound(chi_c[int(np.argmin(chi_c))], Direction.UPPER_BOUND_OF_MIN, opt_c, "uE_CA")
    ud_b = BoundedValue(i_ba - ue_b.value, ue_b.direction.flipped(), ue_b.budget_used, info={"term": "ud_BA"})
    residual_b = [ud_b.value + ue_c.value - s_a]
    components = {"S_A": _exact(s_a), "I_BA": _exact(i_ba), "ud_BA": ud_b, "uE_CA": ue_c}
    return _identity_verdict("prop2", qp, psi, budget, components, residuals_a, residual_b)


# ---------------------------------------------------------------------------
# bounds and inequalities


def q_threshold(d: int) -> float:
    """Smallest q for which the ccq argument bounds uE_q by half the mutual entropy."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return math.log((1.0 + math.sqrt(5.0)) / 2.0) / math.log(d) + 1.0


def check_thm1(rho_ab, q, budget: OptimizationBudget | None = None) -> Verdict:
    """``uE_q(rho_AB) <= I_q/2`` and ``u-delta_q(rho_AB) >= I_q/2``, measuring B.

    The premise is the ccq subadditivity gap of ``rho_AB``, with both
    subsystems embedded in the larger local dimension ``d``. ``details``
    records whether q clears the threshold for that ``d``.
    """
    qp = _require_q(q, "thm1")
    rho = as_density(rho_ab)
    if len(rho.layout) != 2:
        raise InvalidStateError("layout", "thm1 needs a two-party state")
    budget = _budget(budget)
    d = max(rho.layout.dims)
    i_q = q_mutual_entropy(rho, qp)
    ue = q_ue(rho, qp, budget)
    ud = _minus_from_mutual(rho, qp, ue, None, "q-ud")
    gap = _gap(rho, qp, d)
    half = Bound.exact(i_q / 2.0)
    st1, m1 = compare(Bound.of(ue, floor=0.0), half)
    st2, m2 = compare(half, Bound.of(ud, ceiling=i_q))
    components = {"I_q": _exact(i_q), "uE": ue, "ud": ud, "ccq_gap": _exact(gap)}
    details = {"threshold": q_threshold(d), "threshold_cleared": bool(qp.q >= q_threshold(d)),
               "uE_status": st1.value, "ud_status": st2.value}
    return Verdict("thm1", qp.q, rho.layout.dims, budget.rng_seed, worst(st1, st2), _premise([gap]),
                   min(m1, m2), components, details)


def _eoa_bound(bv: BoundedValue, rho_pair: DensityOperator, q) -> Bound:
    labels = rho_pair.layout.labels
    ceiling = min(tsallis_entropy(reduced_matrix(rho_pair, [x]), q) for x in labels)
    return Bound.of(bv, floor=0.0, ceiling=ceiling)


def check_thm2(psi_abc, q, budget: OptimizationBudget | None = None) -> Verdict:
    """``E_q(psi_A(BC)) <= E^a_q(rho_AB) + E^a_q(rho_AC)`` for a pure three-party state.

    The left side is ``S_q(A)`` exactly. The right-side terms are lower
    bounds of maxima capped by ``min(S_q(A), S_q(other))``.
    """
    qp = _require_q(q, "thm2")
    psi = _three_party_pure(psi_abc, "thm2")
    budget = _budget(budget)
    a, b, c = psi.layout.labels
    d = max(psi.layout.dims)
    rho_ab, rho_ac = _pair(psi, [a, b]), _pair(psi, [a, c])
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), qp)
    ea_b = q_eoa(rho_ab, split=a, q=qp, budget=budget)
    ea_c = q_eoa(rho_ac, split=a, q=qp, budget=budget)
    status, margin = compare(Bound.exact(s_a), _eoa_bound(ea_b, rho_ab, qp) + _eoa_bound(ea_c, rho_ac, qp))
    gaps = [_gap(rho_ab, qp, d), _gap(rho_ac, qp, d)]
    components = {"E_A(BC)": _exact(s_a), "Ea_AB": ea_b, "Ea_AC": ea_c,
                  "ccq_gap_AB": _exact(gaps[0]), "ccq_gap_AC": _exact(gaps[1])}
    return Verdict("thm2", qp.q, psi.layout.dims, budget.rng_seed, status, _premise(gaps), margin, components)


def check_cor2(psi_abc, q, budget: OptimizationBudget | None = None) -> Verdict:
    """Monogamy of uE_q and polygamy of u-delta_q for a pure three-party state.

    ``uE_q(psi_A(BC)) = u-delta_q(psi_A(BC)) = S_q(A)`` exactly. The
    pairwise uE_q values are upper bounds of minima, so a reported sum at
    most ``S_q(A)`` certifies monogamy outright; the pairwise u-delta_q
    values are lower bounds of maxima and certify polygamy in the same way.
    """
    qp = _require_q(q, "cor2")
    psi = _three_party_pure(psi_abc, "cor2")
    budget = _budget(budget)
    a, b, c = psi.layout.labels
    d = max(psi.layout.dims)
    rho_ab, rho_ac = _pair(psi, [a, b]), _pair(psi, [a, c])
    s_a = tsallis_entropy(reduced_matrix(psi, [a]), qp)
    ue_b = q_ue(rho_ab, qp, budget, measured=b)
    ue_c = q_ue(rho_ac, qp, budget, measured=c)
    ud_b = _minus_from_mutual(rho_ab, qp, ue_b, b, "q-ud")
    ud_c = _minus_from_mutual(rho_ac, qp, ue_c, c, "q-ud")
    i_b, i_c = ud_b.info["mutual_entropy"], ud_c.info["mutual_entropy"]
    lhs = Bound.exact(s_a)
    st1, m1 = compare(Bound.of(ue_b, floor=0.0) + Bound.of(ue_c, floor=0.0), lhs)
    st2, m2 = compare(lhs, Bound.of(ud_b, ceiling=i_b) + Bound.of(ud_c, ceiling=i_c))
    gaps = [_gap(rho_ab, qp, d), _gap(rho_ac, qp, d)]
    components = {"uE_A(BC)": _exact(s_a), "uE_AB": ue_b, "uE_AC": ue_c,
                  "ud_A(BC)": _exact(s_a), "ud_AB": ud_b, "ud_AC": ud_c,
                  "ccq_gap_AB": _exact(gaps[0]), "ccq_gap_AC": _exact(gaps[1])}
    details = {"monogamy_status": st1.value, "polygamy_status": st2.value}
    return Verdict("cor2", qp.q, psi.layout.dims, budget.rng_seed, worst(st1, st2), _premise(gaps),
                   min(m1, m2), components, details)


def check_thm3(rho, q, budget: OptimizationBudget | None = None) -> Verdict:
    """``E^a_q(rho_{A1(A2...An)}) <= sum_i E^a_q(rho_{A1 Ai})`` for n >= 3 parties.

    A pure input has an exact left side ``S_q(A1)``; otherwise the left side
    is only known to lie in ``[reported, min(S_q(A1), S_q(rest))]``.
    """
    qp = _require_q(q, "thm3")
    layout = rho.layout
    if len(layout) < 3:
        raise InvalidStateError("layout", "thm3 needs at least three parties")
    if layout.dim > MAX_AMBIENT_DIM:
        raise SizeGuardError(f"ambient dimension {layout.dim} exceeds {MAX_AMBIENT_DIM}")
    budget = _budget(budget)
    first, rest = layout.labels[0], list(layout.labels[1:])
    d = max(layout.dims)
    s_1 = tsallis_entropy(reduced_matrix(rho, [first]), qp)
    if isinstance(rho, PureState) or as_density(rho).is_pure(1e-12):
        lhs_bv = _exact(s_1)
        lhs = Bound.exact(s_1)
    else:
        lhs_bv = q_eoa(rho, split=first, q=qp, budget=budget)
        s_rest = tsallis_entropy(reduced_matrix(rho, rest), qp)
        lhs = Bound.of(lhs_bv, floor=0.0, ceiling=min(s_1, s_rest))
    components = {f"Ea_{first}(rest)": lhs_bv}
    rhs = Bound.exact(0.0)
    gaps = []
    for x in rest:
        pair = _pair(rho, [first, x])
        bv = q_eoa(pair, split=first, q=qp, budget=budget)
        components[f"Ea_{first}{x}"] = bv
        rhs = rhs + _eoa_bound(bv, pair, qp)
        gaps.append(_gap(pair, qp, d))
    for x, g in zip(rest, gaps):
        components[f"ccq_gap_{first}{x}"] = _exact(g)
    status, margin = compare(lhs, rhs)
    return Verdict("thm3", qp.q, layout.dims, budget.rng_seed, status, _premise(gaps), margin, components)


CHECKS = {
    "prop1": check_prop1,
    "prop2": check_prop2,
    "thm1": check_thm1,
    "thm2": check_thm2,
    "cor2": check_cor2,
    "thm3": check_thm3,
}
