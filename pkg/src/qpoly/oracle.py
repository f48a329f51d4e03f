"""
Grid oracle for the optimized measures on small states.

Both search spaces collapse to the same object when the relevant dimension is
two: a rank-1 POVM ``{|a_i><a_i|}`` on a qubit, i.e. points ``n_i`` on the
Bloch sphere with weights ``t_i >= 0``, ``sum t_i = 2``, ``sum t_i n_i = 0``.
For measurements the POVM acts on the measured qubit; for decompositions of a
rank-2 state it mixes the two weighted eigenvectors
(``p_i psi_i = sum_k a_i[k] sqrt(l_k) e_k``).

The grid at level ``L`` enumerates

* every projective measurement with Bloch axis on the level-``L`` icosphere,
* every four-outcome POVM whose Bloch vectors are four vertices of the
  level-``min(L, 1)`` icosphere with the origin inside their tetrahedron,

then polishes the best grid points with Nelder-Mead over unconstrained
vectors ``b_i`` mapped to ``a_i = S^{-1/2} b_i``, ``S = sum_i b_i b_i^+``.
Every level below ``L`` is included, so refining the grid never worsens the
reported bound.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .measures import BoundedValue, Direction, _bipartite, _measured, _side
from .states import as_density, permute, reduced_matrix, spectral_decompose
from .tsallis import as_param, q_mutual_entropy, tsallis_entropy

DECOMPOSITION = {"q-e": False, "q-eoa": True}
MEASUREMENT = {"q-cc": False, "q-ue": True, "q-d": False, "q-ud": True}
POLISH_STARTS = 2
DIRECTIONS = {
    "q-e": Direction.UPPER_BOUND_OF_MIN,
    "q-eoa": Direction.LOWER_BOUND_OF_MAX,
    "q-cc": Direction.LOWER_BOUND_OF_MAX,
    "q-ue": Direction.UPPER_BOUND_OF_MIN,
    "q-d": Direction.UPPER_BOUND_OF_MIN,
    "q-ud": Direction.LOWER_BOUND_OF_MAX,
}


class OracleSizeError(ValueError):
    pass


@lru_cache(maxsize=None)
def icosphere(level: int) -> np.ndarray:
    """Unit vectors of the icosahedron subdivided ``level`` times (nested in ``level``)."""
    t = (1 + 5**0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    pts = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                v = pts[i] + pts[j]
                pts.append(v / np.linalg.norm(v))
                cache[key] = len(pts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(pts)


def grid_spacing(level: int) -> float:
    """Largest angular distance from any grid point to its nearest neighbour, in radians."""
    p = icosphere(level)
    c = np.clip(p @ p.T, -1, 1)
    np.fill_diagonal(c, -1)
    return float(np.max(np.arccos(c.max(1))))


def bloch_ket(n: np.ndarray) -> np.ndarray:
    """Qubit kets with Bloch vectors ``n`` (shape (..., 3))."""
    theta = np.arccos(np.clip(n[..., 2], -1, 1))
    ph = np.arctan2(n[..., 1], n[..., 0])
    return np.stack([np.cos(theta / 2), np.exp(1j * ph) * np.sin(theta / 2)], -1).astype(complex)


def _projective_configs(level):
    pts = icosphere(level)
    pts = pts[(pts[:, 2] > 1e-12) | ((np.abs(pts[:, 2]) <= 1e-12) & (pts[:, 1] >= 0))]
    k = bloch_ket(pts)
    return np.stack([k, bloch_ket(-pts)], 1)


@lru_cache(maxsize=None)
def _level_configs(level):
    proj = _projective_configs(level)
    proj = np.concatenate([proj, np.zeros_like(proj)], 1)
    if level > 1:
        return proj
    return np.concatenate([proj, _tetra_configs(level)], 0)


@lru_cache(maxsize=None)
def _tetra_configs(level):
    pts = icosphere(level)
    quads = np.array(list(itertools.combinations(range(len(pts)), 4)))
    n = pts[quads]
    A = np.concatenate([np.swapaxes(n, 1, 2), np.ones((len(quads), 1, 4))], 1)
    rhs = np.array([0.0, 0.0, 0.0, 2.0])
    det = np.linalg.det(A)
    ok = np.abs(det) > 1e-9
    t = np.linalg.solve(A[ok], np.broadcast_to(rhs, (ok.sum(), 4))[..., None])[..., 0]
    inside = np.all(t > 1e-12, axis=1)
    t = t[inside]
    kets = bloch_ket(n[ok][inside])
    return kets * np.sqrt(t)[..., None]


def _spectral_sum(blocks: np.ndarray, q) -> np.ndarray:
    """``sum_i p_i^q S_q(blocks_i / p_i)`` over the outcome axis."""
    qp = as_param(q)
    w = np.clip(np.linalg.eigvalsh(blocks), 0, None)
    p = w.sum(-1)
    safe_p = np.where(p > 1e-14, p, 1.0)
    lam = w / safe_p[..., None]
    pos = lam > 1e-14
    if qp.is_limit:
        s = -np.sum(np.where(pos, lam * np.log(np.where(pos, lam, 1)), 0), -1)
        wq = p
    else:
        s = (1 - np.sum(np.where(pos, lam, 0) ** qp.q, -1)) / (qp.q - 1)
        wq = p**qp.q
    return np.sum(np.where(p > 1e-14, wq * s, 0.0), -1)


class _Target:
    """Evaluates a measure's inner objective on batches of qubit POVM vectors."""

    def __init__(self, rho, measure_id, q, split=None, measured=None):
        self.q = q
        self.measure_id = measure_id
        if measure_id in DECOMPOSITION:
            matrix, da, db, a, _ = _bipartite(rho, split)
            sd = spectral_decompose(matrix)
            r = int(np.sum(sd.eigenvalues > 1e-12))
            if r > 2:
                raise OracleSizeError(f"oracle needs rank <= 2, state has rank {r}")
            self.rank = r
            lam = sd.eigenvalues[:2]
            T = (sd.eigenvectors[:, :2] * np.sqrt(lam)).T.reshape(2, da, db)
            self.T = T if da <= db else np.swapaxes(T, 1, 2)
            self.offset, self.sign = 0.0, 1.0
            self.maximize = DECOMPOSITION[measure_id]
            self.pure_value = tsallis_entropy(reduced_matrix(rho, a), q)
        else:
            rest, meas = _measured(rho.layout, measured)
            if rho.layout.dim_of(meas) != 2:
                raise OracleSizeError("oracle needs a qubit as the measured subsystem")
            self.rank = 2
            d_rest = rho.layout.dim_of(rest)
            m = permute(rho, rest + meas).matrix
            self.R = m.reshape(d_rest, 2, d_rest, 2)
            s_rest = tsallis_entropy(reduced_matrix(rho, rest), q)
            if measure_id in ("q-d", "q-ud"):
                i_q = q_mutual_entropy(rho, q, parties=(rest, meas))
                # I - (S - sum) = (I - S) + sum
                self.offset, self.sign = i_q - s_rest, 1.0
            else:
                self.offset, self.sign = s_rest, -1.0
            # q-UE / q-UD extremize chi downward, i.e. the conditional sum upward
            self.maximize = MEASUREMENT[measure_id]

    def blocks(self, a: np.ndarray) -> np.ndarray:
        if hasattr(self, "T"):
            u = np.einsum("...ik,kxy->...ixy", a, self.T)
            return u @ np.conj(np.swapaxes(u, -1, -2))
        return np.einsum("...xb,abcd,...xd->...xac", np.conj(a), self.R, a)

    def inner(self, a: np.ndarray) -> np.ndarray:
        return _spectral_sum(self.blocks(a), self.q)

    def reported(self, inner_value: float) -> float:
        return self.offset + self.sign * inner_value


def _normalize_povm(b: np.ndarray) -> np.ndarray:
    S = np.einsum("ik,il->kl", b, np.conj(b))
    w, v = np.linalg.eigh(S)
    if w[0] <= 1e-12:
        return None
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return b @ inv_sqrt.T


def _polish(target: _Target, a0: np.ndarray, max_fev: int) -> tuple[float, np.ndarray, int]:
    m = 4
    a0 = np.concatenate([a0, np.zeros((m - a0.shape[0], 2), complex)]) if a0.shape[0] < m else a0
    x0 = np.concatenate([a0.real.ravel(), a0.imag.ravel()])
    sgn = -1.0 if target.maximize else 1.0

    def f(x):
        b = (x[:8] + 1j * x[8:]).reshape(m, 2)
        a = _normalize_povm(b)
        if a is None:
            return 1e3
        return sgn * float(target.inner(a[None])[0])

    simplex = np.vstack([x0] + [x0 + 0.05 * e for e in np.eye(16)])
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-13,
                            "maxfev": max_fev, "adaptive": True})
    b = (res.x[:8] + 1j * res.x[8:]).reshape(m, 2)
    a = _normalize_povm(b)
    return float(target.inner(a[None])[0]), a, res.nfev


def brute_force_oracle(rho, measure_id: str, q=1.0, grid_resolution: int = 2, split=None,
                       measured=None, polish: bool = True, max_fev: int = 3000) -> BoundedValue:
    """Exhaustive grid search (plus polishing) for one measure on a small state.

    Requires ambient dimension <= 4. Decomposition measures (``q-e``,
    ``q-eoa``) need rank <= 2; measurement measures need a qubit as the
    measured subsystem. The bound direction matches the measure's.
    """
    rho = as_density(rho)
    if rho.dim > 4:
        raise OracleSizeError(f"oracle needs ambient dimension <= 4, got {rho.dim}")
    if measure_id not in DECOMPOSITION and measure_id not in MEASUREMENT:
        raise ValueError(f"unknown measure {measure_id!r}")
    level = int(grid_resolution)
    if level < 0:
        raise ValueError("grid_resolution must be >= 0")
    target = _Target(rho, measure_id, q, split, measured)
    direction = DIRECTIONS[measure_id]
    info = {"measure": measure_id, "grid_level": level, "grid_spacing": grid_spacing(level)}
    if measure_id in DECOMPOSITION and target.rank == 1:
        return BoundedValue(target.pure_value, Direction.EXACT, 0, info=dict(info, pure=True))

    pick = np.argmax if target.maximize else np.argmin
    better = (lambda x, y: x > y) if target.maximize else (lambda x, y: x < y)
    best_val, best_a, evals = None, None, 0
    for lev in range(level + 1):
        cfg = _level_configs(lev)
        vals = target.inner(cfg)
        evals += len(cfg)
        i = int(pick(vals))
        if best_val is None or better(vals[i], best_val):
            best_val, best_a = float(vals[i]), cfg[i]
        if polish:
            order = np.argsort(-vals if target.maximize else vals, kind="stable")
            for j in order[:POLISH_STARTS]:
                v, a, nfev = _polish(target, cfg[j], max_fev)
                evals += nfev
                if better(v, best_val):
                    best_val, best_a = v, a
    return BoundedValue(target.reported(best_val), direction, evals, witness=best_a, info=info)
