"""
Batched Riemannian ascent on the complex Stiefel manifold.

Every optimized measure reduces to the same problem: rows ``w_i`` of an
``m x r`` isometry ``W`` map to unnormalized Hermitian blocks

    T_i = sum_{k,l} W_ik conj(W_il) K[k, l]

and the objective is ``sum_i phi(T_i)`` with ``phi(T) = p^q S_q(T / p)``,
``p = tr T``. For pure-state decompositions ``K`` is built from the
eigen-decomposition of the state; for rank-1 measurements it is the state
itself with the measured index moved to the front.

All restarts run as one batch; each restart follows its own step sizes and
stopping rule, so a restart's trajectory does not depend on its neighbours.
"""

from __future__ import annotations

import numpy as np

EIG_FLOOR = 1e-300


def phi(blocks: np.ndarray, q: float, limit: bool, grad: bool = False):
    """``p^q S_q(T/p)`` for a stack of PSD blocks, optionally with its gradient.

    The gradient ``G`` satisfies ``d phi = tr(G dT)``.
    """
    w, v = np.linalg.eigh(blocks)
    w = np.clip(w, 0.0, None)
    p = w.sum(-1)
    pos = w > 0
    if limit:
        wl = np.where(pos, w, 1.0)
        pl = np.where(p > 0, p, 1.0)
        val = -np.sum(np.where(pos, w * np.log(wl), 0.0), -1) + p * np.log(pl)
    else:
        val = (p**q - np.sum(np.where(pos, w, 0.0) ** q, -1)) / (q - 1.0)
    if not grad:
        return val
    wf = np.maximum(w, EIG_FLOOR)
    pf = np.maximum(p, EIG_FLOOR)
    if limit:
        diag = -np.log(wf)
        scal = np.log(pf)
        coef = 1.0
    else:
        diag = -(wf ** (q - 1.0))
        scal = pf ** (q - 1.0)
        coef = q / (q - 1.0)
    g = (v * diag[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    d = blocks.shape[-1]
    g = coef * (g + scal[..., None, None] * np.eye(d))
    return val, g


class Problem:
    """Objective ``W -> sum_i phi(T_i(W))`` for a fixed tensor ``K``."""

    def __init__(self, K: np.ndarray, q: float, limit: bool):
        r, _, d, _ = K.shape
        self.r, self.d = r, d
        self.Kf = np.ascontiguousarray(K.reshape(r * r, d * d))
        self.KfT = np.ascontiguousarray(self.Kf.T)
        self.q, self.limit = q, limit

    def blocks(self, W: np.ndarray) -> np.ndarray:
        n, m, r = W.shape
        outer = W[..., :, None] * np.conj(W)[..., None, :]
        return (outer.reshape(n * m, r * r) @ self.Kf).reshape(n, m, self.d, self.d)

    def value(self, W: np.ndarray) -> np.ndarray:
        t = self.blocks(W)
        return phi(t, self.q, self.limit).sum(-1)

    def value_grad(self, W: np.ndarray):
        n, m, r = W.shape
        t = self.blocks(W)
        val, g = phi(t, self.q, self.limit, grad=True)
        gt = np.swapaxes(g, -1, -2).reshape(n * m, self.d * self.d)
        h = (gt @ self.KfT).reshape(n, m, r, r)
        z = 2.0 * np.einsum("nikl,nil->nik", np.conj(h), W)
        return val.sum(-1), z


def _herm(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def project(W, Z):
    return Z - W @ _herm(np.conj(np.swapaxes(W, -1, -2)) @ Z)


def retract(Y):
    u, _, vh = np.linalg.svd(Y, full_matrices=False)
    return u @ vh


def _inner(a, b):
    return np.sum((np.conj(a) * b).real, axis=(-1, -2))


def ascend(problem: Problem, W0: np.ndarray, sign: float, max_iter: int = 400,
           tol: float = 1e-8, patience: int = 4, memory: float = 0.85):
    """Maximize ``sign * objective`` from each starting isometry in ``W0``.

    Steps alternate between the two Barzilai-Borwein lengths and are
    accepted by a nonmonotone Armijo test against a running weighted
    average of past values (weight ``memory``). Each restart keeps the best
    point it visited.

    Returns ``(W, values, evaluations)`` where ``values`` are the unsigned
    objective values at the returned points.
    """
    W = W0.copy()
    n = W.shape[0]
    f, z = problem.value_grad(W)
    g = sign * f
    xi = project(W, sign * z)
    gn2 = _inner(xi, xi)
    alpha = 1.0 / np.maximum(np.sqrt(gn2), 1e-3)
    ref = g.copy()
    weight = np.ones(n)
    best_W, best_g = W.copy(), g.copy()
    active = np.ones(n, dtype=bool)
    quiet = np.zeros(n, dtype=int)
    evals = n
    for it in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Wa, xia, ga, gna, refa = W[idx], xi[idx], g[idx], gn2[idx], ref[idx]
        t = alpha[idx].copy()
        done = np.zeros(idx.size, dtype=bool)
        Wnew = Wa.copy()
        for _bt in range(40):
            todo = np.flatnonzero(~done)
            Wt = retract(Wa[todo] + t[todo, None, None] * xia[todo])
            gt = sign * problem.value(Wt)
            evals += todo.size
            ok = gt >= refa[todo] + 1e-4 * t[todo] * gna[todo]
            Wnew[todo[ok]] = Wt[ok]
            done[todo[ok]] = True
            if done.all():
                break
            t[todo[~ok]] *= 0.5
        stuck = ~done
        fn, zn = problem.value_grad(Wnew)
        evals += idx.size
        gn = sign * fn
        xin = project(Wnew, sign * zn)
        s = Wnew - Wa
        y = xia - xin
        sy = np.abs(_inner(s, y))
        if it % 2 == 0:
            num, den = _inner(s, s), sy
        else:
            num, den = sy, _inner(y, y)
        bb = np.where(den > 0, num / np.where(den > 0, den, 1.0), 10.0 * t)
        small = np.abs(gn - ga) <= tol * 1e-4 * (1.0 + np.abs(gn))
        quiet[idx] = np.where(small, quiet[idx] + 1, 0)
        # accepted points only; a stalled line search keeps the old point
        k = idx[~stuck]
        W[k], g[k], xi[k] = Wnew[~stuck], gn[~stuck], xin[~stuck]
        gn2[k] = _inner(xi[k], xi[k])
        w_next = memory * weight[k] + 1.0
        ref[k] = (memory * weight[k] * ref[k] + g[k]) / w_next
        weight[k] = w_next
        up = k[g[k] > best_g[k]]
        best_W[up], best_g[up] = W[up], g[up]
        alpha[idx] = np.clip(bb, 1e-8, 1e8)
        finished = stuck | (quiet[idx] >= patience) | (gn2[idx] < (tol * 1e-2) ** 2)
        active[idx[finished]] = False
    return best_W, sign * best_g, evals
