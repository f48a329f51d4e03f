"""
Finite-dimensional quantum states and the linear algebra used on them.

Everything here works on dense complex128 arrays. States are immutable:
constructors validate, symmetrize where allowed, and freeze the underlying
array.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-8
TRACE_TOL = 1e-10
NEG_EIG_TOL = 1e-10
NORM_TOL = 1e-12
ENSEMBLE_TOL = 1e-10
RECONSTRUCT_TOL = 1e-9
SPECTRAL_TOL = 1e-10


class InvalidStateError(ValueError):
    """Raised when an input violates a state invariant.

    ``invariant`` names the violated property (``"hermiticity"``,
    ``"trace"``, ``"positivity"``, ``"normalization"``, ``"layout"``,
    ``"ensemble"``).
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class NumericError(ArithmeticError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SubsystemLayout:
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(str(x) for x in self.labels)
        if len(dims) == 0 or any(d < 1 for d in dims):
            raise InvalidStateError("layout", f"dims must be positive, got {dims}")
        if len(labels) != len(dims):
            raise InvalidStateError("layout", "one label per subsystem is required")
        if len(set(labels)) != len(labels):
            raise InvalidStateError("layout", f"labels must be unique, got {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of(cls, dims: Sequence[int], labels: Sequence[str] | None = None) -> "SubsystemLayout":
        """Layout with default labels A, B, C, ... when none are given."""
        if labels is None:
            labels = default_labels(len(dims))
        return cls(tuple(dims), tuple(labels))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidStateError("layout", f"unknown subsystem label {label!r}") from None

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.dims[self.index(x)] for x in labels]))

    def select(self, labels: Iterable[str]) -> "SubsystemLayout":
        idx = [self.index(x) for x in labels]
        return SubsystemLayout(tuple(self.dims[i] for i in idx), tuple(self.labels[i] for i in idx))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        labels = self.labels + other.labels
        if len(set(labels)) != len(labels):
            # relabel the right factor rather than fail on a name clash
            taken = set(self.labels)
            fresh = []
            for x in other.labels:
                y = x
                while y in taken:
                    y = y + "'"
                taken.add(y)
                fresh.append(y)
            labels = self.labels + tuple(fresh)
        return SubsystemLayout(self.dims + other.dims, labels)


def default_labels(n: int) -> tuple[str, ...]:
    if n <= 26:
        return tuple(string.ascii_uppercase[:n])
    return tuple(f"A{i + 1}" for i in range(n))


def _as_layout(layout: SubsystemLayout | Sequence[int]) -> SubsystemLayout:
    if isinstance(layout, SubsystemLayout):
        return layout
    return SubsystemLayout.of(layout)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        layout = _as_layout(self.layout)
        v = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.size != layout.dim:
            raise InvalidStateError("layout", f"{v.size} amplitudes for ambient dimension {layout.dim}")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError("normalization", f"norm is {norm!r}")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalized(cls, amplitudes, layout) -> "PureState":
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(v / np.linalg.norm(v), layout)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def density(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(np.outer(v, v.conj()), self.layout)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        layout = _as_layout(self.layout)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (layout.dim, layout.dim):
            raise InvalidStateError("layout", f"matrix shape {m.shape} does not match dims {layout.dims}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("hermiticity", "matrix has non-finite entries")
        herm = 0.5 * (m + m.conj().T)
        dev = np.max(np.abs(m - herm)) if m.size else 0.0
        if dev > HERMITIAN_TOL:
            raise InvalidStateError("hermiticity", f"deviation {dev:.3e} exceeds {HERMITIAN_TOL:g}")
        tr = np.trace(herm).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError("trace", f"trace is {tr!r}")
        lo = np.linalg.eigvalsh(herm)[0]
        if lo < -NEG_EIG_TOL:
            raise InvalidStateError("positivity", f"eigenvalue {lo:.3e} below {-NEG_EIG_TOL:g}")
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", _frozen(herm))

    @property
    def dim(self) -> int:
        return self.layout.dim

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.eigvalsh() > tol))

    def is_pure(self, tol: float = 1e-12) -> bool:
        return self.rank(tol) == 1


def as_density(state: PureState | DensityOperator) -> DensityOperator:
    if isinstance(state, PureState):
        return state.density()
    return state


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending, clipped, summing to one) and eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of states, optionally tied to the parent state they average to."""

    weights: np.ndarray
    members: tuple[DensityOperator, ...]
    parent: DensityOperator | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        members = tuple(self.members)
        if len(members) != w.size or w.size == 0:
            raise InvalidStateError("ensemble", "need one weight per member and at least one member")
        if np.any(w < 0) or abs(w.sum() - 1.0) > ENSEMBLE_TOL:
            raise InvalidStateError("ensemble", f"weights must be nonnegative and sum to 1 (sum={w.sum()!r})")
        layout = members[0].layout
        if any(m.layout.dims != layout.dims for m in members):
            raise InvalidStateError("ensemble", "members must share one layout")
        if self.parent is not None:
            avg = np.einsum("i,ijk->jk", w, np.stack([m.matrix for m in members]))
            err = np.max(np.abs(avg - self.parent.matrix))
            if err > RECONSTRUCT_TOL:
                raise InvalidStateError("ensemble", f"members do not average to the parent (error {err:.3e})")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def average(self) -> np.ndarray:
        return np.einsum("i,ijk->jk", self.weights, np.stack([m.matrix for m in self.members]))


# ---------------------------------------------------------------------------
# operations


def tensor_product(a: PureState | DensityOperator, b: PureState | DensityOperator):
    layout = a.layout.concat(b.layout)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), layout)
    a, b = as_density(a), as_density(b)
    return DensityOperator(np.kron(a.matrix, b.matrix), layout)


def _labels_arg(labels) -> list[str]:
    if isinstance(labels, str):
        return [labels]
    return list(labels)


def permute(state: PureState | DensityOperator, order: Sequence[str]):
    """Reorder subsystems so that they appear in ``order``."""
    layout = state.layout
    order = _labels_arg(order)
    if sorted(order) != sorted(layout.labels):
        raise InvalidStateError("layout", f"{order} is not a permutation of {layout.labels}")
    perm = [layout.index(x) for x in order]
    new = layout.select(order)
    n = len(layout)
    if isinstance(state, PureState):
        t = state.amplitudes.reshape(layout.dims).transpose(perm)
        return PureState(t.reshape(-1), new)
    t = state.matrix.reshape(layout.dims + layout.dims)
    t = t.transpose(perm + [p + n for p in perm])
    return DensityOperator(t.reshape(new.dim, new.dim), new)


def reduced_matrix(state: PureState | DensityOperator, keep: Sequence[str]) -> np.ndarray:
    """Raw reduced density matrix on ``keep`` (kept in layout order)."""
    layout = state.layout
    keep = _labels_arg(keep)
    idx = sorted({layout.index(x) for x in keep})
    rest = [i for i in range(len(layout)) if i not in idx]
    dk = int(np.prod([layout.dims[i] for i in idx]))
    dr = int(np.prod([layout.dims[i] for i in rest]))
    if isinstance(state, PureState):
        psi = state.amplitudes.reshape(layout.dims).transpose(idx + rest).reshape(dk, dr)
        return psi @ psi.conj().T
    n = len(layout)
    t = state.matrix.reshape(layout.dims + layout.dims)
    t = t.transpose(idx + rest + [n + i for i in idx] + [n + i for i in rest])
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("ajbj->ab", t)


def partial_trace(state: PureState | DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Reduced state on the subsystems named in ``keep``."""
    keep = _labels_arg(keep)
    layout = state.layout
    for x in keep:
        layout.index(x)
    kept = [x for x in layout.labels if x in set(keep)]
    return DensityOperator(reduced_matrix(state, kept), layout.select(kept))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # first component with modulus above 1e-12 is made real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        j = np.flatnonzero(np.abs(col) > 1e-12)
        if j.size:
            c = col[j[0]]
            out[:, k] = col * (abs(c) / c)
    return out


def spectral_decompose(rho: DensityOperator | np.ndarray) -> SpectralDecomposition:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=np.complex128)
    w, v = np.linalg.eigh(m)
    err = np.max(np.abs((v * w) @ v.conj().T - m)) if m.size else 0.0
    if err > SPECTRAL_TOL:
        raise NumericError(f"spectral reconstruction error {err:.3e}")
    if w[0] < -NEG_EIG_TOL:
        raise NumericError(f"negative eigenvalue {w[0]:.3e}")
    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], 0.0, 1.0)
    w = w / w.sum()
    v = _fix_phases(v[:, order])
    w.setflags(write=False)
    v.setflags(write=False)
    return SpectralDecomposition(w, v)


def purify(rho: DensityOperator, ancilla_label: str = "R", tol: float = 1e-14) -> PureState:
    """Minimal purification: the ancilla has dimension rank(rho)."""
    sd = spectral_decompose(rho)
    r = max(1, int(np.sum(sd.eigenvalues > tol)))
    lam = sd.eigenvalues[:r]
    vec = sd.eigenvectors[:, :r] * np.sqrt(lam / lam.sum())
    layout = rho.layout.concat(SubsystemLayout((r,), (ancilla_label,)))
    return PureState.normalized(vec.reshape(-1), layout)


# ---------------------------------------------------------------------------
# random states


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pure(layout: SubsystemLayout | Sequence[int], seed=None) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    layout = _as_layout(layout)
    rng = _rng(seed)
    z = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return PureState(z / np.linalg.norm(z), layout)


def random_density(layout: SubsystemLayout | Sequence[int], rank: int | None = None, seed=None) -> DensityOperator:
    """Partial trace of a Haar-random purification with ancilla dimension ``rank``."""
    layout = _as_layout(layout)
    rank = layout.dim if rank is None else int(rank)
    if not 1 <= rank <= layout.dim:
        raise ValueError(f"rank must lie in [1, {layout.dim}], got {rank}")
    big = layout.concat(SubsystemLayout((rank,), ("_anc",)))
    psi = random_pure(big, seed)
    m = psi.amplitudes.reshape(layout.dim, rank)
    return DensityOperator(m @ m.conj().T, layout)


def haar_unitary(n: int, rng) -> np.ndarray:
    rng = _rng(rng)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_isometry(m: int, r: int, rng) -> np.ndarray:
    """First ``r`` columns of a Haar unitary of size ``m``."""
    return haar_unitary(m, rng)[:, :r]


# ---------------------------------------------------------------------------
# a few named states


def bell_state(d: int = 2) -> PureState:
    v = np.zeros(d * d, dtype=complex)
    v[[k * d + k for k in range(d)]] = 1 / np.sqrt(d)
    return PureState(v, SubsystemLayout.of([d, d]))


def ghz_state(n: int = 3, d: int = 2) -> PureState:
    v = np.zeros(d**n, dtype=complex)
    for k in range(d):
        v[sum(k * d**j for j in range(n))] = 1 / np.sqrt(d)
    return PureState(v, SubsystemLayout.of([d] * n))


def basis_state(indices: Sequence[int], dims: Sequence[int]) -> PureState:
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[np.ravel_multi_index(tuple(indices), tuple(dims))] = 1.0
    return PureState(v, SubsystemLayout.of(dims))


def maximally_mixed(dims: Sequence[int]) -> DensityOperator:
    n = int(np.prod(dims))
    return DensityOperator(np.eye(n) / n, SubsystemLayout.of(dims))


# ---------------------------------------------------------------------------
# JSON state files


def state_to_dict(state: PureState | DensityOperator) -> dict:
    if isinstance(state, PureState):
        data = [[float(z.real), float(z.imag)] for z in state.amplitudes]
        kind = "pure"
    else:
        data = [[float(z.real), float(z.imag)] for z in state.matrix.reshape(-1)]
        kind = "mixed"
    return {"dims": list(state.layout.dims), "labels": list(state.layout.labels), "kind": kind, "data": data}


def state_from_dict(obj: dict) -> PureState | DensityOperator:
    try:
        dims = [int(d) for d in obj["dims"]]
        labels = obj.get("labels")
        kind = obj["kind"]
        data = np.asarray(obj["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError("layout", f"malformed state record: {exc}") from None
    layout = SubsystemLayout.of(dims, labels)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidStateError("layout", "data must be a list of [re, im] pairs")
    z = data[:, 0] + 1j * data[:, 1]
    if kind == "pure":
        return PureState(z, layout)
    if kind == "mixed":
        n = layout.dim
        if z.size != n * n:
            raise InvalidStateError("layout", f"{z.size} entries for a {n}x{n} matrix")
        return DensityOperator(z.reshape(n, n), layout)
    raise InvalidStateError("layout", f"kind must be 'pure' or 'mixed', got {kind!r}")
