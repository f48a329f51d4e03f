"""
Seeded sweeps over random states, and report emission.

Trial ``k`` of a sweep with master seed ``s`` draws everything it needs
(the random state, optimizer restarts, measurement pools) from the integer
seed ``SeedSequence(s, spawn_key=(k,)).generate_state(1)[0]``. Any subset of
trials can therefore be rerun on its own and reproduces the same records.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .ccq import PREMISE_TOL, gap_report
from .inequalities import CHECKS, SizeGuardError, Status, Verdict
from .measures import OptimizationBudget
from .states import (
    DensityOperator,
    InvalidStateError,
    PureState,
    SubsystemLayout,
    bell_state,
    basis_state,
    ghz_state,
    maximally_mixed,
    random_density,
    random_pure,
    state_from_dict,
)

SWEEP_CHECKS = tuple(CHECKS) + ("ccq-gap",)
CSV_COLUMNS = ("check", "trial", "seed", "q", "dims", "status", "premise_status", "margin", "error")
GAP_COLUMNS = ("d", "q", "state_id", "gap", "premise_holds")
DEFAULT_DIMS = {"prop1": (2, 2, 2), "prop2": (2, 2, 2), "thm2": (2, 2, 2), "cor2": (2, 2, 2),
                "thm1": (2, 2), "thm3": (2, 2, 2, 2), "ccq-gap": (2, 2)}
PURE_CHECKS = {"prop1", "prop2", "thm2", "cor2"}


class InputError(ValueError):
    """Malformed user input (files, flags); carries the invariant name when there is one."""

    def __init__(self, message: str, invariant: str | None = None):
        super().__init__(message)
        self.invariant = invariant


@dataclass(frozen=True)
class TrialConfig:
    check_id: str
    dims: tuple = ()
    q_values: tuple = (1.0,)
    trials: int = 1
    master_seed: int = 0
    budget: OptimizationBudget = field(default_factory=OptimizationBudget)
    output_path: str | None = None
    format: str = "json"
    family: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.check_id not in SWEEP_CHECKS:
            raise InputError(f"unknown check {self.check_id!r}; choose from {', '.join(SWEEP_CHECKS)}")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        qs = tuple(float(q) for q in self.q_values)
        if not qs or any(not (q >= 0 and math.isfinite(q)) for q in qs):
            raise InputError("q values must be a nonempty list of finite nonnegative numbers")
        if self.check_id != "ccq-gap" and min(qs) < 1:
            raise InputError(f"{self.check_id} needs q >= 1")
        object.__setattr__(self, "q_values", qs)
        dims = tuple(int(d) for d in (self.dims or DEFAULT_DIMS[self.check_id]))
        if self.check_id == "ccq-gap" and len(dims) == 1:
            dims = (dims[0], dims[0])
        if any(d < 1 for d in dims):
            raise InputError("dimensions must be positive")
        object.__setattr__(self, "dims", dims)
        if self.format not in ("json", "csv"):
            raise InputError("format must be json or csv")
        family = self.family or ("pure" if self.check_id in PURE_CHECKS or self.check_id == "thm3" else "mixed")
        if family not in ("pure", "mixed"):
            raise InputError("family must be pure or mixed")
        object.__setattr__(self, "family", family)
        if self.master_seed < 0:
            raise InputError("seed must be nonnegative")

    def describe(self) -> dict:
        return {"check": self.check_id, "dims": list(self.dims), "q_values": list(self.q_values),
                "trials": self.trials, "master_seed": self.master_seed, "family": self.family,
                "budget": asdict(self.budget)}


@dataclass(frozen=True)
class ReportRecord:
    """One verdict plus trial metadata. Wall time is kept but never serialized."""

    trial: int
    seed: int
    q: float
    verdict: Verdict | None = None
    error: str | None = None
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        if self.verdict is None:
            return {"trial": self.trial, "seed": self.seed, "q": self.q, "error": self.error}
        return {"trial": self.trial, **self.verdict.as_dict()}

    @property
    def status(self) -> str:
        return "ERROR" if self.verdict is None else self.verdict.status.value


@dataclass(frozen=True)
class GapRecord:
    """One row of the premise heatmap."""

    trial: int
    seed: int
    d: int
    q: float
    state_id: str
    gap: float
    premise_holds: bool
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        return {"trial": self.trial, "seed": self.seed, "d": self.d, "q": self.q,
                "state_id": self.state_id, "gap": self.gap, "premise_holds": self.premise_holds}

    @property
    def status(self) -> str:
        return "HOLDS" if self.premise_holds else "FAILS"


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(trial,)).generate_state(1)[0])


def trial_state(config: TrialConfig, seed: int):
    if config.family == "pure":
        return random_pure(config.dims, seed=seed)
    return random_density(config.dims, seed=seed)


def _run_trial(config: TrialConfig, trial: int, state=None) -> list:
    seed = trial_seed(config.master_seed, trial)
    if state is None:
        state = trial_state(config, seed)
    budget = OptimizationBudget(config.budget.restarts, config.budget.max_iterations,
                                config.budget.convergence_tol, seed)
    out = []
    for q in config.q_values:
        t0 = time.perf_counter()
        if config.check_id == "ccq-gap":
            g = gap_report(state, q).gap
            out.append(GapRecord(trial, seed, state.layout.dims[-1], q, f"trial-{trial}", g,
                                 bool(g >= -PREMISE_TOL), time.perf_counter() - t0))
            continue
        try:
            verdict = CHECKS[config.check_id](state, q, budget)
            out.append(ReportRecord(trial, seed, q, verdict, wall_time=time.perf_counter() - t0))
        except (SizeGuardError, InvalidStateError, ValueError) as exc:
            out.append(ReportRecord(trial, seed, q, error=f"{type(exc).__name__}: {exc}",
                                    wall_time=time.perf_counter() - t0))
    return out


def _anchor_rows(config: TrialConfig) -> list:
    """Maximally entangled reference rows for the premise heatmap."""
    d = config.dims[-1]
    if config.dims[0] != d:
        return []
    bell = bell_state(d).density()
    rows = []
    for q in config.q_values:
        g = gap_report(bell, q).gap
        rows.append(GapRecord(-1, config.master_seed, d, q, "bell", g, bool(g >= -PREMISE_TOL)))
    return rows


def _task(args):
    config, trial, state = args
    return _run_trial(config, trial, state)


def run_sweep(config: TrialConfig, state=None) -> list:
    """One record per (trial, q) pair, ordered by trial then q.

    With ``state`` given every trial evaluates that state; the trial seed
    then only drives the optimizer restarts. ``config.workers > 1`` runs
    trials in a process pool; order and content do not depend on it.
    """
    tasks = [(config, k, state) for k in range(config.trials)]
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    if config.check_id == "ccq-gap" and state is None:
        records = _anchor_rows(config) + records
    return records


def summarize(records: Sequence) -> dict:
    counts = Counter(r.status for r in records)
    summary = {"records": len(records), "status_counts": dict(sorted(counts.items()))}
    verdicts = [r.verdict for r in records if isinstance(r, ReportRecord) and r.verdict is not None]
    if verdicts:
        joint = Counter(f"{v.premise_status.value}/{v.status.value}" for v in verdicts)
        summary["premise_conclusion_counts"] = dict(sorted(joint.items()))
        summary["falsifications"] = sum(1 for v in verdicts if v.premise_status.value == "HOLDS"
                                        and v.status is Status.VIOLATED)
    return summary


def any_violated(records: Sequence) -> bool:
    return any(isinstance(r, ReportRecord) and r.verdict is not None and r.verdict.status is Status.VIOLATED
               for r in records)


def _csv_row(r) -> list:
    if isinstance(r, GapRecord):
        return [r.d, repr(r.q), r.state_id, repr(r.gap), str(r.premise_holds).lower()]
    v = r.verdict
    if v is None:
        return ["", r.trial, r.seed, repr(r.q), "", "ERROR", "", "", r.error]
    return [v.check, r.trial, r.seed, repr(v.q), "x".join(map(str, v.dims)), v.status.value,
            v.premise_status.value, repr(v.margin), ""]


def render(records: Sequence, config: TrialConfig | None = None, fmt: str = "json") -> str:
    """Serialize records with a summary footer; identical records give identical text."""
    summary = summarize(records)
    if fmt == "json":
        doc = {"config": config.describe() if config else None,
               "records": [r.as_dict() for r in records], "summary": summary}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    gap = bool(records) and isinstance(records[0], GapRecord)
    w.writerow(GAP_COLUMNS if gap else CSV_COLUMNS)
    for r in records:
        w.writerow(_csv_row(r))
    for k, v in summary["status_counts"].items():
        buf.write(f"# {k}={v}\n")
    if "falsifications" in summary:
        for k, v in summary["premise_conclusion_counts"].items():
            buf.write(f"# {k}={v}\n")
        buf.write(f"# falsifications={summary['falsifications']}\n")
    return buf.getvalue()


def write_report(records: Sequence, config: TrialConfig) -> str:
    text = render(records, config, config.format)
    if config.output_path:
        try:
            Path(config.output_path).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {config.output_path}: {exc}") from exc
    return text


NAMED_STATES = {
    "bell": lambda: bell_state(2),
    "bell3": lambda: bell_state(3),
    "ghz3": lambda: ghz_state(3),
    "ghz4": lambda: ghz_state(4),
    "product3": lambda: basis_state([0, 0, 0], [2, 2, 2]),
    "bell-x-zero": lambda: _bell_zero(),
    "mixed2": lambda: maximally_mixed([2, 2]),
}


def _bell_zero() -> PureState:
    amp = np.kron(bell_state(2).amplitudes, np.array([1.0, 0.0]))
    return PureState(amp, SubsystemLayout.of([2, 2, 2]))


def parse_state_file(path) -> PureState | DensityOperator:
    """Load a state from a JSON file, or one of the names in ``NAMED_STATES``.

    Invariant failures surface as :class:`InvalidStateError` naming the
    invariant; unreadable or malformed files as :class:`InputError`.
    """
    p = Path(path)
    if not p.exists():
        if str(path) in NAMED_STATES:
            return NAMED_STATES[str(path)]()
        raise InputError(f"no state file or named state {str(path)!r}")
    try:
        obj = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read state file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("state file must hold a JSON object")
    try:
        return state_from_dict(obj)
    except InvalidStateError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed state file {path}: {exc}") from exc
