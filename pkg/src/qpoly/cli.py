"""Command-line front end: ``qpoly entropy | measure | ccq gap | verify | sweep``.

Exit status: 0 when the run completes, 1 on input errors, 2 when any
verdict is VIOLATED.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .ccq import PREMISE_TOL, gap_report
from .harness import (
    SWEEP_CHECKS,
    InputError,
    TrialConfig,
    any_violated,
    parse_state_file,
    render,
    run_sweep,
    write_report,
)
from .inequalities import CHECKS
from .measures import MEASURES, OptimizationBudget, measure
from .states import InvalidStateError, NumericError, as_density, reduced_matrix
from .tsallis import q_mutual_entropy, tsallis_entropy


def parse_q(text: str) -> list[float]:
    """``"1,1.5,2"`` or an inclusive range ``"1:3:0.1"``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9))
            return [round(start + k * step, 10) for k in range(n + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"cannot parse q values {text!r}") from None


def parse_dims(text: str | None) -> tuple:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.replace("x", ",").split(",") if x.strip())
    except ValueError:
        raise InputError(f"cannot parse dimensions {text!r}") from None


def _common(p: argparse.ArgumentParser, state_required=False):
    p.add_argument("--state", required=state_required, help="state JSON file or a named state (bell, ghz3, ...)")
    p.add_argument("--q", default="1", help="comma list or start:stop:step (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-restarts", type=int, default=OptimizationBudget.restarts)
    p.add_argument("--out", help="write the report here as well as to stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _sweep_args(p: argparse.ArgumentParser):
    p.add_argument("--dims", help="local dimensions, e.g. 2,2,2")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--family", choices=("pure", "mixed"))
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpoly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("entropy", help="Tsallis entropies of a state and its reductions")
    _common(p, state_required=True)

    p = sub.add_parser("measure", help="one optimized correlation measure")
    p.add_argument("measure_id", choices=sorted(MEASURES))
    _common(p, state_required=True)
    p.add_argument("--split", help="labels on one side of the cut (q-e, q-eoa)")
    p.add_argument("--measured", help="labels of the measured subsystem (q-cc, q-ue, q-d, q-ud)")
    p.add_argument("--cap", type=int, help="members or outcomes allowed")

    p = sub.add_parser("ccq", help="ccq-state quantities")
    p.add_argument("what", choices=("gap",))
    _common(p)
    _sweep_args(p)

    p = sub.add_parser("verify", help="check one identity or inequality")
    p.add_argument("check", choices=sorted(CHECKS))
    _common(p)
    _sweep_args(p)

    p = sub.add_parser("sweep", help="seeded sweep of random states")
    p.add_argument("--check", required=True, choices=SWEEP_CHECKS)
    _common(p)
    _sweep_args(p)
    return parser


def _emit(text: str, out: str | None):
    sys.stdout.write(text)
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc}") from exc


def _labels(text):
    return None if text is None else [x for x in text.replace(",", " ").split()]


def cmd_entropy(args) -> int:
    state = parse_state_file(args.state)
    rho = as_density(state)
    labels = rho.layout.labels
    rows = []
    for q in parse_q(args.q):
        row = {"q": q, "S": tsallis_entropy(rho, q),
               "marginals": {x: tsallis_entropy(reduced_matrix(rho, [x]), q) for x in labels}}
        if len(labels) == 2:
            row["I"] = q_mutual_entropy(rho, q)
        rows.append(row)
    _emit(json.dumps(rows, indent=1) + "\n", args.out)
    return 0


def cmd_measure(args) -> int:
    state = parse_state_file(args.state)
    budget = OptimizationBudget(restarts=args.budget_restarts, rng_seed=args.seed)
    rows = []
    for q in parse_q(args.q):
        kw = {"cap": args.cap}
        if args.measure_id in ("q-e", "q-eoa"):
            kw["split"] = _labels(args.split)
        else:
            kw["measured"] = _labels(args.measured)
        bv = measure(args.measure_id, state, q, budget, **kw)
        info = {k: v for k, v in bv.info.items() if isinstance(v, (int, float, str, list, bool))}
        rows.append({"measure": args.measure_id, "q": q, **bv.as_dict(), "budget_used": bv.budget_used,
                     "info": info})
    _emit(json.dumps(rows, indent=1) + "\n", args.out)
    return 0


def _config(args, check) -> TrialConfig:
    return TrialConfig(check, parse_dims(args.dims), tuple(parse_q(args.q)), args.trials, args.seed,
                       OptimizationBudget(restarts=args.budget_restarts), args.out, args.format,
                       args.family, args.workers)


def _run(args, check) -> int:
    config = _config(args, check)
    state = parse_state_file(args.state) if args.state else None
    records = run_sweep(config, state)
    sys.stdout.write(write_report(records, config))
    return 2 if any_violated(records) else 0


def cmd_ccq(args) -> int:
    if args.state:
        state = parse_state_file(args.state)
        rows = []
        for q in parse_q(args.q):
            rep = gap_report(state, q)
            rows.append({"q": q, "gap": rep.gap, "gap_direct": rep.gap_direct, "chi_slack": rep.chi_slack,
                         "mutual": rep.mutual, "premise_holds": rep.holds, "tolerance": PREMISE_TOL})
        _emit(json.dumps(rows, indent=1) + "\n", args.out)
        return 0
    return _run(args, "ccq-gap")


def cmd_verify(args) -> int:
    return _run(args, args.check)


def cmd_sweep(args) -> int:
    return _run(args, args.check)


COMMANDS = {"entropy": cmd_entropy, "measure": cmd_measure, "ccq": cmd_ccq, "verify": cmd_verify,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except InvalidStateError as exc:
        print(f"error: invalid state ({exc.invariant}): {exc}", file=sys.stderr)
        return 1
    except (InputError, NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
