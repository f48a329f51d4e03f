"""
Monogamy and polygamy verdicts on named states and a small sweep
=================================================================

Each check reports a conclusion status and, separately, whether the ccq
premise held. A conclusion can be certified while the premise fails; only a
violated conclusion under a holding premise would count against a theorem.
"""

from qpoly import CHECKS, OptimizationBudget, TrialConfig, ghz_state, run_sweep, summarize
from qpoly.states import PureState, SubsystemLayout, bell_state

import numpy as np

w = np.zeros(8)
w[[1, 2, 4]] = 1 / np.sqrt(3)
named = {"ghz": ghz_state(3), "w": PureState(w, SubsystemLayout.of([2, 2, 2]))}
budget = OptimizationBudget(restarts=8, rng_seed=0)

###############################################################################
# Named three-qubit states at a few values of q.
for name, psi in named.items():
    for check in ("thm2", "cor2"):
        for q in (1.0, 2.0):
            v = CHECKS[check](psi, q, budget)
            print(f"{name:4} {check} q={q}: {v.status.value:12} premise {v.premise_status.value:5} "
                  f"margin {v.margin:+.4f}")

v = CHECKS["thm1"](bell_state(2), 2.0, budget)
print(f"bell thm1 q=2: {v.status.value}, premise {v.premise_status.value}, "
      f"uE={v.components['uE'].value:.4f}, I/2={v.components['I_q'].value / 2:.4f}")

###############################################################################
# A seeded sweep; the summary counts (premise, conclusion) pairs.
config = TrialConfig("thm2", (2, 2, 2), (1.0, 2.0), trials=20, master_seed=3)
print(summarize(run_sweep(config)))
