"""
Where does the ccq subadditivity premise hold?
===============================================

The conditional monogamy results need the gap
``I(XY:AB) - I(X:AB) - I(Y:AB)`` of the ccq state to be nonnegative. This
script tabulates the gap over q for a Bell pair, white noise and random
states, and searches for the largest gap a qubit pair can reach.
"""

import numpy as np
from scipy.optimize import minimize

from qpoly import bell_state, gap_report, q_threshold, random_density
from qpoly.states import DensityOperator, SubsystemLayout, maximally_mixed

qs = np.round(np.arange(1.0, 3.01, 0.25), 2)
states = {"bell": bell_state(2).density(), "white": maximally_mixed([2, 2])}
states.update({f"rand{k}": random_density([2, 2], seed=k) for k in range(3)})

###############################################################################
# At q = 1 the gap is nonnegative for every state; above 1 even white noise
# goes negative, because members with equal spectra still have a positive
# Tsallis-q difference once q > 1.
print("state   " + " ".join(f"{q:>7}" for q in qs))
for name, rho in states.items():
    print(f"{name:7} " + " ".join(f"{gap_report(rho, q).gap:7.3f}" for q in qs))
print(f"\nthreshold q*(2) = {q_threshold(2):.5f}")

###############################################################################
# Largest gap reachable at a given q: maximize over two-qubit states written
# as ``rho = A A^dagger / tr(A A^dagger)``.
layout = SubsystemLayout.of([2, 2])


def from_params(x):
    a = (x[:16] + 1j * x[16:]).reshape(4, 4)
    m = a @ a.conj().T
    return DensityOperator(m / np.trace(m).real, layout)


rng = np.random.default_rng(0)
for q in (1.3, 1.6, q_threshold(2), 2.0):
    best = max(
        -minimize(lambda x: -gap_report(from_params(x), q).gap, rng.standard_normal(32),
                  method="L-BFGS-B", options={"maxiter": 300}).fun
        for _ in range(4)
    )
    print(f"q={q:.4f}: largest gap found {best:+.4f}")
