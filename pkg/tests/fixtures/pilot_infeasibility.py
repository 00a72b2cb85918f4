"""Regenerate infeasibility_thresholds.json from pilot searches.

Run from the repository root: ``python3 tests/fixtures/pilot_infeasibility.py``.
The threshold is half the pilot best residual; the search can only report
values above the true constrained minimum, so any later run with at least
as many restarts should clear it.
"""

import json
import pathlib

import numpy as np

from loccusd.feasibility import infeasibility_search, states_from_lambdas

SEED = 7
EPSILON = 1e-3
RESTARTS = 200
ITERATIONS = 2000
SAFETY = 0.5


def _pair(theta):
    lam = [float(np.cos(theta) ** 2), float(np.sin(theta) ** 2)]
    return lam, lam, 0.0


PAIRS = {
    "pi_over_8": _pair(np.pi / 8),
    "pi_over_6": _pair(np.pi / 6),
    "unequal_rotated": ([0.7, 0.3], [0.4, 0.6], 0.3),
}


def main():
    out = {"seed": SEED, "epsilon": EPSILON, "restarts": RESTARTS, "iterations": ITERATIONS,
           "safety_factor": SAFETY, "pairs": {}}
    for name, (l0, l1, angle) in PAIRS.items():
        psi0, psi1 = states_from_lambdas(l0, l1, angle)
        res = infeasibility_search(psi0, psi1, RESTARTS, ITERATIONS, np.random.default_rng(SEED), EPSILON)
        out["pairs"][name] = {"lambda0": l0, "lambda1": l1, "basis_angle": angle,
                              "pilot_best_residual": res.best_residual,
                              "threshold": SAFETY * res.best_residual}
        print(name, res.best_residual)
    path = pathlib.Path(__file__).with_name("infeasibility_thresholds.json")
    path.write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
