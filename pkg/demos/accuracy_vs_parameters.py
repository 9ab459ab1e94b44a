#!/usr/bin/env python3
"""Accuracy against parameter count on one fixture, method by method.

Runs COMPASS-PRO next to the static baselines and prints where each
method first enters chemical accuracy.  The point of the comparison is
the parameter column: the progressive reordering reaches the same
accuracy band with a fraction of the UCCSD parameter count.

    python3 demos/accuracy_vs_parameters.py [fixture]   (default H4_d1.50)
"""

import sys

from qvqe.driver import CHEMICAL_ACCURACY, RunConfig, run
from qvqe.hamiltonian import load_fixture


def main() -> int:
    label = sys.argv[1] if len(sys.argv) > 1 else "H4_d1.50"
    system = load_fixture(label)
    print(f"{label}: {system.n_qubits} qubits, E_HF = {system.hf_energy:.8f}")

    methods = ("compass_pro", "compass_stepwise", "compass_static", "uccsd")
    print(f"\n{'method':<18}{'E - E_FCI':>14}{'params':>8}"
          f"{'at accuracy':>12}  status")
    for method in methods:
        tr = run(system, RunConfig(method=method))
        hit = tr.first_k_within(CHEMICAL_ACCURACY)
        at = str(hit[1]) if hit else "never"
        print(f"{method:<18}{tr.final_error:>14.3e}{tr.n_params:>8}"
              f"{at:>12}  {tr.status}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
