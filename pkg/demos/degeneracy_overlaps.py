#!/usr/bin/env python3
"""State discrimination where the spectrum nearly closes.

On stretched linear H4 the ground state and the lowest excited singlet
approach each other, and energy alone stops telling methods apart.  This
script runs COMPASS-PRO and gradient-selected ADAPT on the same fixture
and prints squared overlaps with both exact states per cycle.  COMPASS-
PRO walks to the ground state; the SD-pool ADAPT run ends with its pool
gradients collapsed while the prepared state is still an even mixture.

    python3 demos/degeneracy_overlaps.py [fixture]   (default H4_d3.15)
"""

import sys

from qvqe.driver import RunConfig, run
from qvqe.hamiltonian import load_fixture


def main() -> int:
    label = sys.argv[1] if len(sys.argv) > 1 else "H4_d3.15"
    system = load_fixture(label)

    for method in ("compass_pro", "adapt_sd", "adapt_gsd"):
        tr = run(system, RunConfig(method=method))
        print(f"\n{method} on {label}  (E_FCI = {tr.e_fci:.8f})")
        print(f"{'k':>3} {'E - E_FCI':>12} {'|<gs>|^2':>10} {'|<es>|^2':>10}")
        for row in tr.rows:
            es = f"{row.overlap_es:10.4f}" if row.overlap_es is not None \
                else "      none"
            print(f"{row.k:>3} {row.delta_e_fci:>12.3e} "
                  f"{row.overlap_gs:>10.4f} {es}")
        note = " (gradient trough)" if tr.gradient_trough else ""
        print(f"status: {tr.status}{note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
