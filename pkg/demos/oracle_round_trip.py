"""Build an equation from a known first integral, then solve it blind.

The oracle picks a Liouvillian function I and writes down the 2ODE it
integrates.  The pipeline only sees the equation.  Success means the
recovered J is functionally dependent on I, which is checked by an exact
cross product of gradients.

Run with ``python3 demos/oracle_round_trip.py [seed ...]``.
"""

from __future__ import annotations

import sys
import time

from sfdarboux import generate_random_integrable, gradients_parallel, run_pipeline


def round_trip(seed: int) -> None:
    inst = generate_random_integrable(seed)
    print(f"seed {seed} ({inst.shape})")
    print("  planted  I* :", inst.truth.additive())
    t0 = time.perf_counter()
    rep = run_pipeline(inst.ode)
    dt = time.perf_counter() - t0
    if not rep.success:
        print(f"  no result after {dt:.1f} s: {rep.failure_stage}: {rep.failure_reason}")
        return
    print("  recovered J :", rep.result.additive())
    print("  residual    :", rep.residual)
    print("  grad I* x grad J == 0:", gradients_parallel(inst.truth, rep.result))
    print(f"  {dt:.1f} s")


def main(argv) -> None:
    seeds = [int(a) for a in argv] or [1, 3, 36]
    for seed in seeds:
        round_trip(seed)


if __name__ == "__main__":
    main(sys.argv[1:])
