"""Refinement behaviour of the solver on smooth data.

Two ladders: energy drift of the unit sine run under time-step halving
(the integrator's fourth-order signature, even though the run crosses
its breaking time), and distance to the physical-space reference under
joint space-time refinement of a small-amplitude wave.

    python3 scripts/convergence_demo.py
"""

import numpy as np

from rhosphere import (
    InitialSpec,
    IntegratorConfig,
    compare,
    eulerian_evolve,
    evolve,
    initial_state,
    make_initial,
)


def main() -> None:
    print("energy drift, unit sine on n = 512 through breaking (t_end = 2):")
    drifts = []
    for dt in (2e-3, 1e-3, 5e-4):
        grid, state, mu = initial_state(InitialSpec("sine", 512))
        rec = evolve(grid, state, mu, IntegratorConfig(dt=dt, t_end=2.0))
        drifts.append(rec.energy_drift)
        order = "" if len(drifts) == 1 else f"   order {np.log2(drifts[-2] / drifts[-1]):.2f}"
        print(f"  dt = {dt:6.0e}   drift = {rec.energy_drift:.3e}{order}")

    print("\ndistance to the physical-space reference, 0.1 sin(2 pi x) at t = 1:")
    errs = []
    for n, dt in ((128, 4e-3), (256, 2e-3), (512, 1e-3)):
        grid, state, mu = initial_state(InitialSpec("sine", n, amplitude=0.1))
        rec = evolve(grid, state, mu, IntegratorConfig(dt=dt, t_end=1.0))
        u0, _, _ = make_initial(InitialSpec("sine", n, amplitude=0.1))
        traj = eulerian_evolve(u0, dt, 1.0)
        l2, linf = compare(rec, mu, traj, 1.0, n)
        errs.append(l2)
        order = "" if len(errs) == 1 else f"   order {np.log2(errs[-2] / errs[-1]):.2f}"
        print(f"  n = m = {n:4d}   l2 = {l2:.3e}   linf = {linf:.3e}{order}")


if __name__ == "__main__":
    main()
