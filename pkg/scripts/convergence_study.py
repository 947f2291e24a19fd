#!/usr/bin/env python3
"""Time-step convergence of the propagator and of the cavity moments against the chain oracle.

Prints, for each coupling, the max error of u(t) and of n(t), s(t) for the
squeezed preset at successively halved steps, and the ratio between rows.
"""
import argparse

import numpy as np

from cavitycorr import (
    Crow,
    SqueezedVacuumCorrelated,
    TimeGrid,
    compute_F,
    correlation_functions,
    evolve_observables,
    f_kernel,
    initial_chain_moments,
    memory_kernel,
    oracle_moments,
    oracle_u,
    solve_u,
)


def errors(eta, dt, t_max, n_sites):
    model = Crow.from_eta(eta)
    grid = TimeGrid.from_tmax(dt, t_max)
    sol = solve_u(memory_kernel(model, grid), 1.0, grid)
    spec = SqueezedVacuumCorrelated(1.0, 0.0)
    traj = evolve_observables(sol, correlation_functions(spec, sol, compute_F(f_kernel(model, grid), sol)), spec)
    ref = oracle_moments(model, n_sites, 1.0, grid, initial_chain_moments(spec, n_sites, model))
    return (
        np.max(np.abs(sol.u - oracle_u(model, n_sites, 1.0, grid))),
        np.max(np.abs(traj.n - ref.n)),
        np.max(np.abs(traj.s - ref.s)),
    )


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tmax", type=float, default=2000.0)
    p.add_argument("--chain", type=int, default=400)
    p.add_argument("--steps", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05])
    args = p.parse_args()
    for eta in (0.4, 1.2, 2.0):
        print(f"eta = {eta}")
        print(f"  {'dt':>6} {'err u':>10} {'ratio':>6} {'err n':>10} {'err s':>10}")
        prev = None
        for dt in args.steps:
            eu, en, es = errors(eta, dt, args.tmax, args.chain)
            ratio = f"{prev / eu:6.2f}" if prev else " " * 6
            print(f"  {dt:6.3f} {eu:10.2e} {ratio} {en:10.2e} {es:10.2e}")
            prev = eu


if __name__ == "__main__":
    main()
