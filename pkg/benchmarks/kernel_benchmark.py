"""Benchmark of the compiled propagation kernels against the numpy fallback.

Usage: python benchmarks/kernel_benchmark.py [--repeats N]

Times the two hot loops on realistic workloads: the full-schedule unitary
product and the RK4 Lindblad integration, at the qutrit and composite-model
dimensions, using the default 2000-step grid of the 100 ns loop gate.
"""
import argparse
import math
import time

import numpy as np

from holosim import _kernels_py
from holosim import evolve, pulses
from holosim.evolve import NoiseModel

try:
    from holosim import _kernels
except ImportError:
    _kernels = None

OMEGA0 = 2 * math.pi * 8.660e6


def workload(dim):
    spec = pulses.GateSpec(theta=0.5 * math.pi if dim == 3 else 0.0, phi=0.0, gamma=0.5 * math.pi)
    levels = (0, 1, 2) if dim == 3 else (None, 1, dim - 1)
    sched = pulses.synthesize_tounhqc(spec, OMEGA0)
    grid = pulses.stepping_grid(sched, sched.duration / evolve.DEFAULT_STEPS)
    gens, dts2 = evolve._cf4_generators(sched, grid, evolve.NO_ERROR, dim, levels)
    h_nodes = evolve.hamiltonian_stack(
        sched, evolve._interleaved_nodes(grid), dim=dim, levels=levels
    )
    noise = NoiseModel.qutrit_relaxation(
        t1_e_to_0=5e-6, t1_1_to_e=3e-6, tphi_e=10e-6, tphi_1=10e-6
    )
    c_ops_3 = noise.scaled_ops(3)
    c_ops = np.zeros((c_ops_3.shape[0], dim, dim), dtype=complex)
    c_ops[:, :3, :3] = c_ops_3
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[0, 0] = 1.0
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    return gens, dts2, h_nodes, grid.dts, c_ops, rho0, psi0


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernels are not available; showing fallback timings only")

    header = f"{'kernel':<28} {'dim':>3} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for dim in (3, 5):
        gens, dts2, h_nodes, dts, c_ops, rho0, psi0 = workload(dim)
        cases = [
            ("propagate_unitary", lambda mod: mod.propagate_unitary(gens, dts2)),
            ("evolve_states", lambda mod: mod.evolve_states(gens, dts2, psi0, 40)),
            (
                "lindblad_rk4",
                lambda mod: mod.lindblad_rk4(h_nodes, dts, rho0, c_ops, 20),
            ),
        ]
        for name, call in cases:
            t_py = timeit(lambda: call(_kernels_py), args.repeats)
            if _kernels is not None:
                t_c = timeit(lambda: call(_kernels), args.repeats)
                print(
                    f"{name:<28} {dim:>3} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms "
                    f"{t_py / t_c:>8.1f}x"
                )
            else:
                print(f"{name:<28} {dim:>3} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
