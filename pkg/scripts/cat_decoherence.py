"""Even cat in one of two coupled lossy cavities.

Prints the cat coherence |W_12(t)/W_12(0)|, the recurrence and transfer
probabilities and the linear entropies on a time grid.  With --oracle the
closed form is also checked against the master-equation integrator.

    python scripts/cat_decoherence.py --beta 1.0 --t1 20 --dt 1
"""

import argparse

import numpy as np

from bosonet import (Network, NetworkSpec, OscillatorSpec, Reservoir, WhiteNoise, decoherence_coefficients,
                     evolve_coherent, linear_entropies, normalize_superposition, recurrence_probability,
                     transfer_probability)
from bosonet.fockspace import trace_distance
from bosonet.oracle import integrate
from bosonet.topology import CouplingSpec


def build(omega, lam, gammas):
    models = {f"r{i}": WhiteNoise(g) for i, g in enumerate(gammas, 1)}
    osc = tuple(OscillatorSpec(i, w, Reservoir("distinct", f"r{i}")) for i, w in enumerate(omega, 1))
    return Network.from_spec(NetworkSpec(osc, (CouplingSpec(1, 2, lam),), "distinct", models))


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--omega", type=float, nargs=2, default=(1.0, 1.0))
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--gamma", type=float, nargs=2, default=(0.05, 0.02))
    p.add_argument("--t1", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--oracle", action="store_true", help="also integrate the master equation")
    p.add_argument("--cutoff", type=int, default=20)
    args = p.parse_args()

    net = build(args.omega, args.lam, args.gamma)
    state = normalize_superposition([1, 1], [[args.beta, 0], [-args.beta, 0]])
    times = np.arange(0.0, args.t1 + 0.5 * args.dt, args.dt)

    run = None
    if args.oracle:
        rho0 = evolve_coherent(state, net.propagator(0.0)).density_matrix(args.cutoff)
        run = integrate(net.generator(args.cutoff), rho0, float(times[-1]), dt=0.1, sample_times=times)

    head = f"{'t':>6} {'|W12|':>10} {'P_R':>10} {'P_T':>10} {'S_1':>10} {'S_full':>10}"
    print(head + (f" {'TD':>10}" if run else ""))
    for t in times:
        ev = evolve_coherent(state, net.propagator(t))
        coh = decoherence_coefficients(ev).magnitude[0, 1]
        ent = linear_entropies(state, net.dm, t)
        line = (f"{t:6.2f} {coh:10.6f} {recurrence_probability(ev, 0):10.6f} "
                f"{transfer_probability(ev, 0, 1):10.6f} {ent.single[0]:10.6f} {ent.full:10.6f}")
        if run:
            line += f" {trace_distance(ev.density_matrix(args.cutoff), run.at(t)):10.2e}"
        print(line)


if __name__ == "__main__":
    main()
