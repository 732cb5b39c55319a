"""Compare how well each standard topology moves an excitation across the network.

For every topology a coherent state starts in oscillator 1 and the best
transfer probability into each other oscillator within a time window is
reported, together with the time it occurs.

    python scripts/topology_transfer.py --n 4 --lam 0.1 --gamma 0.01
"""

import argparse

import numpy as np

from bosonet import Network, WhiteNoise, evolve_coherent, generate_topology, normalize_superposition
from bosonet import transfer_probability
from bosonet.topology import TOPOLOGIES


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--t1", type=float, default=80.0)
    p.add_argument("--samples", type=int, default=801)
    args = p.parse_args()

    times = np.linspace(0, args.t1, args.samples)
    labels = np.zeros((1, args.n), dtype=complex)
    labels[0, 0] = args.beta
    state = normalize_superposition([1], labels)
    damping = WhiteNoise(args.gamma) if args.gamma > 0 else None
    print(f"{'topology':>10} {'target':>6} {'max P_T':>9} {'at t':>7}")
    for kind in TOPOLOGIES:
        if kind == "circular" and args.n < 3:
            continue
        net = Network.from_spec(generate_topology(kind, args.n, args.omega, args.lam, damping=damping))
        evs = [evolve_coherent(state, net.propagator(t)) for t in times]
        for target in range(1, args.n):
            pt = np.array([transfer_probability(ev, 0, target) for ev in evs])
            k = int(np.argmax(pt))
            print(f"{kind:>10} {target + 1:>6} {pt[k]:9.5f} {times[k]:7.2f}")


if __name__ == "__main__":
    main()
