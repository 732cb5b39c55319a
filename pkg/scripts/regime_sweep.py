"""Weak versus strong coupling: where the local damping picture breaks down.

With a frequency-dependent spectral density the damping matrix depends on
whether rates are read at the normal-mode frequencies (valid at any coupling)
or at the bare frequencies (the usual weak-coupling shortcut).  This sweeps
the coupling and reports the gap between the two, in the matrix itself and
in the excitation transfer it predicts.

    python scripts/regime_sweep.py --lams 0.001,0.01,0.05,0.1,0.3
"""

import argparse

import numpy as np

from bosonet import FockSuperposition, Lorentzian, Network, evolve_fock, generate_topology


def transfer_curve(net, times):
    state = FockSuperposition({(1, 0): 1})
    return np.array([evolve_fock(state, net.propagator(t), 2).mean_photon_numbers()[1] for t in times])


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--lams", default="0.001,0.01,0.03,0.1,0.3")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--peak", type=float, default=1.0, help="centre of the Lorentzian density")
    p.add_argument("--width", type=float, default=0.1)
    p.add_argument("--gamma0", type=float, default=0.05)
    p.add_argument("--t1", type=float, default=40.0)
    args = p.parse_args()

    model = Lorentzian(args.gamma0, args.peak, args.width)
    times = np.linspace(0, args.t1, 201)
    print(f"{'lambda':>8} {'max|dGamma|':>12} {'rel':>8} {'max|dP_T|':>10}")
    for lam in (float(x) for x in args.lams.split(",")):
        spec = generate_topology("linear", 2, args.omega, lam, damping=model)
        exact = Network.from_spec(spec)
        weak = Network.from_spec(spec, weak_coupling=True)
        gap = float(np.max(np.abs(exact.gamma - weak.gamma)))
        rel = gap / float(np.max(np.abs(weak.gamma)))
        dpt = float(np.max(np.abs(transfer_curve(exact, times) - transfer_curve(weak, times))))
        print(f"{lam:8.3f} {gap:12.3e} {rel:8.3f} {dpt:10.3e}")


if __name__ == "__main__":
    main()
