"""Fitted energy-error orders of the symmetric splitting, the B-A-C-B splitting and RK4
on the 2-DOF damped particle, across damping rates.

    python scripts/composition_orders.py [--T 20] [--gammas 0,0.05,0.1,0.3]
"""
import argparse

from contactmech import ContactState, Method, convergence_study, fitted_order, reference_energy
from contactmech.models import particle2d

STEPS = [0.1, 0.05, 0.025, 0.0125]

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--gammas", default="0,0.05,0.1,0.3")
    args = ap.parse_args()
    x0 = ContactState([1.0, 0.5], [0.0, 0.5], 0.0)
    print(f"{'gamma':>6s} {'strang':>8s} {'bacb':>8s} {'rk4':>8s}")
    for gamma in (float(g) for g in args.gammas.split(",")):
        model = particle2d(gamma)
        ref = reference_energy(x0, model, min(STEPS) / 100, args.T)
        orders = [
            fitted_order(convergence_study(x0, model, STEPS, args.T, m, reference=ref))
            for m in (Method.CONTACT_STRANG, Method.CONTACT_BACB, Method.RK4_REFERENCE)
        ]
        print(f"{gamma:6.3f} " + " ".join("   exact" if o is None else f"{o:8.3f}" for o in orders))
