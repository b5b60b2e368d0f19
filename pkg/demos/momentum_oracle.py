"""Ideal actuator-disk momentum theory, the reference the simulator is checked against.

Run with ``python demos/momentum_oracle.py``. The table shows thrust and
power coefficients against axial induction; the power coefficient peaks at
the Betz value 16/27 when a = 1/3.
"""
import argparse

import numpy as np

from gadsim import momentum_oracle


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--v0", type=float, default=8.0, help="free-stream speed (m/s)")
    parser.add_argument("--radius", type=float, default=63.0, help="rotor radius (m)")
    args = parser.parse_args()

    rho = 1.225
    q = 0.5 * rho * np.pi * args.radius ** 2 * args.v0 ** 2
    print(f"{'a_n':>6} {'CT':>7} {'Cp':>7} {'thrust [kN]':>12} {'power [MW]':>11}")
    for a in np.arange(0.0, 0.5, 0.05):
        o = momentum_oracle(args.v0, a, rho, args.radius)
        print(f"{a:6.2f} {o.thrust / q:7.4f} {o.power / (q * args.v0):7.4f} "
              f"{o.thrust / 1e3:12.1f} {o.power / 1e6:11.3f}")

    # the maximum of 4a(1-a)^2 sits at a = 1/3
    best = momentum_oracle(args.v0, 1.0 / 3.0, rho, args.radius)
    print(f"\nBetz optimum: Cp = {best.power / (q * args.v0):.5f} (16/27 = {16 / 27:.5f})")


if __name__ == "__main__":
    main()
