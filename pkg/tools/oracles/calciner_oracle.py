"""Reference values for the duct-reactor transport tests (independent transcription)."""

import math


def darcy(dpdz, rho, mu, d):
    # positive dpdz = pressure drop per length in the flow direction
    coeff = (2.0 / 0.316) * (d**5 / (mu * rho**3)) ** 0.25
    return (coeff * abs(dpdz)) ** (4.0 / 7.0) * math.copysign(1.0, dpdz)


def main():
    v = darcy(10.0, 0.7, 3e-5, 0.18)
    print("darcy v (10 Pa/m, rho 0.7, mu 3e-5, d 0.18):", repr(v))
    print("darcy v (100 Pa/m, same)                   :", repr(darcy(100.0, 0.7, 3e-5, 0.18)))

    # volumetric heat exchange at the stated constants
    j = 200.0 * (6.0 * 0.01 / 7.61e-6) * 100.0
    print("J_sg (k 200, vfrac 0.01, dmed 7.61e-6, dT 100):", repr(j))

    # two-cell interface flux, hand numbers:
    # cells: c1 = 40, c2 = 10 mol/m^3 (one species), P1 = 101000, P2 = 100900 Pa,
    # dz = 1.2 m, D = 0.1 m^2/s, rho = 0.7, mu = 3e-5, d = 0.18
    dz = 1.2
    v12 = darcy((101000.0 - 100900.0) / dz, 0.7, 3e-5, 0.18)
    n12 = v12 * 40.0 - 0.1 * (10.0 - 40.0) / dz
    print("two-cell v_1+1/2                           :", repr(v12))
    print("two-cell N_1+1/2 (upwind + diffusion)      :", repr(n12))


if __name__ == "__main__":
    main()
