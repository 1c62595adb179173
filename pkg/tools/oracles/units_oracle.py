"""Reference values for the gas-loop unit tests (fan, mixer, heater).

Mixer and heater targets are found by bisection on an independently
transcribed air/steam enthalpy (NIST Shomate), not by the package code.
"""

from scipy.optimize import brentq

SHOMATE = {
    "N2_a": (28.98641, 1.853978, -9.647459, 16.63537, 0.000117),
    "N2_b": (19.50583, 19.88705, -8.598535, 1.369784, 0.527601),
    "O2_a": (31.32234, -20.23531, 57.86644, -36.50624, -0.007374),
    "O2_b": (30.03235, 8.772972, -3.988133, 0.788313, -0.741599),
    "Ar": (20.78600, 2.825911e-7, -1.464191e-7, 1.092131e-8, -3.661371e-8),
    "H2O": (30.09200, 6.832514, 6.793435, -2.534480, 0.082139),
}


def shomate_dh(key, T):
    # closed-form integral of the Shomate cp from 298.15 K to T, J/mol
    A, B, C, D, E = SHOMATE[key]
    def anti(t):
        return (A * t + B * t**2 / 2.0 + C * t**3 / 3.0 + D * t**4 / 4.0 - E / t) * 1000.0
    return anti(T / 1000.0) - anti(298.15 / 1000.0)


def dh_n2(T):
    if T <= 500.0:
        return shomate_dh("N2_a", T)
    return shomate_dh("N2_a", 500.0) + shomate_dh("N2_b", T) - shomate_dh("N2_b", 500.0)


def dh_o2(T):
    if T <= 700.0:
        return shomate_dh("O2_a", T)
    return shomate_dh("O2_a", 700.0) + shomate_dh("O2_b", T) - shomate_dh("O2_b", 700.0)


def dh_air(T):
    return 0.78 * dh_n2(T) + 0.21 * dh_o2(T) + 0.01 * shomate_dh("Ar", T)


def dh_h2o(T):
    return shomate_dh("H2O", T)


def main():
    # fan: eta 0.8, P_fan 1200 W, F_vol 0.5 m^3/s -> dP at residual zero
    print("fan dP:", repr(0.8 * 1200.0 / 0.5))

    # mixer: 1 mol/s air at 600 K + 1 mol/s air at 300 K
    target = dh_air(600.0) + dh_air(300.0)
    T_mix = brentq(lambda T: 2.0 * dh_air(T) - target, 300.0, 600.0, xtol=1e-10)
    print("mixer T (air 600K + air 300K, 1 mol/s each):", repr(T_mix))

    # heater: 40 kW into a mixed stream: 4.5 mol/s air + 0.9 mol/s steam at 580 K
    f_air, f_h2o, T_in, P = 4.5, 0.9, 580.0, 40e3
    base = f_air * dh_air(T_in) + f_h2o * dh_h2o(T_in)
    T_out = brentq(lambda T: f_air * dh_air(T) + f_h2o * dh_h2o(T) - base - P, T_in, 1500.0,
                   xtol=1e-10)
    print("heater T_out (4.5 air + 0.9 steam mol/s, 580 K, 40 kW):", repr(T_out))


if __name__ == "__main__":
    main()
