"""Independent reference values for the property-function tests.

Straight-line transcriptions only: nothing here is imported from the package.
Run and freeze the printed numbers into tests/test_thermo.py.
"""

import numpy as np
from scipy.integrate import quad

R_GAS = 8.314462618

# kaolinite cp polynomial, J/(mol K), valid 298..700 K
KAOL = dict(k1=1.4303e3, k2=-7.886e-1, k3=3.034e-4, k4=0.0, k5=8.334e6, k6=-1.862e4,
            T_lo=298.0, T_hi=700.0)
# metakaolin cp polynomial, valid 298..1800 K
META = dict(k1=2.294924e2, k2=3.68192e-2, k3=0.0, k4=0.0, k5=-1.456032e6, k6=0.0,
            T_lo=298.0, T_hi=1800.0)


def poly6(p, T):
    return (p["k1"] + p["k2"] * T + p["k3"] * T**2 + p["k4"] / T
            + p["k5"] / T**2 + p["k6"] / np.sqrt(T))


def poly6_clamped(p, T):
    return poly6(p, min(max(T, p["T_lo"]), p["T_hi"]))


# NIST Shomate records, cp in J/(mol K) with t = T/1000
SHOMATE = {
    "N2_a": (28.98641, 1.853978, -9.647459, 16.63537, 0.000117),    # 100-500 K
    "N2_b": (19.50583, 19.88705, -8.598535, 1.369784, 0.527601),    # 500-2000 K
    "O2_a": (31.32234, -20.23531, 57.86644, -36.50624, -0.007374),  # 100-700 K
    "O2_b": (30.03235, 8.772972, -3.988133, 0.788313, -0.741599),   # 700-2000 K
    "Ar": (20.78600, 2.825911e-7, -1.464191e-7, 1.092131e-8, -3.661371e-8),
    "H2O": (30.09200, 6.832514, 6.793435, -2.534480, 0.082139),     # used 298-1700 K
    "SiO2": (-6.076591, 251.6755, -324.7964, 168.5604, 0.002548),   # 298-847 K
}


def shomate_cp(key, T):
    A, B, C, D, E = SHOMATE[key]
    t = T / 1000.0
    return A + B * t + C * t**2 + D * t**3 + E / t**2


def cp_n2(T):
    return shomate_cp("N2_a" if T < 500.0 else "N2_b", T)


def cp_o2(T):
    return shomate_cp("O2_a" if T < 700.0 else "O2_b", T)


def cp_air(T):
    return 0.78 * cp_n2(T) + 0.21 * cp_o2(T) + 0.01 * shomate_cp("Ar", T)


def cp_h2o(T):
    return shomate_cp("H2O", min(max(T, 298.0), 1700.0))


def cp_quartz(T):
    return shomate_cp("SiO2", min(max(T, 298.0), 847.0))


def sutherland(mu0, T0, S, T):
    return mu0 * (T / T0) ** 1.5 * (T0 + S) / (T + S)


def main():
    T0 = 298.15
    print("cp kaolinite 298.15 K      :", repr(poly6_clamped(KAOL, T0)))
    print("cp metakaolin 298.15 K     :", repr(poly6_clamped(META, T0)))
    print("cp kaolinite 650 K         :", repr(poly6_clamped(KAOL, 650.0)))
    print("cp air 298.15 K            :", repr(cp_air(T0)))
    print("cp air 800 K               :", repr(cp_air(800.0)))
    print("cp water vapor 298.15 K    :", repr(cp_h2o(T0)))
    print("cp water vapor 900 K       :", repr(cp_h2o(900.0)))
    print("cp quartz 298.15 K         :", repr(cp_quartz(T0)))
    print("cp quartz 800 K            :", repr(cp_quartz(800.0)))

    print("v steam 298.15 K, 1e5 Pa   :", repr(R_GAS * T0 / 1e5))

    # enthalpy differences by adaptive quadrature of the clamped cp
    for name, f, T1 in [
        ("dh kaolinite 298.15->900 K ", lambda T: poly6_clamped(KAOL, T), 900.0),
        ("dh metakaolin 298.15->1200 ", lambda T: poly6_clamped(META, T), 1200.0),
        ("dh air 298.15->1200 K      ", cp_air, 1200.0),
        ("dh water 298.15->1200 K    ", cp_h2o, 1200.0),
        ("dh quartz 298.15->1200 K   ", cp_quartz, 1200.0),
    ]:
        val, err = quad(f, T0, T1, limit=200)
        print(name, ":", repr(val), " (quad err", err, ")")

    # Wilke two-component mixture at 500 K, x = (0.5, 0.5), (water, air)
    T = 500.0
    mu_w = sutherland(1.12e-5, 350.0, 1064.0, T)
    mu_a = sutherland(1.716e-5, 273.15, 111.0, T)
    M_w = 18.0153e-3
    M_a = 0.78 * 28.0134e-3 + 0.21 * 31.9988e-3 + 0.01 * 39.948e-3
    print("M air                      :", repr(M_a))
    print("mu water 500 K             :", repr(mu_w))
    print("mu air 500 K               :", repr(mu_a))

    def phi(mu_i, mu_j, M_i, M_j):
        num = (1.0 + np.sqrt(mu_i / mu_j) * (M_j / M_i) ** 0.25) ** 2
        den = 2.0 * np.sqrt(2.0) * np.sqrt(1.0 + M_i / M_j)
        return num / den

    x = [0.5, 0.5]
    mus = [mu_w, mu_a]
    Ms = [M_w, M_a]
    mix = 0.0
    for i in range(2):
        den = sum(x[j] * phi(mus[i], mus[j], Ms[i], Ms[j]) for j in range(2))
        mix += x[i] * mus[i] / den
    print("Wilke mix 500 K x=0.5/0.5  :", repr(mix))

    # reaction enthalpy h_meta + 2 h_water - h_kaol at 298.15 and 800 K
    dHf_kaol, dHf_meta, dHf_h2o = -4.11959e6, -3.211e6, -2.41826e5
    dh298 = dHf_meta + 2.0 * dHf_h2o - dHf_kaol
    print("reaction dH at 298.15 K    :", repr(dh298))
    h_meta = dHf_meta + quad(lambda T: poly6_clamped(META, T), T0, 800.0)[0]
    h_h2o = dHf_h2o + quad(cp_h2o, T0, 800.0)[0]
    h_kaol = dHf_kaol + quad(lambda T: poly6_clamped(KAOL, T), T0, 800.0)[0]
    print("reaction dH at 800 K       :", repr(h_meta + 2.0 * h_h2o - h_kaol))


if __name__ == "__main__":
    main()
