"""Reference values for the cyclone tests (independent step-by-step transcription).

Covers the derived geometry, the three pressure-drop terms, the wall axial
velocity, and the full separation-efficiency parameter chain.
"""

import math

D = 0.3
r_c = D / 2.0
h_in = 0.5 * D
w_in = 0.2 * D
d_e = 0.5 * D
h_e = 0.5 * D
h_t = 4.0 * D
h_c = 2.5 * D
d_d = 0.37 * D


def geometry():
    V = math.pi * (r_c**2 * (h_t - h_c)
                   + h_c / 3.0 * (r_c**2 + d_d**2 / 4.0 + r_c * d_d / 2.0)
                   - d_e**2 / 4.0 * h_e)
    A_c = (2.0 * math.pi * r_c * (h_t - h_c)
           + math.pi * (r_c**2 - d_e**2 / 4.0)
           + math.pi * (r_c + d_d / 2.0) * math.sqrt((r_c - d_d / 2.0) ** 2 + h_c**2))
    r_2 = r_c - 0.5 * (r_c - d_d / 2.0)
    A_w = (2.0 * math.pi * r_c * (h_t - h_c)
           + math.pi * (r_c + r_2) * math.sqrt((r_c - r_2) ** 2 + h_c**2 / 4.0))
    A_1 = h_in * w_in
    A_2 = math.pi * d_e**2 / 4.0
    r_m = math.sqrt(r_c * d_e / 2.0)
    A_3 = math.pi * (r_c**2 - r_m**2)
    print("V   :", repr(V))
    print("A_c :", repr(A_c))
    print("A_w :", repr(A_w))
    print("A_1 :", repr(A_1))
    print("A_2 :", repr(A_2))
    print("r_m :", repr(r_m))
    print("A_3 :", repr(A_3))
    return V, A_c, A_w, A_1, A_2, A_3


def pressure_chain(rho_g, mu_g, c0, v1, A_c):
    k_i = 0.3
    K_A = math.pi * r_c**2 / (h_in * w_in)
    f_0 = 0.005 * (1.0 + 3.0 * math.sqrt(c0))
    Re = rho_g * v1 * 2.0 * r_c / (mu_g * K_A * (d_e / D))
    n = 1.0 - math.exp(-0.26 * Re**0.12 * (1.0 + abs((h_e - h_in) / w_in)) ** -0.5)
    rt_c = 0.38 * (d_e / D) + 0.5 * (d_e / D) ** 2
    vtw = (1.11 * K_A**-0.21 * (d_e / D) ** 0.16 * Re**0.06
           / ((1.0 + 0.35 * c0**0.27) * (1.0 + f_0 * A_c / (math.pi * r_c**2) * math.sqrt(K_A * d_e / D))))
    dPa = (1.0 - k_i * w_in / (r_c - d_e / 2.0)) ** 2 * rho_g * v1**2 / 2.0
    dPb = (4.0 * K_A * f_0 * A_c * vtw**3
           / (0.9 * math.pi * D**2 * (d_e / D) ** (1.5 * n))) * rho_g * v1**2 / 2.0
    print("K_A :", repr(K_A))
    print("f_0 :", repr(f_0))
    print("Re  :", repr(Re))
    print("n   :", repr(n))
    print("rt_c:", repr(rt_c))
    print("vtw :", repr(vtw))
    print("dPa :", repr(dPa))
    print("dPb :", repr(dPb))
    R_cx = rt_c * D / d_e
    coeff = (2.0 * R_cx**3 - R_cx**2 + 1.0) / (1.0 - R_cx**2) ** 3
    print("R_cx:", repr(R_cx))
    print("dPc coeff (corrected sign):", repr(coeff))
    v2 = 12.0
    print("dPc at v2=12, rho 0.7     :", repr(coeff * rho_g * v2**2 / 2.0))


def wall_axial_velocity(v1, A_1):
    r_m = math.sqrt(r_c * d_e / 2.0)
    v3 = 0.9 * A_1 * v1 / (math.pi * (r_c**2 - r_m**2))
    print("v_3 at v1=15:", repr(v3))


def efficiency_chain(c0, rho_s, rho_g, mu, d_med, v1, A_1, A_w):
    beta = w_in / r_c
    inner = 1.0 - beta * (2.0 - beta) * (1.0 - beta**2) / (1.0 + c0)
    alpha = (1.0 / beta) * (1.0 - math.sqrt(1.0 + (beta**2 - 2.0 * beta) * math.sqrt(inner)))
    r_1 = r_c - w_in / 2.0
    r_2 = r_c - 0.5 * (r_c - d_d / 2.0)
    u_c = r_1 * v1 / (alpha * r_c)
    f_0 = 0.005 * (1.0 + 3.0 * math.sqrt(c0))

    def u(r):
        return (u_c * (r_c / r)) / (1.0 + f_0 * (A_w * u_c / (2.0 * A_1 * v1)) * math.sqrt(r_c / r))

    r_i = d_e / 2.0
    zbar = u(r_1) * u(r_2) / math.sqrt(r_2 * r_1)
    w_s50 = 0.5 * 0.9 * A_1 * v1 / A_w
    drho = rho_s - rho_g
    d_star = math.sqrt(18.0 * 0.9 * mu * A_1 * v1 / (2.0 * math.pi * (h_t - h_e) * u(r_i) ** 2 * drho))
    de_star = math.sqrt(18.0 * mu * w_s50 / (drho * zbar))
    n_exp = 1.25
    d_A = de_star / 0.7 ** (1.0 / n_exp)
    k = -0.11 - 0.10 * math.log(c0) if c0 >= 0.1 else 0.15
    c0L = 0.025 * (d_star / d_med) * (10.0 * c0) ** k
    ratio = min(c0L / c0, 1.0)
    eta = 1.0 - ratio + ratio * math.exp(-((d_star / d_A) ** n_exp))
    eta = min(max(eta, 0.0), 1.0)
    print("alpha :", repr(alpha))
    print("u_c   :", repr(u_c))
    print("u(r_i):", repr(u(r_i)))
    print("u(r_1):", repr(u(r_1)))
    print("u(r_2):", repr(u(r_2)))
    print("zbar  :", repr(zbar))
    print("w_s50 :", repr(w_s50))
    print("d*    :", repr(d_star))
    print("de*   :", repr(de_star))
    print("d_A   :", repr(d_A))
    print("k     :", repr(k))
    print("c0L   :", repr(c0L))
    print("eta   :", repr(eta))


def main():
    print("-- geometry (D = 0.3 m) --")
    V, A_c, A_w, A_1, A_2, A_3 = geometry()
    print("-- pressure chain (rho 0.7, mu 3e-5, c0 0.26, v1 15) --")
    pressure_chain(0.7, 3e-5, 0.26, 15.0, A_c)
    print("-- wall axial velocity --")
    wall_axial_velocity(15.0, A_1)
    print("-- efficiency chain (c0 0.26, rho_s 8605, rho_g 0.55, mu 3.4e-5, dmed 7.61e-6, v1 15) --")
    efficiency_chain(0.26, 8605.0, 0.55, 3.4e-5, 7.61e-6, 15.0, A_1, A_w)


if __name__ == "__main__":
    main()
