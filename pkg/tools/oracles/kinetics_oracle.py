"""Reference values for the reaction-rate tests (independent transcription)."""

import math

R_GAS = 8.314462618
E_A = 202e3
K0 = 2.9e15


def k_of_T(T):
    return K0 * math.exp(-E_A / (R_GAS * T))


def main():
    print("k at 973.15 K          :", repr(k_of_T(973.15)))
    print("k at 723.15 K          :", repr(k_of_T(723.15)))
    print("k at 800.00 K          :", repr(k_of_T(800.0)))
    # conversion-cubic rate at c_AB2 = c_A = 50 mol/m^3, T = 723.15 K
    c_ab2 = 50.0
    c_a = 50.0
    r = k_of_T(723.15) * c_ab2**3 / (c_ab2 + c_a) ** 2
    print("r conv-cubic 50/50 723 K:", repr(r))
    # literal cubic at the same state
    print("r literal 50 mol 723 K :", repr(k_of_T(723.15) * c_ab2**3))


if __name__ == "__main__":
    main()
