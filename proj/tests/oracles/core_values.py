"""High-precision reference values frozen into the C++ tests.

Independent of the C++ implementation: solves the Fourier-transformed
Langevin systems with mpmath at 40 digits and evaluates the dispersion
relations directly. Run with `python3 tests/oracles/core_values.py`.
"""
from mpmath import mp, mpf, mpc, pi, sqrt, exp, matrix, lu_solve

mp.dps = 40
TWO_PI = 2 * pi
I = mpc(0, 1)


def eta(ka, ga, gm, kb, gb, gma, gmb, stokes):
    ia, im, ib = (ka + ga) / 2, gm / 2, (kb + gb) / 2
    sign = -1 if stokes else 1
    a = matrix([[ia, I * gma, 0], [I * gma, im, I * gmb], [0, sign * I * gmb, ib]])
    x = lu_solve(a, matrix([sqrt(ka), 0, 0]))
    return abs(sqrt(kb) * x[2]) ** 2


def main():
    mhz = TWO_PI * mpf(10) ** 6
    base = dict(ka=mhz, ga=mhz, gm=mhz, kb=mpf("6.56") * mhz, gb=mpf("25.14") * mhz, gma=10 * mhz)
    for gmb in (TWO_PI * 1e3, mhz):
        for stokes in (False, True):
            print("g_mb", mp.nstr(gmb / TWO_PI, 6), "stokes" if stokes else "anti-stokes",
                  mp.nstr(eta(gmb=gmb, stokes=stokes, **base), 17))
    print("chi_b(omega_m)", mp.nstr(2 / (TWO_PI * mpf("31.70e6")), 17))
    print("xi_b", mp.nstr(mpf("6.56") / mpf("31.70"), 17))
    print("implied xi_a", mp.nstr(mpf("1.75e-8") / (mpf("1.28e-7") * mpf("6.56") / mpf("31.70")), 17))
    print("photon flux 1uW @ 6 GHz", mp.nstr(mpf("1e-6") / (mpf("1.054571817e-34") * TWO_PI * 6e9), 17))
    print("Q", mp.nstr(mpf(299792458) / mpf("1550e-9") / mpf("31.70e6"), 17))
    w0, wm = mpf(5), mpf("4.9")
    print("MSSW k=0 [GHz]", mp.nstr(sqrt(w0 * (w0 + wm)), 17))
    print("BVMSW kd=1 [GHz]", mp.nstr(sqrt(w0 * (w0 + wm * (1 - exp(-1)))), 17))


if __name__ == "__main__":
    main()
