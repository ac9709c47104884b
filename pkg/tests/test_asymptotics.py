import numpy as np
import pytest
from scipy.special import loggamma

from csplab import asymptotics as asy
from csplab.errors import InsufficientTable, OnCut, PoleAtZero, WrongSector


def synthetic_rf(L_fn, k0=1.0, n=2001, d=0.0j):
    """ReflectionFunctional whose L(s) = ln(1+|r|^2) matches L_fn on [-k0, k0].

    Realized through |r|^2 = e^L - 1, requiring L >= 0.  L_fn extends smoothly
    past the window so the spline stays clean at +-k0; the integrals only see
    [-k0, k0].
    """
    k = np.linspace(-1.5 * k0, 1.5 * k0, n)
    k = k[np.abs(k) > 1e-9]
    r = np.sqrt(np.expm1(L_fn(k))).astype(complex)
    return asy.ReflectionFunctional.from_samples(k, r, d=d)


class FlatL:
    """Duck-typed stand-in with a direct L(s); lets tests drive the phase
    integrals with signed synthetic L that no actual r(k) can realize."""

    def __init__(self, L, Lp, cover=10.0):
        self._L = L
        self._Lp = Lp
        self._cover = cover

    def L(self, s):
        return self._L(np.asarray(s, float))

    def L_prime(self, s):
        return self._Lp(np.asarray(s, float))

    def require_cover(self, k0):
        assert k0 <= self._cover


def test_nu_values():
    assert asy.nu(0.0) == 0.0
    assert asy.nu(1.0) == pytest.approx(-np.log(2) / (2 * np.pi), abs=1e-12)
    assert asy.nu(np.sqrt(np.exp(2 * np.pi) - 1)) == pytest.approx(-1.0, abs=1e-12)


def test_delta_trivial_for_zero_reflection():
    rf = synthetic_rf(lambda s: np.zeros_like(s))
    assert asy.delta_eval(rf, 1.0, 0.3 + 0.7j) == pytest.approx(1.0, abs=1e-12)
    d0, d1 = asy.delta_small_k(rf, 1.0)
    assert d0 == pytest.approx(1.0, abs=1e-12)
    assert abs(d1) < 1e-12


def test_delta_reflection_identity():
    rf = synthetic_rf(lambda s: s**4)
    k = 0.3 + 0.7j
    val = asy.delta_eval(rf, 1.0, k) * np.conj(asy.delta_eval(rf, 1.0, np.conj(k)))
    assert abs(val - 1.0) < 1e-10


def test_delta_against_dense_riemann_sum():
    # L(s) = s^4 on [-k0, k0], evaluated at k = 2 k0
    k0 = 1.0
    rf = synthetic_rf(lambda s: s**4, k0=k0)
    k = 2.0 * k0
    s = np.linspace(-k0, k0, 1_000_001)
    riemann = np.trapezoid(s**4 / (s - k), s) / (2j * np.pi)
    assert abs(asy.delta_eval(rf, k0, k) - np.exp(riemann)) < 1e-9


def test_delta_on_cut_rejected():
    rf = synthetic_rf(lambda s: s**4)
    with pytest.raises(OnCut):
        asy.delta_eval(rf, 1.0, 0.2 + 0.0j)


def test_delta0_unit_modulus_for_even_data():
    rf = synthetic_rf(lambda s: s**4)
    d0, d1 = asy.delta_small_k(rf, 1.0)
    assert d0 == pytest.approx(1.0, abs=1e-10)  # odd integrand L/s
    assert abs(d0) == pytest.approx(1.0, abs=1e-12)
    assert abs(d1.real) < 1e-12


def test_delta1_closed_form():
    # L = s^4: delta1 = (1/2 pi i) int s^2 ds = (1/2 pi i)(2/3)
    rf = synthetic_rf(lambda s: s**4)
    _, d1 = asy.delta_small_k(rf, 1.0)
    assert d1 == pytest.approx((2.0 / 3.0) / (2j * np.pi), abs=1e-9)


def test_gamma_arg_conjugacy_and_pole():
    nu = 0.25
    assert asy.gamma_arg(-nu) == pytest.approx(-asy.gamma_arg(nu), abs=1e-14)
    with pytest.raises(PoleAtZero):
        asy.gamma_arg(0.0)


def test_gamma_modulus_identity():
    # |Gamma(i nu)|^2 = pi / (nu sinh(pi nu))
    for nu in (0.01, 0.3, 1.0, 2.5, 5.0):
        mod2 = np.exp(2 * np.real(loggamma(1j * nu)))
        assert abs(mod2 - np.pi / (nu * np.sinh(np.pi * nu))) < 1e-12 * mod2 + 1e-15


def test_gamma_arg_against_independent_oracle():
    # high-precision product/series evaluation via mpmath
    import mpmath

    mpmath.mp.dps = 40
    for nu in (0.1, 1.0, 3.0):
        ref = float(mpmath.im(mpmath.loggamma(mpmath.mpc(0, nu))))
        assert abs(asy.gamma_arg(nu) - ref) < 1e-10


def test_phase_integrals_constant_L():
    stub = FlatL(lambda s: np.full_like(s, 0.3), lambda s: np.zeros_like(s))
    ip, im = asy.phase_integrals(stub, 1.0)
    assert abs(ip) < 1e-10
    assert abs(im) < 1e-10


def test_phase_integrals_linear_L_closed_form():
    # L(s) = s on [-1, 1]: int ln(s+1) ds = 2 ln 2 - 2 (and mirrored for I-)
    stub = FlatL(lambda s: s, lambda s: np.ones_like(s))
    ip, im = asy.phase_integrals(stub, 1.0)
    assert ip == pytest.approx(2 * np.log(2) - 2, abs=1e-8)
    assert im == pytest.approx(2 * np.log(2) - 2, abs=1e-8)


def test_phase_integrals_parity():
    # s -> -s flips dL for even L (I- = -I+) and preserves it for odd L
    rf = synthetic_rf(lambda s: s**4)
    ip, im = asy.phase_integrals(rf, 1.0)
    assert ip == pytest.approx(-im, abs=1e-9)
    stub = FlatL(lambda s: s**3, lambda s: 3 * s**2)
    ip_odd, im_odd = asy.phase_integrals(stub, 1.0)
    assert ip_odd == pytest.approx(im_odd, abs=1e-8)


def make_table_rf(amp=0.45):
    from csplab import profile, scatter

    p = profile.build_profile(
        {"kind": "hermite_gauss", "amplitude": amp, "order": 1},
        (-30.0, 60.0 / 2048, 2048))
    g = profile.geometry(p)
    ks = scatter.default_k_grid(k_max=4.0, n_linear=80, n_log=12)
    table = scatter.reflection_table(p, g, ks, oversample=4)
    return asy.ReflectionFunctional.from_table(table)


@pytest.fixture(scope="module")
def rf_measured():
    return make_table_rf()


def test_leading_order_zero_reflection():
    rf = synthetic_rf(lambda s: np.zeros_like(s), k0=2.0)
    lo = asy.leading_order_u(rf, 0.0j, 1.0, 4.0)
    assert lo.A1 == 0.0 and lo.A2 == 0.0
    assert lo.u == 0.0


def test_leading_order_fixed_ray_scaling(rf_measured):
    # kappa0 depends only on t/|x|: amplitudes repeat along a ray
    lo1 = asy.leading_order_u(rf_measured, None, 25.0, 100.0)
    lo2 = asy.leading_order_u(rf_measured, None, 50.0, 200.0)
    assert lo1.kappa0 == pytest.approx(lo2.kappa0, rel=1e-12)
    assert lo1.A1 == pytest.approx(lo2.A1, rel=1e-9)
    assert lo1.A2 == pytest.approx(lo2.A2, rel=1e-9)


def test_leading_order_scale_consistency(rf_measured):
    # phases at (x, t) and (4x, 4t) differ only through nu ln(k^3/t) and t/k
    t1, x1 = 100.0, 50.0
    lo1 = asy.leading_order_u(rf_measured, None, x1, t1)
    lo2 = asy.leading_order_u(rf_measured, None, 4 * x1, 4 * t1)
    ins = lo1.inputs
    k0 = lo1.kappa0
    explicit1 = ins.nu_minus * np.log(4.0) - (4 * t1 - t1) / k0  # ln(k^3/t) shift + t/k
    assert (lo2.phi1 - lo1.phi1).real == pytest.approx(-ins.nu_minus * np.log(4) - 3 * t1 / k0, abs=1e-6)
    assert (lo2.phi2 - lo1.phi2).real == pytest.approx(-ins.nu_plus * np.log(4) - 3 * t1 / k0, abs=1e-6)
    del explicit1


def test_wrong_sector_and_coverage(rf_measured):
    with pytest.raises(WrongSector):
        asy.leading_order_u(rf_measured, None, -1.0, 10.0)
    with pytest.raises(InsufficientTable):
        # kappa0 = 0.5 sqrt(t/x) beyond the 4.0 table edge
        asy.leading_order_u(rf_measured, None, 1.0, 1000.0)


def test_conventions_share_envelope(rf_measured):
    lo_r = asy.leading_order_u(rf_measured, None, 40.0, 100.0, "real_phase")
    lo_p = asy.leading_order_u(rf_measured, None, 40.0, 100.0, "as_printed")
    assert lo_r.A1 == lo_p.A1 and lo_r.A2 == lo_p.A2
    assert lo_r.amp1 == pytest.approx(1.0, abs=1e-12)
    assert lo_r.amp2 == pytest.approx(1.0, abs=1e-12)
    # literal constants -i pi/4 and 3i pi/4 act as amplitude factors
    assert lo_p.amp1 > 1.0 or lo_p.amp2 != 1.0


def test_amplitudes_fade_toward_sector_boundary(rf_measured):
    # x/t -> 0+ pushes kappa0 up where r decays: amplitudes shrink
    t = 100.0
    a_mid = asy.leading_order_u(rf_measured, None, 50.0, t)
    a_edge = asy.leading_order_u(rf_measured, None, 1.8, t)
    assert a_edge.A1 + a_edge.A2 < 0.2 * (a_mid.A1 + a_mid.A2)


def test_decay_sector_verdict():
    rf = synthetic_rf(lambda s: s**4)
    v = asy.decay_sector_bound(rf, -50.0, 50.0)
    assert v.classification == "rapid decay"
    assert v.one_signed
    assert np.all(v.probes[:, 2] < 0)


def test_decay_sector_point_value():
    # xi = -1 at k = i: Im theta = 1 * (-1 - 1/4) = -1.25
    assert asy.im_theta(-1.0, 1j) == pytest.approx(-1.25, abs=1e-14)


def test_decay_sector_wrong_side():
    rf = synthetic_rf(lambda s: s**4)
    with pytest.raises(WrongSector):
        asy.decay_sector_bound(rf, 50.0, 50.0)


def test_measured_table_delta_invariants(rf_measured):
    d0, d1 = asy.delta_small_k(rf_measured, 0.8)
    assert abs(abs(d0) - 1.0) < 1e-12
    assert abs(d1.real) < 1e-12
