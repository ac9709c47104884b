import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csplab import profile
from csplab.errors import DecayViolation, GridTooSmall, InvalidData


GRID = (-20.0, 40.0 / 1024, 1024)


def gaussian(amp=1.0, width=1.0):
    return profile.build_profile(
        {"kind": "gaussian", "amplitude": amp, "width": width}, GRID)


def test_zero_amplitude_gives_zero_profile():
    p = gaussian(amp=0.0)
    assert np.all(p.u == 0)
    assert p.tail_bound == 0.0


def test_unit_gaussian_peak_and_tail():
    p = gaussian()
    assert abs(p.u[512]) == pytest.approx(1.0)  # x = 0 sits on the grid
    assert np.abs(p.u[0]) < 1e-170
    assert np.abs(p.u[-1]) < 1e-170
    assert p.tail_bound < 1e-170


def test_raw_too_short_rejected():
    with pytest.raises(GridTooSmall):
        profile.build_profile({"kind": "raw", "samples": [0, 1, 2, 3]},
                              (-1.0, 0.5, 4))


def test_nonfinite_samples_rejected():
    bad = np.zeros(16, complex)
    bad[3] = np.nan
    with pytest.raises(InvalidData):
        profile.build_profile({"kind": "raw", "samples": bad}, (-1.0, 0.1, 16))


def test_hermite_gauss_order3_matches_closed_form():
    p = profile.build_profile(
        {"kind": "hermite_gauss", "amplitude": 0.107, "order": 3}, GRID)
    x = p.x
    ref = 0.107 * (12 * x - 8 * x**3) * np.exp(-(x**2))
    assert np.abs(p.u - ref).max() < 1e-14
    # exactly mean-free by construction
    assert abs(np.trapezoid(p.u, dx=p.dx)) < 1e-14


def test_derivative_of_constant_vanishes():
    p = profile.build_profile({"kind": "raw", "samples": np.full(64, 2.0 + 1.0j)},
                              (0.0, 0.1, 64))
    d = profile.differentiate(p, 1, method="spectral")
    assert np.abs(d.u).max() < 1e-12


def test_spectral_derivative_of_plane_wave():
    n = 64
    dx = 2 * np.pi / n
    x = dx * np.arange(n)
    p = profile.build_profile({"kind": "raw", "samples": np.exp(1j * x)},
                              (0.0, dx, n))
    d = profile.differentiate(p, 1, method="spectral")
    assert np.abs(d.u - 1j * p.u).max() < 1e-10


def test_gaussian_derivative_matches_analytic():
    p = gaussian()
    d = profile.differentiate(p, 1)  # auto -> spectral (negligible ends)
    ref = -2 * p.x * np.exp(-(p.x**2))
    assert np.abs(d.u - ref).max() < 1e-8
    assert d.meta["derivative"]["method"] == "spectral"


def test_fd4_selected_for_non_decaying_ends():
    n = 64
    dx = 2 * np.pi / n
    x = dx * np.arange(n)
    p = profile.build_profile({"kind": "raw", "samples": np.cos(x)}, (0.0, dx, n))
    d = profile.differentiate(p, 1)  # ends not negligible -> fd4
    assert d.meta["derivative"]["method"] == "fd4"


def test_geometry_zero_field():
    p = gaussian(amp=0.0)
    g = profile.geometry(p)
    assert np.all(g.m == 1.0)
    assert g.c == 0.0
    assert g.d == 0.0
    assert np.abs(g.y_of_x - p.x).max() < 1e-14


def test_geometry_real_field_has_zero_d():
    # fd4 keeps real data real, so the integrand vanishes identically
    g = profile.geometry(gaussian(amp=0.7), derivative_method="fd4")
    assert g.d == 0.0
    # spectral differentiation leaves only roundoff
    g2 = profile.geometry(gaussian(amp=0.7))
    assert abs(g2.d) < 1e-14


def test_geometry_one_soliton_c_value():
    # c = 2b/(a^2+b^2) for pole a + ib; quadrature on the gridded field
    from csplab import soliton

    k1 = 1.0 + 0.5j
    spec = soliton.DiscreteSpectrum(points=((k1, 2 * 0.5),))
    x = np.linspace(-40.0, 40.0, 4096)
    f = soliton.soliton_field(spec, 0.0, x)
    g = profile.geometry(f, decay_rtol=1e-4)
    assert g.c == pytest.approx(0.8, abs=2e-6)


def test_geometry_metric_floor_and_scale_monotone():
    g = profile.geometry(gaussian(amp=0.9))
    assert np.all(g.m >= 1.0)
    assert np.all(np.diff(g.y_of_x) > 0)
    # telescoping: y spans the box minus the accumulated metric excess
    total = (g.y_of_x[-1] - g.y_of_x[0]) - ((40.0 - 40.0 / 1024) + (g.cplus[0] - g.cplus[-1]))
    assert abs(total) < 1e-10


def test_geometry_d_is_pure_imaginary():
    p = profile.build_profile(
        {"kind": "hermite_gauss", "amplitude": 0.3, "order": 2, "modulation": 1.0},
        GRID)
    g = profile.geometry(p)
    assert abs(g.d.real) < 1e-12
    assert abs(g.d.imag) > 1e-4  # genuinely complex field


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(-np.pi, np.pi, allow_nan=False))
def test_geometry_invariant_under_global_phase(alpha):
    p = profile.build_profile(
        {"kind": "hermite_gauss", "amplitude": 0.4, "order": 1, "modulation": 0.7},
        GRID)
    rotated = profile.ComplexProfile(
        x0=p.x0, dx=p.dx, n=p.n, u=np.exp(1j * alpha) * p.u,
        tail_bound=p.tail_bound)
    g0 = profile.geometry(p)
    g1 = profile.geometry(rotated)
    assert g1.c == pytest.approx(g0.c, abs=1e-12)
    assert g1.d == pytest.approx(g0.d, abs=1e-12)


def test_decay_gate():
    n = 64
    p = profile.build_profile({"kind": "raw", "samples": np.full(n, 0.5)},
                              (0.0, 0.1, n))
    with pytest.raises(DecayViolation):
        profile.geometry(p)


def test_pde_residual_zero_field():
    grid = np.zeros((8, 32), complex)
    assert profile.pde_residual(grid, 0.1, 0.1) == 0.0


def test_pde_residual_flags_non_solution():
    x = np.linspace(-5, 5, 64)
    t = np.linspace(0, 1, 8)
    uu = np.exp(-np.subtract.outer(t, x) ** 2).astype(complex)
    assert profile.pde_residual(uu, x[1] - x[0], t[1] - t[0]) > 0.1


def test_pde_residual_lattice_too_small():
    with pytest.raises(GridTooSmall):
        profile.pde_residual(np.zeros((3, 12), complex), 0.1, 0.1)


def test_profile_json_roundtrip(tmp_path):
    p = gaussian(amp=0.5 + 0.2j)
    path = tmp_path / "prof.json"
    profile.save_profile(p, path)
    q = profile.load_profile(path)
    assert q.n == p.n and q.x0 == p.x0 and q.dx == p.dx
    assert np.abs(q.u - p.u).max() == 0.0


def test_sech_descriptor():
    p = profile.build_profile(
        {"kind": "sech", "amplitude": 0.5, "phase_slope": 0.3}, GRID)
    ref = 0.5 / np.cosh(p.x) * np.exp(0.3j * p.x)
    assert np.abs(p.u - ref).max() < 1e-14
    assert p.tail_bound >= np.abs(p.u[0])
