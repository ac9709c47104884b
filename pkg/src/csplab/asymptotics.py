"""Long-time leading-order machinery on the continuous spectrum.

Everything is driven by the reflection coefficient through
L(s) = ln(1 + |r(s)|^2) and

    nu(k)    = -L(k) / (2 pi)                                  (amplitude density)
    delta(k) = exp[ (1/2 pi i) int_{-k0}^{k0} L(s)/(s - k) ds ] (scalar factor)
    delta0   = exp[ (1/2 pi i) int L(s)/s  ds ],   |delta0| = 1
    delta1   = (1/2 pi i) int L(s)/s^2 ds,         Re delta1 = 0

together with the Stieltjes phase integrals int ln(k0 -+ s) dL(s) and the
Gamma-function phases arg Gamma(+-i nu).  In the oscillatory sector
(x/t > eps) the stationary point sits at kappa0 = (1/2) sqrt(t/|x|) and

    u(x,t) ~ t^{-1/2} [ A1 e^{i phi1} - A2 e^{-i phi2} ],
    A1 = sqrt(-nu(-kappa0)/kappa0),   A2 = sqrt(-nu(kappa0)/kappa0).

Two phase conventions are provided.  'as_printed' evaluates the classical
formulas literally, imaginary constants included, so the phases are complex
and the exponentials pick up real amplitude factors (these are logged).
'real_phase' is this package's normalization, cross-validated pointwise
against the reference integrator: both constants become +pi/4, the
int L(s)/s term enters phi2 with a plus sign, the conserved d enters as the
real numbers -+2id, and the scale-change correction enters both phases as the
real number 2 i kappa0 delta1.  Envelope quantities (A1, A2) are identical in
the two conventions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

from .errors import InsufficientTable, InvalidData, OnCut, PoleAtZero, WrongSector
from .scatter import ScatteringTable

# Width of the analytic endpoint patches, relative to the interval length.
ENDPOINT_PATCH = 1e-6


def _quad(fn, a, b, **kw):
    """Adaptive quadrature; roundoff chatter from near-zero integrands is
    expected (L ~ s^4 at the origin) and silenced."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, a, b, **kw)[0]
# Minimum table points required strictly inside (0, k0) per side.
MIN_POINTS_PER_SIDE = 4


@dataclass(frozen=True)
class ReflectionFunctional:
    """Interpolated reflection data: cubic in |r|^2 and in unwrapped arg r."""

    k: np.ndarray
    r: np.ndarray
    d: complex
    c: float
    _absr2: CubicSpline = field(repr=False, default=None)
    _arg_neg: CubicSpline = field(repr=False, default=None)
    _arg_pos: CubicSpline = field(repr=False, default=None)

    @classmethod
    def from_table(cls, table: ScatteringTable) -> "ReflectionFunctional":
        return cls.from_samples(table.k, table.r, d=table.d, c=table.c)

    @classmethod
    def from_samples(cls, k, r, d: complex = 0.0j, c: float = 0.0) -> "ReflectionFunctional":
        k = np.asarray(k, float)
        r = np.asarray(r, complex)
        if len(k) < 8 or np.any(np.diff(k) <= 0):
            raise InvalidData("need at least 8 strictly increasing k samples")
        absr2 = CubicSpline(k, np.abs(r) ** 2)
        neg = k < 0
        pos = k > 0
        if neg.sum() < 2 or pos.sum() < 2:
            raise InvalidData("need samples on both sides of k = 0")
        arg_neg = CubicSpline(k[neg], np.unwrap(np.angle(r[neg])))
        arg_pos = CubicSpline(k[pos], np.unwrap(np.angle(r[pos])))
        obj = cls(k=k, r=r, d=complex(d), c=float(c))
        object.__setattr__(obj, "_absr2", absr2)
        object.__setattr__(obj, "_arg_neg", arg_neg)
        object.__setattr__(obj, "_arg_pos", arg_pos)
        return obj

    def abs_r2(self, s):
        return np.clip(self._absr2(s), 0.0, None)

    def L(self, s):
        """ln(1 + |r(s)|^2) >= 0."""
        return np.log1p(self.abs_r2(s))

    def L_prime(self, s):
        return self._absr2.derivative()(s) / (1.0 + self.abs_r2(s))

    def arg_r(self, k: float) -> float:
        """Unwrapped phase of r, interpolated separately on each side of 0."""
        if k == 0:
            raise InvalidData("arg r(0) is undefined (r has a zero there)")
        return float(self._arg_neg(k) if k < 0 else self._arg_pos(k))

    def nu(self, k) -> float:
        return -self.L(k) / (2.0 * np.pi)

    def k_cover(self) -> float:
        """Largest kappa for which [-kappa, kappa] lies inside the table."""
        return float(min(-self.k[0], self.k[-1]))

    def require_cover(self, k0: float) -> None:
        if k0 <= 0:
            raise InvalidData("need k0 > 0")
        if k0 > self.k_cover():
            raise InsufficientTable(
                f"table covers |k| <= {self.k_cover():.4g}, needs {k0:.4g}")
        inside_pos = np.sum((self.k > 0) & (self.k < k0))
        inside_neg = np.sum((self.k < 0) & (self.k > -k0))
        if min(inside_pos, inside_neg) < MIN_POINTS_PER_SIDE:
            raise InsufficientTable(
                f"fewer than {MIN_POINTS_PER_SIDE} table points inside (-k0, k0)")


def nu(r_at_k: complex) -> float:
    """-(1/2 pi) ln(1 + |r|^2), always <= 0."""
    return float(-np.log1p(abs(r_at_k) ** 2) / (2.0 * np.pi))


def delta_eval(rf: ReflectionFunctional, k0: float, k: complex) -> complex:
    """The scalar function delta(k) off the cut [-k0, k0]."""
    rf.require_cover(k0)
    k = complex(k)
    if abs(k.imag) < 1e-300 and -k0 <= k.real <= k0:
        raise OnCut(f"{k} lies on [-{k0}, {k0}]")

    def num(s):
        return rf.L(s) / ((s - k.real) ** 2 + k.imag**2)

    re = _quad(lambda s: num(s) * (s - k.real), -k0, k0, limit=200, points=[0.0])
    im = _quad(lambda s: num(s) * k.imag, -k0, k0, limit=200, points=[0.0])
    # 1/(s-k) = (s - re k + i im k)/|s-k|^2; exponent = (re + i*im)/(2 pi i)
    return complex(np.exp((re + 1j * im) / (2j * np.pi)))


def delta_small_k(rf: ReflectionFunctional, k0: float) -> tuple[complex, complex]:
    """(delta0, delta1) of delta(k) = delta0 (1 + k delta1 + O(k^2)) at k = 0.

    The integrands L/s and L/s^2 are regular at 0 because r(k) = O(k^3).
    """
    rf.require_cover(k0)
    i0 = _quad(lambda s: rf.L(s) / s, -k0, k0, limit=200, points=[0.0])
    i1 = _quad(lambda s: rf.L(s) / s**2, -k0, k0, limit=200, points=[0.0])
    delta0 = complex(np.exp(i0 / (2j * np.pi)))
    delta1 = complex(i1 / (2j * np.pi))
    return delta0, delta1


def gamma_arg(nu_val: float) -> float:
    """arg Gamma(i nu) on the continuous branch (imaginary part of log Gamma).

    Schwarz reflection gives arg Gamma(-i nu) = -arg Gamma(i nu).
    """
    if nu_val == 0.0:
        raise PoleAtZero("Gamma has a pole at 0")
    return float(np.imag(loggamma(1j * nu_val)))


def phase_integrals(rf: ReflectionFunctional, k0: float) -> tuple[float, float]:
    """Stieltjes integrals (int ln(s+k0) dL, int ln(k0-s) dL) over [-k0, k0].

    The integrable log singularities at the matching endpoint are split off on
    a patch of width eps and integrated against a frozen L' analytically:
    int_0^eps ln(tau) dtau = eps (ln eps - 1).
    """
    rf.require_cover(k0)
    eps = ENDPOINT_PATCH * 2.0 * k0
    i_plus = _quad(lambda s: np.log(s + k0) * rf.L_prime(s), -k0 + eps, k0,
                   limit=200, points=[0.0])
    i_plus += float(rf.L_prime(-k0 + eps)) * eps * (np.log(eps) - 1.0)
    i_minus = _quad(lambda s: np.log(k0 - s) * rf.L_prime(s), -k0, k0 - eps,
                    limit=200, points=[0.0])
    i_minus += float(rf.L_prime(k0 - eps)) * eps * (np.log(eps) - 1.0)
    return float(i_plus), float(i_minus)


@dataclass(frozen=True)
class AsymptoticInputs:
    """Every reflection-derived ingredient of the leading-order formula."""

    kappa0: float
    nu_plus: float
    nu_minus: float
    delta0: complex
    delta1: complex
    I_plus: float
    I_minus: float
    I0: float
    arg_r_minus: float
    arg_r_plus: float
    gamma_arg_plus: float   # arg Gamma(-i nu(kappa0))
    gamma_arg_minus: float  # arg Gamma(+i nu(-kappa0))
    d: complex


def asymptotic_inputs(rf: ReflectionFunctional, kappa0: float,
                      d: complex | None = None) -> AsymptoticInputs:
    """Collect all kappa0-dependent functionals once."""
    rf.require_cover(kappa0)
    nu_p = float(rf.nu(kappa0))
    nu_m = float(rf.nu(-kappa0))
    delta0, delta1 = delta_small_k(rf, kappa0)
    i_plus, i_minus = phase_integrals(rf, kappa0)
    i0 = _quad(lambda s: rf.L(s) / s, -kappa0, kappa0, limit=200, points=[0.0])
    dd = rf.d if d is None else complex(d)
    return AsymptoticInputs(
        kappa0=kappa0,
        nu_plus=nu_p,
        nu_minus=nu_m,
        delta0=delta0,
        delta1=delta1,
        I_plus=i_plus,
        I_minus=i_minus,
        I0=float(i0),
        arg_r_minus=rf.arg_r(-kappa0),
        arg_r_plus=rf.arg_r(kappa0),
        gamma_arg_plus=gamma_arg(-nu_p) if nu_p != 0 else 0.0,
        gamma_arg_minus=gamma_arg(nu_m) if nu_m != 0 else 0.0,
        d=dd,
    )


@dataclass(frozen=True)
class LeadingOrder:
    """Leading-order evaluation at one (x, t)."""

    u: complex
    A1: float
    A2: float
    kappa0: float
    phi1: complex
    phi2: complex
    amp1: float            # net amplitude multiplier |e^{i phi1}|
    amp2: float            # net amplitude multiplier |e^{-i phi2}|
    phi2_alt: complex      # phi2 with arg r(+kappa0) instead of arg r(-kappa0)
    convention: str
    inputs: AsymptoticInputs


def leading_order_u(rf: ReflectionFunctional, d: complex | None, x: float, t: float,
                    convention: str = "real_phase") -> LeadingOrder:
    """Leading-order u(x, t) in the oscillatory sector x/t > 0.

    Returns amplitudes A1, A2 and both phases; the 'phi2_alt' field carries
    the variant with the reflection phase taken at +kappa0, reported alongside
    the validated choice arg r(-kappa0).
    """
    if convention not in ("as_printed", "real_phase"):
        raise InvalidData(f"unknown convention {convention!r}")
    if t <= 0 or x <= 0:
        raise WrongSector(f"formula is for x > 0, t > 0 (got x={x}, t={t})")
    kappa0 = 0.5 * np.sqrt(t / abs(x))
    ins = asymptotic_inputs(rf, kappa0, d=d)
    A1 = float(np.sqrt(max(-ins.nu_minus, 0.0) / kappa0))
    A2 = float(np.sqrt(max(-ins.nu_plus, 0.0) / kappa0))

    log_t = np.log(kappa0**3 / t)
    log_4k2 = np.log(4 * kappa0**2)
    common1 = (ins.gamma_arg_minus + ins.nu_minus * log_t - ins.nu_plus * log_4k2
               - ins.I_plus / np.pi - t / kappa0 - ins.I0 / np.pi)
    common2 = (-ins.gamma_arg_plus + ins.nu_plus * log_t - ins.nu_minus * log_4k2
               + ins.I_minus / np.pi - t / kappa0)

    if convention == "as_printed":
        phi1 = (-1j * np.pi / 4 + ins.arg_r_minus + common1
                - 2j * ins.d - 2 * kappa0 * ins.delta1)
        phi2 = (3j * np.pi / 4 - ins.arg_r_minus + common2 - ins.I0 / np.pi
                + 2j * ins.d + 2 * kappa0 * ins.delta1)
        phi2_alt = phi2 + ins.arg_r_minus - ins.arg_r_plus
    else:
        two_id = float(np.real(-2j * ins.d))            # -2id as a real number
        scale_corr = float(np.real(2j * kappa0 * ins.delta1))
        phi1 = (np.pi / 4 + ins.arg_r_minus + common1 + two_id + scale_corr)
        phi2 = (np.pi / 4 - ins.arg_r_minus + common2 + ins.I0 / np.pi
                - two_id + scale_corr)
        phi2_alt = phi2 + ins.arg_r_minus - ins.arg_r_plus
    e1 = np.exp(1j * phi1)
    e2 = np.exp(-1j * phi2)
    u = complex((A1 * e1 - A2 * e2) / np.sqrt(t))
    return LeadingOrder(u=u, A1=A1, A2=A2, kappa0=float(kappa0),
                        phi1=complex(phi1), phi2=complex(phi2),
                        amp1=float(abs(e1)), amp2=float(abs(e2)),
                        phi2_alt=complex(phi2_alt), convention=convention,
                        inputs=ins)


def im_theta(xi: float, k: complex) -> float:
    """Im theta(xi, k) = k2 (xi - 1/(4(k1^2 + k2^2))) for theta = xi k + 1/(4k)."""
    k1, k2 = np.real(k), np.imag(k)
    return float(k2 * (xi - 1.0 / (4.0 * (k1**2 + k2**2))))


@dataclass(frozen=True)
class SectorVerdict:
    """Fast-decay classification of the left sector plus the sign diagnostic."""

    classification: str
    xi: float
    probes: np.ndarray      # columns k1, k2, Im theta
    one_signed: bool


def decay_sector_bound(rf: ReflectionFunctional, x: float, t: float,
                       eps: float = 1e-6, n_probe: int = 24) -> SectorVerdict:
    """Verdict for x/t < -eps: rapid decay, with Im theta single-signed above
    the real axis.

    Im theta(xi, k) = k2 [xi - 1/(4(k1^2 + k2^2))] is evaluated on a probe
    grid with k2 > 0; for xi < 0 the bracket is negative everywhere.
    """
    if t <= 0:
        raise WrongSector("need t > 0")
    xi = x / t
    if xi >= -eps:
        raise WrongSector(f"x/t = {xi:.4g} is not in the decaying sector")
    k1 = np.linspace(-2.0, 2.0, n_probe)
    k2 = np.linspace(0.1, 2.0, n_probe)
    K1, K2 = np.meshgrid(k1, k2)
    imtheta = np.vectorize(im_theta)(xi, K1 + 1j * K2)
    probes = np.column_stack([K1.ravel(), K2.ravel(), imtheta.ravel()])
    return SectorVerdict(
        classification="rapid decay",
        xi=float(xi),
        probes=probes,
        one_signed=bool(np.all(imtheta < 0)),
    )
