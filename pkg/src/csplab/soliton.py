"""Reflectionless solutions from discrete data {(k_j, C_j)} and d.

The pole conditions at k_j (upper half plane) close into the 2N x 2N linear
system, with E_j = C_j exp(2 i k_j (y + t / (4 k_j^2))):

    conj(alpha_i) = 1 + sum_j E_j / (kbar_i - k_j) beta_j,
   -conj(beta_i)  =     sum_j E_j / (kbar_i - k_j) alpha_j,

for alpha_j = M11(k_j), beta_j = M21(k_j).  The solution matrix is rational,

    M(k) = I + sum_j [[ conj(E_j beta_j)/(k - kbar_j),  E_j alpha_j/(k - k_j) ],
                      [ -conj(E_j alpha_j)/(k - kbar_j), E_j beta_j/(k - k_j) ]],

so the expansion M(k) = M0 + k M1 + O(k^2) at k = 0 is available in closed
form.  With W = M0^{-1} M1 the field and scale change are

    u e^{-2d} = W12 / i,      x - y = W11 / i.

For N = 1, k_1 = a + i b, the closed form (equivalent to the system above
with C_1 = 2 b e^{2ic - 2 y0}) is

    psi1 = a y + a t/(4(a^2+b^2)),   psi2 = b y - b t/(4(a^2+b^2)),
    u = b/(a^2+b^2) e^{2ic + 2d - 2i theta + i pi/2} e^{2i psi1} sech(2 psi2 + 2 y0),
    x = y - b/(a^2+b^2) (tanh(2 psi2 + 2 y0) - 1),  theta = arg(a + i b),

an envelope of amplitude b/(a^2+b^2) and velocity 1/(4(a^2+b^2)) in (y, t).
Regularity is set by the pole position alone: |a| > |b| smooth, |a| = |b|
cuspon, |a| < |b| loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, InvalidSpectrum, NotSingleValued
from .profile import ComplexProfile

MAX_POLES = 16
CUSPON_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Simple poles k_j (Im k_j > 0) with norming constants C_j, plus d."""

    points: tuple
    d: complex = 0.0j

    def __post_init__(self):
        pts = tuple((complex(k), complex(C)) for k, C in self.points)
        if not 1 <= len(pts) <= MAX_POLES:
            raise InvalidSpectrum(f"need between 1 and {MAX_POLES} poles, got {len(pts)}")
        for k, C in pts:
            if k.imag <= 0:
                raise InvalidSpectrum(f"pole {k} not in the open upper half plane")
            if C == 0:
                raise InvalidSpectrum(f"norming constant vanishes at pole {k}")
        ks = [k for k, _ in pts]
        if len(set(ks)) != len(ks):
            raise InvalidSpectrum("poles must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SolitonPoint:
    """One evaluation of the parametric solution."""

    y: float
    t: float
    u: complex
    x: float
    dxdy: float


def one_soliton(k1: complex, c_phase: float, y0: float, d: complex,
                y, t) -> SolitonPoint:
    """Closed-form single pole solution; broadcasts over array-valued y, t."""
    a, b = float(np.real(k1)), float(np.imag(k1))
    if b <= 0:
        raise InvalidSpectrum(f"Im k1 = {b} must be positive")
    y = np.asarray(y, float)
    t = np.asarray(t, float)
    r2 = a * a + b * b
    psi1 = a * y + a * t / (4 * r2)
    psi2 = b * y - b * t / (4 * r2)
    theta = np.arctan2(b, a)
    arg = 2 * psi2 + 2 * y0
    amp = b / r2
    u = (amp * np.exp(2j * c_phase + 2 * d - 2j * theta + 1j * np.pi / 2)
         * np.exp(2j * psi1) / np.cosh(arg))
    x = y - amp * (np.tanh(arg) - 1.0)
    dxdy = 1.0 - (2 * b * b / r2) / np.cosh(arg) ** 2
    if u.ndim == 0:
        return SolitonPoint(y=float(y), t=float(t), u=complex(u), x=float(x),
                            dxdy=float(dxdy))
    return SolitonPoint(y=y, t=t, u=u, x=x, dxdy=dxdy)


def classify(k1: complex) -> str:
    """smooth / cuspon / loop by |Re k1| versus |Im k1|."""
    a, b = abs(np.real(k1)), abs(np.imag(k1))
    if np.imag(k1) <= 0:
        raise InvalidSpectrum("classification needs Im k1 > 0")
    if abs(a - b) <= CUSPON_TOL * max(a, b, 1.0):
        return "cuspon"
    return "smooth" if a > b else "loop"


def _pole_system(spec: DiscreteSpectrum, y, t, want_cond: bool = False):
    """Batched solve of the 2N x 2N system; returns alpha, beta of shape (m, N).

    Unknown vector per point is (alpha_1..alpha_N, conj(beta_1)..conj(beta_N)).
    """
    y = np.atleast_1d(np.asarray(y, float))
    t = np.atleast_1d(np.asarray(t, float))
    y, t = np.broadcast_arrays(y, t)
    shape = y.shape
    yf = y.ravel()
    tf = t.ravel()
    kj = np.array([k for k, _ in spec.points])
    Cj = np.array([C for _, C in spec.points])
    nn = spec.n
    E = Cj[None, :] * np.exp(2j * kj[None, :] * (yf[:, None] + tf[:, None] / (4 * kj[None, :] ** 2)))
    A = E[:, None, :] / (np.conj(kj)[None, :, None] - kj[None, None, :])
    m = len(yf)
    big = np.zeros((m, 2 * nn, 2 * nn), complex)
    eye = np.eye(nn)
    big[:, :nn, :nn] = eye
    big[:, :nn, nn:] = -np.conj(A)
    big[:, nn:, :nn] = A
    big[:, nn:, nn:] = eye
    rhs = np.zeros((m, 2 * nn, 1), complex)
    rhs[:, :nn, 0] = 1.0
    try:
        sol = np.linalg.solve(big, rhs)[..., 0]
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(big[0]))
        raise DegenerateConfiguration(
            f"pole system singular (condition ~ {cond:.3e})", condition=cond
        ) from exc
    alpha = sol[:, :nn].reshape(*shape, nn)
    beta = np.conj(sol[:, nn:]).reshape(*shape, nn)
    cond = float(np.max(np.linalg.cond(big))) if want_cond else float("nan")
    return alpha, beta, E.reshape(*shape, nn), cond


def nsoliton_eval(spec: DiscreteSpectrum, y: float, t: float,
                  want_cond: bool = False):
    """M0 = M(0) and M1 = M'(0) of the reflectionless solution matrix.

    With want_cond=True returns (M0, M1, condition_estimate) instead.
    """
    alpha, beta, E, cond = _pole_system(spec, y, t, want_cond=want_cond)
    M0, M1 = _expansion_from_pole_data(spec, alpha, beta, E)
    if want_cond:
        return M0[0], M1[0], cond
    return M0[0], M1[0]


def _expansion_from_pole_data(spec: DiscreteSpectrum, alpha, beta, E):
    """Closed-form k = 0 expansion of the rational solution matrix (batched)."""
    kj = np.array([k for k, _ in spec.points])
    alpha = np.atleast_2d(alpha)
    beta = np.atleast_2d(beta)
    E = np.atleast_2d(E)
    m = alpha.shape[0]
    res12 = E * alpha                    # residues of M12 at k_j
    res22 = E * beta                     # residues of M22 at k_j
    res11 = np.conj(res22)               # at conj(k_j), by the sigma2 symmetry
    res21 = -np.conj(res12)
    kb = np.conj(kj)
    M0 = np.zeros((m, 2, 2), complex)
    M1 = np.zeros((m, 2, 2), complex)
    M0[:, 0, 0] = 1.0 - np.sum(res11 / kb, axis=-1)
    M0[:, 0, 1] = -np.sum(res12 / kj, axis=-1)
    M0[:, 1, 0] = -np.sum(res21 / kb, axis=-1)
    M0[:, 1, 1] = 1.0 - np.sum(res22 / kj, axis=-1)
    M1[:, 0, 0] = -np.sum(res11 / kb**2, axis=-1)
    M1[:, 0, 1] = -np.sum(res12 / kj**2, axis=-1)
    M1[:, 1, 0] = -np.sum(res21 / kb**2, axis=-1)
    M1[:, 1, 1] = -np.sum(res22 / kj**2, axis=-1)
    return M0, M1


def reconstruct_u(M0: np.ndarray, M1: np.ndarray, d: complex):
    """(u, x - y) from the k = 0 expansion: u e^{-2d} = W12/i, x - y = W11/i."""
    M0 = np.asarray(M0, complex)
    M1 = np.asarray(M1, complex)
    det = M0[..., 0, 0] * M0[..., 1, 1] - M0[..., 0, 1] * M0[..., 1, 0]
    if np.any(np.abs(det) < 1e-14):
        raise DegenerateConfiguration("M0 is singular")
    W11 = (M0[..., 1, 1] * M1[..., 0, 0] - M0[..., 0, 1] * M1[..., 1, 0]) / det
    W12 = (M0[..., 1, 1] * M1[..., 0, 1] - M0[..., 0, 1] * M1[..., 1, 1]) / det
    u = np.exp(2 * d) * W12 / 1j
    x_minus_y = W11 / 1j
    if np.any(np.abs(np.imag(x_minus_y)) > 1e-8 * (1 + np.abs(x_minus_y))):
        raise DegenerateConfiguration("x - y came out non-real")
    return u, np.real(x_minus_y)


def field_parametric(spec: DiscreteSpectrum, y, t: float):
    """u(y, t) and x(y, t) for an array of y at fixed t."""
    alpha, beta, E, cond = _pole_system(spec, y, t)
    M0, M1 = _expansion_from_pole_data(spec, alpha, beta, E)
    u, xmy = reconstruct_u(M0, M1, spec.d)
    y = np.atleast_1d(np.asarray(y, float))
    return u, y + xmy, cond


def _c_total(spec: DiscreteSpectrum) -> float:
    # x - y ranges over [0, c]; for well-separated poles c adds up per pole.
    return float(sum(2 * k.imag / abs(k) ** 2 for k, _ in spec.points))


def soliton_field(spec: DiscreteSpectrum, t: float, x_grid: np.ndarray,
                  monotone_probe: int = 4096) -> ComplexProfile:
    """Invert the parametric map x(y) and sample u on a uniform x grid.

    Fails with NotSingleValued when x(y) is not strictly increasing (cuspon
    and loop regimes).  Inversion is by bisection on brackets seeded with the
    asymptotic slope dx/dy -> 1, then polished to |dy| < 1e-12.
    """
    x_grid = np.asarray(x_grid, float)
    if spec.n == 1:
        k1 = spec.points[0][0]
        if classify(k1) != "smooth":
            raise NotSingleValued(f"{classify(k1)} pole data has no x-graph")
    span = _c_total(spec) + 1.0
    yprobe = np.linspace(x_grid[0] - span, x_grid[-1] + span, monotone_probe)
    _, xprobe, _ = field_parametric(spec, yprobe, t)
    if np.any(np.diff(xprobe) <= 0):
        raise NotSingleValued("x(y) is not strictly increasing at this t")

    lo = x_grid - span
    hi = x_grid + span
    for _ in range(90):  # bisection to ~1e-13 on unit-scale brackets
        mid = 0.5 * (lo + hi)
        _, xm, _ = field_parametric(spec, mid, t)
        above = xm > x_grid
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.max(hi - lo) < 1e-12:
            break
    yy = 0.5 * (lo + hi)
    u, _, _ = field_parametric(spec, yy, t)
    dx = float(x_grid[1] - x_grid[0])
    tail = float(np.abs(u[[0, -1]]).max())
    return ComplexProfile(x0=float(x_grid[0]), dx=dx, n=len(x_grid), u=u,
                          tail_bound=tail, meta={"source": "soliton", "t": t})


def save_spectrum(spec: DiscreteSpectrum, path) -> None:
    rec = {
        "points": [
            {"re_k": k.real, "im_k": k.imag, "re_C": C.real, "im_C": C.imag}
            for k, C in spec.points
        ],
        "d_imag": float(spec.d.imag),
    }
    with open(path, "w") as fh:
        json.dump(rec, fh, indent=2)


def load_spectrum(path) -> DiscreteSpectrum:
    with open(path) as fh:
        rec = json.load(fh)
    pts = [(p["re_k"] + 1j * p["im_k"], p["re_C"] + 1j * p["im_C"])
           for p in rec["points"]]
    return DiscreteSpectrum(points=tuple(pts), d=1j * float(rec.get("d_imag", 0.0)))
