"""Direct scattering for the complex short pulse field at t = 0.

Jost-type eigenfunctions of the x-part of the transformed linear system are
integrated as a first-order matrix ODE.  With s = sqrt(m), m = 1 + |u_x|^2,
the generator of the un-conjugated system is

    A11 =  (conj(u_x) u_xx - u_x conj(u_xx)) / (4 s (s+1))       (= -A22)
    A12 = -((s-1) u_x conj(u_xx) - (s+1) conj(u_x) u_xx) / (4 m conj(u_x))
    A21 = -((s+1) u_x conj(u_xx) - (s-1) conj(u_x) u_xx) / (4 m u_x)

Both off-diagonal denominators carry the variable they transform under
(conj(u_x) above, u_x below); this is forced by the symmetry
conj(A(k)) = sigma2 A(k) sigma2 which the Jost functions inherit.  The
oscillation e^{+-2ikp}, p(x) = x - int_x^inf (s-1) dx', is factored out
analytically (integrating-factor form), so the marched unknown

    w' = [[A11, e^{-2ikp} A12], [e^{+2ikp} A21, A22]] w

stays O(1) at every k.  Classical RK4 marches w1 from the left edge and w2
from the right edge to a common matching point; the scattering matrix of the
un-conjugated system is S~(k) = w2^{-1} w1 there (the phase factors cancel),
and the gauge normalization is restored analytically:

    a(k) = e^d  S~22,   b(k) = e^{-d} S~12,   r = b / a.

At k = 0 the solver is bypassed; a(0) = e^d and the expansion
a(k) = e^d (1 + i k c - c^2 k^2 / 2 + O(k^3)) covers the small-k regime.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import (
    IntegrationBlowup,
    InvalidData,
    SingularSpectralPoint,
    SpectralSingularity,
    ToleranceExceeded,
)
from .profile import ComplexProfile, GeometryFields, spectral_derivative

# |a| below this on the real line violates the no-spectral-singularity assumption.
SPECTRAL_SINGULARITY_TOL = 1e-8
# Fine-grid refinement factor; RK4 steps span two fine cells, so the
# default marches with 4 substeps per original grid cell.
DEFAULT_OVERSAMPLE = 8


@dataclass(frozen=True)
class ScatteringEntry:
    """One spectral point: a(k), b(k) and the reflection coefficient r = b/a."""

    k: float
    a: complex
    b: complex
    r: complex

    def unitarity_defect(self) -> float:
        return float(abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0))


@dataclass
class ScatteringTable:
    """Entries sorted by k plus the conserved scalars of the source profile."""

    entries: list[ScatteringEntry]
    c: float
    d: complex
    k_grid_meta: dict = field(default_factory=dict)

    @property
    def k(self) -> np.ndarray:
        return np.array([e.k for e in self.entries])

    @property
    def a(self) -> np.ndarray:
        return np.array([e.a for e in self.entries])

    @property
    def b(self) -> np.ndarray:
        return np.array([e.b for e in self.entries])

    @property
    def r(self) -> np.ndarray:
        return np.array([e.r for e in self.entries])

    def worst_unitarity_defect(self) -> float:
        return max(e.unitarity_defect() for e in self.entries)


def _fft_refine(u: np.ndarray, factor: int) -> np.ndarray:
    """Band-limited interpolation onto a grid refined by an integer factor."""
    n = len(u)
    nf = n * factor
    spec = np.fft.fft(u)
    out = np.zeros(nf, complex)
    half = n // 2
    out[:half] = spec[:half]
    out[-half:] = spec[-half:]
    return np.fft.ifft(out) * factor


class _Envelope:
    """Generator entries and phase p(x) sampled on the refined grid."""

    def __init__(self, p: ComplexProfile, oversample: int):
        if oversample < 2 or oversample % 2:
            raise InvalidData("oversample must be an even integer >= 2")
        uf = _fft_refine(p.u, oversample)
        dxf = p.dx / oversample
        ux = spectral_derivative(uf, dxf, 1)
        uxx = spectral_derivative(uf, dxf, 2)
        m = 1.0 + np.abs(ux) ** 2
        s = np.sqrt(m)
        # 0/0 guard where u_x vanishes: numerators vanish one order faster.
        tiny = np.finfo(float).tiny
        cux = np.where(ux == 0, tiny, np.conj(ux))
        dux = np.where(ux == 0, tiny, ux)
        self.a11 = (np.conj(ux) * uxx - ux * np.conj(uxx)) / (4 * s * (s + 1))
        self.a12 = -((s - 1) * ux * np.conj(uxx) - (s + 1) * np.conj(ux) * uxx) / (4 * m * cux)
        self.a21 = -((s + 1) * ux * np.conj(uxx) - (s - 1) * np.conj(ux) * uxx) / (4 * m * dux)
        cum = cumulative_simpson(s - 1.0, dx=dxf, initial=0.0)
        self.p = (p.x0 + dxf * np.arange(len(uf))) - (cum[-1] - cum)
        self.h = 2.0 * dxf  # RK4 step spans two fine cells
        self.nsteps = (len(uf) - 1) // 2


def _march(env: _Envelope, ks: np.ndarray, j_start: int, j_stop: int, sgn: int) -> np.ndarray:
    """RK4 march of w (rows w11,w12,w21,w22; columns k) between fine indices."""
    nk = len(ks)
    phase = np.exp(-2j * np.outer(ks, env.p))  # (nk, nfine)
    b12 = env.a12[None, :] * phase
    b21 = env.a21[None, :] / phase
    a11 = env.a11

    def rhs(j, w):
        a = a11[j]
        c12 = b12[:, j]
        c21 = b21[:, j]
        return np.stack([
            a * w[0] + c12 * w[2],
            a * w[1] + c12 * w[3],
            c21 * w[0] - a * w[2],
            c21 * w[1] - a * w[3],
        ])

    w = np.zeros((4, nk), complex)
    w[0] = 1.0
    w[3] = 1.0
    h = sgn * env.h
    j = j_start
    while j != j_stop:
        k1 = rhs(j, w)
        k2 = rhs(j + sgn, w + 0.5 * h * k1)
        k3 = rhs(j + sgn, w + 0.5 * h * k2)
        k4 = rhs(j + 2 * sgn, w + h * k3)
        w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        j += 2 * sgn
    if not np.all(np.isfinite(w)):
        raise IntegrationBlowup("non-finite state during Jost integration")
    return w


def _jost_many(p: ComplexProfile, ks: np.ndarray, oversample: int,
               match_shift: int = 0, k_chunk: int = 64):
    """March both Jost solutions for a batch of k; return (w1, w2, p_match).

    match_shift moves the matching point by that many RK4 steps from the
    middle of the grid.
    """
    env = _Envelope(p, oversample)
    jm = 2 * (env.nsteps // 2 + match_shift)
    if not 0 < jm < 2 * env.nsteps:
        raise InvalidData("matching point outside the grid")
    ks = np.asarray(ks, float)
    w1 = np.empty((4, len(ks)), complex)
    w2 = np.empty((4, len(ks)), complex)
    for lo in range(0, len(ks), k_chunk):
        sel = slice(lo, min(lo + k_chunk, len(ks)))
        w1[:, sel] = _march(env, ks[sel], 0, jm, +1)
        w2[:, sel] = _march(env, ks[sel], 2 * env.nsteps, jm, -1)
    return w1, w2, float(env.p[jm])


def _stilde(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """S~ = w2^{-1} w1, vectorized over the trailing axis."""
    det2 = w2[0] * w2[3] - w2[1] * w2[2]
    return np.stack([
        (w2[3] * w1[0] - w2[1] * w1[2]) / det2,
        (w2[3] * w1[1] - w2[1] * w1[3]) / det2,
        (-w2[2] * w1[0] + w2[0] * w1[2]) / det2,
        (-w2[2] * w1[1] + w2[0] * w1[3]) / det2,
    ])


def jost_pair(p: ComplexProfile, geom: GeometryFields, k: float,
              oversample: int = DEFAULT_OVERSAMPLE, match_shift: int = 0):
    """Jost solutions mu1 (from the left) and mu2 (from the right) at the
    matching point, as 2x2 arrays.

    Solutions of the un-conjugated system: mu_j -> identity at their
    normalization end, det mu_j = 1, and conj(mu_j(k)) = sigma2 mu_j(k) sigma2
    on the real line.
    """
    if k == 0.0:
        raise SingularSpectralPoint("k = 0: use the small-k expansion of a(k)")
    p.check_decay()
    w1, w2, p_m = _jost_many(p, np.array([k]), oversample, match_shift)
    ph = np.exp(2j * k * p_m)
    mu1 = np.array([[w1[0, 0], ph * w1[1, 0]], [w1[2, 0] / ph, w1[3, 0]]])
    mu2 = np.array([[w2[0, 0], ph * w2[1, 0]], [w2[2, 0] / ph, w2[3, 0]]])
    return mu1, mu2


def _entries_from_batch(ks: np.ndarray, st: np.ndarray, d: complex) -> list[ScatteringEntry]:
    ed = np.exp(d)
    a = ed * st[3]
    b = st[1] / ed
    out = []
    for i, k in enumerate(ks):
        if abs(a[i]) < SPECTRAL_SINGULARITY_TOL:
            raise SpectralSingularity(f"|a({k:.6g})| = {abs(a[i]):.3e}")
        out.append(ScatteringEntry(k=float(k), a=complex(a[i]), b=complex(b[i]),
                                   r=complex(b[i] / a[i])))
    return out


def scattering_entry(p: ComplexProfile, geom: GeometryFields, k: float,
                     oversample: int = DEFAULT_OVERSAMPLE,
                     match_shift: int = 0,
                     unitarity_tol: float = 1e-8) -> ScatteringEntry:
    """a(k), b(k), r(k) at one real spectral point.

    The entry must satisfy |a|^2 + |b|^2 = 1 within unitarity_tol, otherwise
    ToleranceExceeded carries the measured defect.
    """
    if k == 0.0:
        raise SingularSpectralPoint("k = 0: a(0) = e^d analytically, r(0) = 0")
    p.check_decay()
    w1, w2, _ = _jost_many(p, np.array([k]), oversample, match_shift)
    st = _stilde(w1, w2)
    entry = _entries_from_batch(np.array([k]), st, geom.d)[0]
    defect = entry.unitarity_defect()
    if defect > unitarity_tol:
        raise ToleranceExceeded(
            f"unitarity defect {defect:.3e} at k = {k:.6g}", defect=defect)
    return entry


def default_k_grid(k_max: float = 8.0, n_linear: int = 160, n_log: int = 24,
                   k_split: float = 0.05, k_min: float = 1e-3) -> np.ndarray:
    """Symmetric hybrid grid: log-spaced in [k_min, k_split], linear above."""
    lin = np.linspace(k_split, k_max, n_linear)
    lg = np.logspace(np.log10(k_min), np.log10(k_split), n_log, endpoint=False)
    pos = np.concatenate([lg, lin])
    return np.concatenate([-pos[::-1], pos])


def reflection_table(p: ComplexProfile, geom: GeometryFields, k_grid: np.ndarray,
                     oversample: int = DEFAULT_OVERSAMPLE) -> ScatteringTable:
    """Scattering data on a grid of nonzero real k, sorted ascending."""
    ks = np.sort(np.asarray(k_grid, float))
    if len(ks) == 0:
        raise InvalidData("empty k grid")
    if np.any(ks == 0.0):
        raise SingularSpectralPoint("k grid must avoid 0")
    if np.any(np.diff(ks) <= 0):
        raise InvalidData("k grid has duplicate points")
    p.check_decay()
    w1, w2, _ = _jost_many(p, ks, oversample)
    st = _stilde(w1, w2)
    entries = _entries_from_batch(ks, st, geom.d)
    table = ScatteringTable(
        entries=entries,
        c=geom.c,
        d=geom.d,
        k_grid_meta={
            "k_min": float(ks[0]),
            "k_max": float(ks[-1]),
            "n": len(ks),
            "oversample": oversample,
        },
    )
    table.k_grid_meta["unitarity_defect"] = table.worst_unitarity_defect()
    return table


def small_k_model(table: ScatteringTable, k: np.ndarray) -> np.ndarray:
    """a(k) = e^d (1 + i k c - c^2 k^2 / 2), the analytic small-k law."""
    k = np.asarray(k, float)
    return np.exp(table.d) * (1.0 + 1j * k * table.c - table.c**2 * k**2 / 2.0)


def small_k_slope(table: ScatteringTable, k_lo: float = 1e-3, k_hi: float = 1e-1) -> float:
    """Fitted slope of log|r| against log k on [k_lo, k_hi] (positive k side)."""
    ks = table.k
    sel = (ks >= k_lo) & (ks <= k_hi)
    if sel.sum() < 3:
        raise InvalidData("too few positive k points in the fit range")
    rr = np.abs(table.r[sel])
    if np.any(rr == 0):
        raise InvalidData("r vanishes exactly inside the fit range")
    return float(np.polyfit(np.log(ks[sel]), np.log(rr), 1)[0])


def save_table(table: ScatteringTable, csv_path, sidecar_path) -> None:
    """CSV with header k,re_a,im_a,re_b,im_b,re_r,im_r plus a JSON sidecar."""
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "re_a", "im_a", "re_b", "im_b", "re_r", "im_r"])
        for e in table.entries:
            wr.writerow([repr(float(v)) for v in
                         (e.k, e.a.real, e.a.imag, e.b.real, e.b.imag,
                          e.r.real, e.r.imag)])
    sidecar = {
        "c": table.c,
        "d_imag": float(table.d.imag),
        "unitarity_defect": table.worst_unitarity_defect(),
        "k_grid_meta": table.k_grid_meta,
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_table(csv_path, sidecar_path) -> ScatteringTable:
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    entries = [
        ScatteringEntry(
            k=float(r["k"]),
            a=float(r["re_a"]) + 1j * float(r["im_a"]),
            b=float(r["re_b"]) + 1j * float(r["im_b"]),
            r=float(r["re_r"]) + 1j * float(r["im_r"]),
        )
        for r in rows
    ]
    with open(sidecar_path) as fh:
        side = json.load(fh)
    return ScatteringTable(entries=entries, c=float(side["c"]),
                           d=1j * float(side["d_imag"]),
                           k_grid_meta=side.get("k_grid_meta", {}))
