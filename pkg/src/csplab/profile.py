"""Complex field profiles on uniform grids and their geometric functionals.

The central objects of the hodograph picture live here.  For a field u(x) with
derivative u_x the metric is

    m = 1 + |u_x|^2,

and the conserved functionals are

    c = int (sqrt(m) - 1) dx,
    d = int (conj(u_x) u_xx - u_x conj(u_xx)) / (4 sqrt(m) (sqrt(m)+1)) dx,

with d pure imaginary.  The slow scale is y(x) = x - c_plus(x) where
c_plus(x) = int_x^inf (sqrt(m) - 1) dx'.  Everything downstream (scattering,
solitons, asymptotics, the reference integrator) consumes these quantities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import DecayViolation, GridTooSmall, InvalidData

# Profiles whose edge values exceed this fraction of max|u| fail the decay gate.
DECAY_RTOL = 1e-8


@dataclass(frozen=True)
class ComplexProfile:
    """Sampled complex field on a uniform grid with decay metadata."""

    x0: float
    dx: float
    n: int
    u: np.ndarray
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 8:
            raise GridTooSmall(f"need n >= 8 samples, got {self.n}")
        if self.dx <= 0:
            raise InvalidData(f"dx must be positive, got {self.dx}")
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (self.n,):
            raise InvalidData(f"expected {self.n} samples, got shape {u.shape}")
        if not np.all(np.isfinite(u.real)) or not np.all(np.isfinite(u.imag)):
            raise InvalidData("profile contains non-finite samples")
        object.__setattr__(self, "u", u)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def max_abs(self) -> float:
        return float(np.abs(self.u).max())

    def check_decay(self, rtol: float = DECAY_RTOL) -> None:
        """Raise DecayViolation unless the advertised tail is negligible."""
        scale = self.max_abs()
        if scale == 0.0:
            return
        if self.tail_bound > rtol * scale:
            raise DecayViolation(
                f"tail bound {self.tail_bound:.3e} exceeds {rtol:.1e} * max|u| = "
                f"{rtol * scale:.3e}"
            )


@dataclass(frozen=True)
class GeometryFields:
    """m, sqrt(m), c_plus, y(x) and the conserved scalars c, d of a profile."""

    m: np.ndarray
    sqrt_m: np.ndarray
    cplus: np.ndarray
    y_of_x: np.ndarray
    c: float
    d: complex


def _descriptor_field(spec: dict, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Evaluate a closed-form descriptor; return samples and analytic tail bound."""
    kind = spec.get("kind")
    if kind == "gaussian":
        amp = complex(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 1.0))
        center = float(spec.get("center", 0.0))
        if width <= 0:
            raise InvalidData("gaussian width must be positive")
        u = amp * np.exp(-(((x - center) / width) ** 2))
        edge = max(abs(x[0] - center), abs(x[-1] - center))
        tail = abs(amp) * float(np.exp(-((edge / width) ** 2)))
        return u.astype(complex), tail
    if kind == "sech":
        amp = complex(spec.get("amplitude", 1.0))
        slope = float(spec.get("phase_slope", 0.0))
        u = amp / np.cosh(x) * np.exp(1j * slope * x)
        edge = max(abs(x[0]), abs(x[-1]))
        tail = 2 * abs(amp) * float(np.exp(-edge))
        return u.astype(complex), tail
    if kind == "hermite_gauss":
        # A * d^m/dx^m [ exp(-(x/w)^2) exp(i theta x) ]: exactly mean-free for m >= 1.
        amp = complex(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 1.0))
        order = int(spec.get("order", 1))
        theta = float(spec.get("modulation", 0.0))
        if width <= 0 or order < 0:
            raise InvalidData("hermite_gauss needs width > 0 and order >= 0")
        g = np.exp(-((x / width) ** 2) + 1j * theta * x)
        # d^k g = P_k(x) g with P_{k+1} = P_k' + P_k * (log g)'
        logg_prime = np.array([-2.0 / width**2, 1j * theta])
        lead = np.array([1.0 + 0j])
        for _ in range(order):
            lead = np.polyadd(np.polyder(lead), np.polymul(lead, logg_prime))
        u = amp * np.polyval(lead, x) * g
        edge = max(abs(x[0]), abs(x[-1]))
        tail = abs(amp) * float(np.abs(np.polyval(lead, edge)) * np.exp(-((edge / width) ** 2)))
        return u.astype(complex), tail
    if kind == "raw":
        u = np.asarray(spec["samples"], dtype=complex)
        tail = float(np.abs(u[[0, -1]]).max()) if len(u) else 0.0
        return u, tail
    raise InvalidData(f"unknown profile descriptor kind: {kind!r}")


def build_profile(spec: dict, grid: tuple[float, float, int]) -> ComplexProfile:
    """Build a profile from a descriptor dict on grid (x0, dx, n).

    Descriptors: gaussian {amplitude, width, center}, sech {amplitude,
    phase_slope}, hermite_gauss {amplitude, width, order, modulation},
    raw {samples}.  The tail bound is the descriptor's analytic value at the
    grid edge (largest edge sample for raw input).
    """
    x0, dx, n = float(grid[0]), float(grid[1]), int(grid[2])
    if n < 8:
        raise GridTooSmall(f"need n >= 8 samples, got {n}")
    if dx <= 0:
        raise InvalidData(f"dx must be positive, got {dx}")
    x = x0 + dx * np.arange(n)
    u, tail = _descriptor_field(spec, x)
    if u.shape != (n,):
        raise InvalidData(f"descriptor produced {u.shape[0]} samples, expected {n}")
    meta = {"descriptor": spec.get("kind", "raw")}
    return ComplexProfile(x0=x0, dx=dx, n=n, u=u, tail_bound=tail, meta=meta)


def _fd_stencil(u: np.ndarray, dx: float, order: int) -> np.ndarray:
    """4th-order centered differences, off-grid samples treated as zero."""
    upad = np.concatenate([np.zeros(2, complex), u, np.zeros(2, complex)])
    if order == 1:
        out = (-upad[4:] + 8 * upad[3:-1] - 8 * upad[1:-3] + upad[:-4]) / (12 * dx)
    else:
        out = (-upad[4:] + 16 * upad[3:-1] - 30 * upad[2:-2]
               + 16 * upad[1:-3] - upad[:-4]) / (12 * dx**2)
    return out


def spectral_derivative(u: np.ndarray, dx: float, order: int) -> np.ndarray:
    """Derivative via FFT of the periodic extension."""
    n = len(u)
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    return np.fft.ifft((1j * k) ** order * np.fft.fft(u))


def _ends_negligible(u: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = np.abs(u).max()
    if scale == 0.0:
        return True
    return float(np.abs(u[[0, -1]]).max()) <= rtol * scale


def differentiate(p: ComplexProfile, order: int, method: str = "auto") -> ComplexProfile:
    """Derivative of matching grid.

    method: 'spectral' (periodic extension), 'fd4' (centered 4th order, zero
    off-grid), or 'auto' which picks spectral when both edge samples are
    negligible and fd4 otherwise.
    """
    if order not in (1, 2):
        raise InvalidData(f"order must be 1 or 2, got {order}")
    if method not in ("auto", "fd4", "spectral"):
        raise InvalidData(f"unknown derivative method {method!r}")
    chosen = method
    if method == "auto":
        chosen = "spectral" if _ends_negligible(p.u) else "fd4"
    if chosen == "spectral":
        du = spectral_derivative(p.u, p.dx, order)
    else:
        du = _fd_stencil(p.u, p.dx, order)
    meta = dict(p.meta)
    meta["derivative"] = {"order": order, "method": chosen}
    return ComplexProfile(x0=p.x0, dx=p.dx, n=p.n, u=du,
                          tail_bound=0.0, meta=meta)


def geometry(p: ComplexProfile, decay_rtol: float = DECAY_RTOL,
             derivative_method: str = "auto") -> GeometryFields:
    """Metric, slow scale and conserved scalars of a decaying profile.

    Composite Simpson quadrature on the grid; contributions off the grid are
    taken to be zero, which the decay gate justifies.  Periodic states (box
    simulations) should pass derivative_method='spectral'.
    """
    p.check_decay(decay_rtol)
    ux = differentiate(p, 1, derivative_method).u
    uxx = differentiate(p, 2, derivative_method).u
    m = 1.0 + np.abs(ux) ** 2
    s = np.sqrt(m)
    integrand = s - 1.0
    cum = cumulative_simpson(integrand, dx=p.dx, initial=0.0)
    c = float(cum[-1])
    cplus = c - cum
    y = p.x - cplus
    # conj(u_x) u_xx - u_x conj(u_xx) = 2i Im(conj(u_x) u_xx): pure imaginary
    dens = np.imag(np.conj(ux) * uxx) / (2.0 * s * (s + 1.0))
    d = 1j * float(simpson(dens, dx=p.dx))
    return GeometryFields(m=m, sqrt_m=s, cplus=cplus, y_of_x=y, c=c, d=d)


def pde_residual(u_grid: np.ndarray, dx: float, dt: float) -> float:
    """Max interior defect of u_xt + u + (1/2)(|u|^2 u_x)_x on an (t, x) lattice.

    Centered second-order differences in both directions; the lattice must be
    uniform with at least 5 points per direction.
    """
    u = np.asarray(u_grid, dtype=complex)
    if u.ndim != 2 or u.shape[0] < 5 or u.shape[1] < 5:
        raise GridTooSmall(f"need a lattice of at least 5x5 points, got {u.shape}")
    if dx <= 0 or dt <= 0:
        raise InvalidData("lattice spacings must be positive")
    uxt = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4 * dx * dt)
    ux = (u[:, 2:] - u[:, :-2]) / (2 * dx)
    w = (np.abs(u[:, 1:-1]) ** 2) * ux
    wx = (w[:, 2:] - w[:, :-2]) / (2 * dx)
    res = uxt[:, 1:-1] + u[1:-1, 2:-2] + 0.5 * wx[1:-1, :]
    return float(np.abs(res).max())


def save_profile(p: ComplexProfile, path) -> None:
    """Write the JSON record {x0, dx, n, re, im}."""
    rec = {
        "x0": p.x0,
        "dx": p.dx,
        "n": p.n,
        "re": [float(v) for v in p.u.real],
        "im": [float(v) for v in p.u.imag],
    }
    with open(path, "w") as fh:
        json.dump(rec, fh)


def load_profile(path) -> ComplexProfile:
    """Read the JSON record written by save_profile."""
    with open(path) as fh:
        rec = json.load(fh)
    u = np.asarray(rec["re"], float) + 1j * np.asarray(rec["im"], float)
    tail = float(np.abs(u[[0, -1]]).max()) if len(u) else 0.0
    return ComplexProfile(x0=float(rec["x0"]), dx=float(rec["dx"]),
                          n=int(rec["n"]), u=u, tail_bound=tail)
