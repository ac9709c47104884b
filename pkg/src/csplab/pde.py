"""Reference pseudo-spectral integrator on a large periodic box.

The evolution form integrated is

    u_t = -Dx^{-1} u - (1/2) |u|^2 u_x,

with Dx^{-1} the spectral antiderivative restricted to nonzero modes (the
zero mode is pinned to 0 and monitored).  Integrating the conservation form
over the box forces a mean-free field, so nonzero-mean initial data is
rejected.  Time stepping is classical RK4; the nonlocal linear symbol i/k is
bounded away from the zero mode, and an optional integrating-factor flag
treats it exactly so the step size is limited only by the advection term.
The cubic nonlinearity is dealiased with the 2/3 rule.

Each snapshot logs the drift of the conserved c and d and of the spatial
mean, giving a running check of (sqrt(m))_t = -(1/2)(|u|^2 sqrt(m))_x.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import Blowup, InvalidData, MeanNotZero, WindowEmpty
from .profile import ComplexProfile, geometry, load_profile, save_profile

MEAN_RTOL = 1e-12


@dataclass(frozen=True)
class EvolutionConfig:
    """Box, resolution and stepping parameters of one run."""

    L: float
    n: int
    dt: float
    T: float
    dealias_fraction: float = 2.0 / 3.0
    snapshot_stride: int = 1
    integrating_factor: bool = False

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise InvalidData(f"n must be a power of two >= 16, got {self.n}")
        if self.L <= 0 or self.dt <= 0 or self.T <= 0:
            raise InvalidData("L, dt, T must be positive")
        if not 0 < self.dealias_fraction <= 1:
            raise InvalidData("dealias_fraction must lie in (0, 1]")
        if self.snapshot_stride < 1:
            raise InvalidData("snapshot_stride must be >= 1")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    def x_grid(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    def cfl_advisory(self, u_max: float) -> float:
        """dt * max|k| * max|u|^2; order-one values are comfortable for RK4."""
        k_max = np.pi / self.dx
        return float(self.dt * k_max * u_max**2)


@dataclass
class Trajectory:
    """Snapshots of one run plus the conserved-quantity drift log."""

    times: list
    states: list
    drift_log: list          # rows: (t, c, d_imag, mean_abs)
    config: EvolutionConfig
    meta: dict = field(default_factory=dict)

    def drift_array(self) -> np.ndarray:
        return np.asarray(self.drift_log, float)


class _Stepper:
    """RK4 stepper for the spectral state, with optional integrating factor."""

    def __init__(self, cfg: EvolutionConfig):
        self.cfg = cfg
        n = cfg.n
        self.k = 2.0 * np.pi * sfft.fftfreq(n, d=cfg.dx)
        knz = np.where(self.k == 0.0, 1.0, self.k)
        self.lin = np.where(self.k == 0.0, 0.0, 1j / knz)  # symbol of -Dx^{-1}
        self.mask = (np.abs(self.k) <= cfg.dealias_fraction * np.abs(self.k).max()).astype(float)
        # On the line the means of -Dx^{-1}u and of the cubic term cancel
        # exactly; with the zero-mode convention above the cubic mean must be
        # projected out too, or RK4 stages pick up O(dt) constant offsets.
        self.mask[0] = 0.0

    def nonlinear(self, uh):
        u = sfft.ifft(uh)
        ux = sfft.ifft(1j * self.k * uh)
        return self.mask * sfft.fft(-0.5 * np.abs(u) ** 2 * ux)

    def step_plain(self, uh, dt):
        def rhs(v):
            return self.lin * v + self.nonlinear(v)

        k1 = rhs(uh)
        k2 = rhs(uh + 0.5 * dt * k1)
        k3 = rhs(uh + 0.5 * dt * k2)
        k4 = rhs(uh + dt * k3)
        out = uh + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[0] = 0.0
        return out

    def step_if(self, uh, dt, E, Eh):
        k1 = self.nonlinear(uh)
        k2 = self.nonlinear(Eh * (uh + 0.5 * dt * k1))
        k3 = self.nonlinear(Eh * uh + 0.5 * dt * k2)
        k4 = self.nonlinear(E * uh + dt * Eh * k3)
        out = E * uh + (dt / 6.0) * (E * k1 + 2 * Eh * (k2 + k3) + k4)
        out[0] = 0.0
        return out


def _snapshot(cfg: EvolutionConfig, u: np.ndarray, t: float) -> ComplexProfile:
    tail = float(np.abs(u[[0, -1]]).max())
    return ComplexProfile(x0=-cfg.L, dx=cfg.dx, n=cfg.n, u=u.copy(),
                          tail_bound=tail, meta={"t": t})


def evolve(u0: ComplexProfile, cfg: EvolutionConfig) -> Trajectory:
    """Integrate u0 to time T, recording snapshots every snapshot_stride steps.

    Raises MeanNotZero when the spatial mean of u0 exceeds 1e-12 max|u0| and
    Blowup(t) when the state goes non-finite.
    """
    if u0.n != cfg.n or abs(u0.dx - cfg.dx) > 1e-12 * cfg.dx or abs(u0.x0 + cfg.L) > 1e-9:
        raise InvalidData("initial profile grid does not match the evolution box")
    scale = u0.max_abs()
    mean0 = abs(np.mean(u0.u))
    if scale > 0 and mean0 > MEAN_RTOL * scale:
        raise MeanNotZero(
            f"|mean u0| = {mean0:.3e} exceeds {MEAN_RTOL:.0e} * max|u0| = "
            f"{MEAN_RTOL * scale:.3e}")

    stepper = _Stepper(cfg)
    nsteps = int(round(cfg.T / cfg.dt))
    uh = sfft.fft(np.asarray(u0.u, complex))
    uh[0] = 0.0

    g0 = geometry(u0, decay_rtol=np.inf, derivative_method="spectral")
    times = [0.0]
    states = [_snapshot(cfg, u0.u, 0.0)]
    drift = [(0.0, g0.c, float(g0.d.imag), float(mean0))]

    E = Eh = None
    if cfg.integrating_factor:
        E = np.exp(stepper.lin * cfg.dt)
        Eh = np.exp(stepper.lin * cfg.dt / 2.0)

    for step in range(1, nsteps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            if cfg.integrating_factor:
                uh = stepper.step_if(uh, cfg.dt, E, Eh)
            else:
                uh = stepper.step_plain(uh, cfg.dt)
        if not np.all(np.isfinite(uh)):
            raise Blowup(step * cfg.dt)
        if step % cfg.snapshot_stride == 0 or step == nsteps:
            t = step * cfg.dt
            u = sfft.ifft(uh)
            snap = _snapshot(cfg, u, t)
            g = geometry(snap, decay_rtol=np.inf, derivative_method="spectral")
            times.append(t)
            states.append(snap)
            drift.append((t, g.c, float(g.d.imag), float(abs(np.mean(u)))))

    meta = {
        "cfl_advisory": cfg.cfl_advisory(scale),
        "zero_mode_max": max(row[3] for row in drift),
    }
    return Trajectory(times=times, states=states, drift_log=drift,
                      config=cfg, meta=meta)


def conservation_report(traj: Trajectory) -> tuple[float, float]:
    """(max |c(t) - c(0)|, max |d(t) - d(0)|) over the snapshots."""
    if len(traj.states) < 2:
        raise InvalidData("need at least 2 snapshots")
    cs, ds = [], []
    for snap in traj.states:
        g = geometry(snap, decay_rtol=np.inf, derivative_method="spectral")
        cs.append(g.c)
        ds.append(g.d)
    cs = np.asarray(cs)
    ds = np.asarray(ds)
    return (float(np.abs(cs - cs[0]).max()), float(np.abs(ds - ds[0]).max()))


@dataclass(frozen=True)
class LeftSectorReport:
    times: np.ndarray
    sups: np.ndarray
    decay_exponent: float


@dataclass(frozen=True)
class RightSectorReport:
    # rows: t, x, sqrt(t)*|u| at a local max, predicted A1+A2 (nan if no
    # amplitude function was supplied), ratio
    rows: np.ndarray


def sector_scan(traj: Trajectory, sector: str, eps: float,
                amplitude_fn=None, upper: float = 1.0,
                min_level: float = 0.0, t_min: float = 0.0):
    """Scan snapshots against the two asymptotic sectors.

    left:  decay exponent of sup_{x < -eps t} |u| from a log-log fit.
    right: local maxima of sqrt(t) |u| on eps <= x/t <= upper, paired with
           amplitude_fn(kappa0) = A1 + A2 when provided.  Maxima below
           min_level (same sqrt(t)-scaled units) are ignored.
    """
    if sector not in ("left", "right"):
        raise InvalidData(f"sector must be 'left' or 'right', got {sector!r}")
    if eps <= 0:
        raise InvalidData("eps must be positive")
    x = traj.states[0].x
    dx = traj.config.dx
    if sector == "left":
        times, sups = [], []
        for t, snap in zip(traj.times, traj.states):
            if t <= t_min or eps * t < 4 * dx:
                continue
            sel = x < -eps * t
            if not sel.any():
                continue
            times.append(t)
            sups.append(float(np.abs(snap.u[sel]).max()))
        if len(times) < 2:
            raise WindowEmpty("fewer than 2 usable left-sector snapshots")
        times = np.asarray(times)
        sups = np.asarray(sups)
        positive = sups > 0
        if positive.sum() >= 2:
            slope = float(np.polyfit(np.log(times[positive]), np.log(sups[positive]), 1)[0])
        else:
            slope = -np.inf
        return LeftSectorReport(times=times, sups=sups, decay_exponent=slope)

    rows = []
    windows_seen = 0
    for t, snap in zip(traj.times, traj.states):
        if t <= max(t_min, 0.0) or eps * t < 4 * dx:
            continue
        sel = (x >= eps * t) & (x <= upper * t)
        if not sel.any():
            continue
        windows_seen += 1
        xs = x[sel]
        vals = np.sqrt(t) * np.abs(snap.u[sel])
        dv = np.diff(vals)
        locs = np.where((dv[:-1] > 0) & (dv[1:] <= 0))[0] + 1
        for j in locs:
            if vals[j] < min_level:
                continue
            kappa0 = 0.5 * np.sqrt(t / xs[j])
            if amplitude_fn is not None:
                pred = float(amplitude_fn(kappa0))
                ratio = vals[j] / pred if pred > 0 else np.nan
            else:
                pred = np.nan
                ratio = np.nan
            rows.append((t, xs[j], vals[j], pred, ratio))
    if windows_seen == 0:
        raise WindowEmpty("no snapshot intersects the right-sector window")
    arr = np.asarray(rows, float) if rows else np.empty((0, 5))
    return RightSectorReport(rows=arr)


def save_trajectory(traj: Trajectory, outdir) -> None:
    """Directory of profile JSON snapshots plus drift_log.csv and meta.json."""
    os.makedirs(outdir, exist_ok=True)
    for i, (t, snap) in enumerate(zip(traj.times, traj.states)):
        save_profile(snap, os.path.join(outdir, f"snapshot_{i:06d}.json"))
    with open(os.path.join(outdir, "drift_log.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "c", "d_imag", "mean_abs"])
        for row in traj.drift_log:
            wr.writerow([repr(float(v)) for v in row])
    cfg = traj.config
    meta = dict(traj.meta)
    meta["config"] = {
        "L": cfg.L, "n": cfg.n, "dt": cfg.dt, "T": cfg.T,
        "dealias_fraction": cfg.dealias_fraction,
        "snapshot_stride": cfg.snapshot_stride,
        "integrating_factor": cfg.integrating_factor,
    }
    meta["times"] = [float(t) for t in traj.times]
    with open(os.path.join(outdir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)


def load_trajectory(outdir) -> Trajectory:
    with open(os.path.join(outdir, "meta.json")) as fh:
        meta = json.load(fh)
    cfgd = meta.pop("config")
    cfg = EvolutionConfig(**cfgd)
    times = meta.pop("times")
    states = [load_profile(os.path.join(outdir, f"snapshot_{i:06d}.json"))
              for i in range(len(times))]
    drift = []
    with open(os.path.join(outdir, "drift_log.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            drift.append((float(row["t"]), float(row["c"]),
                          float(row["d_imag"]), float(row["mean_abs"])))
    return Trajectory(times=times, states=states, drift_log=drift,
                      config=cfg, meta=meta)
