"""Free-channel projection, Cook series for the channel wave operator and the
weakly bound split.

``J_free(t) = e^{-itD} F_{<=t^alpha}(|x|) e^{itD} F_{>=t^-delta}(|D|)`` where
``e^{-itD}`` is the free flow.  In the frame psi(t) = e^{itD} u(t) the Cook
approximants are ``Omega(t) = F_{<=t^alpha}(|x|) F_{>=t^-delta}(|D|) psi(t)``.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .cutoffs import f_ge, freq_symbol, psi
from .errors import DomainError, InsufficientDataError
from .propagator import Trajectory, free_propagate
from .spectral import Field, Grid
from .stats import loglog_fit


@dataclass(frozen=True)
class ChannelParams:
    alpha: float = 0.4
    delta: float = 0.2

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        hi = min(0.5, 1 - self.alpha)
        if not 0 < self.delta < hi:
            raise DomainError(f"delta must lie in (0, {hi:g}) = (0, min(1/2, 1 - alpha)), got {self.delta}")


def space_cutoff(grid: Grid, t: float, alpha: float) -> np.ndarray:
    return psi(np.abs(grid.x) / t ** alpha)


def high_freq_symbol(grid: Grid, t: float, delta: float) -> np.ndarray:
    """F_{>=t^-delta}(|xi|)."""
    return freq_symbol(grid, "geC", t ** (-delta))


def _as_array(f, grid):
    if isinstance(f, Field):
        return f.grid, f.position_data()
    if grid is None:
        raise DomainError("a grid is required for raw arrays")
    return grid, np.asarray(f, dtype=complex)


def apply_Jfree(params: ChannelParams, t: float, f, grid: Grid | None = None):
    """J_free(t) f, returned in the same type as ``f``."""
    if not t > 0:
        raise DomainError(f"J_free needs t > 0, got {t}")
    g, arr = _as_array(f, grid)
    w = g.multiply(high_freq_symbol(g, t, params.delta), arr)
    w = free_propagate(w, -t, g)
    w = space_cutoff(g, t, params.alpha) * w
    w = free_propagate(w, t, g)
    return Field(g, w) if isinstance(f, Field) else w


def omega_at(params: ChannelParams, traj: Trajectory, i: int) -> np.ndarray:
    """Cook approximant e^{itD} J_free(t) u(t) at snapshot index i."""
    g, t = traj.grid, traj.times[i]
    spec = sfft.fft(traj.states[i]) * np.exp(-1j * t * g.xi ** 2)
    return space_cutoff(g, t, params.alpha) * sfft.ifft(high_freq_symbol(g, t, params.delta) * spec)


def cook_integrands(params: ChannelParams, traj: Trajectory, i: int):
    """H^1 norms of the two parts of d Omega/ds at snapshot index i.

    potential term    F_{<=s^a}(|x|) F_{>=s^-d}(|D|) e^{isD} V u(s)
    restriction term  (d_s F_{<=s^a}(|x|)) F_{>=s^-d}(|D|) psi
                      + F_{<=s^a}(|x|) (d_s F_{>=s^-d}(|D|)) psi
    Scale derivatives are taken analytically.
    """
    g, s = traj.grid, traj.times[i]
    a, d = params.alpha, params.delta
    ax, axi = np.abs(g.x), np.abs(g.xi)
    X = space_cutoff(g, s, a)
    hi = high_freq_symbol(g, s, d)
    ph = np.exp(-1j * s * g.xi ** 2)
    u = traj.states[i]
    Vu_hat = sfft.fft(traj.V(s) * u) * ph
    pot = X * sfft.ifft(hi * Vu_hat)
    psi_hat = sfft.fft(u) * ph
    dX = psi(ax / s ** a, 1) * (-a * ax / s ** (1 + a))
    # d/ds f_ge(|xi| s^d) = f_ge'(|xi| s^d) d |xi| s^{d-1}
    dhi = f_ge(axi * s ** d, 1) * d * axi * s ** (d - 1)
    res = dX * sfft.ifft(hi * psi_hat) + X * sfft.ifft(dhi * psi_hat)
    return g.h1(pot), g.h1(res)


@dataclass
class CookSeries:
    checkpoints: np.ndarray
    omegas: list
    increments: np.ndarray          # increments[k] = ||Omega(t_k) - Omega(t_{k-1})||_{H^1}, nan at k=0
    potential_norms: np.ndarray     # at checkpoints
    restriction_norms: np.ndarray
    integrand_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    integrand_potential: np.ndarray = field(default_factory=lambda: np.zeros(0))
    integrand_restriction: np.ndarray = field(default_factory=lambda: np.zeros(0))
    params: ChannelParams = ChannelParams()

    @property
    def u_plus(self) -> np.ndarray:
        return self.omegas[-1]

    @property
    def u_plus_error(self) -> float:
        return float(self.increments[-1])

    def increment_at(self, t: float) -> float:
        k = int(np.argmin(np.abs(self.checkpoints - t)))
        if abs(self.checkpoints[k] - t) > 1e-9:
            raise InsufficientDataError(f"{t} is not a checkpoint")
        return float(self.increments[k])

    def potential_slope(self, t_min: float = 16.0, t_max: float | None = None):
        """Log-log fit of the potential-term norm on [t_min, t_max]."""
        t = self.integrand_times
        y = self.integrand_potential
        m = (t >= t_min) & (t <= (t_max if t_max is not None else t.max())) & (y > 0)
        return loglog_fit(t[m], y[m])

    def rows(self):
        for k, t in enumerate(self.checkpoints):
            yield {"t": float(t), "increment_H1": float(self.increments[k]),
                   "potential_term_norm": float(self.potential_norms[k]),
                   "restriction_term_norm": float(self.restriction_norms[k])}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, ["t", "increment_H1", "potential_term_norm", "restriction_term_norm"])
            w.writeheader()
            for r in self.rows():
                w.writerow({k: repr(v) for k, v in r.items()})


def dyadic_checkpoints(T: float, t_min: float = 2.0) -> list:
    out, t = [], t_min
    while t <= T * (1 + 1e-12):
        out.append(t)
        t *= 2
    return out


def cook_wave_operator(params: ChannelParams, traj: Trajectory, checkpoints=None,
                       integrand_every: int = 10) -> CookSeries:
    """Cook series on dyadic checkpoints, closed by the final horizon.

    u_plus := Omega(T_hor); when T_hor is not dyadic it is appended as the
    last checkpoint.  Integrand norms are sampled every ``integrand_every``
    snapshots.
    """
    if checkpoints is None:
        checkpoints = dyadic_checkpoints(traj.T)
        if abs(checkpoints[-1] - traj.T) > 1e-9:
            checkpoints.append(traj.T)
    checkpoints = [float(t) for t in checkpoints]
    if len(checkpoints) < 4:
        raise InsufficientDataError("trajectory too short for four dyadic checkpoints")
    g = traj.grid
    omegas, pots, ress = [], [], []
    for t in checkpoints:
        i = traj.index(t)
        omegas.append(omega_at(params, traj, i))
        p, r = cook_integrands(params, traj, i)
        pots.append(p)
        ress.append(r)
    inc = np.full(len(checkpoints), np.nan)
    for k in range(1, len(checkpoints)):
        inc[k] = g.h1(omegas[k] - omegas[k - 1])
    idx = [i for i in range(0, len(traj), integrand_every) if traj.times[i] >= 1.0]
    it = np.array([traj.times[i] for i in idx])
    vals = np.array([cook_integrands(params, traj, i) for i in idx]).reshape(-1, 2)
    return CookSeries(np.array(checkpoints), omegas, inc, np.array(pots), np.array(ress),
                      it, vals[:, 0], vals[:, 1], params)


@dataclass
class WeakSplit:
    u_wb: np.ndarray
    u_low: np.ndarray
    v: np.ndarray


def split_weakly_bound(params: ChannelParams, traj: Trajectory, t: float) -> WeakSplit:
    """u_wb = (I - J_free) u = u_low + v at a snapshot time t > 1.

    u_low = e^{-itD} X e^{itD} (1 - F_{>=t^-delta}(|D|)) u and
    v = e^{-itD} (1 - X) e^{itD} u with X = F_{<=t^alpha}(|x|).  The
    low-frequency factor sits on the right, as it does inside J_free, and the
    complements are exact, so u_wb = u_low + v holds to roundoff.
    """
    if not t > 1:
        raise DomainError(f"the weakly bound split needs t > 1, got {t}")
    g = traj.grid
    i = traj.index(t)
    u = traj.states[i]
    X = space_cutoff(g, t, params.alpha)
    lo = 1.0 - high_freq_symbol(g, t, params.delta)
    u_low = free_propagate(X * free_propagate(g.multiply(lo, u), -t, g), t, g)
    v = free_propagate((1 - X) * free_propagate(u, -t, g), t, g)
    u_wb = u - apply_Jfree(params, t, u, g)
    return WeakSplit(u_wb, u_low, v)
