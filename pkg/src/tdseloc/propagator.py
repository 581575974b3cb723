"""Free and interacting time evolution, Duhamel integrals and observables.

Sign conventions: the equation is ``i u_t - u_xx + V u = 0``, so the free flow
is ``exp(-i t Delta)`` with symbol ``exp(+i t xi^2)``.  A potential step is
multiplication by ``exp(+i dt V)``.

In the "frame" ``psi(s) = exp(i s Delta) u(s)`` the equation reads
``d psi/ds = i exp(i s Delta) V u(s)``.  Many quantities below are computed in
that frame from increments of the stored snapshots.
"""

import json
import logging
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ContractError, DomainError, InsufficientDataError, NumericError
from .potential import PotentialSpec, eval_potential, validate_hypotheses
from .spectral import Field, Grid, Multiplier

log = logging.getLogger(__name__)

_MAGIC = b"TDSELOC1"


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 0.01
    T_hor: float = 200.0
    stride: int = 10
    boundary_warn: float = 1e-6
    scheme: str = "strang"

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.stride < 1:
            raise DomainError(f"snapshot stride must be >= 1, got {self.stride}")
        if self.scheme != "strang":
            raise DomainError("only Strang splitting is implemented")
        if not self.T_hor > 0:
            raise DomainError("T_hor must be positive")
        steps = self.T_hor / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise DomainError(f"T_hor/dt = {steps} is not an integer")
        if round(steps) % self.stride:
            raise DomainError("the step count T_hor/dt must be a multiple of the stride")

    @property
    def n_steps(self) -> int:
        return int(round(self.T_hor / self.dt))

    @property
    def snap_dt(self) -> float:
        return self.dt * self.stride


class Trajectory:
    """Snapshots ``(t_i, u(t_i))`` of one evolution, plus bookkeeping.

    ``states`` is an ``(n_snap, N)`` complex array.  ``forward_acc`` holds the
    fine-step forward Duhamel accumulator at snapshot times when it was
    requested from `evolve`.
    """

    def __init__(self, grid: Grid, times, states, u0, potential: PotentialSpec,
                 config: EvolutionConfig | None = None, forward_acc=None, warnings=None):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states)
        self.u0 = np.asarray(u0, dtype=complex)
        self.potential = potential
        self.config = config
        self.forward_acc = forward_acc
        self.warnings = list(warnings or [])
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ContractError("times and states must have matching length")
        if self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise ContractError("snapshot times must start at 0 and increase strictly")

    def __len__(self):
        return len(self.times)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def snap_dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise InsufficientDataError(f"t = {t} is not a snapshot time")
        return i

    def state(self, t: float) -> np.ndarray:
        return self.states[self.index(t)]

    def frame(self, i: int) -> np.ndarray:
        """psi(t_i) = exp(i t_i Delta) u(t_i)."""
        return free_propagate(self.states[i], -self.times[i], self.grid)

    def V(self, t: float) -> np.ndarray:
        return eval_potential(self.potential, self.grid.x, t)

    def truncated(self, T: float) -> "Trajectory":
        """Prefix view up to snapshot time T, sharing memory with ``self``.

        Evolution is causal, so this equals a fresh run with T_hor = T.
        """
        i = self.index(T)
        cfg = replace(self.config, T_hor=float(self.times[i])) if self.config else None
        acc = self.forward_acc[:i + 1] if self.forward_acc is not None else None
        return Trajectory(self.grid, self.times[:i + 1], self.states[:i + 1], self.u0, self.potential,
                          cfg, acc, [w for w in self.warnings if w["t"] <= self.times[i]])

    def boundary_masses(self) -> np.ndarray:
        return np.array([self.grid.boundary_mass(u) for u in self.states])

    # ------------------------------------------------------------ persistence
    def save(self, path) -> None:
        """Binary snapshot file; see README for the layout."""
        header = {
            "grid": {"L": self.grid.L, "N": self.grid.N},
            "config": asdict(self.config) if self.config else None,
            "potential": self.potential.to_dict(),
            "times": self.times.tolist(),
            "warnings": self.warnings,
            "dtype": "<c8",
        }
        hb = json.dumps(header).encode()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<Q", len(hb)))
            fh.write(hb)
            fh.write(self.u0.astype("<c8").tobytes())
            fh.write(np.ascontiguousarray(self.states).astype("<c8").tobytes())

    @classmethod
    def load(cls, path) -> "Trajectory":
        raw = Path(path).read_bytes()
        if raw[:8] != _MAGIC:
            raise ContractError(f"{path} is not a trajectory file")
        (n,) = struct.unpack("<Q", raw[8:16])
        header = json.loads(raw[16:16 + n].decode())
        grid = Grid(header["grid"]["L"], header["grid"]["N"])
        data = np.frombuffer(raw[16 + n:], dtype="<c8").astype(complex)
        data = data.reshape(-1, grid.N)
        cfg = EvolutionConfig(**header["config"]) if header["config"] else None
        return cls(grid, header["times"], data[1:], data[0],
                   PotentialSpec.from_dict(header["potential"]), cfg, warnings=header["warnings"])


def free_propagate(f, tau: float, grid: Grid | None = None):
    """exp(-i tau Delta) f.  Accepts a `Field` or a position array plus grid."""
    if isinstance(f, Field):
        g = f.grid
        if f.rep == "frequency":
            return Field(g, np.exp(1j * tau * g.xi ** 2) * f.data, "frequency")
        return Field(g, g.multiply(np.exp(1j * tau * g.xi ** 2), f.data))
    if tau == 0:
        return np.array(f, dtype=complex)
    return grid.multiply(np.exp(1j * tau * grid.xi ** 2), f)


def evolve(u0, V: PotentialSpec, cfg: EvolutionConfig, grid: Grid | None = None,
           validate: bool = True, accumulate: bool = False) -> Trajectory:
    """Strang-split evolution of ``u0`` up to ``cfg.T_hor``.

    Each step is kick(dt/2) . free(dt) . kick(dt/2) with the potential taken at
    the step midpoint.  With ``accumulate`` the forward Duhamel integral
    ``int_0^t exp(-i(t-s)Delta) V u ds`` is advanced by the trapezoid rule at
    every step and stored at snapshot times.
    """
    if isinstance(u0, Field):
        grid = u0.grid
        u0 = u0.position_data()
    if grid is None:
        raise ContractError("evolve needs a grid for array input")
    t_val = np.linspace(0, cfg.T_hor, 64)
    if validate:
        rep = validate_hypotheses(V, grid, t_val)
        if not rep.passed:
            raise DomainError(f"potential fails the decay hypotheses: {rep.messages}")
    x = grid.x
    dt = cfg.dt
    kin = np.exp(1j * dt * grid.xi ** 2)
    static = V.is_static
    if static:
        kick = np.exp(0.5j * dt * eval_potential(V, x, 0.0))
        V_static = eval_potential(V, x, 0.0)
    # separable families only need the time amplitude per step
    shape = None
    if V.family == "breathing_sech2" and not static:
        shape = eval_potential(V.__class__(**{**V.to_dict(), "eps": 0.0}), x, 0.0)

    def V_at(t):
        if static:
            return V_static
        if shape is not None:
            return (1 + V.eps * np.cos(V.omega * t)) * shape
        return eval_potential(V, x, t)

    u = np.array(u0, dtype=complex)
    n_snap = cfg.n_steps // cfg.stride + 1
    states = np.empty((n_snap, grid.N), dtype=complex)
    states[0] = u
    acc = None
    if accumulate:
        acc = np.zeros((n_snap, grid.N), dtype=complex)
        I = np.zeros(grid.N, dtype=complex)
        Vu_prev = V_at(0.0) * u
    warnings = []
    for n in range(cfg.n_steps):
        t = n * dt
        if not static:
            kick = np.exp(0.5j * dt * V_at(t + 0.5 * dt))
        u = kick * sfft.ifft(kin * sfft.fft(kick * u))
        if accumulate:
            Vu = V_at(t + dt) * u
            I = sfft.ifft(kin * sfft.fft(I + 0.5 * dt * Vu_prev)) + 0.5 * dt * Vu
            Vu_prev = Vu
        if (n + 1) % cfg.stride == 0:
            k = (n + 1) // cfg.stride
            if not np.all(np.isfinite(u)):
                raise NumericError(f"non-finite state at step {n + 1}")
            states[k] = u
            if accumulate:
                acc[k] = I
    # boundary mass is checked on a thinned set of snapshots to keep this cheap
    for k in range(0, n_snap, max(1, n_snap // 64)):
        bm = grid.boundary_mass(states[k])
        if bm > cfg.boundary_warn:
            warnings.append({"t": float(k * cfg.snap_dt), "boundary_mass": bm})
    bm = grid.boundary_mass(states[-1])
    if bm > cfg.boundary_warn:
        warnings.append({"t": float(cfg.T_hor), "boundary_mass": bm})
    if warnings:
        log.warning("boundary mass above %.1e at %d checked snapshots (max %.2e)",
                    cfg.boundary_warn, len(warnings), max(w["boundary_mass"] for w in warnings))
    times = cfg.snap_dt * np.arange(n_snap)
    return Trajectory(grid, times, states, u0, V, cfg, forward_acc=acc, warnings=warnings)


def duhamel_forward(traj: Trajectory, t: float) -> np.ndarray:
    """int_0^t exp(-i(t-s)Delta) V(s) u(s) ds.

    Uses the fine-step accumulator from `evolve` when present; otherwise runs
    the same recurrence on the snapshot spacing.
    """
    if t > traj.T + 1e-12 or t < 0:
        raise InsufficientDataError(f"t = {t} outside [0, {traj.T}]")
    i = traj.index(t)
    if traj.forward_acc is not None:
        return traj.forward_acc[i]
    g = traj.grid
    h = traj.snap_dt
    kin = np.exp(1j * h * g.xi ** 2)
    I = np.zeros(g.N, dtype=complex)
    Vu_prev = traj.V(0.0) * traj.states[0]
    for k in range(1, i + 1):
        Vu = traj.V(traj.times[k]) * traj.states[k]
        I = sfft.ifft(kin * sfft.fft(I + 0.5 * h * Vu_prev)) + 0.5 * h * Vu
        Vu_prev = Vu
    return I


def channel_cutoff(grid: Grid, s: float, alpha: float) -> np.ndarray:
    """X(s) = F_{<= s^alpha}(|x|) with the time clamped at s >= 1."""
    from .cutoffs import psi
    return psi(np.abs(grid.x) / max(s, 1.0) ** alpha)


@dataclass
class BackwardDuhamel:
    """Pieces of v(t) = horizon + potential + boundary, all in physical space.

    ``potential`` discretizes -i int_t^T e^{-itD} X^c(s) e^{isD} V u ds and
    ``boundary`` discretizes -int_t^T e^{-itD} (d_s X^c)(s) psi(s) ds, with
    X^c = 1 - F_{<=s^alpha}(|x|); ``horizon`` is e^{-itD} X^c(T) psi(T).
    ``tail_bound`` estimates the neglected (T, inf) part of the potential
    integral, C T^{1 - alpha sigma} / (alpha sigma - 1).
    """

    t: float
    potential: np.ndarray
    boundary: np.ndarray
    horizon: np.ndarray
    tail_bound: float


def duhamel_backward(traj: Trajectory, t: float, alpha: float) -> BackwardDuhamel:
    """Backward Duhamel pieces for v(t) by a reverse sweep over the snapshots.

    The quadrature is the discrete product rule
    ``X_{i+1} psi_{i+1} - X_i psi_i = Xbar_i h_i + dX_i psibar_i``, under which
    the three pieces sum to v(t) to roundoff.
    """
    if t > traj.T + 1e-12:
        raise InsufficientDataError(f"t = {t} beyond the horizon {traj.T}")
    g = traj.grid
    n = traj.index(t)
    pot = np.zeros(g.N, dtype=complex)
    bnd = np.zeros(g.N, dtype=complex)
    last = len(traj) - 1
    psi_next = traj.frame(last)
    Xc_next = 1.0 - channel_cutoff(g, traj.times[last], alpha)
    Xc_T, psi_T = Xc_next, psi_next
    for i in range(last - 1, n - 1, -1):
        psi_i = traj.frame(i)
        Xc_i = 1.0 - channel_cutoff(g, traj.times[i], alpha)
        pot += 0.5 * (Xc_i + Xc_next) * (psi_next - psi_i)
        bnd += (Xc_next - Xc_i) * 0.5 * (psi_i + psi_next)
        psi_next, Xc_next = psi_i, Xc_i
    E = lambda f: free_propagate(f, t, g)
    C = validate_hypotheses(traj.potential, g, [0.0, traj.T]).suprema["decay"]
    a_s = alpha * traj.potential.sigma
    tail = C * traj.T ** (1 - a_s) / (a_s - 1) if a_s > 1 else float("inf")
    return BackwardDuhamel(t, -E(pot), -E(bnd), E(Xc_T * psi_T), float(tail))


# ---------------------------------------------------------------- observables

@dataclass(frozen=True)
class OperatorSpec:
    """A product A_1 A_2 ... A_n of elementary factors (A_n acts first).

    Factor kinds: ``("mult", fn)`` multiplies by ``fn(x)`` in position space,
    ``("fourier", Multiplier)`` applies a Fourier multiplier and
    ``("free", tau)`` applies exp(-i tau Delta).
    """

    factors: tuple = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self):
        if not self.factors:
            raise ContractError("operator spec needs at least one factor")
        for kind, val in self.factors:
            if kind not in ("mult", "fourier", "free"):
                raise ContractError(f"unknown factor kind {kind!r}")
            if kind == "fourier" and not isinstance(val, Multiplier):
                raise ContractError("fourier factors must be Multiplier instances")
            if kind == "mult" and not callable(val):
                raise ContractError("mult factors must be callables of x")

    @classmethod
    def identity(cls) -> "OperatorSpec":
        return cls((("fourier", Multiplier.identity()),), "I")

    @classmethod
    def mult(cls, fn: Callable, label: str = "f(x)") -> "OperatorSpec":
        return cls((("mult", fn),), label)

    @classmethod
    def fourier(cls, m: Multiplier, label: str = "m(D)") -> "OperatorSpec":
        return cls((("fourier", m),), label)

    @classmethod
    def free(cls, tau: float) -> "OperatorSpec":
        return cls((("free", float(tau)),), f"exp(-i{tau:g}D)")

    def __matmul__(self, other: "OperatorSpec") -> "OperatorSpec":
        return OperatorSpec(self.factors + other.factors, f"{self.label} {other.label}".strip())

    def apply(self, f: np.ndarray, grid: Grid) -> np.ndarray:
        out = np.asarray(f, dtype=complex)
        cache = {}
        for kind, val in reversed(self.factors):
            if kind == "mult":
                key = id(val)
                if key not in cache:
                    cache[key] = val(grid.x)
                out = cache[key] * out
            elif kind == "fourier":
                out = grid.multiply(val.symbol(grid), out)
            else:
                out = free_propagate(out, val, grid)
        return out


def observable_expectation(B: OperatorSpec, traj: Trajectory, t: float, frame: bool = False) -> float:
    """Re <B w, w> with w = u(t), or w = psi(t) = exp(i t Delta) u(t) if ``frame``."""
    i = traj.index(t)
    w = traj.frame(i) if frame else traj.states[i]
    return float(np.real(traj.grid.inner(B.apply(w, traj.grid), w)))


def jfree_observable(t: float, alpha: float, delta: float) -> OperatorSpec:
    """B(s) = F_{>=s^-delta}(|D|) F_{<=s^alpha}(|x|) F_{>=s^-delta}(|D|)."""
    from .cutoffs import freq_cutoff, psi
    hi = freq_cutoff("geC", max(t, 1.0) ** (-delta))
    X = lambda x: psi(np.abs(x) / max(t, 1.0) ** alpha)
    B = OperatorSpec.fourier(hi) @ OperatorSpec.mult(X) @ OperatorSpec.fourier(hi)
    return OperatorSpec(B.factors, f"B({t:g})")


def outgoing_flux_observable(t: float, alpha: float) -> OperatorSpec:
    """d_x F_{>=t^alpha}(|x|) d_x, the observable behind local smoothing."""
    from .cutoffs import f_ge
    w = lambda x: f_ge(np.abs(x) / max(t, 1.0) ** alpha)
    d = OperatorSpec.fourier(Multiplier.poly(1))
    return OperatorSpec((d @ OperatorSpec.mult(w) @ d).factors, f"dFd({t:g})")
