"""Incoming/outgoing/low projectors and the split v = u_loc + u_rem.

Notation used below, all at time t with E = e^{-itD} the free flow and
psi(s) = e^{isD} u(s) the frame:

    X(s)   = F_{<=s^alpha}(|x|) (time clamped at s >= 1), X^c = 1 - X
    v      = E X^c(t) psi(t)
    Hf     = psi(t) - u0                  forward Duhamel integral (frame)
    Hinf   = u_plus - psi(t)              backward integral closed by u_plus
    HX     = sum_{i>=n} Xbar_i h_i + (u_plus - X_T psi_T),   h_i = psi_{i+1} - psi_i
    Bc     = sum_{i>=n} (X^c_{i+1} - X^c_i) psibar_i

With the exact partition of unity in space and the exact in/out/low split in
frequency these combine into u_loc + u_rem = v with no discretization error;
see `_layer_one` for the assignment of terms.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft as sfft

from .channel import ChannelParams, high_freq_symbol, space_cutoff
from .cutoffs import bump, f_ge, psi
from .errors import DependencyError, DomainError, InsufficientDataError
from .propagator import Trajectory, channel_cutoff, free_propagate
from .spectral import Field, Grid


@dataclass(frozen=True)
class MicrolocParams:
    """theta in (0,1); alpha < rho < 1/2 with alpha taken from ``channel``."""

    theta: float = 0.8
    rho: float = 0.45
    n: int = 1
    eps_weak: float = 0.1
    channel: ChannelParams = ChannelParams()

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise DomainError(f"theta must lie in (0, 1), got {self.theta}")
        a = self.channel.alpha
        if not a < self.rho < 0.5:
            raise DomainError(f"rho must lie in (alpha, 1/2) = ({a:g}, 0.5), got {self.rho}")
        if self.n < 1:
            raise DomainError(f"iteration depth n must be >= 1, got {self.n}")
        if not self.eps_weak > 0:
            raise DomainError(f"eps_weak must be positive, got {self.eps_weak}")

    @property
    def alpha(self) -> float:
        return self.channel.alpha

    @property
    def delta(self) -> float:
        return self.channel.delta

    def to_dict(self) -> dict:
        return asdict(self)


def compute_J(t: float, params: MicrolocParams) -> int:
    """Integer J with 2^{J-1} < t^rho <= 2^J, clamped at 0 for t <= 1."""
    if t <= 1:
        return 0
    return max(0, int(math.ceil(params.rho * math.log2(t) - 1e-12)))


# ---------------------------------------------------------------- projectors

def _signed_high(grid: Grid, c: float):
    # F_{>=c}(+xi), F_{>=c}(-xi); the Nyquist point belongs to neither
    mp = f_ge(grid.xi / c)
    mm = f_ge(-grid.xi / c)
    mp[grid.nyquist_mask] = 0.0
    mm[grid.nyquist_mask] = 0.0
    return mp, mm


def _spatial(grid: Grid, j: int, tail: bool):
    x = grid.x
    if tail:
        return f_ge(x / 2.0 ** j), f_ge(-x / 2.0 ** j)
    return bump(x / 2.0 ** j), bump(-x / 2.0 ** j)


def _project_all(grid: Grid, fh: np.ndarray, j: int, theta: float, tail: bool = False):
    """(P^in f, P^out f, P^low f) at shell j from the spectrum ``fh``."""
    if j == 0 and not tail:
        b0 = psi(np.abs(grid.x))
        m = f_ge(np.abs(grid.xi))
        hi = sfft.ifft(m * fh)
        lo = sfft.ifft((1 - m) * fh)
        return b0 * hi, np.zeros(grid.N, dtype=complex), b0 * lo
    mp, mm = _signed_high(grid, 2.0 ** (-theta * j))
    ap, am = _spatial(grid, j, tail)
    fp = sfft.ifft(mp * fh)
    fm = sfft.ifft(mm * fh)
    fl = sfft.ifft((1 - mp - mm) * fh)
    return ap * fp + am * fm, ap * fm + am * fp, (ap + am) * fl


def _project_one(grid: Grid, fh: np.ndarray, j: int, theta: float, kind: int):
    """One entry of `_project_all` at a non-tail shell, at a third of the cost."""
    if j == 0:
        if kind == 1:
            return np.zeros(grid.N, dtype=complex)
        m = f_ge(np.abs(grid.xi))
        return psi(np.abs(grid.x)) * sfft.ifft((m if kind == 0 else 1 - m) * fh)
    mp, mm = _signed_high(grid, 2.0 ** (-theta * j))
    ap, am = _spatial(grid, j, False)
    if kind == 2:
        return (ap + am) * sfft.ifft((1 - mp - mm) * fh)
    fp = sfft.ifft(mp * fh)
    fm = sfft.ifft(mm * fh)
    return ap * fp + am * fm if kind == 0 else ap * fm + am * fp


_KINDS = {"in": 0, "out": 1, "low": 2}


def _kind_index(kind: str) -> int:
    if kind not in _KINDS:
        raise DomainError(f"projector kind must be one of {tuple(_KINDS)}, got {kind!r}")
    return _KINDS[kind]


def _field_data(f, grid):
    if isinstance(f, Field):
        return f.grid, f.position_data()
    if grid is None:
        raise DomainError("a grid is required for raw arrays")
    return grid, np.asarray(f, dtype=complex)


def proj(kind: str, j: int, params: MicrolocParams, f, grid: Grid | None = None):
    """P^kind_j f.

    j >= 1: spatial factors F_{2^j}(+-x), frequency factors F_{>=2^{-theta j}}(+-D);
    j = 0: P^in_0 = F_{<=1}(|x|) F_{>=1}(|D|), P^out_0 = 0.  The low kind is
    the exact complement, so in + out + low = F_{2^j}(|x|) (F_{<=1}(|x|) at j = 0).
    """
    if j < 0:
        raise DomainError("shell index j must be >= 0")
    k = _kind_index(kind)
    g, a = _field_data(f, grid)
    out = _project_all(g, sfft.fft(a), j, params.theta)[k]
    return Field(g, out) if isinstance(f, Field) else out


def tail_resolved(grid: Grid, J: int) -> bool:
    """Whether F_{>=2^J}(|x|) is nonzero somewhere on the box."""
    return 2.0 ** (J - 1) < grid.L


def proj_tail(kind: str, J: int, params: MicrolocParams, f, grid: Grid | None = None):
    """P^kind_{>=J} f with spatial factors F_{>=2^J}(+-x) at frequency scale 2^{-theta J}.

    Returns ``(result, resolved)``; ``resolved`` is False when the spatial
    factor vanishes on the whole box, in which case the result is zero.
    """
    if J < 1:
        raise DomainError("proj_tail needs J >= 1")
    k = _kind_index(kind)
    g, a = _field_data(f, grid)
    ok = tail_resolved(g, J)
    if ok:
        out = _project_all(g, sfft.fft(a), J, params.theta, tail=True)[k]
    else:
        out = np.zeros(g.N, dtype=complex)
    return (Field(g, out) if isinstance(f, Field) else out), ok


def project_truncated(grid: Grid, f: np.ndarray, J: int, theta: float):
    """Sums over j <= J of (P^in_j, P^out_j, P^low_j) f plus the tail triple at J+1."""
    fh = sfft.fft(f)
    loc = [np.zeros(grid.N, dtype=complex) for _ in range(3)]
    for j in range(J + 1):
        for k, p in enumerate(_project_all(grid, fh, j, theta)):
            loc[k] += p
    tail = _project_all(grid, fh, J + 1, theta, tail=True)
    return loc, list(tail)


# ---------------------------------------------------------------- sweep cache

def _frames_iter(traj: Trajectory):
    g = traj.grid
    for i, t in enumerate(traj.times):
        yield i, t, free_propagate(traj.states[i], -t, g)


@dataclass
class SweepCache:
    """Accumulators from one forward pass, stored at the requested indices."""

    params: MicrolocParams
    u_plus: np.ndarray
    indices: list
    PX: dict = field(default_factory=dict)
    PB: dict = field(default_factory=dict)
    G: dict = field(default_factory=dict)
    totX: np.ndarray | None = None
    totB: np.ndarray | None = None
    G_T: np.ndarray | None = None
    depth: int = 1


def cook_uplus(traj: Trajectory, channel: ChannelParams) -> np.ndarray:
    """u_plus = Omega(T_hor) in the frame."""
    g, T = traj.grid, traj.T
    spec = sfft.fft(traj.states[-1]) * np.exp(-1j * T * g.xi ** 2)
    return space_cutoff(g, T, channel.alpha) * sfft.ifft(high_freq_symbol(g, T, channel.delta) * spec)


def build_cache(traj: Trajectory, params: MicrolocParams, times, u_plus=None, depth: int | None = None) -> SweepCache:
    """Single forward pass over all snapshots.

    Stores prefix sums of Xbar h and dX^c psibar at the requested times and,
    for depth 2, the trapezoid integral G(t) = int_0^t e^{isD} V u_loc,1 ds
    taken over every snapshot.
    """
    depth = params.n if depth is None else depth
    if depth > 2:
        raise DomainError("iterates beyond n = 2 are not implemented")
    g = traj.grid
    if u_plus is None:
        u_plus = cook_uplus(traj, params.channel)
    idx = sorted({traj.index(t) for t in times})
    want = set(idx)
    c = SweepCache(params, u_plus, idx, depth=depth)
    PX = np.zeros(g.N, dtype=complex)
    PB = np.zeros(g.N, dtype=complex)
    G = np.zeros(g.N, dtype=complex)
    a = params.alpha
    prev = None
    src_prev = None
    h = traj.snap_dt
    for i, t, ps in _frames_iter(traj):
        X = channel_cutoff(g, t, a)
        if prev is not None:
            X0, ps0 = prev
            PX += 0.5 * (X0 + X) * (ps - ps0)
            PB += (X0 - X) * 0.5 * (ps0 + ps)
        if depth >= 2:
            # e^{isD} V u_loc,1(s) in the frame
            uloc = _uloc1(traj, i, ps, X, u_plus, params)
            src = free_propagate(traj.V(t) * uloc, -t, g)
            if src_prev is not None:
                G += 0.5 * h * (src_prev + src)
            src_prev = src
        if i in want:
            c.PX[i] = PX.copy()
            c.PB[i] = PB.copy()
            if depth >= 2:
                c.G[i] = G.copy()
        prev = (X, ps)
    XT, psT = prev
    c.totX = PX + (u_plus - XT * psT)
    c.totB = PB
    if depth >= 2:
        c.G_T = G
    return c


def _uloc1(traj, i, ps, X, u_plus, params):
    g, t = traj.grid, traj.times[i]
    J = compute_J(t, params)
    E = lambda f: free_propagate(f, t, g)
    v = E((1 - X) * ps)
    out = np.zeros(g.N, dtype=complex)
    fh_v = sfft.fft(v)
    fh_f = sfft.fft(E(ps - traj.u0))
    fh_b = sfft.fft(E(u_plus - ps))
    for j in range(J + 1):
        out += _project_one(g, fh_v, j, params.theta, 2)
        out += _project_one(g, fh_f, j, params.theta, 0)
        out -= _project_one(g, fh_b, j, params.theta, 1)
    return out


# ---------------------------------------------------------------- assembly

@dataclass
class Assembly:
    t: float
    J: int
    v: np.ndarray
    u_loc: np.ndarray
    u_rem: np.ndarray
    components: dict


def _layer_one(traj: Trajectory, i: int, c: SweepCache):
    g, t = traj.grid, traj.times[i]
    th = c.params.theta
    ps = traj.frame(i)
    X = channel_cutoff(g, t, c.params.alpha)
    Xc = 1 - X
    J = compute_J(t, c.params)
    E = lambda f: free_propagate(f, t, g)
    Hf = ps - traj.u0
    Hinf = c.u_plus - ps
    HX = c.totX - c.PX[i]
    Bc = c.totB - c.PB[i]
    v = E(Xc * ps)
    P = lambda f: project_truncated(g, f, J, th)
    lv, tv = P(v)
    la, ta = P(E(Hf))
    lb, tb = P(E(Hinf))
    lc, tc = P(E(X * Hf))
    ld, td = P(E(HX))
    le, te = P(E(Xc * traj.u0))
    lg, tg = P(E(Bc))
    comps = {
        "nr_initial": le[0] + te[0],
        "nr_boundary": -(lg[1] + tg[1]),
        "rem_j_fwd": -lc[0],
        "rem_j_bwd": ld[1],
        "ge_low": tv[2],
        "ge_fwd_free": ta[0],
        "ge_fwd_channel": -tc[0],
        "ge_bwd_free": -tb[1],
        "ge_bwd_channel": td[1],
    }
    u_loc = lv[2] + la[0] - lb[1]
    return Assembly(float(t), J, v, u_loc, sum(comps.values()), comps), (lv, la, lb)


def _layer_two(traj: Trajectory, i: int, c: SweepCache, first: Assembly, parts):
    if c.depth < 2 or i not in c.G:
        raise DependencyError("the n = 1 layer integral is missing; build the cache with depth 2")
    g, t = traj.grid, first.t
    E = lambda f: free_propagate(f, t, g)
    lv, la, lb = parts
    loc, _ = project_truncated(g, E(c.G[i]), first.J, c.params.theta)
    locb, _ = project_truncated(g, E(c.G_T - c.G[i]), first.J, c.params.theta)
    fwd2 = 1j * loc[0]
    bwd2 = -1j * locb[1]
    u_loc = lv[2] + fwd2 + bwd2
    comps = dict(first.components)
    # swapping the first-layer Duhamel pieces for the iterated ones
    comps["iterate_fwd"] = la[0] - fwd2
    comps["iterate_bwd"] = -lb[1] - bwd2
    return Assembly(t, first.J, first.v, u_loc, sum(comps.values()), comps)


def assemble(traj: Trajectory, t: float, params: MicrolocParams, n: int = 1, cache: SweepCache | None = None) -> Assembly:
    """u_loc,n and u_rem,n at snapshot time t with the component map."""
    if n not in (1, 2):
        raise DomainError("n must be 1 or 2")
    i = traj.index(t)
    if cache is None:
        cache = build_cache(traj, params, [t], depth=n)
    if i not in cache.PX:
        raise InsufficientDataError(f"t = {t} was not stored in the sweep cache")
    if n > cache.depth:
        raise DependencyError(f"cache holds depth {cache.depth}, n = {n} requested")
    first, parts = _layer_one(traj, i, cache)
    return first if n == 1 else _layer_two(traj, i, cache, first, parts)


def projected_duhamel(j: int, direction: str, traj: Trajectory, t: float, params: MicrolocParams,
                      source=None, u_plus=None) -> np.ndarray:
    """i P^in_j int_0^t e^{-i(t-s)D} V phi ds (fwd) or -i P^out_j int_t^T ... ds (bwd).

    With ``source=None`` phi = u and the integrals come from frame increments
    (psi(t) - u0 forward, u_plus - psi(t) backward, u_plus defaulting to
    psi(T)); otherwise ``source`` is an (n_snap, N) array of phi at the
    snapshot times, integrated by the trapezoid rule.
    """
    if direction not in ("fwd", "bwd"):
        raise DomainError("direction must be 'fwd' or 'bwd'")
    g = traj.grid
    i = traj.index(t)
    if t > traj.T + 1e-12:
        raise InsufficientDataError("t beyond the stored horizon")
    if direction == "bwd" and j == 0:
        return np.zeros(g.N, dtype=complex)
    if source is None:
        ps = traj.frame(i)
        if direction == "fwd":
            I = ps - traj.u0
        else:
            I = (traj.frame(len(traj) - 1) if u_plus is None else u_plus) - ps
        # i * (-i) * I: the frame increments already carry the factor i
        f = free_propagate(I, t, g)
        sgn = 1.0 if direction == "fwd" else -1.0
    else:
        source = np.asarray(source)
        if source.shape != traj.states.shape:
            raise InsufficientDataError("source must cover every snapshot")
        rng = range(0, i + 1) if direction == "fwd" else range(i, len(traj))
        I = np.zeros(g.N, dtype=complex)
        prev = None
        for k in rng:
            cur = free_propagate(traj.V(traj.times[k]) * source[k], -traj.times[k], g)
            if prev is not None:
                I += 0.5 * traj.snap_dt * (prev + cur)
            prev = cur
        f = free_propagate(I, t, g)
        sgn = 1j if direction == "fwd" else -1j
    k = 0 if direction == "fwd" else 1
    return sgn * _project_all(g, sfft.fft(f), j, params.theta)[k]


# ---------------------------------------------------------------- diagnostics

@dataclass
class DecompositionReport:
    params: MicrolocParams
    n: int
    times: list = field(default_factory=list)
    uloc_w: list = field(default_factory=list)        # per time, norms for k = 0..n
    urem_h1dot: list = field(default_factory=list)
    consistency: list = field(default_factory=list)
    uwb_tail: list = field(default_factory=list)
    cook_increment: list = field(default_factory=list)
    components: list = field(default_factory=list)    # per time, name -> Hdot^1 norm
    compact_residual: list = field(default_factory=list)
    layers: dict = field(default_factory=dict)         # n -> per-time dict for each computed layer
    tolerance: float = 1e-8

    def column_names(self):
        return (["t"] + [f"uloc_w_norm_k{k}" for k in range(self.n + 1)]
                + ["urem_h1dot", "consistency_h1dot", "uwb_tail_l2", "cook_increment"])

    def rows(self):
        for i, t in enumerate(self.times):
            yield [t, *self.uloc_w[i], self.urem_h1dot[i], self.consistency[i],
                   self.uwb_tail[i], self.cook_increment[i]]

    def series(self, name: str, layer: int | None = None) -> np.ndarray:
        src = self.layers[layer] if layer is not None else None
        if src is not None:
            return np.array(src[name])
        return np.array(getattr(self, name))

    @property
    def consistent(self) -> bool:
        return bool(np.all(np.array(self.consistency) <= self.tolerance))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.column_names())
            for r in self.rows():
                w.writerow([repr(float(v)) for v in r])

    def to_json(self) -> dict:
        return {"params": self.params.to_dict(), "n": self.n, "tolerance": self.tolerance,
                "times": self.times, "layers": self.layers}


def _hdot1(g: Grid, f) -> float:
    return g.hdot1(f)


def _weighted(g: Grid, f, k: int, theta: float) -> float:
    return g.norm(g.japanese(k * theta) * g.deriv(f, k))


def diagnostics(traj: Trajectory, params: MicrolocParams, n: int, times, u_plus=None,
                window: float = 20.0, tolerance: float = 1e-8) -> DecompositionReport:
    """Norm time series of every layer up to n at the requested times.

    The top-level columns refer to layer n; ``layers`` keeps all of them.
    ``cook_increment`` is ||Omega(t) - Omega(t/2)||_{H^1} and
    ``compact_residual`` is ||d_x (u - u_lin - u_loc,n)||_{L^2(|x| <= window)}
    with u_lin = e^{-itD} u_plus.
    """
    times = [float(t) for t in times]
    for t in times:
        if t <= 1:
            raise DomainError("report times must exceed 1")
    g = traj.grid
    if u_plus is None:
        u_plus = cook_uplus(traj, params.channel)
    cache = build_cache(traj, params, times, u_plus=u_plus, depth=n)
    rep = DecompositionReport(params, n, tolerance=tolerance)
    rep.layers = {m: {"uloc_w": [], "urem_h1dot": [], "consistency": [], "components": []}
                  for m in range(1, n + 1)}
    th = params.theta
    from .channel import omega_at
    inner = np.abs(g.x) <= window
    for t in times:
        i = traj.index(t)
        first, parts = _layer_one(traj, i, cache)
        layers = {1: first}
        if n >= 2:
            layers[2] = _layer_two(traj, i, cache, first, parts)
        for m, a in layers.items():
            L = rep.layers[m]
            dv = _hdot1(g, a.v)
            L["uloc_w"].append([_weighted(g, a.u_loc, k, th) for k in range(m + 1)])
            L["urem_h1dot"].append(_hdot1(g, a.u_rem))
            L["consistency"].append(_hdot1(g, a.v - a.u_loc - a.u_rem) / dv if dv > 0 else 0.0)
            L["components"].append({k: _hdot1(g, c) for k, c in a.components.items()})
        top = layers[n]
        rep.times.append(t)
        rep.uloc_w.append(rep.layers[n]["uloc_w"][-1])
        rep.urem_h1dot.append(rep.layers[n]["urem_h1dot"][-1])
        rep.consistency.append(rep.layers[n]["consistency"][-1])
        rep.components.append(rep.layers[n]["components"][-1])
        ut = traj.states[i]
        wb = ut - free_propagate(omega_at(params.channel, traj, i), t, g)
        rmask = np.abs(g.x) >= t ** (0.5 + params.eps_weak)
        rep.uwb_tail.append(float(np.sqrt(np.sum(np.abs(wb[rmask]) ** 2) * g.dx)))
        j2 = traj.index(t / 2)
        rep.cook_increment.append(g.h1(omega_at(params.channel, traj, i) - omega_at(params.channel, traj, j2)))
        lin = free_propagate(u_plus, t, g)
        d = g.deriv(ut - lin - top.u_loc)
        rep.compact_residual.append(float(np.sqrt(np.sum(np.abs(d[inner]) ** 2) * g.dx)))
    for m in rep.layers:
        rep.layers[m]["times"] = list(times)
    return rep


def report_manifest(rep: DecompositionReport) -> str:
    return json.dumps(rep.to_json(), indent=2, default=float)
