"""Pass/fail evaluation of the experiment criteria, shared by the CLI and tests."""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import lemmalab as lab
from .channel import omega_at
from .cutoffs import bump, eval_cutoff
from .decomposition import MicrolocParams, _project_all
from .potential import PotentialSpec
from .propagator import EvolutionConfig, evolve, free_propagate
from .spectral import Grid

DYADIC = (16.0, 32.0, 64.0, 128.0)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: value={_fmt(self.value)} threshold={_fmt(self.threshold)}"

    def to_dict(self) -> dict:
        return lab._jsonable(asdict(self))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# ---------------------------------------------------------------- 1. exact algebra

def exact_algebra(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    x = 10.0 ** rng.uniform(-3, 3, 1000)
    js = np.arange(-20, 21)
    pou = np.abs(sum(bump(x / 2.0 ** j) for j in js) - 1).max()
    trip = lambda a, b, c: np.abs(eval_cutoff(a, 1.0, 0, x) + eval_cutoff(b, 1.0, 0, x) + eval_cutoff(c, 1.0, 0, x) - 1).max()
    d1 = trip("ltC", "C", "gtC")
    d2 = trip("llC", "simC", "ggC")
    dev = float(max(pou, d1, d2))
    sym = lab.check_symmetrization(16, 100, seed=seed)
    g = Grid(200.0, 4096)
    m = MicrolocParams()
    worst = 0.0
    for j in (2, 4, 6):
        f = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
        pin, pout, plow = _project_all(g, np.fft.fft(f), j, m.theta)
        ref = bump(np.abs(g.x) / 2.0 ** j) * f
        worst = max(worst, float(np.linalg.norm(pin + pout + plow - ref) / np.linalg.norm(f)))
    return [
        Check("partition of unity deviation", dev <= 1e-12, dev, 1e-12),
        Check("symmetrization residual", sym["max_residual"] <= 1e-12, sym["max_residual"], 1e-12),
        Check("projector complementarity", worst <= 1e-12, worst, 1e-12),
    ]


# ---------------------------------------------------------------- 2. propagator fidelity

def propagator_fidelity() -> list:
    g = Grid(200.0, 4096)
    x = g.x
    gauss = np.exp(-x ** 2 / 2).astype(complex)
    tr = evolve(gauss, PotentialSpec("zero"), EvolutionConfig(dt=1e-3, T_hor=1.0, stride=1000), g)
    exact = (1 - 2j) ** -0.5 * np.exp(-x ** 2 / (2 * (1 - 2j)))
    free_err = g.norm(tr.states[-1] - exact) / g.norm(exact)
    V = PotentialSpec("breathing_sech2")
    u0 = (1 / np.cosh(x)).astype(complex)
    u0 /= g.norm(u0)
    tr = evolve(u0, V, EvolutionConfig(dt=1e-3, T_hor=10.0, stride=10_000), g)
    drift = abs(g.norm(tr.states[-1]) - 1.0)
    # Poschl-Teller: -2 sech^2 has the single bound state sech with energy -1
    b = u0
    tr = evolve(b, PotentialSpec("static_sech2", V0=2.0), EvolutionConfig(dt=1e-3, T_hor=10.0, stride=10_000), g)
    ov = abs(g.inner(tr.states[-1], b))
    phase = np.angle(g.inner(tr.states[-1], b))
    run = lambda dt: evolve(u0, V, EvolutionConfig(dt=dt, T_hor=1.0, stride=int(round(1 / dt))), g).states[-1]
    ref = run(1e-4)
    order = float(np.log2(g.norm(run(4e-3) - ref) / g.norm(run(2e-3) - ref)))
    return [
        Check("unitarity drift over 1e4 steps", drift <= 1e-10, drift, 1e-10),
        Check("Strang splitting order", abs(order - 2) <= 0.1, order, "2 +- 0.1"),
        Check("free Gaussian vs closed form (relative)", free_err <= 1e-9, free_err, 1e-9),
        Check("Poschl-Teller eigenstate overlap at t=10", ov >= 1 - 1e-6, ov, 1 - 1e-6, {"phase": float(phase)}),
    ]


# ---------------------------------------------------------------- 3, 4. lemma lab

def space_frequency(res: dict | None = None) -> list:
    """Criterion 3 from a `lemmalab.run_all` result, or freshly computed."""
    r = res["space_freq_decay"] if res is not None else lab._jsonable(lab.check_space_freq_decay())
    m, w = r["main"], r["weighted"]
    return [
        Check("space-frequency decay slope", m["passed"], m["slope"], m["threshold"], {"norms": m["norms"]}),
        Check("weighted variant slope", w["passed"], w["slope"], w["threshold"], {"norms": w["norms"]}),
    ]


def lemma_sweeps(res: dict | None = None) -> list:
    """Criterion 4 from a `lemmalab.run_all` result, or freshly computed."""
    res = res or {
        "kernel_decay_m0": lab._jsonable(lab.check_kernel_decay(m=0)),
        "kernel_decay_m1": lab._jsonable(lab.check_kernel_decay(m=1)),
        "support_separation": lab._jsonable(lab.check_support_separation()),
        "commutator_scaling": lab._jsonable(lab.check_commutator_scaling()),
        "commutator_scaling_half": lab._jsonable(lab.check_commutator_scaling(alpha=0.5, rho=0.5)),
    }
    out = []
    for key in ("kernel_decay_m0", "kernel_decay_m1"):
        r = res[key]
        slopes = [f["slope"] for f in r["by_k"].values()]
        ratios = [f["extra"]["max_ratio"] for f in r["by_k"].values()]
        out.append(Check(f"kernel decay m={r['m']}: slopes per k", r["passed"], slopes,
                         f"<= {-(r['N'] - 0.5) + 0.2:g} with bound ratio <= 10 (ratios {_fmt(ratios)})"))
    s = res["support_separation"]
    ratios = [st["ratio"] for st in s["steps"]]
    out.append(Check("support separation: norm ratio per step", s["passed"], ratios, 2.0 ** -s["N_ibp"]))
    for key in ("commutator_scaling", "commutator_scaling_half"):
        if key not in res:
            continue
        c = res[key]
        out.append(Check(f"commutator alpha={c['alpha']:g}: k-slope, j-slope, max ratio to bound", c["passed"],
                         [c["k_fit"]["slope"], c["j_fit"]["slope"], c["max_ratio_to_bound"]],
                         [c["k_fit"]["threshold"], c["j_fit"]["threshold"], 10.0]))
    return out


def lemma_other(res: dict) -> list:
    """Remaining lemma-lab checks, reported by the CLI but outside criteria 3 and 4."""
    out = []
    for key in ("weight_inequalities", "weight_inequalities_japanese"):
        if key in res:
            r = res[key]
            out.append(Check(f"weight inequality ({'japanese' if r['japanese'] else 'plain'}) max ratio",
                             bool(r["passed"]), r["max_ratio"], "bounded"))
    if "inout_gain" in res:
        r = res["inout_gain"]
        rel = [s["rel_change"] for s in r["series"].values()]
        out.append(Check("in/out gain series: partial-sum change j<=4 vs j<=8", bool(r["passed"]), rel, 0.1,
                         {"tail_ratio": [s["tail_ratio"] for s in r["series"].values()]}))
    if "projector_family" in res:
        r = res["projector_family"]
        out.append(Check("in projector family H1 norm spread over J", bool(r["passed"]), r["spread"], 0.2))
    return out


# ---------------------------------------------------------------- 5. Cook

def cook_criteria(series) -> list:
    inc = [series.increment_at(t) for t in DYADIC if t <= series.checkpoints[-1]]
    dec = len(inc) >= 2 and all(b < a for a, b in zip(inc, inc[1:]))
    fit = series.potential_slope(16.0, 128.0)
    return [
        Check("Cook increments strictly decreasing over 16..128", dec, inc, "strictly decreasing"),
        Check("potential-term slope", fit.slope <= -1.2, fit.slope, -1.2),
    ]


# ---------------------------------------------------------------- 6-8. decomposition

def identity_check(rep, tol: float = 1e-8) -> list:
    out = []
    for m, L in rep.layers.items():
        worst = float(np.max(L["consistency"]))
        out.append(Check(f"decomposition identity n={m}", worst <= tol, worst, tol))
    return out


def _bounded(times, vals):
    times = np.asarray(times)
    vals = np.asarray(vals)
    base = vals[np.argmin(np.abs(times - 10.0))]
    m = (times >= 10.0) & (times <= 200.0)
    ratio = float(vals[m].max() / base)
    r = stats.linregress(np.log(times[m]), vals[m])
    q = stats.t.ppf(0.975, m.sum() - 2)
    lo = float(r.slope - q * r.stderr)
    return ratio, float(r.slope), lo


def theorem_bounds(rep) -> list:
    t = rep.layers[1]["times"]
    w1 = [row[1] for row in rep.layers[1]["uloc_w"]]
    ratio, slope, lo = _bounded(t, w1)
    out = [Check("weighted d u_loc,1: max over [10,200] <= 2x value at 10", ratio <= 2.0, ratio, 2.0),
           Check("weighted d u_loc,1: slope vs log t consistent with <= 0", lo <= 0.0, slope, 0.0,
                 {"ci_low": lo})]
    urem = rep.layers[1]["urem_h1dot"]
    if 20.0 in t and 200.0 in t:
        r = urem[t.index(200.0)] / urem[t.index(20.0)]
        out.append(Check("d u_rem,1(200) <= 0.5 d u_rem,1(20)", r <= 0.5, r, 0.5))
    if 2 in rep.layers:
        w2 = [row[2] for row in rep.layers[2]["uloc_w"]]
        ratio2, slope2, lo2 = _bounded(t, w2)
        out.append(Check("k=2 weighted u_loc,2 bounded (max <= 2x at 10, slope CI)",
                         ratio2 <= 2.0 and lo2 <= 0.0, [ratio2, slope2], [2.0, 0.0], {"ci_low": lo2}))
    return out


def weak_localization(rep) -> list:
    t = list(rep.times)
    vals = [rep.uwb_tail[t.index(s)] for s in DYADIC if s in t]
    dec = len(vals) >= 2 and all(b < a for a, b in zip(vals, vals[1:]))
    return [Check("u_wb tail L2(|x| >= t^0.6) decreasing over dyadic t", dec, vals, "decreasing")]


# ---------------------------------------------------------------- 9. robustness

def summary(series, rep=None) -> dict:
    """Scalar quantities of criteria 5-8 compared across runs."""
    out = {}
    for t in DYADIC:
        out[f"cook_increment_{int(t)}"] = series.increment_at(t)
    out["potential_slope"] = series.potential_slope(16.0, 128.0).slope
    if rep is None:
        return out
    t = rep.layers[1]["times"]
    for s in DYADIC:
        out[f"uwb_tail_{int(s)}"] = rep.uwb_tail[list(rep.times).index(s)]
    out["uloc1_max_ratio"] = _bounded(t, [r[1] for r in rep.layers[1]["uloc_w"]])[0]
    urem = rep.layers[1]["urem_h1dot"]
    out["urem_ratio_200_20"] = urem[t.index(200.0)] / urem[t.index(20.0)]
    if 2 in rep.layers:
        out["uloc2_max_ratio"] = _bounded(t, [r[2] for r in rep.layers[2]["uloc_w"]])[0]
    out["identity_ok"] = all(max(L["consistency"]) <= rep.tolerance for L in rep.layers.values())
    return out


def uwb_tails(channel, traj, eps_weak: float = 0.1, times=DYADIC) -> dict:
    """u_wb tail norms alone, for channel parameters where no decomposition exists."""
    g = traj.grid
    out = {}
    for t in times:
        i = traj.index(t)
        wb = traj.states[i] - free_propagate(omega_at(channel, traj, i), t, g)
        m = np.abs(g.x) >= t ** (0.5 + eps_weak)
        out[f"uwb_tail_{int(t)}"] = float(np.sqrt(np.sum(np.abs(wb[m]) ** 2) * g.dx))
    return out


def robustness(base: dict, variant: dict, label: str, tol: float = 0.1) -> Check:
    changes = {}
    ok = True
    for k, a in base.items():
        if k not in variant:
            continue
        b = variant[k]
        if isinstance(a, bool):
            changes[k] = bool(a == b)
            ok = ok and a == b
            continue
        rel = abs(b - a) / abs(a) if a != 0 else (0.0 if b == 0 else np.inf)
        changes[k] = float(rel)
        ok = ok and rel < tol
    worst = max((v for v in changes.values() if not isinstance(v, bool)), default=0.0)
    return Check(f"robustness: {label}", ok, worst, tol, {"relative_changes": changes})
