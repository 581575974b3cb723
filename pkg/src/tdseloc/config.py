"""Experiment configuration: INI-style ``[section]`` blocks of ``key = value`` lines.

Every block is re-validated by the dataclass that owns it, so constraint
errors carry the parameter name and the admissible interval.
"""

import configparser
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import ChannelParams
from .decomposition import MicrolocParams
from .errors import ConfigError, DomainError
from .potential import PotentialSpec
from .propagator import EvolutionConfig
from .spectral import Grid

SUITES = ("simulate", "cook", "decompose", "lemma-lab", "validate-potential")
ORDER = {name: k for k, name in enumerate(("validate-potential", "simulate", "cook", "decompose", "lemma-lab"))}
NEEDS = {"cook": ("simulate",), "decompose": ("simulate", "cook"), "simulate": (), "lemma-lab": (),
         "validate-potential": ()}
U0_KINDS = ("sech", "gaussian")

DEFAULT_TIMES = "10:200:10, 16, 32, 64, 128"


def parse_times(text: str) -> list:
    """Comma-separated items, each a number or an inclusive ``start:stop:step`` range."""
    out = set()
    for item in text.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            parts = [float(p) for p in item.split(":")]
        except ValueError:
            raise ConfigError(f"report times: cannot parse {item!r}") from None
        if len(parts) == 1:
            out.add(parts[0])
        elif len(parts) == 3:
            a, b, s = parts
            if not s > 0 or b < a:
                raise ConfigError(f"report times: bad range {item!r}")
            n = int(np.floor((b - a) / s + 1e-9))
            out.update(round(a + k * s, 12) for k in range(n + 1))
        else:
            raise ConfigError(f"report times: {item!r} must be a number or start:stop:step")
    if not out:
        raise ConfigError("report times: empty list")
    return sorted(out)


def resolve_suites(names) -> list:
    """Add dependencies and sort into execution order."""
    todo = set()
    stack = list(names)
    while stack:
        s = stack.pop()
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(SUITES)}")
        if s not in todo:
            todo.add(s)
            stack.extend(NEEDS[s])
    return sorted(todo, key=ORDER.get)


@dataclass
class ExperimentConfig:
    L: float = 2048.0
    N: int = 16384
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    channel: ChannelParams = field(default_factory=ChannelParams)
    microloc: MicrolocParams = field(default_factory=lambda: MicrolocParams(n=2))
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    report_times: list = field(default_factory=lambda: parse_times(DEFAULT_TIMES))
    suites: list = field(default_factory=lambda: list(SUITES))
    out: str = "artifacts"
    seed: int = 0
    u0: str = "sech"
    tolerance: float = 1e-8
    plots: bool = True
    source: str | None = None

    def __post_init__(self):
        if self.u0 not in U0_KINDS:
            raise DomainError(f"u0 must be one of {U0_KINDS}, got {self.u0!r}")
        if self.microloc.channel != self.channel:
            raise ConfigError("microloc.channel must equal the channel block")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        self.suites = resolve_suites(self.suites)
        if "decompose" in self.suites:
            bad = [t for t in self.report_times if not 1 < t <= self.evolution.T_hor]
            if bad:
                raise DomainError(f"report times must lie in (1, T_hor = {self.evolution.T_hor:g}], got {bad}")

    @property
    def grid(self) -> Grid:
        return Grid(self.L, self.N)

    def initial_state(self) -> np.ndarray:
        g = self.grid
        x = g.x
        if self.u0 == "sech":
            u = 1 / np.cosh(np.clip(x, -300, 300))
        else:
            u = np.exp(-x ** 2 / 8)
        u = u.astype(complex)
        return u / g.norm(u)

    def to_dict(self) -> dict:
        return {
            "grid": {"L": self.L, "N": self.N},
            "potential": self.potential.to_dict(),
            "channel": asdict(self.channel),
            "microloc": {"theta": self.microloc.theta, "rho": self.microloc.rho, "n": self.microloc.n,
                         "eps_weak": self.microloc.eps_weak},
            "evolution": asdict(self.evolution),
            "report": {"times": self.report_times, "tolerance": self.tolerance},
            "run": {"suites": self.suites, "out": self.out, "seed": self.seed, "u0": self.u0,
                    "plots": self.plots},
        }

    def to_ini(self) -> str:
        """Config text that reloads to an equal configuration."""
        d = self.to_dict()
        d["report"] = {"times": ", ".join(repr(t) for t in self.report_times), "tolerance": repr(self.tolerance)}
        d["run"]["suites"] = ", ".join(self.suites)
        lines = []
        for sec, kv in d.items():
            lines.append(f"[{sec}]")
            lines += [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in kv.items()]
            lines.append("")
        return "\n".join(lines)


def _typed(cls, section: dict, name: str) -> dict:
    """Convert string values to the field types of dataclass ``cls``."""
    kinds = {f.name: f.type for f in fields(cls)}
    out = {}
    for k, v in section.items():
        if k not in kinds:
            raise ConfigError(f"[{name}] unknown key {k!r}; allowed: {', '.join(sorted(kinds))}")
        t = kinds[k]
        t = t if isinstance(t, str) else getattr(t, "__name__", str(t))
        try:
            out[k] = int(v) if t == "int" else float(v) if t == "float" else v
        except ValueError:
            raise ConfigError(f"[{name}] {k} = {v!r} is not a valid {t}") from None
    return out


def _bool(v: str, key: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} = {v!r} is not a boolean")


SECTIONS = ("grid", "potential", "channel", "microloc", "evolution", "report", "run")


def loads(text: str, source: str | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (L, V0)
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.ParsingError as e:
        where = "; ".join(f"line {n}: {line.strip()!r}" for n, line in e.errors)
        raise ConfigError(f"malformed config {e.source}: {where}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    extra = [s for s in cp.sections() if s not in SECTIONS]
    if extra:
        raise ConfigError(f"unknown section(s) {extra}; allowed: {', '.join(SECTIONS)}")
    sec = {s: dict(cp[s]) if cp.has_section(s) else {} for s in SECTIONS}
    kw = {}
    grid = sec["grid"]
    for k in grid:
        if k not in ("L", "N"):
            raise ConfigError(f"[grid] unknown key {k!r}; allowed: L, N")
    try:
        if "L" in grid:
            kw["L"] = float(grid["L"])
        if "N" in grid:
            kw["N"] = int(grid["N"])
    except ValueError as e:
        raise ConfigError(f"[grid] {e}") from None
    kw["potential"] = PotentialSpec(**_typed(PotentialSpec, sec["potential"], "potential"))
    ch = ChannelParams(**_typed(ChannelParams, sec["channel"], "channel"))
    kw["channel"] = ch
    mi = _typed(MicrolocParams, sec["microloc"], "microloc")
    mi.setdefault("n", 2)
    kw["microloc"] = MicrolocParams(channel=ch, **mi)
    kw["evolution"] = EvolutionConfig(**_typed(EvolutionConfig, sec["evolution"], "evolution"))
    rep = dict(sec["report"])
    if "times" in rep:
        kw["report_times"] = parse_times(rep.pop("times"))
    if "tolerance" in rep:
        kw["tolerance"] = float(rep.pop("tolerance"))
    if rep:
        raise ConfigError(f"[report] unknown key(s) {sorted(rep)}; allowed: times, tolerance")
    run = dict(sec["run"])
    if "suites" in run:
        kw["suites"] = [s.strip() for s in run.pop("suites").split(",") if s.strip()]
    if "out" in run:
        kw["out"] = run.pop("out")
    if "seed" in run:
        try:
            kw["seed"] = int(run.pop("seed"))
        except ValueError:
            raise ConfigError("[run] seed must be an integer") from None
    if "u0" in run:
        kw["u0"] = run.pop("u0").strip()
    if "plots" in run:
        kw["plots"] = _bool(run.pop("plots"), "[run] plots")
    if run:
        raise ConfigError(f"[run] unknown key(s) {sorted(run)}; allowed: suites, out, seed, u0, plots")
    return ExperimentConfig(source=source, **kw)


def load(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return loads(text, str(p))
