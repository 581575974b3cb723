"""Time-dependent potentials and sampled checks of their decay hypotheses.

The decay hypotheses are |V| <~ <x>^{-sigma} and |V_x| <~ <x>^{-sigma-1} with
sigma > 2.  The symbol-type bounds ask for <x>^k |d^k V| <~ <x>^{-sigma} for
k <= n.
"""

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import hermite as H
from numpy.polynomial import polynomial as P

from .errors import DomainError, UnsupportedOrderError
from .spectral import Grid

FAMILIES = ("breathing_sech2", "moving_gaussian_envelope", "static_sech2", "zero", "soft_coulomb")
MAX_DERIV = 8


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of one potential family.

    breathing_sech2          -V0 (1 + eps cos(omega t)) sech^2(x / w)
    static_sech2             -V0 sech^2(x / w)
    moving_gaussian_envelope -V0 exp(-x^2 / (2 s(t)^2)),  s(t) = w (1 + eps sin(omega t))
    zero                     0
    soft_coulomb             -V0 / <x / w>   (slow tail; fails the decay check)
    """

    family: str = "breathing_sech2"
    V0: float = 2.0
    eps: float = 0.5
    omega: float = 1.0
    width: float = 1.0
    sigma: float = 3.0
    n: int = 4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown potential family {self.family!r}; choose from {FAMILIES}")
        if not 0 <= self.eps < 1:
            raise DomainError(f"modulation depth eps must lie in [0, 1), got {self.eps}")
        if not self.width > 0:
            raise DomainError(f"width must be positive, got {self.width}")
        if not self.sigma > 2:
            raise DomainError(f"decay exponent sigma must exceed 2, got {self.sigma}")
        if self.n < 0:
            raise DomainError("symbol order n must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        kw = dict(d)
        for key in ("V0", "eps", "omega", "width", "sigma"):
            if key in kw:
                kw[key] = float(kw[key])
        if "n" in kw:
            kw["n"] = int(kw["n"])
        return cls(**kw)

    @property
    def is_static(self) -> bool:
        return self.family in ("static_sech2", "zero", "soft_coulomb") or self.eps == 0

    @property
    def max_deriv(self) -> int:
        return 2 if self.family == "soft_coulomb" else MAX_DERIV

    def __call__(self, x, t: float, k: int = 0) -> np.ndarray:
        return eval_potential(self, x, t, k)


def _sech2_poly(k: int) -> np.ndarray:
    """d^k/dy^k sech^2(y) as a polynomial in T = tanh(y) (dT/dy = 1 - T^2)."""
    p = np.array([1.0, 0.0, -1.0])
    for _ in range(k):
        p = P.polymul(P.polyder(p), [1.0, 0.0, -1.0])
    return p


def _sech2(y: np.ndarray) -> np.ndarray:
    e = np.exp(-2.0 * np.abs(y))
    return 4.0 * e / (1.0 + e) ** 2


def _sech2_deriv(y: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return _sech2(y)
    # the polynomial has a factor (1 - T^2) = sech^2, divide it out for accuracy
    q, r = P.polydiv(_sech2_poly(k), [1.0, 0.0, -1.0])
    return P.polyval(np.tanh(y), q) * _sech2(y)


def _gauss_deriv(x: np.ndarray, s: float, k: int) -> np.ndarray:
    # d^k/dx^k exp(-x^2/(2 s^2)) = (-1/(s sqrt2))^k H_k(x/(s sqrt2)) exp(-x^2/(2 s^2))
    z = x / (s * np.sqrt(2.0))
    c = np.zeros(k + 1)
    c[k] = 1.0
    return (-1.0 / (s * np.sqrt(2.0))) ** k * H.hermval(z, c) * np.exp(-z * z)


def eval_potential(spec: PotentialSpec, x, t: float, k: int = 0) -> np.ndarray:
    """d^k V / dx^k at (x, t)."""
    if k < 0 or k > spec.max_deriv:
        raise UnsupportedOrderError(
            f"x-derivative order {k} unsupported for {spec.family} (max {spec.max_deriv})")
    x = np.asarray(x, dtype=float)
    fam, w = spec.family, spec.width
    if fam == "zero":
        return np.zeros(x.shape)
    if fam in ("breathing_sech2", "static_sech2"):
        amp = spec.V0 * (1 + spec.eps * np.cos(spec.omega * t)) if fam == "breathing_sech2" else spec.V0
        return -amp * w ** (-k) * _sech2_deriv(x / w, k)
    if fam == "moving_gaussian_envelope":
        s = w * (1 + spec.eps * np.sin(spec.omega * t))
        return -spec.V0 * _gauss_deriv(x, s, k)
    # soft_coulomb
    y = x / w
    r = np.sqrt(1 + y * y)
    if k == 0:
        return -spec.V0 / r
    if k == 1:
        return spec.V0 * y / r ** 3 / w
    return spec.V0 * (1 - 2 * y * y) / r ** 5 / w ** 2


@dataclass
class ValidationReport:
    """Suprema of weighted potential derivatives over the sampled (x, t)."""

    family: str
    sigma: float
    n: int
    suprema: dict = field(default_factory=dict)
    growth: dict = field(default_factory=dict)
    nan_flags: dict = field(default_factory=dict)
    bound: float = 1e4
    passed: bool = False
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def validate_hypotheses(spec: PotentialSpec, grid: Grid, t_samples: Sequence[float],
                        bound: float = 1e4) -> ValidationReport:
    """Sample the decay and symbol bounds on the grid.

    Reported keys: ``decay`` (<x>^sigma |V|), ``deriv_decay`` (<x>^{sigma+1}
    |V_x|) and ``symbol_k`` (<x>^{sigma+k} |d^k V|, k <= n).  ``growth`` is
    the ratio of the supremum over |x| >= L/2 to the one over |x| < L/2; a
    ratio >= 1 means the weighted quantity still grows towards the box edge,
    so the claimed sigma cannot hold on the line.
    """
    t_samples = list(t_samples)
    if not t_samples:
        raise DomainError("t_samples must be nonempty")
    rep = ValidationReport(spec.family, spec.sigma, spec.n, bound=bound)
    x = grid.x
    jx = np.sqrt(1 + x * x)
    outer = np.abs(x) >= grid.L / 2
    checks = [("decay", 0, spec.sigma), ("deriv_decay", 1, spec.sigma + 1)]
    kmax = min(spec.n, spec.max_deriv)
    if spec.n > spec.max_deriv:
        rep.messages.append(f"symbol order capped at {kmax} for {spec.family}")
    checks += [(f"symbol_{k}", k, spec.sigma + k) for k in range(kmax + 1)]
    ok = True
    for name, k, power in checks:
        vals = np.zeros(grid.N)
        for t in t_samples:
            vals = np.maximum(vals, np.abs(eval_potential(spec, x, t, k)))
        weighted = jx ** power * vals
        bad = not np.all(np.isfinite(weighted))
        rep.nan_flags[name] = bool(bad)
        sup = float(np.nanmax(weighted)) if not bad else float("nan")
        inner_sup = float(np.max(weighted[~outer]))
        outer_sup = float(np.max(weighted[outer]))
        ratio = outer_sup / inner_sup if inner_sup > 0 else (0.0 if outer_sup == 0 else np.inf)
        rep.suprema[name] = sup
        rep.growth[name] = float(ratio)
        if bad:
            ok = False
            rep.messages.append(f"{name}: non-finite values")
        elif ratio >= 1:
            ok = False
            rep.messages.append(f"{name}: weighted supremum grows towards the box edge (ratio {ratio:.3g})")
        elif sup > bound:
            ok = False
            rep.messages.append(f"{name}: supremum {sup:.3g} exceeds bound {bound:g}")
    rep.passed = ok
    return rep
