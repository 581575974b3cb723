"""Smooth cutoffs built from one transition function.

``psi`` equals 1 on (-inf, 1], 0 on [2, inf) and is glued in between from
``h(t) = exp(-1/t)``::

    psi(x) = h(2 - x) / (h(2 - x) + h(x - 1))

Everything else is derived from it: the bump ``F(x) = psi(x) - psi(2x)``
(supported in [1/2, 2]); ``F_le = psi`` and ``F_ge(x) = 1 - psi(2x)``; and the
scaled variants in `VARIANTS`.

Derivatives follow the unscaled convention ``F_C^{(a)}(x) = F^{(a)}(x/C)``.
`chain_derivative` returns true derivatives in x.
"""

from enum import Enum
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy.special import expit

from .errors import DomainError, UnsupportedOrderError
from .spectral import Field, Grid, Multiplier

A_MAX = 8

# Where |psi^{(a)}| < 1e-200 for every a <= A_MAX; evaluating the closed forms
# closer to the endpoints only produces 0 * inf.
_S_LO, _S_HI = 2e-3, 1 - 2e-3


@lru_cache(maxsize=None)
def _sigmoid_poly(k: int) -> np.ndarray:
    """Coefficients (increasing powers) of the k-th derivative of expit as a
    polynomial in expit itself, using sigma' = sigma - sigma^2."""
    p = np.array([0.0, 1.0])
    for _ in range(k):
        dp = np.polynomial.polynomial.polyder(p)
        p = np.polynomial.polynomial.polymul(dp, [0.0, 1.0, -1.0])
    return p


def _psi_derivative_inner(s: np.ndarray, a: int) -> np.ndarray:
    """psi^{(a)}(1 + s) for 0 < s < 1 by Faa di Bruno.

    psi = expit(q) with q(s) = 1/s - 1/(1 - s), whose derivatives are
    q^{(n)} = (-1)^n n!/s^{n+1} - n!/(1 - s)^{n+1}.
    """
    q = 1.0 / s - 1.0 / (1.0 - s)
    # sigma^{(k)}(q) = (-1)^{k+1} sigma^{(k)}(-q): evaluate the polynomial at
    # the small one of sigma(q), sigma(-q) to avoid cancellation in 1 - sigma
    flip = q > 0
    sig = expit(np.where(flip, -q, q))
    qd = [None] + [(-1) ** n * factorial(n) / s ** (n + 1) - factorial(n) / (1 - s) ** (n + 1)
                   for n in range(1, a + 1)]
    # Bell polynomials B[n][k] evaluated at (q', q'', ...)
    B = [[np.zeros_like(s) for _ in range(a + 1)] for _ in range(a + 1)]
    B[0][0] = np.ones_like(s)
    for n in range(1, a + 1):
        for k in range(1, n + 1):
            for i in range(1, n - k + 2):
                B[n][k] = B[n][k] + comb(n - 1, i - 1) * qd[i] * B[n - i][k - 1]
    out = np.zeros_like(s)
    for k in range(1, a + 1):
        dk = np.polynomial.polynomial.polyval(sig, _sigmoid_poly(k))
        if k % 2 == 0:
            dk = np.where(flip, -dk, dk)
        out += dk * B[a][k]
    return out


def psi(x, a: int = 0) -> np.ndarray:
    """Transition function (a = 0) or its a-th derivative."""
    if a < 0 or a > A_MAX:
        raise UnsupportedOrderError(f"derivative order {a} not supported (max {A_MAX})")
    x = np.asarray(x, dtype=float)
    s = x - 1.0
    out = np.zeros(x.shape)
    if a == 0:
        out[x <= 1] = 1.0
        inner = (s > 0) & (s < 1)
        with np.errstate(divide="ignore", over="ignore"):
            si = s[inner]
            out[inner] = expit(1.0 / si - 1.0 / (1.0 - si))
        return out
    inner = (s > _S_LO) & (s < _S_HI)
    out[inner] = _psi_derivative_inner(s[inner], a)
    return out


def transition_function(x, a: int = 0):
    """Scalar-friendly wrapper around `psi`."""
    v = psi(np.atleast_1d(x), a)
    return float(v[0]) if np.ndim(x) == 0 else v


def bump(y, a: int = 0) -> np.ndarray:
    """F(y) = psi(y) - psi(2y) and its unscaled derivatives."""
    y = np.asarray(y, dtype=float)
    return psi(y, a) - 2.0 ** a * psi(2 * y, a)


def f_le(y, a: int = 0) -> np.ndarray:
    return psi(y, a)


def f_ge(y, a: int = 0) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if a == 0:
        return 1.0 - psi(2 * y)
    return -(2.0 ** a) * psi(2 * y, a)


class VariantKind(str, Enum):
    C = "C"
    leC = "leC"
    ltC = "ltC"
    lesssimC = "lesssimC"
    llC = "llC"
    simC = "simC"
    geC = "geC"
    gtC = "gtC"
    gtrsimC = "gtrsimC"
    ggC = "ggC"


# kind -> (base profile, scale factor applied to C)
VARIANTS = {
    VariantKind.C: (bump, 1.0),
    VariantKind.leC: (f_le, 1.0),
    VariantKind.ltC: (f_le, 0.5),
    VariantKind.lesssimC: (f_le, 2.0 ** 10),
    VariantKind.llC: (f_le, 2.0 ** -10),
    VariantKind.geC: (f_ge, 1.0),
    VariantKind.gtC: (f_ge, 2.0),
    VariantKind.gtrsimC: (f_ge, 2.0 ** -10),
    VariantKind.ggC: (f_ge, 2.0 ** 11),
}


def eval_cutoff(kind, C: float, a: int, x) -> np.ndarray:
    """F^{(a)}_{kind, C}(x) under the unscaled derivative convention."""
    if not C > 0:
        raise DomainError(f"cutoff scale must be positive, got {C}")
    kind = VariantKind(kind)
    x = np.asarray(x, dtype=float)
    if kind is VariantKind.simC:
        return (eval_cutoff(VariantKind.lesssimC, C, a, x)
                - eval_cutoff(VariantKind.llC, C, a, x))
    prof, fac = VARIANTS[kind]
    return prof(x / (C * fac), a)


def effective_scale(kind, C: float) -> float:
    kind = VariantKind(kind)
    if kind is VariantKind.simC:
        raise DomainError("F_sim is a difference of two scales")
    return C * VARIANTS[kind][1]


def chain_derivative(kind, C: float, a: int, x) -> np.ndarray:
    """True a-th x-derivative of F_{kind, C}(x)."""
    kind = VariantKind(kind)
    if kind is VariantKind.simC:
        return (chain_derivative(VariantKind.lesssimC, C, a, x)
                - chain_derivative(VariantKind.llC, C, a, x))
    return effective_scale(kind, C) ** (-a) * eval_cutoff(kind, C, a, x)


# ---------------------------------------------------------------- frequency side

def freq_symbol(grid: Grid, kind, C: float, sign: str = "abs") -> np.ndarray:
    """Lattice values of F_{kind,C}(|xi|) or F_{kind,C}(+-xi).

    Sign-projected symbols vanish at the Nyquist point, which has no partner
    of opposite sign.
    """
    xi = grid.xi
    if sign == "abs":
        return eval_cutoff(kind, C, 0, np.abs(xi))
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+', '-' or 'abs', got {sign!r}")
    v = eval_cutoff(kind, C, 0, xi if sign == "+" else -xi)
    v[grid.nyquist_mask] = 0.0
    return v


def freq_cutoff(kind, C: float, sign: str = "abs") -> Multiplier:
    return Multiplier.from_grid_function(lambda g: freq_symbol(g, kind, C, sign),
                                         f"F_{VariantKind(kind).value}[{C:g}]({sign} D)")


def shell_resolvable(grid: Grid, k: float) -> bool:
    """Whether supp F(|xi|/2^k) = [2^{k-1}, 2^{k+1}] meets the lattice."""
    lo, hi = 2.0 ** (k - 1), 2.0 ** (k + 1)
    return hi > grid.dxi and lo < grid.xi_max


def lp_project(selector, sign: str, f: Field, kind=VariantKind.C):
    """Littlewood-Paley projection of ``f``.

    ``selector`` is a shell index k (scale 2^k) used with ``kind``.  For the
    bump kind an unresolvable shell returns the zero field and ``False``;
    otherwise the second item is ``True``.
    Sign ``"both"`` means |D|.
    """
    grid = f.grid
    sign = "abs" if sign in ("both", "abs") else sign
    kind = VariantKind(kind)
    if kind is VariantKind.C and not shell_resolvable(grid, selector):
        return Field(grid, np.zeros(grid.N), f.rep), False
    m = freq_symbol(grid, kind, 2.0 ** selector, sign)
    if f.rep == "frequency":
        return Field(grid, m * f.data, "frequency"), True
    return Field(grid, grid.multiply(m, f.data)), True
