"""Periodic grid, unitary Fourier transform, multipliers and weighted norms.

Arrays are stored in FFT ordering on the frequency side, i.e. ``grid.xi`` is
``2*pi*fftfreq(N, dx)``.  The Nyquist point ``-N/2`` sits on the negative side.
The continuous transform ``fhat(xi) = (2 pi)^{-1/2} int f(x) exp(-i x xi) dx``
is approximated by a Riemann sum, which makes the discrete map unitary for the
weights ``dx`` (position) and ``dxi = pi/L`` (frequency).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ContractError, DomainError, NumericError

POSITION = "position"
FREQUENCY = "frequency"


class Grid:
    """Box ``[-L, L)`` sampled at ``N`` points, with its frequency lattice.

    Parameters
    ----------
    L : float
        Half width of the box.
    N : int
        Number of points, a power of two no smaller than 16.
    """

    def __init__(self, L: float, N: int):
        N = int(N)
        if N < 16 or N & (N - 1):
            raise DomainError(f"N must be a power of two >= 16, got {N}")
        if not L > 0:
            raise DomainError(f"L must be positive, got {L}")
        self.L = float(L)
        self.N = N
        self.dx = 2.0 * self.L / N
        self.dxi = np.pi / self.L

    def __repr__(self):
        return f"Grid(L={self.L:g}, N={self.N})"

    def __eq__(self, other):
        return isinstance(other, Grid) and self.L == other.L and self.N == other.N

    def __hash__(self):
        return hash((self.L, self.N))

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L + self.dx * np.arange(self.N)
        x.setflags(write=False)
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        xi = self.dxi * sfft.fftfreq(self.N, 1.0 / self.N)
        xi.setflags(write=False)
        return xi

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.N // 2] = True
        m.setflags(write=False)
        return m

    @cached_property
    def _phase(self) -> np.ndarray:
        # accounts for the box starting at -L rather than 0
        return self.dx / np.sqrt(2 * np.pi) * np.exp(1j * self.L * self.xi)

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx

    def japanese(self, power: float = 1.0) -> np.ndarray:
        """<x>^power with <x> = sqrt(1 + x^2), on the box coordinate."""
        return (1.0 + self.x ** 2) ** (0.5 * power)

    # fast array-level transforms, used throughout the pipeline
    def fft(self, f: np.ndarray) -> np.ndarray:
        """Unitary transform of position samples (FFT ordering)."""
        return self._phase * sfft.fft(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return sfft.ifft(fh / self._phase)

    def multiply(self, symbol: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Apply the Fourier multiplier with lattice values ``symbol``."""
        return sfft.ifft(symbol * sfft.fft(f))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.dx))

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """<f, g> = int f conj(g) dx."""
        return complex(np.vdot(g, f) * self.dx)

    def deriv(self, f: np.ndarray, k: int = 1) -> np.ndarray:
        if k == 0:
            return np.asarray(f)
        return self.multiply((1j * self.xi) ** k, f)

    def hdot1(self, f: np.ndarray) -> float:
        """Homogeneous H^1 seminorm ||f'||."""
        return self.norm(self.deriv(f, 1))

    def h1(self, f: np.ndarray) -> float:
        fh = sfft.fft(f)
        return float(np.sqrt(np.sum((1 + self.xi ** 2) * np.abs(fh) ** 2) * self.dx / self.N))

    def boundary_mass(self, f: np.ndarray, frac: float = 0.8) -> float:
        """||f||_{L^2(|x| > frac L)}."""
        m = np.abs(self.x) > frac * self.L
        return float(np.sqrt(np.sum(np.abs(f[m]) ** 2) * self.dx))


@dataclass(frozen=True)
class Field:
    """Immutable complex samples on a grid with a representation tag."""

    grid: Grid
    data: np.ndarray
    rep: str = POSITION

    def __post_init__(self):
        if self.rep not in (POSITION, FREQUENCY):
            raise ContractError(f"unknown representation {self.rep!r}")
        arr = np.array(self.data, dtype=complex)
        if arr.shape != (self.grid.N,):
            raise ContractError(f"expected {self.grid.N} samples, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "Field":
        return cls(grid, fn(grid.x))

    def to_frequency(self) -> "Field":
        return to_frequency(self)

    def to_position(self) -> "Field":
        return to_position(self)

    def position_data(self) -> np.ndarray:
        return self.data if self.rep == POSITION else self.grid.ifft(self.data)

    def norm(self) -> float:
        w = self.grid.dx if self.rep == POSITION else self.grid.dxi
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * w))


def to_frequency(f: Field) -> Field:
    if f.rep != POSITION:
        raise ContractError("to_frequency expects a position-space field")
    return Field(f.grid, f.grid.fft(f.data), FREQUENCY)


def to_position(f: Field) -> Field:
    if f.rep != FREQUENCY:
        raise ContractError("to_position expects a frequency-space field")
    return Field(f.grid, f.grid.ifft(f.data), POSITION)


@dataclass(frozen=True)
class Multiplier:
    """Symbol m(xi) as a product of lattice-evaluable factors.

    Each factor is a ``(label, fn)`` pair where ``fn(grid)`` returns the factor
    on the lattice.  Use the class constructors for the common factors and
    ``*`` to compose.
    """

    factors: tuple = field(default_factory=tuple)

    @classmethod
    def identity(cls) -> "Multiplier":
        return cls(())

    @classmethod
    def poly(cls, k: int) -> "Multiplier":
        """(i xi)^k, i.e. the k-th derivative."""
        return cls(((f"(i xi)^{k}", lambda g, k=k: (1j * g.xi) ** k),))

    @classmethod
    def phase(cls, tau: float) -> "Multiplier":
        """exp(i tau xi^2), the symbol of the free flow over time tau."""
        return cls(((f"exp(i {tau:g} xi^2)", lambda g, tau=tau: np.exp(1j * tau * g.xi ** 2)),))

    @classmethod
    def from_symbol(cls, fn: Callable, label: str = "m") -> "Multiplier":
        """Wrap a function of xi (not of the grid)."""
        return cls(((label, lambda g, fn=fn: fn(g.xi)),))

    @classmethod
    def from_grid_function(cls, fn: Callable, label: str = "m") -> "Multiplier":
        return cls(((label, fn),))

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.factors + other.factors)

    def symbol(self, grid: Grid) -> np.ndarray:
        m = np.ones(grid.N, dtype=complex)
        for _, fn in self.factors:
            m = m * fn(grid)
        return m

    def __repr__(self):
        return "Multiplier(" + " * ".join(lbl for lbl, _ in self.factors) + ")"


def apply_multiplier(m: Multiplier, f: Field) -> Field:
    """Multiply the spectrum of ``f`` by ``m``; keeps the input representation."""
    sym = m.symbol(f.grid)
    bad = ~np.isfinite(sym)
    if bad.any():
        raise NumericError(f"non-finite symbol at xi = {f.grid.xi[np.argmax(bad)]:g}")
    if f.rep == FREQUENCY:
        return Field(f.grid, sym * f.data, FREQUENCY)
    return Field(f.grid, f.grid.multiply(sym, f.data), POSITION)


def weighted_norm(f, weight_power: float = 0.0, deriv_order: int = 0, sobolev_s: float = 0.0,
                  grid: Grid | None = None, homogeneous: bool = False) -> float:
    """||<x>^a d^k f||_{H^s}.

    ``f`` may be a `Field` or a position-space array (then ``grid`` is needed).
    The H^s part uses the Bessel symbol (1 + xi^2)^{s/2}, or |xi|^s when
    ``homogeneous`` is set.
    """
    if isinstance(f, Field):
        grid = f.grid
        arr = f.position_data()
    else:
        if grid is None:
            raise ContractError("a grid is required for raw arrays")
        arr = np.asarray(f)
    if weight_power < 0 or deriv_order < 0 or sobolev_s < 0:
        raise DomainError("weight power, derivative order and s must be nonnegative")
    g = grid.deriv(arr, deriv_order)
    if weight_power:
        g = grid.japanese(weight_power) * g
    if sobolev_s == 0:
        val = grid.norm(g)
    else:
        gh = sfft.fft(g)
        sym = np.abs(grid.xi) ** sobolev_s if homogeneous else (1 + grid.xi ** 2) ** (0.5 * sobolev_s)
        val = float(np.sqrt(np.sum(np.abs(sym * gh) ** 2) * grid.dx / grid.N))
    if not np.isfinite(val):
        raise NumericError("weighted norm overflowed")
    return val


def dyadic_shells(grid: Grid) -> Sequence[int]:
    """Shell indices k with F_{2^k}(|xi|) resolvable on the lattice."""
    kmin = int(np.floor(np.log2(grid.dxi))) - 1
    kmax = int(np.ceil(np.log2(grid.xi_max))) + 1
    return list(range(kmin, kmax + 1))
