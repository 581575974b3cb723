import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from tdseloc.errors import ContractError, DomainError
from tdseloc.spectral import (Field, Grid, Multiplier, apply_multiplier, dyadic_shells, to_frequency,
                              to_position, weighted_norm)
from tdseloc.cutoffs import freq_symbol

from conftest import random_field


def test_grid_rejects_bad_sizes():
    with pytest.raises(DomainError):
        Grid(10.0, 100)
    with pytest.raises(DomainError):
        Grid(-1.0, 64)


def test_constant_goes_to_zero_mode(small):
    fh = to_frequency(Field(small, np.ones(small.N)))
    mag = np.abs(fh.data)
    assert np.argmax(mag) == 0
    assert np.all(mag[1:] < 1e-12 * mag[0])


def test_round_trip(grid, rng):
    f = Field(grid, random_field(rng, grid.N))
    back = to_position(to_frequency(f))
    assert np.linalg.norm(back.data - f.data) <= 1e-13 * np.linalg.norm(f.data)


def test_representation_contract(small):
    f = Field(small, np.zeros(small.N))
    with pytest.raises(ContractError):
        to_position(f)
    with pytest.raises(ContractError):
        Field(small, np.zeros(3))


def test_gaussian_transform(grid):
    fh = to_frequency(Field.from_function(grid, lambda x: np.exp(-x ** 2 / 2)))
    assert np.max(np.abs(fh.data - np.exp(-grid.xi ** 2 / 2))) < 1e-12


def test_plancherel(grid, rng):
    f = Field(grid, random_field(rng, grid.N))
    assert abs(f.norm() - to_frequency(f).norm()) <= 1e-12 * f.norm()


def test_identity_multiplier(small, rng):
    f = Field(small, random_field(rng, small.N))
    assert np.allclose(apply_multiplier(Multiplier.identity(), f).data, f.data, atol=1e-13)


def test_derivative_of_eigenmode():
    g = Grid(50.0, 1024)
    f = Field.from_function(g, lambda x: np.sin(np.pi * x / g.L))
    d = apply_multiplier(Multiplier.poly(1), f).data
    assert np.max(np.abs(d - np.pi / g.L * np.cos(np.pi * g.x / g.L))) < 1e-10


def test_shell_sum_removes_zero_mode(small, rng):
    f = Field(small, random_field(rng, small.N))
    total = sum(apply_multiplier(Multiplier.from_grid_function(lambda g, k=k: freq_symbol(g, "C", 2.0 ** k)), f).data
                for k in dyadic_shells(small))
    ref = f.data - np.mean(f.data)
    assert np.max(np.abs(total - ref)) < 1e-12


def test_multiplier_composition(small, rng):
    f = Field(small, random_field(rng, small.N))
    m1 = Multiplier.phase(0.3)
    m2 = Multiplier.from_symbol(lambda xi: 1 / (1 + xi ** 2))
    a = apply_multiplier(m1, apply_multiplier(m2, f)).data
    b = apply_multiplier(m1 * m2, f).data
    assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(b)


def test_weighted_norm_unit(grid):
    u = np.exp(-grid.x ** 2)
    u = u / grid.norm(u)
    assert weighted_norm(u, grid=grid) == pytest.approx(1.0, abs=1e-14)


def test_weighted_norm_gaussian_weight(grid):
    u = np.exp(-grid.x ** 2 / 2)
    ref, _ = integrate.quad(lambda x: (1 + x * x) * np.exp(-x * x), -np.inf, np.inf)
    assert weighted_norm(u, 1.0, grid=grid) == pytest.approx(np.sqrt(ref), abs=1e-8)


def test_weighted_norm_modulated_bump(grid):
    xi0 = 4 * grid.dxi * 64
    u = np.exp(1j * xi0 * grid.x) * np.exp(-grid.x ** 2 / 8)
    du = lambda x: (1j * xi0 - x / 4) * np.exp(1j * xi0 * x - x * x / 8)
    ref = np.sqrt(integrate.quad(lambda x: abs(du(x)) ** 2, -60, 60, limit=400)[0])
    assert weighted_norm(u, 0, 1, grid=grid) == pytest.approx(ref, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(k=st.integers(0, 3), seed=st.integers(0, 2 ** 32 - 1))
def test_derivative_order_vs_homogeneous_sobolev(k, seed):
    g = Grid(16.0, 128)
    rng = np.random.default_rng(seed)
    fh = random_field(rng, g.N)
    fh[g.nyquist_mask] = 0
    f = np.fft.ifft(fh)
    a = weighted_norm(f, 0, k, 0, grid=g)
    b = weighted_norm(f, 0, 0, k, grid=g, homogeneous=True)
    assert a == pytest.approx(b, rel=1e-12)


def test_weighted_norm_rejects_negative(small):
    with pytest.raises(DomainError):
        weighted_norm(np.ones(small.N), -1, grid=small)
