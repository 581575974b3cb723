import csv

import numpy as np
import pytest

from tdseloc.channel import (ChannelParams, apply_Jfree, cook_integrands, cook_wave_operator, dyadic_checkpoints,
                             high_freq_symbol, omega_at, space_cutoff, split_weakly_bound)
from tdseloc.errors import DomainError, InsufficientDataError
from tdseloc.potential import PotentialSpec
from tdseloc.propagator import EvolutionConfig, Trajectory, evolve, free_propagate
from tdseloc.spectral import Field, Grid

from conftest import random_field


def sech_state(g):
    u = (1 / np.cosh(np.clip(g.x, -300, 300))).astype(complex)
    return u / g.norm(u)


@pytest.fixture(scope="module")
def free_run():
    g = Grid(1024.0, 8192)
    u0 = np.exp(-g.x ** 2 / 8 + 1.5j * g.x).astype(complex)
    u0 /= g.norm(u0)
    return evolve(u0, PotentialSpec("zero"), EvolutionConfig(dt=0.05, T_hor=128.0, stride=4), g)


@pytest.fixture(scope="module")
def sech_run():
    g = Grid(512.0, 4096)
    return evolve(sech_state(g), PotentialSpec("breathing_sech2"), EvolutionConfig(dt=0.01, T_hor=64.0, stride=10), g)


def test_param_validation():
    with pytest.raises(DomainError, match="delta"):
        ChannelParams(0.4, 0.5)
    with pytest.raises(DomainError, match="alpha"):
        ChannelParams(1.2, 0.1)
    with pytest.raises(DomainError, match=r"1 - alpha"):
        ChannelParams(0.8, 0.3)


def test_jfree_contraction(small, rng):
    p = ChannelParams()
    for _ in range(100):
        f = random_field(rng, small.N)
        t = rng.uniform(1, 50)
        assert small.norm(apply_Jfree(p, t, f, small)) <= small.norm(f) * (1 + 1e-12)


def test_jfree_kills_low_frequencies():
    g = Grid(400.0, 2048)
    p = ChannelParams()
    t = 32.0
    c = t ** -p.delta
    # frequency support strictly below c/2
    fh = np.where(np.abs(g.xi) < 0.45 * c, np.exp(-(g.xi / (0.1 * c)) ** 2), 0.0)
    f = np.fft.ifft(fh)
    out = apply_Jfree(p, t, f, g)
    assert g.norm(out) <= 1e-14 * g.norm(f)


def test_jfree_on_free_wave(free_run):
    g, p = free_run.grid, ChannelParams()
    u0 = free_run.u0
    for t in (4.0, 32.0):
        u = free_run.state(t)
        lhs = free_propagate(apply_Jfree(p, t, u, g), -t, g)
        rhs = space_cutoff(g, t, p.alpha) * g.multiply(high_freq_symbol(g, t, p.delta), u0)
        assert g.norm(lhs - rhs) < 1e-12
    F = apply_Jfree(p, 4.0, Field(g, u0))
    assert isinstance(F, Field)
    with pytest.raises(DomainError):
        apply_Jfree(p, 0.0, u0, g)


def test_cook_free_case(free_run):
    g, p = free_run.grid, ChannelParams()
    s = cook_wave_operator(p, free_run)
    for k, t in enumerate(s.checkpoints):
        ref = space_cutoff(g, t, p.alpha) * g.multiply(high_freq_symbol(g, t, p.delta), free_run.u0)
        assert g.norm(s.omegas[k] - ref) < 1e-12
    err = [g.norm(w - free_run.u0) for w in s.omegas]
    assert err[-1] < err[0] and err[-1] < 0.05
    assert np.all(s.integrand_potential == 0)


def test_cook_after_switch_off(sech_run):
    # interacting up to t1 = 16, free afterwards; Omega then only moves through the cutoffs
    g = sech_run.grid
    i1 = sech_run.index(16.0)
    states = sech_run.states.copy()
    for k in range(i1 + 1, len(states)):
        states[k] = free_propagate(sech_run.states[i1], sech_run.times[k] - 16.0, g)
    tr = Trajectory(g, sech_run.times, states, sech_run.u0, PotentialSpec("zero"), sech_run.config)
    s = cook_wave_operator(ChannelParams(), tr)
    late = s.increments[s.checkpoints > 16]
    assert np.all(np.diff(late) < 0)


def test_cook_series_properties(sech_run, tmp_path):
    s = cook_wave_operator(ChannelParams(), sech_run)
    assert list(s.checkpoints) == dyadic_checkpoints(64.0)
    assert np.isnan(s.increments[0]) and np.all(np.isfinite(s.increments[1:]))
    late = s.increments[s.checkpoints >= 16]
    assert np.all(np.diff(late) < 0)
    assert s.u_plus_error == s.increments[-1]
    s.to_csv(tmp_path / "cook.csv")
    rows = list(csv.reader(open(tmp_path / "cook.csv")))
    assert rows[0] == ["t", "increment_H1", "potential_term_norm", "restriction_term_norm"]
    assert len(rows) == len(s.checkpoints) + 1
    with pytest.raises(InsufficientDataError):
        s.increment_at(3.0)


def test_cook_needs_four_checkpoints(sech_run):
    with pytest.raises(InsufficientDataError):
        cook_wave_operator(ChannelParams(), sech_run.truncated(8.0))


def test_cook_integrand_derivative(sech_run):
    # the restriction term is the scale derivative of X F applied to psi; check by differencing
    g, p = sech_run.grid, ChannelParams()
    i = sech_run.index(20.0)
    t = sech_run.times[i]
    ps = sech_run.frame(i)
    XF = lambda s: space_cutoff(g, s, p.alpha) * g.multiply(high_freq_symbol(g, s, p.delta), ps)
    h = 1e-4
    fd = (XF(t + h) - XF(t - h)) / (2 * h)
    _, res = cook_integrands(p, sech_run, i)
    assert res == pytest.approx(g.h1(fd), rel=1e-6)


def test_weak_split(sech_run):
    g, p = sech_run.grid, ChannelParams()
    for t in (4.0, 16.0, 64.0):
        sp = split_weakly_bound(p, sech_run, t)
        u = sech_run.state(t)
        assert g.norm(sp.u_wb + apply_Jfree(p, t, u, g) - u) < 1e-13
        assert g.norm(sp.u_wb - sp.u_low - sp.v) < 1e-13
        # ||d u_low|| <~ t^-delta ||u||
        assert g.hdot1(sp.u_low) <= 3.0 * t ** -p.delta * g.norm(u)
    with pytest.raises(DomainError):
        split_weakly_bound(p, sech_run, 1.0)


def test_free_weakly_bound_part_decays(free_run):
    p = ChannelParams()
    vals = [free_run.grid.norm(split_weakly_bound(p, free_run, t).u_wb) for t in (16.0, 32.0, 64.0, 128.0)]
    assert np.all(np.diff(vals) < 0)


def test_omega_matches_jfree(sech_run):
    g, p = sech_run.grid, ChannelParams()
    i = sech_run.index(32.0)
    lhs = free_propagate(apply_Jfree(p, 32.0, sech_run.states[i], g), -32.0, g)
    assert g.norm(omega_at(p, sech_run, i) - lhs) < 1e-12
