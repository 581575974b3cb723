import csv
import json

import numpy as np
import pytest

from tdseloc.channel import ChannelParams
from tdseloc.cutoffs import bump, psi
from tdseloc.decomposition import (MicrolocParams, assemble, build_cache, compute_J, diagnostics, proj, proj_tail,
                                   project_truncated, projected_duhamel, report_manifest)
from tdseloc.errors import DependencyError, DomainError
from tdseloc.potential import PotentialSpec
from tdseloc.propagator import EvolutionConfig, Trajectory, evolve, free_propagate
from tdseloc.spectral import Field, Grid

from conftest import random_field

P = MicrolocParams()


def sech_state(g):
    u = (1 / np.cosh(np.clip(g.x, -300, 300))).astype(complex)
    return u / g.norm(u)


@pytest.fixture(scope="module")
def run40():
    g = Grid(512.0, 4096)
    return evolve(sech_state(g), PotentialSpec("breathing_sech2"), EvolutionConfig(dt=0.01, T_hor=40.0, stride=10), g)


def test_params():
    with pytest.raises(DomainError, match="rho"):
        MicrolocParams(rho=0.3)
    with pytest.raises(DomainError, match="rho"):
        MicrolocParams(rho=0.5)
    with pytest.raises(DomainError, match="theta"):
        MicrolocParams(theta=1.0)
    assert MicrolocParams(channel=ChannelParams(0.3, 0.2), rho=0.35).alpha == 0.3


def test_compute_J():
    assert compute_J(16.0, P) == 2
    assert compute_J(0.5, P) == 0 and compute_J(1.0, P) == 0
    assert compute_J(2.0 ** (1 / P.rho), P) == 1
    for t in np.geomspace(1.01, 1e4, 200):
        J = compute_J(t, P)
        assert 2.0 ** (J - 1) < t ** P.rho <= 2.0 ** J * (1 + 1e-12)


def test_out_zero_vanishes(grid, rng):
    f = random_field(rng, grid.N)
    assert np.all(proj("out", 0, P, f, grid) == 0)


@pytest.mark.parametrize("j", [0, 2, 4, 6])
def test_complementarity(grid, rng, j):
    f = random_field(rng, grid.N)
    s = sum(proj(k, j, P, f, grid) for k in ("in", "out", "low"))
    ref = (psi(np.abs(grid.x)) if j == 0 else bump(np.abs(grid.x) / 2.0 ** j)) * f
    assert np.max(np.abs(s - ref)) <= 1e-12 * np.max(np.abs(f))


@pytest.mark.parametrize("J", [1, 3, 5])
def test_truncated_partition_is_identity(grid, rng, J):
    f = random_field(rng, grid.N)
    loc, tail = project_truncated(grid, f, J, P.theta)
    assert np.max(np.abs(sum(loc) + sum(tail) - f)) < 1e-12


def test_incoming_piece_of_localized_wave():
    g = Grid(256.0, 8192)
    j = 5
    c = 2.0 ** j
    x = g.x
    # bump on [0.9, 1.1] 2^j carrying frequency 10, far above the cutoff scale
    env = np.exp(-((x - c) / (0.03 * c)) ** 2)
    f = env * np.exp(10j * x)
    out = proj("in", j, P, f, g)
    ref = bump(x / c) * f
    assert g.norm(out - ref) <= 1e-6 * g.norm(f)
    F = proj("in", j, P, Field(g, f))
    assert isinstance(F, Field)


def test_tail_projector(grid, rng):
    J = 5
    x = grid.x
    # smooth, numerically supported in |x| <= 2^(J-2), spectrum far from 0
    f = np.exp(-(x / 1.5) ** 2 + 8j * x)
    out, ok = proj_tail("in", J, P, f, grid)
    assert ok and grid.norm(out) <= 1e-8 * grid.norm(f)
    worst = 0.0
    for _ in range(20):
        h = random_field(rng, grid.N)
        worst = max(worst, grid.norm(proj_tail("in", 3, P, h, grid)[0]) / grid.norm(h))
    assert worst <= 1.1
    out, ok = proj_tail("in", 12, P, f, grid)
    assert not ok and np.all(out == 0)
    with pytest.raises(DomainError):
        proj_tail("in", 0, P, f, grid)


def test_identity_both_layers(run40):
    g = run40.grid
    c = build_cache(run40, P, [10.0, 25.0, 40.0], depth=2)
    for t in (10.0, 25.0, 40.0):
        for n in (1, 2):
            a = assemble(run40, t, P, n, c)
            assert g.hdot1(a.v - a.u_loc - a.u_rem) <= 1e-8 * g.hdot1(a.v)
            assert g.norm(a.u_rem - sum(a.components.values())) < 1e-14
    a = assemble(run40, 25.0, P, 2, c)
    assert {"iterate_fwd", "iterate_bwd", "nr_initial", "ge_bwd_free"} <= set(a.components)
    with pytest.raises(DependencyError):
        assemble(run40, 10.0, P, 2, build_cache(run40, P, [10.0], depth=1))


def test_free_case_reduces_to_low_part():
    g = Grid(512.0, 4096)
    u0 = np.exp(-g.x ** 2 / 8 + 1j * g.x).astype(complex)
    tr = evolve(u0, PotentialSpec("zero"), EvolutionConfig(dt=0.05, T_hor=20.0, stride=4), g)
    c = build_cache(tr, P, [10.0, 20.0], u_plus=tr.u0, depth=2)
    for t in (10.0, 20.0):
        a1 = assemble(tr, t, P, 1, c)
        a2 = assemble(tr, t, P, 2, c)
        low = sum(proj("low", j, P, a1.v, g) for j in range(a1.J + 1))
        assert g.norm(a1.u_loc - low) < 1e-12
        assert g.norm(a2.u_loc - a1.u_loc) < 1e-12


def test_projected_duhamel_basics(run40):
    g = run40.grid
    assert np.all(projected_duhamel(0, "bwd", run40, 20.0, P) == 0)
    free = evolve(run40.u0, PotentialSpec("zero"), EvolutionConfig(dt=0.01, T_hor=4.0, stride=10), g)
    assert g.norm(projected_duhamel(2, "fwd", free, 2.0, P)) < 1e-12
    assert g.norm(projected_duhamel(2, "fwd", free, 2.0, P, source=free.states)) == 0
    with pytest.raises(DomainError):
        projected_duhamel(1, "sideways", run40, 2.0, P)


def test_projected_duhamel_refinement():
    g = Grid(100.0, 2048)
    tr = evolve(sech_state(g), PotentialSpec("breathing_sech2"), EvolutionConfig(dt=1e-3, T_hor=1.6, stride=5), g)
    t = 1.6
    ref = projected_duhamel(1, "fwd", tr, t, P)
    errs = []
    for s in (16, 8, 4):
        c = Trajectory(g, tr.times[::s], tr.states[::s], tr.u0, tr.potential)
        errs.append(g.norm(projected_duhamel(1, "fwd", c, t, P, source=c.states) - ref))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.min(orders) >= 1.9


def test_diagnostics_report(run40, tmp_path):
    times = [10, 20, 30, 40, 16, 32]
    rep = diagnostics(run40, MicrolocParams(n=2), 2, times)
    assert rep.consistent
    assert len(rep.times) == len(times)
    p = tmp_path / "d.csv"
    rep.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["t", "uloc_w_norm_k0", "uloc_w_norm_k1", "uloc_w_norm_k2", "urem_h1dot",
                       "consistency_h1dot", "uwb_tail_l2", "cook_increment"]
    assert len(rows) == len(times) + 1
    assert all(np.isfinite(float(v)) for r in rows[1:] for v in r)
    m = json.loads(report_manifest(rep))
    assert m["tolerance"] == 1e-8 and set(m["layers"]) == {"1", "2"}
    with pytest.raises(DomainError):
        diagnostics(run40, P, 1, [0.5])


def test_free_remainder_decays():
    g = Grid(2048.0, 8192)
    u0 = np.exp(-g.x ** 2 / 8).astype(complex)
    u0 /= g.norm(u0)
    tr = evolve(u0, PotentialSpec("zero"), EvolutionConfig(dt=0.05, T_hor=128.0, stride=4), g)
    rep = diagnostics(tr, P, 1, [16.0, 32.0, 64.0, 128.0], u_plus=tr.u0)
    assert np.all(np.diff(rep.urem_h1dot) < 0)
