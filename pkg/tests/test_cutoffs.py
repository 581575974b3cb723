import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdseloc.cutoffs import (VariantKind, bump, chain_derivative, effective_scale, eval_cutoff, freq_symbol,
                             lp_project, psi, shell_resolvable, transition_function)
from tdseloc.errors import DomainError, UnsupportedOrderError
from tdseloc.spectral import Field, Grid

from conftest import random_field


def test_transition_values():
    assert transition_function(1.0) == 1.0
    assert transition_function(2.0) == 0.0
    assert transition_function(1.5) == pytest.approx(0.5, abs=1e-15)
    assert transition_function(-3.0) == 1.0


def test_bump_support_exact():
    x = np.linspace(0, 10, 20001)
    v = eval_cutoff("C", 2.0, 0, x)
    out = (x / 2 < 0.5) | (x / 2 > 2)
    assert np.all(v[out] == 0.0)
    assert eval_cutoff("C", 2.0, 0, 0.8) == 0.0


def test_spec_values():
    assert eval_cutoff("leC", 5.0, 0, 3.0) == 1.0
    tot = eval_cutoff("ltC", 2.0, 0, 5.0) + eval_cutoff("C", 2.0, 0, 5.0) + eval_cutoff("gtC", 2.0, 0, 5.0)
    assert tot == pytest.approx(1.0, abs=1e-15)


def test_partition_of_unity(rng):
    x = 2.0 ** rng.uniform(-10, 10, 1000)
    s = sum(bump(x / 2.0 ** j) for j in range(-14, 15))
    assert np.max(np.abs(s - 1)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(C=st.floats(1e-3, 1e3), x=st.floats(0, 1e4))
def test_triples_sum_to_one(C, x):
    a = sum(eval_cutoff(k, C, 0, x) for k in ("ltC", "C", "gtC"))
    b = sum(eval_cutoff(k, C, 0, x) for k in ("llC", "simC", "ggC"))
    assert a == pytest.approx(1.0, abs=1e-12)
    assert b == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(C=st.floats(1e-2, 1e2), x=st.floats(0, 1e3))
def test_scale_covariance(C, x):
    for kind in ("C", "leC", "geC"):
        assert eval_cutoff(kind, C, 0, x) == eval_cutoff(kind, 1.0, 0, x / C)


def test_derivative_finite_difference_order():
    x = np.linspace(1.05, 1.95, 37)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (psi(x + h) - psi(x - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - psi(x, 1))))
    order = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    assert min(order) >= 1.9


def test_chain_rule_helper():
    x = np.linspace(0.5, 6, 50)
    h = 1e-5
    fd = (eval_cutoff("C", 3.0, 0, x + h) - eval_cutoff("C", 3.0, 0, x - h)) / (2 * h)
    assert np.max(np.abs(chain_derivative("C", 3.0, 1, x) - fd)) < 1e-8
    assert effective_scale("gtC", 3.0) == 6.0
    with pytest.raises(DomainError):
        effective_scale("simC", 1.0)


def test_order_limit_and_bad_scale():
    with pytest.raises(UnsupportedOrderError):
        psi(1.2, 9)
    with pytest.raises(DomainError):
        eval_cutoff("C", 0.0, 0, 1.0)
    with pytest.raises(ValueError):
        VariantKind("nope")


def test_sign_split(small, rng):
    fh = random_field(rng, small.N)
    fh[small.nyquist_mask] = 0  # the Nyquist point carries no sign
    f = Field(small, np.fft.ifft(fh))
    for k in (-1, 1, 3):
        p = lp_project(k, "+", f)[0].data + lp_project(k, "-", f)[0].data
        assert np.max(np.abs(p - lp_project(k, "both", f)[0].data)) < 1e-12


def test_shell_sum_is_identity_minus_mean(small, rng):
    f = Field(small, random_field(rng, small.N))
    ks = [k for k in range(-12, 12) if shell_resolvable(small, k)]
    tot = sum(lp_project(k, "both", f)[0].data for k in ks)
    assert np.max(np.abs(tot - (f.data - f.data.mean()))) < 1e-12


def test_single_mode(small):
    k = 1
    idx = 2 ** (k - 1) / small.dxi
    xi0 = small.dxi * round(idx * 1.3)
    f = Field(small, np.exp(1j * xi0 * small.x))
    out = lp_project(k, "both", f)[0].data
    assert np.max(np.abs(out - bump(xi0 / 2.0 ** k) * f.data)) < 1e-12


def test_unresolvable_shell_flags(small):
    out, ok = lp_project(40, "both", Field(small, np.ones(small.N)))
    assert not ok and np.all(out.data == 0)


def test_nyquist_excluded_from_signed(small):
    assert freq_symbol(small, "geC", 1.0, "+")[small.nyquist_mask][0] == 0
    assert freq_symbol(small, "geC", 1.0, "-")[small.nyquist_mask][0] == 0
