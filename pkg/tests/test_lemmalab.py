import numpy as np
import pytest

from tdseloc import lemmalab as lab
from tdseloc.cutoffs import freq_cutoff, psi
from tdseloc.errors import DomainError, ResourceError
from tdseloc.potential import PotentialSpec, eval_potential
from tdseloc.propagator import OperatorSpec, free_propagate
from tdseloc.spectral import Grid


@pytest.fixture(scope="module")
def tiny():
    return Grid(8.0, 32)


def test_identity_matrix(tiny):
    A = lab.materialize(OperatorSpec.identity(), tiny)
    assert np.allclose(A.matrix, np.eye(tiny.N), atol=1e-14)


def test_multiplier_is_circulant(tiny):
    A = lab.materialize(OperatorSpec.fourier(freq_cutoff("C", 2.0)), tiny).matrix
    first = A[:, 0]
    for j in range(tiny.N):
        assert np.max(np.abs(A[:, j] - np.roll(first, j))) < 1e-12


def test_row_scaling(tiny):
    P2 = OperatorSpec.fourier(freq_cutoff("C", 4.0))
    w = lambda x: psi(np.abs(x) / 4)
    A = lab.materialize(OperatorSpec.mult(w) @ P2, tiny).matrix
    B = lab.materialize(P2, tiny).matrix
    assert np.max(np.abs(A - w(tiny.x)[:, None] * B)) < 1e-12


def test_spot_check_and_padding(tiny):
    big = lab.padded_grid(tiny, 4)
    spec = OperatorSpec.mult(lambda x: np.exp(-x * x)) @ OperatorSpec.free(0.7)
    D = lab.materialize(spec, big, tiny)
    assert D.shape == (big.N, tiny.N)
    assert D.spot_check() < 1e-12


def test_dense_size_limit():
    with pytest.raises(ResourceError):
        lab.materialize(OperatorSpec.identity(), Grid(64.0, 1024))


def test_operator_norm_examples(rng):
    assert lab.operator_norm(np.eye(10)) == pytest.approx(1.0, abs=1e-12)
    assert lab.operator_norm(np.diag([2.0] + [1.0] * 9)) == pytest.approx(2.0, abs=1e-10)
    M = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    assert lab.operator_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-8)
    # nearly degenerate top pair
    d = np.diag([1.0, 1.0 - 1e-9] + [0.5] * 30)
    assert lab.operator_norm(d) == pytest.approx(1.0, rel=1e-10)


def test_fit_decay():
    t = np.array([4.0, 8, 16, 32])
    fit = lab.fit_decay(t, 3 * t ** -2.5, threshold=-2)
    assert fit.slope == pytest.approx(-2.5, abs=1e-12) and fit.passed
    with pytest.raises(DomainError):
        lab.fit_decay(t[:3], t[:3])


def test_kernel_threshold_precondition():
    with pytest.raises(DomainError, match="threshold"):
        lab.check_kernel_decay(j=3, k_range=(0,), t_samples=(4, 16, 32, 64))


def test_kernel_hard_bound():
    r = lab.check_kernel_decay(j=3, k_range=(0,), m=1, t_samples=(16, 32, 64, 128))
    fit = r["by_k"][0]
    assert fit.extra["hard_ok"]
    assert all(n <= fit.extra["multiplier_bound"] * (1 + 1e-6) for n in fit.norms)


def test_separation_overlap_flag():
    assert lab.separation_norm(None, 0) > 0.1
    r = lab.check_support_separation(extended=None)
    assert r["overlap_inapplicable"] and r["passed"]


def test_symmetrization_identities(rng):
    A = rng.standard_normal((16, 16))
    C = 2 * A @ A - A + np.eye(16)
    B = rng.standard_normal((16, 16))
    I = np.eye(16)
    assert lab.symmetrization_residual(A, I, C) < 1e-13
    assert lab.symmetrization_residual(I, B, I) < 1e-15
    assert lab.check_symmetrization(16, 100)["max_residual"] <= 1e-12


def test_weight_inequalities():
    r = lab.check_weight_inequalities(alpha=1.0, rho=1.0)
    assert r["max_ratio"] <= 1.0 + 1e-12
    r = lab.check_weight_inequalities(alpha=0.5, rho=0.5, samples=10_000)
    assert np.isfinite(r["max_ratio"])
    with pytest.raises(DomainError):
        lab.check_weight_inequalities(alpha=0.3, rho=0.5)


def test_constant_weight_commutator():
    r = lab.check_commutator_scaling(alpha=0.0)
    assert r["trivial"] and r["max_norm"] == 0.0


def test_breathing_source_integral():
    g = Grid(64.0, 512)
    V = PotentialSpec("breathing_sech2")
    src = np.exp(-g.x ** 2 / 8)
    assert np.all(lab._duhamel_breathing(g, V, np.zeros(g.N), 3.0) == 0)
    t, n = 3.0, 3000
    s = np.linspace(0, t, n + 1)
    vals = np.array([free_propagate(eval_potential(V, g.x, si) * src, t - si, g) for si in s])
    quad = (vals[0] + vals[-1]) / 2 + vals[1:-1].sum(axis=0)
    quad *= t / n
    assert g.norm(lab._duhamel_breathing(g, V, src, t) - quad) < 1e-5


def test_space_freq_trivial_regime():
    small = lab.small_grid()
    big = lab.padded_grid(small, 16)
    assert lab._space_freq_norm(small, big, 1.0, 0.4, 0.4, 0.2) <= 1 + 1e-12


def test_space_freq_rejects_delta():
    with pytest.raises(DomainError, match="delta"):
        lab.check_space_freq_decay(delta=0.6)


def test_report_writer(tmp_path):
    res = {"symmetrization": lab.check_symmetrization(8, 5)}
    lab.write_report(lab._jsonable(res), tmp_path / "r.json")
    import json
    rows = json.loads((tmp_path / "r.json").read_text())
    assert rows[0]["lemma"] == "symmetrization" and rows[0]["passed"]
