import math

import numpy as np
import pytest

from rabispec.model import RabiParams
from rabispec.oracle import (SpinFockState, build_hamiltonian, eigen,
                             eigen_in_window, eigenvector_overlap)


def test_matrix_symmetric_and_banded():
    p = RabiParams(g=0.3, delta=0.7, epsilon=0.2)
    H = build_hamiltonian(p, 30)
    assert np.array_equal(H, H.T)
    # interleaved ordering keeps couplings within bandwidth 3
    for i in range(H.shape[0]):
        for j in range(H.shape[1]):
            if abs(i - j) > 3:
                assert H[i, j] == 0.0


def test_decoupled_limit_g0_eps0():
    p = RabiParams(g=0.0, delta=0.8, epsilon=0.0)
    vals = np.linalg.eigvalsh(build_hamiltonian(p, 40))
    expect = sorted([n + s * 0.8 for n in range(6) for s in (-1, 1)])
    assert np.allclose(vals[:8], expect[:8], atol=1e-12)


def test_polaron_limit_delta0_eps0():
    p = RabiParams(g=0.35, delta=0.0, epsilon=0.0)
    res = eigen(p, 6, tol=1e-10)
    expect = [0 - p.g ** 2, 0 - p.g ** 2, 1 - p.g ** 2, 1 - p.g ** 2,
              2 - p.g ** 2, 2 - p.g ** 2]
    assert np.allclose(res.eigenvalues, expect, atol=1e-9)


def test_spin_block_limit_g0():
    p = RabiParams(g=0.0, delta=0.8, epsilon=0.1)
    res = eigen(p, 4, tol=1e-11)
    s = math.sqrt(0.8 ** 2 + 0.1 ** 2)
    expect = sorted(n + sg * s for n in range(4) for sg in (-1, 1))[:4]
    assert np.allclose(res.eigenvalues, expect, atol=1e-12)


def test_eigen_convergence_metadata():
    p = RabiParams(g=0.2, delta=0.8, epsilon=0.1)
    res = eigen(p, 4, tol=1e-9)
    assert res.converged_count == 4
    assert res.cutoff_used <= 160
    assert np.all(np.diff(res.eigenvalues) >= 0)


def test_eigen_exceptional_anchor():
    res = eigen(RabiParams(g=0.2, delta=0.8, epsilon=0.1), 4, tol=1e-9)
    assert abs(res.eigenvalues[2] - 0.86) <= 1e-8


def test_eigenvalue_residuals():
    p = RabiParams(g=0.4, delta=0.9, epsilon=0.15)
    res = eigen(p, 5, tol=1e-9, want_vectors=True)
    H = build_hamiltonian(p, res.cutoff_used)
    hnorm = np.abs(np.linalg.eigvalsh(H)).max()
    for lam, state in zip(res.eigenvalues, res.eigenvectors):
        v = state.flatten()
        assert np.linalg.norm(H @ v - lam * v) <= 1e-9 * hnorm


def test_cutoff_monotonicity():
    p = RabiParams(g=0.5, delta=0.8, epsilon=0.1)
    a = np.linalg.eigvalsh(build_hamiltonian(p, 40))[:12]
    b = np.linalg.eigvalsh(build_hamiltonian(p, 80))[:12]
    assert np.all(b <= a + 1e-12)


def test_epsilon_reflection_symmetry():
    a = eigen(RabiParams(g=0.3, delta=0.8, epsilon=0.25), 8, tol=1e-10)
    b = eigen(RabiParams(g=0.3, delta=0.8, epsilon=-0.25), 8, tol=1e-10)
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) <= 1e-10


def test_eigen_in_window():
    p = RabiParams(g=0.2, delta=0.8, epsilon=0.1)
    res = eigen_in_window(p, -1.5, 1.5, tol=1e-9)
    assert len(res.eigenvalues) == 4
    assert np.all(res.eigenvalues >= -1.5) and np.all(res.eigenvalues <= 1.5)


def test_overlap_trivial_cases():
    p = RabiParams(g=0.3, delta=0.8, epsilon=0.1)
    res = eigen(p, 3, tol=1e-9, want_vectors=True)
    v0, v1 = res.eigenvectors[0], res.eigenvectors[1]
    assert eigenvector_overlap(v0, v0) == pytest.approx(1.0, abs=1e-12)
    assert eigenvector_overlap(v0, v1) == pytest.approx(0.0, abs=1e-10)


def test_overlap_pads_cutoffs():
    a = SpinFockState(np.array([[1.0, 0.0], [0.0, 0.0]]))
    b = SpinFockState(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))
    assert eigenvector_overlap(a, b) == pytest.approx(1.0, abs=1e-15)


def test_physical_units_accepted():
    # build_hamiltonian reduces internally; spectra scale with omega
    a = eigen(RabiParams(g=0.4, delta=1.6, epsilon=0.2, omega=2.0), 4)
    b = eigen(RabiParams(g=0.2, delta=0.8, epsilon=0.1), 4)
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-12)


def test_validation():
    p = RabiParams(g=0.2, delta=0.8, epsilon=0.1)
    with pytest.raises(ValueError):
        build_hamiltonian(p, 0)
    with pytest.raises(ValueError):
        eigen(p, 0)
    with pytest.raises(ValueError):
        eigen(p, 2, tol=-1.0)
