import math

import numpy as np
import pytest

from rabispec.analytic import FIRST, MINUS, PLUS, SECOND, build_pair
from rabispec.exceptional import candidate_energy
from rabispec.model import RabiParams
from rabispec import oracle
from rabispec.states import (PolynomialWavefunction, closed_form_state_check,
                             component_polynomials, fock_expand,
                             reconstruct_exceptional_state, reexpand)

P_EXC = RabiParams(g=0.2, delta=0.8, epsilon=0.1)
JUDD = RabiParams(g=0.3, delta=0.8, epsilon=0.0)


def _exc_pair():
    return build_pair(SECOND, candidate_energy(1, MINUS, P_EXC), P_EXC)


def test_component_polynomials_known_point():
    plus, minus = component_polynomials(_exc_pair())
    assert plus == pytest.approx([1.0], abs=1e-12)
    assert minus == pytest.approx([0.9, -0.5], abs=1e-12)


def test_reexpand_combines_components():
    pw1, pw2 = reexpand(_exc_pair())
    assert pw1.component == "psi1" and pw2.component == "psi2"
    assert pw1.prefactor_sign == P_EXC.g and pw2.prefactor_sign == P_EXC.g
    assert pw1.poly_coeffs == pytest.approx([1.9, -0.5], abs=1e-12)
    assert pw2.poly_coeffs == pytest.approx([0.1, 0.5], abs=1e-12)


def test_reexpand_first_family_constant_minus():
    # plus-branch N = 1 locus: psi_- is the constant delta/(1 + 2 eps)
    E = candidate_energy(1, PLUS, JUDD)
    plus, minus = component_polynomials(build_pair(FIRST, E, JUDD))
    assert len(minus) == 1
    assert minus[0] == pytest.approx(JUDD.delta / (1 + 2 * JUDD.epsilon), rel=1e-12)
    assert len(plus) == 2      # degree equals the truncation index


def test_reexpand_requires_truncated():
    pair = build_pair(SECOND, 0.5, P_EXC)     # generic energy: infinite series
    with pytest.raises(ValueError):
        reexpand(pair)


def test_fock_expand_coherent_state():
    # poly = 1 with exponent -g gives coherent-state amplitudes (-g)^k/sqrt(k!)
    g = 0.4
    pw1 = PolynomialWavefunction(-g, np.array([1.0]), "psi1")
    pw2 = PolynomialWavefunction(-g, np.array([0.0]), "psi2")
    st = fock_expand(pw1, pw2, 40)
    ref = np.array([(-g) ** k / math.sqrt(math.factorial(k)) for k in range(41)])
    ref /= np.linalg.norm(ref)
    assert st.amplitudes[:, 1] == pytest.approx(list(ref), abs=1e-12)
    assert np.all(st.amplitudes[:, 0] == 0.0)


def test_fock_expand_norm_and_tail():
    st = reconstruct_exceptional_state(P_EXC, MINUS, n_c=60)
    assert st.norm == pytest.approx(1.0, abs=1e-12)
    peak = np.max(np.abs(st.amplitudes))
    assert np.max(np.abs(st.amplitudes[-1])) < 1e-14 * peak


def test_fock_expand_cutoff_too_small():
    pw1, pw2 = reexpand(_exc_pair())
    with pytest.raises(ValueError):
        fock_expand(pw1, pw2, 3)


def test_fock_expand_mismatched_prefactors():
    pw1 = PolynomialWavefunction(0.2, np.array([1.0]), "psi1")
    pw2 = PolynomialWavefunction(-0.2, np.array([1.0]), "psi2")
    with pytest.raises(ValueError):
        fock_expand(pw1, pw2, 20)


def test_amplitude_tail_decays():
    st = reconstruct_exceptional_state(P_EXC, MINUS, n_c=60)
    mags = np.abs(st.amplitudes).max(axis=1)
    start = 8      # beyond g^2 + N + 5
    assert np.all(np.diff(mags[start:]) <= 1e-16)


def test_overlap_with_oracle_eigenvector():
    st = reconstruct_exceptional_state(P_EXC, MINUS, n_c=60)
    res = oracle.eigen(P_EXC, 4, tol=1e-10, want_vectors=True)
    i = int(np.argmin(np.abs(res.eigenvalues - 0.86)))
    assert oracle.eigenvector_overlap(st, res.eigenvectors[i]) >= 1 - 1e-8


def test_hamiltonian_residual():
    for p, branch in [(P_EXC, MINUS), (JUDD, PLUS), (JUDD, MINUS)]:
        E = candidate_energy(1, branch, p)
        st = reconstruct_exceptional_state(p, branch, n_c=60)
        H = oracle.build_hamiltonian(p, st.cutoff)
        v = st.flatten()
        hnorm = np.abs(np.linalg.eigvalsh(H)).max()
        assert np.linalg.norm(H @ v - E * v) <= 1e-8 * hnorm


def test_closed_form_state_checks():
    assert closed_form_state_check(P_EXC, MINUS) <= 1e-10
    assert closed_form_state_check(JUDD, PLUS) <= 1e-10
    assert closed_form_state_check(JUDD, MINUS) <= 1e-10


def test_closed_form_state_check_off_locus():
    with pytest.raises(ValueError):
        closed_form_state_check(RabiParams(g=0.25, delta=0.8, epsilon=0.1), MINUS)
