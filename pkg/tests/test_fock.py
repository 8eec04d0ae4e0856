"""Basis enumeration, operators, and conservation laws."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsource.fock import (
    LEVELS,
    SystemParams,
    annihilator,
    box_basis,
    build_hamiltonian,
    build_mode_operators,
    charge_basis,
    charge_operator,
    enumerate_basis,
    level_projector,
    state,
    transition,
)


def _params(**overrides):
    kwargs = dict(
        g_p=0.1, g_s=0.1, omega_s_drive=2.0, omega_p_drive=0.01,
        gamma_p=20.0, gamma_s=1.0,
    )
    kwargs.update(overrides)
    return SystemParams(**kwargs)


class TestBases:
    def test_box_dimension(self):
        assert box_basis(2, 4).dim == 3 * 5 * 4

    def test_box_ordering_deterministic(self):
        b1, b2 = box_basis(2, 4), box_basis(2, 4)
        assert b1.states == b2.states
        assert list(b1.states) == sorted(b1.states)

    def test_charge_basis_charges(self):
        for c in range(6):
            b = charge_basis(c)
            assert b.dim > 0
            assert all(s.charge == c for s in b.states)

    def test_charge_zero_is_vacuum(self):
        b = charge_basis(0)
        assert b.states == (state(0, 0, "g"),)

    def test_charge_one_states(self):
        b = charge_basis(1)
        assert set(b.states) == {state(0, 1, "g"), state(0, 0, "m1"), state(0, 0, "m2")}

    def test_charge_two_dimension(self):
        # |1,0,g>, |0,2,g>, |0,1,m1>, |0,1,m2>, |0,0,e>
        assert charge_basis(2).dim == 5

    def test_enumerate_dispatch(self):
        assert enumerate_basis("box", n_p_max=1, n_s_max=1).dim == box_basis(1, 1).dim
        assert enumerate_basis("charge", charge=3).dim == charge_basis(3).dim
        with pytest.raises(ValueError):
            enumerate_basis("ring")

    def test_invalid_cutoffs(self):
        with pytest.raises(ValueError):
            box_basis(-1, 2)
        with pytest.raises(ValueError):
            charge_basis(-1)


class TestOperators:
    def test_annihilator_matrix_elements(self):
        basis = box_basis(2, 4)
        a_s = annihilator(basis, "a_s").matrix
        i = basis.index[state(0, 1, "g")]
        j = basis.index[state(0, 2, "g")]
        assert a_s[i, j] == pytest.approx(np.sqrt(2.0))

    def test_commutator_on_interior_states(self):
        basis = box_basis(3, 3)
        a_p = annihilator(basis, "a_p").matrix
        comm = a_p @ a_p.conj().T - a_p.conj().T @ a_p
        for s in basis.states:
            if s.n_p < 3:  # identity holds away from the cutoff edge
                i = basis.index[s]
                assert comm[i, i] == pytest.approx(1.0)

    def test_charge_annihilator_codomain(self):
        b3 = charge_basis(3)
        a_s = annihilator(b3, "a_s")
        assert a_s.codomain_id == charge_basis(2).basis_id
        assert a_s.matrix.shape == (charge_basis(2).dim, b3.dim)
        a_p = annihilator(b3, "a_p")
        assert a_p.codomain_id == charge_basis(1).basis_id

    def test_projectors_idempotent_and_complete(self):
        basis = box_basis(1, 2)
        total = np.zeros((basis.dim, basis.dim), dtype=complex)
        for lev in LEVELS:
            p = level_projector(basis, lev).matrix
            np.testing.assert_allclose(p @ p, p, atol=1e-15)
            total += p
        np.testing.assert_allclose(total, np.eye(basis.dim), atol=1e-15)

    def test_transition_conjugation(self):
        basis = box_basis(1, 2)
        sig = transition(basis, "e", "g").matrix  # |g><e|
        p_e = level_projector(basis, "e").matrix
        np.testing.assert_allclose(sig.conj().T @ sig, p_e, atol=1e-15)

    def test_mode_operator_bundle(self):
        ops = build_mode_operators(box_basis(1, 1))
        for key in ("a_p", "a_s", "P_g", "P_e", "sigma_ge", "sigma_m1m2"):
            assert key in ops


class TestHamiltonian:
    def test_hermitian(self):
        h = build_hamiltonian(_params(), box_basis(2, 4)).matrix
        np.testing.assert_allclose(h, h.conj().T, atol=1e-15)

    def test_known_matrix_elements(self):
        p = _params()
        basis = box_basis(2, 4)
        h = build_hamiltonian(p, basis).matrix
        # pump emission: <1,0,g| H |0,0,e> = g_p
        assert h[basis.index[state(1, 0, "g")], basis.index[state(0, 0, "e")]] == p.g_p
        # control drive: <0,0,m2| H |0,0,m1> = Omega_s
        assert (
            h[basis.index[state(0, 0, "m2")], basis.index[state(0, 0, "m1")]]
            == p.omega_s_drive
        )
        # signal emission with bosonic factor: <0,2,g| H |0,1,m1> = g_s sqrt(2)
        assert h[
            basis.index[state(0, 2, "g")], basis.index[state(0, 1, "m1")]
        ] == pytest.approx(p.g_s * np.sqrt(2.0))

    def test_charge_conservation_exact(self):
        p = _params()
        for basis in (box_basis(2, 4), charge_basis(4)):
            h = build_hamiltonian(p, basis).matrix
            c = charge_operator(basis).matrix
            assert np.abs(h @ c - c @ h).max() == 0.0

    def test_detuning_term(self):
        basis = box_basis(1, 2)
        h0 = build_hamiltonian(_params(), basis).matrix
        hk = build_hamiltonian(_params(k0=0.4), basis).matrix
        expected = h0 - 0.2 * np.diag(basis.charges())
        np.testing.assert_allclose(hk, expected, atol=1e-15)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            _params(gamma_p=0.0)
        with pytest.raises(ValueError):
            _params(gamma_star=-1.0)
        with pytest.raises(ValueError):
            _params(g_p=-0.1)


@settings(max_examples=25, deadline=None)
@given(
    n_p=st.integers(min_value=0, max_value=3),
    n_s=st.integers(min_value=0, max_value=4),
    g_p=st.floats(min_value=0.0, max_value=1.0),
    g_s=st.floats(min_value=0.0, max_value=1.0),
    omega_s=st.floats(min_value=0.0, max_value=10.0),
)
def test_hamiltonian_properties(n_p, n_s, g_p, g_s, omega_s):
    p = _params(g_p=g_p, g_s=g_s, omega_s_drive=omega_s)
    basis = box_basis(n_p, n_s)
    h = build_hamiltonian(p, basis).matrix
    c = charge_operator(basis).matrix
    np.testing.assert_allclose(h, h.conj().T, atol=1e-14)
    assert np.abs(h @ c - c @ h).max() == 0.0


@settings(max_examples=20, deadline=None)
@given(c=st.integers(min_value=0, max_value=8))
def test_charge_basis_counts(c):
    b = charge_basis(c)
    # independent count: states per level weight w with 2 n_p + n_s = c - w
    expect = sum(
        (c - w) // 2 + 1 for w in (0, 1, 1, 2) if c - w >= 0
    )
    assert b.dim == expect
