import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezedmech.errors import InvalidStateError, InvalidTruncationError, SpecMismatchError
from squeezedmech.fock import (QOperator, QState, TruncationSpec, annihilation, coherent_state,
                               commutator, embed, expectation, fock_state, identity,
                               mode_operators, number, pure_state, tensor, thermal_state)

dims_strategy = st.lists(st.integers(2, 5), min_size=1, max_size=3).map(tuple)


class TestTruncationSpec:
    def test_total_dim(self):
        assert TruncationSpec((3, 4, 2)).total_dim == 24

    @pytest.mark.parametrize("dims", [(1,), (3, 1), (0, 4), ()])
    def test_rejects_small_cutoffs(self, dims):
        with pytest.raises(InvalidTruncationError):
            TruncationSpec(dims)

    def test_mode_zero_is_most_significant(self):
        spec = TruncationSpec((2, 3))
        assert spec.index((1, 0)) == 3
        assert spec.index((0, 2)) == 2

    @given(dims_strategy, st.data())
    def test_index_round_trip(self, dims, data):
        spec = TruncationSpec(dims)
        i = data.draw(st.integers(0, spec.total_dim - 1))
        assert spec.index(spec.occupations(i)) == i

    def test_index_outside_cutoff(self):
        with pytest.raises(InvalidTruncationError):
            TruncationSpec((2, 2)).index((2, 0))

    def test_low_excitation_indices(self):
        spec = TruncationSpec((4, 4))
        idx = spec.low_excitation_indices(1)
        assert sorted(spec.occupations(i) for i in idx) == [(0, 0), (0, 1), (1, 0), (1, 1)]


class TestAnnihilation:
    def test_dim_two(self):
        np.testing.assert_array_equal(annihilation(2).toarray(), [[0, 1], [0, 0]])

    def test_ladder_action(self):
        a = annihilation(4).toarray()
        np.testing.assert_array_equal(a @ np.eye(4)[1], np.eye(4)[0])
        assert a[2, 3] == pytest.approx(math.sqrt(3), abs=1e-15)

    def test_dim_too_small(self):
        with pytest.raises(InvalidTruncationError):
            annihilation(1)

    def test_number_diagonal(self):
        np.testing.assert_allclose(number(5).toarray(), np.diag(np.arange(5.0)))

    @given(st.integers(2, 12))
    def test_commutator_identity_below_edge(self, d):
        a = annihilation(d)
        c = commutator(a, a.dag()).toarray()
        np.testing.assert_allclose(c[:d - 1, :d - 1], np.eye(d - 1), rtol=0, atol=1e-14)
        assert c[d - 1, d - 1] == pytest.approx(-(d - 1), abs=1e-13)


class TestAlgebra:
    def test_adjoint_involution_exact(self):
        x = QOperator(TruncationSpec((3,)), np.arange(9).reshape(3, 3) * (1 + 2j))
        assert (x.dag().dag().data != x.data).nnz == 0

    @given(st.integers(0, 2**32 - 1))
    def test_adjoint_of_sum(self, seed):
        rng = np.random.default_rng(seed)
        spec = TruncationSpec((3, 2))
        X = QOperator(spec, rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        Y = QOperator(spec, rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        np.testing.assert_allclose((X + Y).dag().toarray(), (X.dag() + Y.dag()).toarray())

    def test_spec_mismatch(self):
        x = identity(TruncationSpec((2, 3)))
        y = identity(TruncationSpec((3, 2)))
        for op in (lambda: x + y, lambda: x - y, lambda: x @ y):
            with pytest.raises(SpecMismatchError):
                op()

    def test_shape_mismatch(self):
        with pytest.raises(SpecMismatchError):
            QOperator(TruncationSpec((3,)), np.eye(4))

    def test_inputs_not_mutated(self):
        a = annihilation(3)
        before = a.toarray().copy()
        _ = 2.0 * a + a.dag() @ a - a / 3
        np.testing.assert_array_equal(a.toarray(), before)


class TestEmbed:
    def test_lowering_first_mode(self):
        spec = TruncationSpec((2, 2))
        a0 = embed(annihilation(2), 0, spec).toarray()
        np.testing.assert_array_equal(a0 @ np.eye(4)[spec.index((1, 0))], np.eye(4)[0])

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_identity(self, k):
        spec = TruncationSpec((2, 3, 2))
        eye = identity(TruncationSpec((spec.dims[k],)))
        np.testing.assert_array_equal(embed(eye, k, spec).toarray(), np.eye(12))

    def test_distinct_modes_commute(self):
        a0, a1 = mode_operators(TruncationSpec((3, 4)))
        assert commutator(a0, a1.dag()).data.nnz == 0

    def test_errors(self):
        spec = TruncationSpec((2, 3))
        with pytest.raises(InvalidTruncationError):
            embed(annihilation(2), 2, spec)
        with pytest.raises(SpecMismatchError):
            embed(annihilation(3), 0, spec)

    @settings(max_examples=30)
    @given(dims_strategy, st.data())
    def test_spectrum_preserved(self, dims, data):
        spec = TruncationSpec(dims)
        k = data.draw(st.integers(0, spec.n_modes - 1))
        d = dims[k]
        x = number(d) + 0.3 * (annihilation(d) + annihilation(d).dag())
        lam = np.sort(np.linalg.eigvalsh(x.toarray()))
        big = np.sort(np.linalg.eigvalsh(embed(x, k, spec).toarray()))
        np.testing.assert_allclose(big, np.repeat(lam, spec.total_dim // d), atol=1e-12)


class TestStates:
    def test_vacuum_projector(self):
        np.testing.assert_array_equal(fock_state(TruncationSpec((3,)), (0,)).rho, np.diag([1, 0, 0]))

    def test_fock_occupation_too_high(self):
        with pytest.raises(InvalidTruncationError):
            fock_state(TruncationSpec((3,)), (3,))

    def test_coherent_mean(self):
        psi = coherent_state(20, 1.0)
        assert abs(expectation(psi, number(20)) - 1.0) < 1e-6

    def test_coherent_zero_is_vacuum(self):
        np.testing.assert_allclose(coherent_state(20, 0.0).rho, fock_state(TruncationSpec((20,)), (0,)).rho)

    @pytest.mark.parametrize("dim, alpha", [(8, 1.5), (20, 2.5), (10, 1.2)])
    def test_coherent_too_large(self, dim, alpha):
        with pytest.raises(InvalidTruncationError):
            coherent_state(dim, alpha)

    def test_expectations(self):
        spec = TruncationSpec((4,))
        assert expectation(fock_state(spec, (0,)), number(4)) == 0
        assert expectation(fock_state(spec, (2,)), number(4)) == 2

    def test_state_validation(self):
        spec = TruncationSpec((2,))
        with pytest.raises(InvalidStateError):
            QState(spec, [[0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(InvalidStateError):
            QState(spec, [[0.6, 0], [0, 0.6]])
        with pytest.raises(InvalidStateError):
            QState(spec, [[1.1, 0], [0, -0.1]])

    def test_state_read_only(self):
        rho = fock_state(TruncationSpec((2,)), (1,)).rho
        with pytest.raises(ValueError):
            rho[0, 0] = 1

    def test_thermal_mean(self):
        assert expectation(thermal_state(60, 0.5), number(60)).real == pytest.approx(0.5, abs=1e-9)

    def test_tensor_order(self):
        rho = tensor(fock_state(TruncationSpec((2,)), (1,)), fock_state(TruncationSpec((3,)), (0,)))
        assert rho.spec.dims == (2, 3)
        assert rho.rho[rho.spec.index((1, 0)), rho.spec.index((1, 0))] == 1

    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1), dims_strategy)
    def test_constructor_invariants_and_expectation(self, seed, dims):
        rng = np.random.default_rng(seed)
        spec = TruncationSpec(dims)
        n = spec.total_dim
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        state = pure_state(spec, psi)
        rho = state.rho
        assert np.abs(rho - rho.conj().T).max() <= 1e-12
        assert abs(np.trace(rho) - 1) <= 1e-10
        assert state.min_eigenvalue() >= -1e-8
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Xh = QOperator(spec, X + X.conj().T)
        value = expectation(state, Xh)
        assert value == pytest.approx(np.trace(rho @ Xh.toarray()), abs=1e-10)
        assert abs(value.imag) < 1e-10
