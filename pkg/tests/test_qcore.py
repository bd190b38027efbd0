"""Core operator layer: validation, tensor algebra, partial trace, randomness."""

import numpy as np
import pytest

from qwitness.qcore import (
    ATOL_EXACT,
    ATOL_STRUCT,
    DensityMatrix,
    LayoutError,
    RandomSpec,
    RegisterLayout,
    StateValidationError,
    basis_ket,
    commutator_hs,
    conjugate_by_unitary,
    ginibre_state,
    partial_trace,
    partial_trace_operator,
    pure_state,
    random_density,
    tensor_product,
    validate_density,
)

P0 = np.array([[1.0, 0.0], [0.0, 0.0]])
P1 = np.array([[0.0, 0.0], [0.0, 1.0]])
PLUS = np.full((2, 2), 0.5)


class TestDensityMatrix:
    def test_maximally_mixed_is_valid(self):
        state = DensityMatrix(np.eye(2) / 2.0)
        assert state.dim == 2
        np.testing.assert_allclose(state.purity(), 0.5, atol=1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(StateValidationError, match="Hermitian") as info:
            DensityMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert info.value.check == "hermiticity"

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(StateValidationError, match="negative eigenvalue") as info:
            DensityMatrix(np.diag([1.2, -0.2]))
        assert info.value.check == "positivity"

    def test_rejects_bad_trace(self):
        with pytest.raises(StateValidationError, match="trace"):
            DensityMatrix(np.diag([1.0, 0.5]))

    def test_rejects_non_square(self):
        with pytest.raises(StateValidationError):
            DensityMatrix(np.ones((2, 3)))

    def test_rejects_nan(self):
        m = np.eye(2, dtype=complex) / 2.0
        m[0, 1] = np.nan
        with pytest.raises(StateValidationError):
            DensityMatrix(m)

    def test_matrix_is_read_only(self):
        state = DensityMatrix(np.eye(2) / 2.0)
        with pytest.raises(ValueError):
            state.matrix[0, 0] = 3.0

    def test_eigenvalues_sum_to_one(self):
        rng = np.random.default_rng(11)
        state = ginibre_state(4, 3, rng)
        evals = state.eigenvalues()
        np.testing.assert_allclose(evals.sum(), 1.0, atol=1e-12)
        assert evals.min() >= -ATOL_STRUCT

    def test_pure_state_has_unit_purity(self):
        ket = np.array([1.0, 1.0j, -1.0]) / np.sqrt(3.0)
        np.testing.assert_allclose(pure_state(ket).purity(), 1.0, atol=1e-12)


class TestValidateDensity:
    def test_returns_density_matrix(self):
        state = validate_density(np.eye(2) / 2.0)
        assert isinstance(state, DensityMatrix)

    def test_failure_names_check_and_magnitude(self):
        try:
            validate_density(np.diag([1.3, -0.3]))
        except StateValidationError as exc:
            assert exc.check == "positivity"
            assert exc.magnitude == pytest.approx(-0.3, abs=1e-12)
        else:
            pytest.fail("expected StateValidationError")


class TestTensorProduct:
    def test_basis_projectors(self):
        # |0><0| (x) |1><1| occupies the (0,1) slot of the 2x2 grid
        np.testing.assert_array_equal(
            tensor_product(P0, P1), np.diag([0.0, 1.0, 0.0, 0.0])
        )

    def test_identity_factors(self):
        np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_trace_multiplicative(self):
        prod = tensor_product(np.eye(2) / 2.0, np.eye(2) / 2.0)
        np.testing.assert_allclose(np.trace(prod), 1.0, atol=1e-15)

    def test_accepts_density_matrix_inputs(self):
        out = tensor_product(DensityMatrix(P0), DensityMatrix(P1))
        np.testing.assert_array_equal(out, np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_associative_exactly_on_binary_entries(self):
        # 0/1 entries multiply without rounding, so equality is bitwise
        a, b, c = P0, P1, np.eye(2)
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        np.testing.assert_array_equal(left, right)

    def test_associative_to_rounding_on_random_states(self):
        # product rounding order differs between the two groupings
        rng = np.random.default_rng(7)
        a = ginibre_state(2, 2, rng).matrix
        b = ginibre_state(3, 1, rng).matrix
        c = ginibre_state(2, 1, rng).matrix
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        np.testing.assert_allclose(left, right, atol=1e-14)


class TestPartialTrace:
    def test_product_state_reduces_to_factor(self):
        rng = np.random.default_rng(3)
        rho_a = ginibre_state(2, 2, rng)
        rho_b = ginibre_state(3, 2, rng)
        joint = DensityMatrix(tensor_product(rho_a, rho_b))
        layout = RegisterLayout((2, 3))
        reduced = partial_trace(joint, layout, keep=(0,))
        np.testing.assert_allclose(reduced.matrix, rho_a.matrix, atol=1e-12)
        reduced_b = partial_trace(joint, layout, keep=(1,))
        np.testing.assert_allclose(reduced_b.matrix, rho_b.matrix, atol=1e-12)

    def test_entangled_pair_reduces_to_maximally_mixed(self):
        ket = np.zeros(4)
        ket[0] = ket[3] = 1.0 / np.sqrt(2.0)
        joint = pure_state(ket)
        reduced = partial_trace(joint, RegisterLayout((2, 2)), keep=(1,))
        np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2.0, atol=1e-12)

    def test_trace_over_everything_gives_unit_scalar(self):
        rng = np.random.default_rng(5)
        state = ginibre_state(6, 6, rng)
        out = partial_trace(state, RegisterLayout((2, 3)), keep=())
        np.testing.assert_allclose(out.matrix, [[1.0]], atol=1e-12)

    def test_composition_matches_single_step(self):
        """Tracing out factors one at a time equals tracing them at once."""
        rng = np.random.default_rng(8)
        state = ginibre_state(12, 5, rng)
        layout = RegisterLayout((2, 3, 2))
        at_once = partial_trace(state, layout, keep=(0,))
        step1 = partial_trace(state, layout, keep=(0, 1))
        step2 = partial_trace(step1, RegisterLayout((2, 3)), keep=(0,))
        np.testing.assert_allclose(at_once.matrix, step2.matrix, atol=1e-12)

    def test_output_is_valid_density(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            state = ginibre_state(8, int(rng.integers(1, 9)), rng)
            reduced = partial_trace(state, RegisterLayout((2, 2, 2)), keep=(0, 2))
            assert isinstance(reduced, DensityMatrix)

    def test_layout_mismatch_raises(self):
        state = DensityMatrix(np.eye(4) / 4.0)
        with pytest.raises(LayoutError):
            partial_trace(state, RegisterLayout((2, 3)), keep=(0,))

    def test_bad_keep_index_raises(self):
        state = DensityMatrix(np.eye(4) / 4.0)
        with pytest.raises(LayoutError):
            partial_trace(state, RegisterLayout((2, 2)), keep=(2,))

    def test_operator_level_variant_keeps_unnormalized_trace(self):
        # scaled input stays scaled: the operator path does not renormalize
        out = partial_trace_operator(np.eye(4) * 0.5, RegisterLayout((2, 2)), keep=(0,))
        np.testing.assert_allclose(out, np.eye(2), atol=1e-15)


class TestCommutatorHS:
    def test_self_commutator_vanishes(self):
        rng = np.random.default_rng(13)
        rho = ginibre_state(3, 3, rng)
        comm, norm_sq = commutator_hs(rho, rho)
        np.testing.assert_allclose(comm, np.zeros((3, 3)), atol=1e-15)
        assert norm_sq == 0.0

    def test_projector_pair_oracle(self):
        """[P0, P+] = [[0, 1/4... ]] has squared HS norm 1/2 (by hand:
        P0 P+ - P+ P0 = [[0, 1/2], [-1/2, 0]], two entries of 1/4 each)."""
        comm, norm_sq = commutator_hs(P0, PLUS)
        np.testing.assert_allclose(
            comm, np.array([[0.0, 0.5], [-0.5, 0.0]]), atol=1e-15
        )
        np.testing.assert_allclose(norm_sq, 0.5, atol=1e-15)

    def test_diagonal_matrices_commute(self):
        _, norm_sq = commutator_hs(np.diag([0.25, 0.75]), np.diag([0.9, 0.1]))
        assert norm_sq == 0.0

    def test_norm_nonnegative_and_zero_iff_commuting(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            a = ginibre_state(3, 2, rng)
            b = ginibre_state(3, 3, rng)
            comm, norm_sq = commutator_hs(a, b)
            assert norm_sq >= 0.0
            if norm_sq == 0.0:
                assert np.max(np.abs(comm)) <= ATOL_STRUCT

    def test_dim_mismatch_raises(self):
        with pytest.raises(LayoutError):
            commutator_hs(np.eye(2), np.eye(3))

    def test_matches_trace_definition(self):
        rng = np.random.default_rng(19)
        a = ginibre_state(4, 2, rng).matrix
        b = ginibre_state(4, 4, rng).matrix
        comm, norm_sq = commutator_hs(a, b)
        oracle = np.trace(comm.conj().T @ comm).real
        np.testing.assert_allclose(norm_sq, oracle, atol=ATOL_EXACT)


class TestRandomDensity:
    def test_full_rank_unit_trace(self):
        state = random_density(RandomSpec(dim=4, rank=4, seed=21))
        np.testing.assert_allclose(np.trace(state.matrix), 1.0, atol=1e-12)

    def test_rank_one_is_pure(self):
        state = random_density(RandomSpec(dim=3, rank=1, seed=22))
        np.testing.assert_allclose(state.purity(), 1.0, atol=1e-10)

    def test_reproducible(self):
        a = random_density(RandomSpec(dim=5, rank=3, seed=23))
        b = random_density(RandomSpec(dim=5, rank=3, seed=23))
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_distinct_seeds_differ(self):
        a = random_density(RandomSpec(dim=3, rank=3, seed=1))
        b = random_density(RandomSpec(dim=3, rank=3, seed=2))
        assert np.max(np.abs(a.matrix - b.matrix)) > 1e-3

    def test_rank_controls_spectrum(self):
        state = random_density(RandomSpec(dim=5, rank=2, seed=24))
        assert np.sum(state.eigenvalues() > 1e-10) == 2

    def test_rank_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            RandomSpec(dim=3, rank=4, seed=0)
        with pytest.raises(ValueError):
            RandomSpec(dim=3, rank=0, seed=0)


class TestConjugateByUnitary:
    def test_identity_leaves_state(self):
        rng = np.random.default_rng(29)
        rho = ginibre_state(3, 2, rng)
        out = conjugate_by_unitary(rho, np.eye(3))
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_bit_flip(self):
        flip = np.array([[0.0, 1.0], [1.0, 0.0]])
        out = conjugate_by_unitary(DensityMatrix(P0), flip)
        np.testing.assert_allclose(out.matrix, P1, atol=1e-15)

    def test_spectrum_preserved(self):
        rng = np.random.default_rng(31)
        rho = ginibre_state(4, 3, rng)
        # Haar-ish unitary from QR of a Ginibre draw
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u, _ = np.linalg.qr(g)
        out = conjugate_by_unitary(rho, u)
        np.testing.assert_allclose(
            out.eigenvalues(), rho.eigenvalues(), atol=1e-10
        )

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            conjugate_by_unitary(DensityMatrix(np.eye(2) / 2.0), np.diag([1.0, 2.0]))


class TestLayoutAndKets:
    def test_layout_total_dim(self):
        layout = RegisterLayout((2, 3, 4))
        assert layout.total_dim == 24
        assert layout.n_factors == 3

    def test_empty_layout_rejected(self):
        with pytest.raises(LayoutError):
            RegisterLayout(())

    def test_nonpositive_dim_rejected(self):
        with pytest.raises(LayoutError):
            RegisterLayout((2, 0))

    def test_basis_ket(self):
        np.testing.assert_array_equal(basis_ket(1, 3), [0.0, 1.0, 0.0])
        with pytest.raises(ValueError):
            basis_ket(3, 3)

    def test_pure_state_normalizes(self):
        state = pure_state(np.array([1.0, 1.0]))  # norm sqrt(2), rescaled
        np.testing.assert_allclose(state.matrix, PLUS, atol=1e-15)
        with pytest.raises(StateValidationError):
            pure_state(np.zeros(2))
