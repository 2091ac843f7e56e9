import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from seqlocc.constructions import example1_sigma
from seqlocc.operators import (
    ConvergenceError,
    HermitianOperator,
    Ordering,
    PartyStructure,
    ProductPureState,
    StructureError,
    basis_product_projector,
    contract_all_but_one,
    dimension_cap,
    eig_min,
    expectation,
    ghz,
    identity,
    permute_steps,
    regroup_party_major_to_step_major,
    regroup_step_major_to_party_major,
    set_dimension_cap,
    tensor,
    uniform,
)


def random_hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


def random_product_state(rng, dims):
    return ProductPureState.normalized(
        [rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in dims]
    )


class TestPartyStructure:
    @pytest.mark.parametrize(
        "dims,steps", [((2,), 1), ((2, 1), 1), ((2, 2), 0), ((3, -1), 1)]
    )
    def test_rejects_invalid(self, dims, steps):
        with pytest.raises(StructureError):
            PartyStructure(dims, steps)

    def test_dimension_cap(self):
        with pytest.raises(StructureError, match="cap"):
            uniform(3, 4, 3)
        previous = set_dimension_cap(10**6)
        try:
            assert uniform(3, 4, 3).dim == 64**3
        finally:
            set_dimension_cap(previous)
        assert dimension_cap() == 4096

    def test_single_step_is_always_step_major(self):
        assert PartyStructure((2, 2), 1, Ordering.PARTY_MAJOR).ordering is Ordering.STEP_MAJOR

    def test_derived_dims(self):
        s = PartyStructure((2, 3), 2)
        assert s.dim == 36 and s.local_dims == (4, 9) and s.step_dim == 6
        assert s.subsystem_dims() == [2, 3, 2, 3]
        assert s.with_ordering(Ordering.PARTY_MAJOR).subsystem_dims() == [2, 2, 3, 3]


class TestConstructors:
    def test_identity_examples(self):
        assert np.array_equal(identity(uniform(2, 2)).matrix, np.eye(4))
        assert identity(uniform(2, 3)).trace() == 9
        assert identity(uniform(2, 2, 2)).dim == 16

    def test_ghz_2_2_entries(self):
        expected = np.zeros((4, 4))
        for i in (0, 3):
            for j in (0, 3):
                expected[i, j] = 0.5
        assert np.allclose(ghz(2, 2).matrix, expected, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("m,d", [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)])
    def test_ghz_matches_oracle_and_is_projector(self, m, d):
        g = ghz(m, d).matrix
        assert np.allclose(g, oracles.ghz(m, d), atol=1e-15)
        assert abs(np.trace(g) - 1) < 1e-12
        assert np.allclose(g @ g, g, atol=1e-12)

    def test_basis_projectors(self):
        assert np.array_equal(np.diag(basis_product_projector(2, 2, 0).matrix).real, [1, 0, 0, 0])
        assert np.array_equal(np.diag(basis_product_projector(2, 2, 1).matrix).real, [0, 0, 0, 1])
        for m, d in [(2, 3), (3, 2)]:
            total = sum(basis_product_projector(m, d, i).trace() for i in range(d))
            assert total == d
            for i in range(d):
                assert np.array_equal(basis_product_projector(m, d, i).matrix, oracles.basis_projector(m, d, i))
        with pytest.raises(IndexError):
            basis_product_projector(2, 2, 2)

    def test_hermiticity_enforced(self):
        a = np.zeros((4, 4), dtype=complex)
        a[0, 1] = 1e-6
        with pytest.raises(ValueError, match="Hermitian"):
            HermitianOperator(uniform(2, 2), a)
        a[0, 1] = 1e-13
        op = HermitianOperator(uniform(2, 2), a)
        assert np.array_equal(op.matrix, op.matrix.conj().T)

    def test_wrong_shape(self):
        with pytest.raises(StructureError):
            HermitianOperator(uniform(2, 2), np.eye(3))


class TestTensor:
    def test_identity_and_trace(self):
        rng = np.random.default_rng(1)
        s = uniform(2, 2)
        one = identity(s)
        assert np.array_equal(tensor(one, one).matrix, identity(s.with_steps(2)).matrix)
        a = HermitianOperator(s, random_hermitian(rng, 4))
        b = HermitianOperator(s, random_hermitian(rng, 4))
        assert abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12

    def test_projector_position_step_and_party_major(self):
        op = tensor(basis_product_projector(2, 2, 0), basis_product_projector(2, 2, 1))
        # step-major: |00>|11> sits at index 0b0011
        assert np.flatnonzero(np.diag(op.matrix)).tolist() == [3]
        # party-major: party A holds |01>, party B holds |01>, index 0b0101
        pm = regroup_step_major_to_party_major(op)
        oracle = oracles.regroup(op.matrix, 2, 2, 2)
        assert np.array_equal(pm.matrix, oracle)
        assert np.flatnonzero(np.diag(pm.matrix)).tolist() == [5]

    def test_associative_exactly(self):
        rng = np.random.default_rng(2)
        s = uniform(2, 2)
        ops = [HermitianOperator(s, np.diag(rng.integers(-3, 4, 4)).astype(float)) for _ in range(3)]
        left = tensor(tensor(ops[0], ops[1]), ops[2])
        right = tensor(ops[0], tensor(ops[1], ops[2]))
        assert np.array_equal(left.matrix, right.matrix)

    def test_mismatch(self):
        with pytest.raises(StructureError):
            tensor(identity(uniform(2, 2)), identity(uniform(3, 2)))
        pm = regroup_step_major_to_party_major(identity(uniform(2, 2, 2)))
        with pytest.raises(StructureError):
            tensor(pm, identity(uniform(2, 2)))


class TestRegroup:
    def test_single_step_identity(self):
        g = ghz(2, 2)
        assert regroup_step_major_to_party_major(g) is g

    @settings(max_examples=25, deadline=None)
    @given(m=st.integers(2, 3), d=st.integers(2, 3), L=st.integers(2, 3), seed=st.integers(0, 2**16))
    def test_matches_oracle_and_inverts(self, m, d, L, seed):
        if (d**m) ** L > 256:
            return
        s = uniform(m, d, L)
        rng = np.random.default_rng(seed)
        op = HermitianOperator(s, random_hermitian(rng, s.dim))
        pm = regroup_step_major_to_party_major(op)
        assert pm.structure.ordering is Ordering.PARTY_MAJOR
        assert np.array_equal(pm.matrix, oracles.regroup(op.matrix, m, d, L))
        back = regroup_party_major_to_step_major(pm)
        assert np.array_equal(back.matrix, op.matrix)
        assert np.allclose(np.linalg.eigvalsh(pm.matrix), np.linalg.eigvalsh(op.matrix), atol=1e-9)

    def test_ghz_pair_regroups_to_sigma(self):
        phi = ghz(2, 2)
        pm = regroup_step_major_to_party_major(tensor(phi, phi))
        # two copies of a GHZ pair regroup to one d^2-level GHZ state per party pair
        assert np.allclose(pm.matrix, oracles.ghz(2, 4), atol=1e-15)
        # which, as a plain matrix, is the step-major form of the two-pair GHZ product
        assert np.allclose(pm.matrix, oracles.sigma_step_major(2, 2), atol=1e-15)

    def test_sigma_step_major_and_party_major_forms_agree(self):
        for m, d in [(2, 2), (2, 3), (3, 2)]:
            s = example1_sigma(m, d)
            assert np.allclose(s.matrix, oracles.sigma_step_major(m, d), atol=1e-15)
            pm = regroup_step_major_to_party_major(s)
            assert np.allclose(pm.matrix, oracles.sigma_party_major(m, d), atol=1e-15)

    def test_wrong_direction(self):
        op = identity(uniform(2, 2, 2))
        with pytest.raises(StructureError):
            regroup_party_major_to_step_major(op)
        with pytest.raises(StructureError):
            regroup_step_major_to_party_major(regroup_step_major_to_party_major(op))


class TestPermuteSteps:
    def test_swaps_factors(self):
        a, b = basis_product_projector(2, 2, 0), ghz(2, 2)
        swapped = permute_steps(tensor(a, b), (1, 0))
        assert np.allclose(swapped.matrix, tensor(b, a).matrix, atol=1e-15)

    def test_three_steps(self):
        ops = [basis_product_projector(2, 2, 0), ghz(2, 2), basis_product_projector(2, 2, 1)]
        full = tensor(tensor(ops[0], ops[1]), ops[2])
        out = permute_steps(full, (2, 0, 1))
        expected = tensor(tensor(ops[2], ops[0]), ops[1])
        assert np.allclose(out.matrix, expected.matrix, atol=1e-15)

    def test_not_a_permutation(self):
        with pytest.raises(ValueError):
            permute_steps(identity(uniform(2, 2, 2)), (0, 0))


class TestContraction:
    def test_identity(self):
        rng = np.random.default_rng(3)
        op = identity(uniform(2, 3))
        st_ = random_product_state(rng, (3, 3))
        assert np.allclose(contract_all_but_one(op, st_, 0), np.eye(3), atol=1e-12)

    def test_product_operator(self):
        rng = np.random.default_rng(4)
        A = [random_hermitian(rng, 2) for _ in range(3)]
        op = HermitianOperator(uniform(3, 2), oracles.kron_all(A))
        psi = random_product_state(rng, (2, 2, 2))
        for k in range(3):
            coef = np.prod([np.vdot(psi.vectors[j], A[j] @ psi.vectors[j]).real for j in range(3) if j != k])
            assert np.allclose(contract_all_but_one(op, psi, k), coef * A[k], atol=1e-12)

    def test_hand_example(self):
        op = identity(uniform(2, 2)) - ghz(2, 2) * 2
        psi = ProductPureState((np.array([1.0, 0.0]), np.array([1.0, 0.0])))
        assert np.allclose(contract_all_but_one(op, psi, 1), np.diag([0.0, 1.0]), atol=1e-15)

    def test_linear(self):
        rng = np.random.default_rng(5)
        s = uniform(2, 2, 2)
        A = HermitianOperator(s, random_hermitian(rng, 16))
        B = HermitianOperator(s, random_hermitian(rng, 16))
        A, B = regroup_step_major_to_party_major(A), regroup_step_major_to_party_major(B)
        psi = random_product_state(rng, (4, 4))
        lhs = contract_all_but_one(A * 0.3 + B * -1.7, psi, 0)
        rhs = 0.3 * contract_all_but_one(A, psi, 0) - 1.7 * contract_all_but_one(B, psi, 0)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**16), m=st.integers(2, 3))
    def test_expectation_paths_agree(self, seed, m):
        rng = np.random.default_rng(seed)
        op = HermitianOperator(uniform(m, 2), random_hermitian(rng, 2**m))
        psi = random_product_state(rng, (2,) * m)
        direct = expectation(op, psi)
        via = np.vdot(psi.vectors[0], contract_all_but_one(op, psi, 0) @ psi.vectors[0]).real
        assert abs(direct - via) <= 1e-10

    def test_errors(self):
        psi = ProductPureState((np.array([1.0, 0]), np.array([1.0, 0])))
        with pytest.raises(IndexError):
            contract_all_but_one(identity(uniform(2, 2)), psi, 2)
        with pytest.raises(StructureError):
            contract_all_but_one(identity(uniform(2, 2, 2)), psi, 0)
        with pytest.raises(ValueError):
            ProductPureState((np.array([1.0, 1.0]), np.array([1.0, 0])))


class TestEigMin:
    def test_identity(self):
        value, vec = eig_min(identity(uniform(2, 2)))
        assert value == pytest.approx(1) and abs(np.linalg.norm(vec) - 1) < 1e-12

    @pytest.mark.parametrize("m,d", [(2, 2), (2, 3), (3, 2)])
    def test_primitive(self, m, d):
        op = identity(uniform(m, d)) - ghz(m, d) * d
        value, vec = eig_min(op)
        assert value == pytest.approx(1 - d, abs=1e-12)
        assert abs(abs(np.vdot(vec, oracles.ghz_vector(m, d))) - 1) < 1e-12

    def test_diagonal(self):
        value, vec = eig_min(np.diag([-0.5, 3.0]))
        assert value == -0.5 and np.allclose(np.abs(vec), [1, 0])

    def test_error_type(self):
        err = ConvergenceError("x", residual=0.1)
        assert err.residual == 0.1
