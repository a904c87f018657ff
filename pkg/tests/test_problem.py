import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnpoly.errors import ValidationError
from tnpoly.problem import (
    CoeffTensor,
    ProblemSpec,
    Representation,
    enumerate_multi_indices,
    enumerate_occupations,
    evaluate_dual,
    evaluate_original,
    from_dual,
    full_dimension,
    inner_product,
    multinomial,
    occupation_of,
    symmetric_dimension,
    symmetrize,
    to_dual,
)

ORIG = Representation.ORIGINAL
DUAL = Representation.DUAL


def brute_eval_original(w: CoeffTensor, h) -> float:
    """Oracle: loop over every multi-index and sum coefficient * monomial."""
    s = np.concatenate(([1.0], np.asarray(h, float)))
    total = 0.0
    for idx in np.ndindex(*w.spec.shape):
        total += w.tensor[idx] * np.prod([s[i] for i in idx])
    return total


def brute_eval_dual(v: CoeffTensor, h) -> float:
    """Oracle: loop over every occupation cell and sum coefficient * powers."""
    s = np.concatenate(([1.0], np.asarray(h, float)))
    total = 0.0
    for j in np.ndindex(*v.spec.shape):
        total += v.tensor[j] * np.prod([s[r] ** j[r] for r in range(len(j))])
    return total


def random_coeff(L, P, seed, rep=ORIG):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(L, P, rep)
    return CoeffTensor(spec, rng.standard_normal(spec.shape))


class TestDimensions:
    def test_full_dimension_original(self):
        assert full_dimension(ProblemSpec(10, 3, ORIG)) == 1331

    def test_full_dimension_dual(self):
        assert full_dimension(ProblemSpec(1, 2, DUAL)) == 9

    def test_lag_zero(self):
        for P in range(5):
            assert full_dimension(ProblemSpec(0, P, ORIG)) == 1

    def test_overflow_rejected(self):
        with pytest.raises(ValidationError):
            full_dimension(ProblemSpec(100, 40, ORIG))

    def test_symmetric_dimension_line_segment(self):
        assert symmetric_dimension(1, 6) == 7

    def test_symmetric_dimension_matches_monomials(self):
        # oracle: enumerate monomials {1, h1, h2, h1^2, h1h2, h2^2} by hand
        monomials = {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
        assert symmetric_dimension(2, 2) == len(monomials) == 6

    def test_order_zero(self):
        assert symmetric_dimension(4, 0) == 1


class TestEnumeration:
    def test_occupations_by_hand(self):
        assert enumerate_occupations(1, 2) == [(0, 2), (1, 1), (2, 0)]

    def test_occupation_count_brute_force(self):
        brute = sum(
            1 for v in itertools.product(range(5), repeat=4) if sum(v) == 4
        )
        occs = enumerate_occupations(3, 4)
        assert len(occs) == brute == 35 == math.comb(7, 4)

    def test_single_site(self):
        assert enumerate_occupations(0, 5) == [(5,)]

    def test_lexicographic(self):
        occs = enumerate_occupations(2, 3)
        assert occs == sorted(occs)

    def test_multi_index_count(self):
        assert len(enumerate_multi_indices(2, 3)) == 27

    def test_enumeration_caps(self):
        from tnpoly.errors import SizeCapError

        with pytest.raises(SizeCapError):
            enumerate_occupations(30, 30, cap=10**6)
        with pytest.raises(SizeCapError):
            enumerate_multi_indices(9, 7, cap=10**6)

    def test_counts_small_grid(self):
        for L in range(4):
            for P in range(4):
                assert len(enumerate_multi_indices(L, P)) == (L + 1) ** P
                assert len(enumerate_occupations(L, P)) == math.comb(L + P, P)


class TestOccupationOf:
    def test_counting(self):
        assert occupation_of((0, 0, 1), 1) == (2, 1)
        assert occupation_of((2, 2, 2), 2) == (0, 0, 3)

    def test_monomial_reconstruction(self):
        # oracle: the occupation's powers reproduce the product over entries
        rng = np.random.default_rng(11)
        for _ in range(20):
            L, P = 3, 4
            idx = tuple(rng.integers(0, L + 1, size=P))
            s = np.concatenate(([1.0], rng.standard_normal(L)))
            counts = occupation_of(idx, L)
            direct = np.prod([s[i] for i in idx])
            via_counts = np.prod([s[r] ** counts[r] for r in range(L + 1)])
            assert abs(direct - via_counts) < 1e-12 * max(1.0, abs(direct))

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            occupation_of((0, 5), 2)


class TestSymmetrize:
    def test_fixed_point(self):
        w = random_coeff(2, 3, seed=0)
        sym = symmetrize(w)
        again = symmetrize(sym)
        assert np.max(np.abs(again.tensor - sym.tensor)) < 1e-15

    def test_two_site_orbit(self):
        spec = ProblemSpec(1, 2, ORIG)
        t = np.zeros((2, 2))
        t[0, 1] = 1.0
        sym = symmetrize(CoeffTensor(spec, t))
        assert sym.tensor[0, 1] == pytest.approx(0.5)
        assert sym.tensor[1, 0] == pytest.approx(0.5)
        assert sym.tensor[0, 0] == 0.0 and sym.tensor[1, 1] == 0.0

    def test_permutation_invariance(self):
        sym = symmetrize(random_coeff(2, 4, seed=5))
        perm = np.transpose(sym.tensor, (2, 0, 3, 1))
        assert np.max(np.abs(perm - sym.tensor)) < 1e-12

    def test_wrong_representation(self):
        with pytest.raises(ValidationError):
            symmetrize(random_coeff(1, 2, seed=0, rep=DUAL))

    def test_projector_rank(self):
        # the symmetrizer's image has dimension C(L+P, P)
        for L, P in [(1, 2), (2, 2), (1, 3), (2, 3)]:
            spec = ProblemSpec(L, P, ORIG)
            m = full_dimension(spec)
            cols = []
            for k in range(m):
                e = np.zeros(m)
                e[k] = 1.0
                cols.append(symmetrize(CoeffTensor(spec, e.reshape(spec.shape))).tensor.ravel())
            rank = np.linalg.matrix_rank(np.column_stack(cols))
            assert rank == symmetric_dimension(L, P)

    def test_subsystem_counting_inequality(self):
        for L in range(7):
            for P in range(1, 7):
                for p_a in range(P + 1):
                    p_b = P - p_a
                    lhs = math.comb(L + p_a, L) * math.comb(L + p_b, L)
                    assert lhs >= math.comb(L + P, L)


class TestDualMaps:
    def test_to_dual_collects_orbit(self):
        spec = ProblemSpec(1, 2, ORIG)
        t = np.zeros((2, 2))
        a, b = 0.7, -0.3
        t[0, 1], t[1, 0] = a, b
        v = to_dual(CoeffTensor(spec, t))
        # oracle: expanding the polynomial collects the h_{t-1} coefficient
        assert v.tensor[1, 1] == pytest.approx(a + b)
        assert v.tensor[2, 0] == 0.0 and v.tensor[0, 2] == 0.0

    def test_to_dual_zero(self):
        v = to_dual(CoeffTensor(ProblemSpec(2, 2, ORIG), np.zeros((3, 3))))
        assert np.all(v.tensor == 0.0)

    def test_evaluation_equivalence(self):
        rng = np.random.default_rng(42)
        for seed in range(5):
            w = random_coeff(2, 3, seed=seed)
            v = to_dual(w)
            for _ in range(20):
                h = rng.uniform(-1, 1, size=2)
                lhs = evaluate_original(w, h)
                rhs = evaluate_dual(v, h)
                assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_from_dual_multinomial_gauge(self):
        spec = ProblemSpec(1, 2, DUAL)
        t = np.zeros((3, 3))
        t[1, 1] = 1.0
        w = from_dual(CoeffTensor(spec, t))
        assert w.tensor[0, 1] == pytest.approx(0.5)
        assert w.tensor[1, 0] == pytest.approx(0.5)

    def test_from_dual_singleton_orbit(self):
        spec = ProblemSpec(1, 2, DUAL)
        t = np.zeros((3, 3))
        t[0, 2] = 1.0  # occupation (0, 2): pure h1^2
        w = from_dual(CoeffTensor(spec, t))
        assert w.tensor[1, 1] == pytest.approx(1.0)

    def test_round_trip_on_symmetric_part(self):
        for seed in range(5):
            w = random_coeff(2, 3, seed=seed)
            sym = symmetrize(w)
            back = from_dual(to_dual(sym))
            assert np.max(np.abs(back.tensor - sym.tensor)) < 1e-12

    def test_to_dual_of_from_dual_is_identity(self):
        rng = np.random.default_rng(9)
        spec = ProblemSpec(2, 3, DUAL)
        v = np.zeros(spec.shape)
        for occ in enumerate_occupations(2, 3):
            v[occ] = rng.standard_normal()
        vt = CoeffTensor(spec, v)
        again = to_dual(from_dual(vt))
        assert np.max(np.abs(again.tensor - vt.tensor)) < 1e-12

    def test_from_dual_rejects_off_constraint(self):
        spec = ProblemSpec(1, 2, DUAL)
        t = np.zeros((3, 3))
        t[2, 2] = 1.0  # sum of counts is 4, not P=2
        with pytest.raises(ValidationError, match=r"\(2, 2\)"):
            from_dual(CoeffTensor(spec, t))


class TestEvaluation:
    def test_square_monomial(self):
        spec = ProblemSpec(1, 2, ORIG)
        t = np.zeros((2, 2))
        t[1, 1] = 1.0
        assert evaluate_original(CoeffTensor(spec, t), [0.5]) == pytest.approx(0.25)

    def test_zero_tensor(self):
        w = CoeffTensor(ProblemSpec(2, 2, ORIG), np.zeros((3, 3)))
        for h in ([0.0, 0.0], [1.5, -2.0]):
            assert evaluate_original(w, h) == 0.0

    def test_linear_case(self):
        spec = ProblemSpec(2, 1, ORIG)
        c = np.array([1.5, -2.0, 0.25])
        w = CoeffTensor(spec, c)
        x, y = 0.3, -1.1
        assert evaluate_original(w, [x, y]) == pytest.approx(1.5 - 2.0 * x + 0.25 * y)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        w = random_coeff(2, 3, seed=17)
        for _ in range(10):
            h = rng.uniform(-1, 1, size=2)
            assert evaluate_original(w, h) == pytest.approx(brute_eval_original(w, h), rel=1e-12, abs=1e-12)

    def test_dual_square_monomial(self):
        spec = ProblemSpec(1, 2, DUAL)
        t = np.zeros((3, 3))
        t[0, 2] = 1.0
        assert evaluate_dual(CoeffTensor(spec, t), [0.5]) == pytest.approx(0.25)

    def test_dual_constant_monomial(self):
        spec = ProblemSpec(2, 3, DUAL)
        t = np.zeros((4, 4, 4))
        t[3, 0, 0] = 1.0  # 1^P: constant regardless of history
        w = CoeffTensor(spec, t)
        for h in ([0.0, 0.0], [2.0, -3.0]):
            assert evaluate_dual(w, h) == pytest.approx(1.0)

    def test_dual_matches_brute_force_off_constraint(self):
        # the redundant cells count too: dual evaluation sums over everything
        rng = np.random.default_rng(23)
        spec = ProblemSpec(1, 2, DUAL)
        v = CoeffTensor(spec, rng.standard_normal((3, 3)))
        for _ in range(10):
            h = rng.uniform(-1, 1, size=1)
            assert evaluate_dual(v, h) == pytest.approx(brute_eval_dual(v, h), rel=1e-12, abs=1e-12)

    def test_constrained_dual_equals_spread_original(self):
        rng = np.random.default_rng(31)
        spec = ProblemSpec(2, 2, DUAL)
        v = np.zeros(spec.shape)
        for occ in enumerate_occupations(2, 2):
            v[occ] = rng.standard_normal()
        vt = CoeffTensor(spec, v)
        w = from_dual(vt)
        for _ in range(10):
            h = rng.uniform(-1, 1, size=2)
            assert evaluate_dual(vt, h) == pytest.approx(evaluate_original(w, h), rel=1e-10, abs=1e-10)

    def test_history_length_checked(self):
        w = random_coeff(2, 2, seed=1)
        with pytest.raises(ValidationError):
            evaluate_original(w, [1.0])


class TestInnerProduct:
    def test_one_hot(self):
        spec = ProblemSpec(1, 2, ORIG)
        t = np.zeros((2, 2))
        t[1, 0] = 1.0
        w = CoeffTensor(spec, t)
        assert inner_product(w, w) == 1.0

    def test_symmetry(self):
        w1, w2 = random_coeff(2, 2, seed=3), random_coeff(2, 2, seed=4)
        assert inner_product(w1, w2) == inner_product(w2, w1)

    def test_bilinear(self):
        spec = ProblemSpec(1, 3, ORIG)
        rng = np.random.default_rng(8)
        t1, t2, t3 = (rng.standard_normal(spec.shape) for _ in range(3))
        a, b = 0.7, -2.5
        lhs = inner_product(CoeffTensor(spec, a * t1 + b * t2), CoeffTensor(spec, t3))
        rhs = a * inner_product(CoeffTensor(spec, t1), CoeffTensor(spec, t3)) + b * inner_product(
            CoeffTensor(spec, t2), CoeffTensor(spec, t3)
        )
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))

    def test_positive(self):
        w = random_coeff(2, 3, seed=6)
        assert inner_product(w, w) > 0.0

    def test_spec_mismatch(self):
        with pytest.raises(ValidationError):
            inner_product(random_coeff(1, 2, seed=0), random_coeff(2, 2, seed=0))


class TestDegenerateShapes:
    def test_order_zero_constant(self):
        # P=0: a rank-0 tensor holding the constant term
        spec = ProblemSpec(2, 0, ORIG)
        w = CoeffTensor(spec, np.array(3.5))
        assert w.tensor.shape == ()
        assert evaluate_original(w, [0.1, -0.4]) == 3.5
        v = to_dual(w)
        assert v.tensor.shape == (1, 1, 1)
        assert evaluate_dual(v, [0.1, -0.4]) == 3.5
        assert float(from_dual(v).tensor) == 3.5

    def test_lag_zero_dual_single_site(self):
        # L=0: one time-lag site whose variable is the constant 1
        spec = ProblemSpec(0, 3, DUAL)
        v = CoeffTensor(spec, np.array([1.0, 0.0, 0.0, 2.0]))
        assert evaluate_dual(v, []) == 3.0

    def test_lag_zero_original(self):
        spec = ProblemSpec(0, 2, ORIG)
        w = CoeffTensor(spec, np.array([[4.0]]))
        assert evaluate_original(w, []) == 4.0
        assert symmetrize(w).tensor[0, 0] == 4.0


class TestMultinomial:
    def test_values(self):
        assert multinomial(2, (1, 1)) == 2
        assert multinomial(3, (0, 0, 3)) == 1
        assert multinomial(4, (2, 2)) == 6

    def test_orbit_sizes_sum_to_full_dimension(self):
        L, P = 2, 4
        total = sum(multinomial(P, occ) for occ in enumerate_occupations(L, P))
        assert total == (L + 1) ** P


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.integers(1, 4), st.integers(0, 10**6))
def test_symmetrize_idempotent_property(L, P, seed):
    w = random_coeff(L, P, seed=seed)
    once = symmetrize(w)
    twice = symmetrize(once)
    assert np.max(np.abs(twice.tensor - once.tensor)) <= 1e-14


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.integers(1, 4), st.integers(0, 10**6))
def test_dual_map_preserves_polynomial_property(L, P, seed):
    w = random_coeff(L, P, seed=seed)
    v = to_dual(w)
    rng = np.random.default_rng(seed + 1)
    h = rng.uniform(-1, 1, size=L)
    lhs, rhs = evaluate_original(w, h), evaluate_dual(v, h)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
