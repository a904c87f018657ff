import math

import numpy as np
import pytest

from tnpoly.entanglement import PureState, ee_profile, normalize
from tnpoly.errors import ValidationError
from tnpoly.nonlin import Nonlinearity, apply, saturation_level
from tnpoly.problem import Representation
from tnpoly.tree_model import (
    TcnWeights,
    TreeNetwork,
    check_symmetric_filters,
    lag_selector_inputs,
    power_inputs,
    random_tree,
    tcn_forward,
    tcn_tensors,
    tree_cut_bond_dims,
    tree_forward,
    tree_reconstruct,
)


def naive_depth2_reconstruct(t1, t2, top):
    """Oracle: six explicit index loops for the depth-2 coefficient tensor."""
    d = t1.shape[0]
    c = top.shape[0]
    out = np.zeros((d, d, d, d))
    for p1 in range(d):
        for p2 in range(d):
            for p3 in range(d):
                for p4 in range(d):
                    val = 0.0
                    for q1 in range(c):
                        for q2 in range(c):
                            val += top[q1, q2] * t1[p1, p2, q1] * t2[p3, p4, q2]
                    out[p1, p2, p3, p4] = val
    return out


def dense_eval(coeffs, leaf_vectors):
    acc = coeffs
    for v in leaf_vectors:
        acc = np.tensordot(acc, np.asarray(v, float), axes=([0], [0]))
    return float(acc)


def depth2_net(seed, d=2, c=2):
    rng = np.random.default_rng(seed)
    lvl = tuple(rng.standard_normal((d, d, c)) for _ in range(2))
    return TreeNetwork(d, (lvl,), rng.standard_normal((c, c)))


class TestReconstruct:
    def test_delta_chain(self):
        d, c = 3, 2
        one_hot3 = np.zeros((d, d, c))
        one_hot3[0, 0, 0] = 1.0
        top = np.zeros((c, c))
        top[0, 0] = 1.0
        net = TreeNetwork(d, ((one_hot3.copy(), one_hot3.copy()),), top)
        w = tree_reconstruct(net)
        expected = np.zeros((d,) * 4)
        expected[0, 0, 0, 0] = 1.0
        assert np.array_equal(w, expected)

    def test_matches_naive_loops(self):
        net = depth2_net(seed=0, d=3, c=2)
        w = tree_reconstruct(net)
        oracle = naive_depth2_reconstruct(net.levels[0][0], net.levels[0][1], net.top)
        assert np.allclose(w, oracle, atol=1e-12)

    def test_unit_channels_give_rank_one(self):
        net = depth2_net(seed=1, d=2, c=1)
        w = tree_reconstruct(net)
        s = np.linalg.svd(w.reshape(4, 4), compute_uv=False)
        assert s[1] < 1e-12 * s[0]

    def test_depth3_consistent_with_forward(self):
        net = random_tree(depth=3, leaf_dim=2, channel_dim=2, seed=2)
        w = tree_reconstruct(net)
        rng = np.random.default_rng(3)
        for _ in range(5):
            vecs = [rng.uniform(-1, 1, size=2) for _ in range(8)]
            assert tree_forward(net, vecs) == pytest.approx(dense_eval(w, vecs), rel=1e-10, abs=1e-12)

    def test_nonlinear_mode_rejected(self):
        net = depth2_net(seed=4)
        tanh_net = TreeNetwork(net.leaf_dim, net.levels, net.top, nonlinearity=Nonlinearity.TANH)
        with pytest.raises(ValidationError):
            tree_reconstruct(tanh_net)


class TestForward:
    def test_identity_equals_dense_evaluation(self):
        for seed in range(5):
            net = depth2_net(seed=seed, d=3, c=4)
            w = tree_reconstruct(net)
            rng = np.random.default_rng(100 + seed)
            vecs = [rng.uniform(-1, 1, size=3) for _ in range(4)]
            assert tree_forward(net, vecs) == pytest.approx(dense_eval(w, vecs), rel=1e-10, abs=1e-12)

    def test_zero_network_tanh(self):
        d, c = 2, 2
        lvl = tuple(np.zeros((d, d, c)) for _ in range(2))
        net = TreeNetwork(d, (lvl,), np.zeros((c, c)), nonlinearity=Nonlinearity.TANH)
        vecs = power_inputs([0.3, -0.4, 0.1, 0.9], d)
        assert tree_forward(net, vecs) == 0.0

    def test_leaf_count_checked(self):
        net = depth2_net(seed=5)
        with pytest.raises(ValidationError):
            tree_forward(net, [np.ones(2)] * 3)

    def test_lag_selector_inputs(self):
        vecs = lag_selector_inputs([0.5, -0.25], n_leaves=4)
        assert len(vecs) == 4
        for v in vecs:
            assert np.allclose(v, [1.0, 0.5, -0.25])


class TestTcn:
    def test_saturation_constant_tanh(self):
        eps = 1e-6
        lam = saturation_level(Nonlinearity.TANH, eps)
        assert lam == pytest.approx(math.atanh(1 - eps / 2))
        assert 1.0 - math.tanh(lam) < eps

    def test_saturation_rejects_bad_tolerance(self):
        with pytest.raises(ValidationError):
            saturation_level(Nonlinearity.TANH, 0.0)
        with pytest.raises(ValidationError):
            saturation_level(Nonlinearity.TANH, 1.5)

    def test_constant_channel_within_tolerance(self):
        eps = 1e-6
        wts = TcnWeights.for_nonlinearity([[0.3, -0.2], [0.1, 0.4]], [0.5, -0.6], Nonlinearity.TANH, eps)
        net = tcn_tensors(wts, f=Nonlinearity.TANH)
        # evaluate a first-layer node on the constant channel: inputs x^0 = 1
        h = [0.37, -0.86, 0.12, 0.55]
        vecs = power_inputs(h, net.leaf_dim)
        t = net.levels[0][0]
        y = apply(Nonlinearity.TANH, np.einsum("ijp,i,j->p", t, vecs[0], vecs[1]))
        assert abs(y[0] - 1.0) < eps

    def test_zero_filters(self):
        eps = 1e-4
        wts = TcnWeights.for_nonlinearity(np.zeros((2, 2)), np.zeros(2), Nonlinearity.TANH, eps)
        net = tcn_tensors(wts, f=Nonlinearity.TANH)
        h = [0.4, 0.1, -0.9, 0.2]
        out = tree_forward(net, power_inputs(h, net.leaf_dim))
        assert out == pytest.approx(math.tanh(0.0), abs=1e-12)
        assert tcn_forward(wts, h, Nonlinearity.TANH) == 0.0

    @pytest.mark.parametrize("eps", [1e-4, 1e-6])
    def test_tree_matches_reference_tcn(self, eps):
        rng = np.random.default_rng(17)
        wts = TcnWeights.for_nonlinearity(
            rng.standard_normal((2, 2)), rng.standard_normal(2), Nonlinearity.TANH, eps
        )
        net = tcn_tensors(wts, f=Nonlinearity.TANH)
        worst = 0.0
        for _ in range(100):
            h = rng.uniform(-1, 1, size=4)
            dev = abs(tree_forward(net, power_inputs(h, net.leaf_dim)) - tcn_forward(wts, h, Nonlinearity.TANH))
            worst = max(worst, dev)
        assert worst < 10 * eps

    def test_sigmoid_construction(self):
        eps = 1e-5
        wts = TcnWeights.for_nonlinearity([[1.0, 0.5], [-0.5, 1.0]], [1.0, 1.0], Nonlinearity.SIGMOID, eps)
        net = tcn_tensors(wts, f=Nonlinearity.SIGMOID)
        rng = np.random.default_rng(19)
        for _ in range(50):
            h = rng.uniform(-1, 1, size=4)
            dev = abs(tree_forward(net, power_inputs(h, net.leaf_dim)) - tcn_forward(wts, h, Nonlinearity.SIGMOID))
            assert dev < 10 * eps

    def test_identity_collapse(self):
        wts = TcnWeights.for_nonlinearity(np.ones((2, 2)), np.ones(2), Nonlinearity.IDENTITY, 1e-9)
        h = [0.1, 0.2, 0.3, 0.4]
        assert tcn_forward(wts, h, Nonlinearity.IDENTITY) == pytest.approx(1.0)

    def test_infinite_saturation_rejected(self):
        wts = TcnWeights(np.zeros((2, 2)), np.zeros(2), saturation=5.0, tolerance=1e-12)
        with pytest.raises(ValidationError):
            tcn_tensors(wts, f=Nonlinearity.TANH)  # tanh(5) is 1e-5 short of 1


class TestSymmetricFilters:
    def tied_network(self, seed):
        rng = np.random.default_rng(seed)
        d, c = 3, 2
        base = rng.standard_normal((d, d, c))
        tied = 0.5 * (base + np.swapaxes(base, 0, 1))
        top = rng.standard_normal((c, c))
        return TreeNetwork(d, ((tied.copy(), tied.copy()),), 0.5 * (top + top.T))

    def test_tied_construction_passes(self):
        ok, violations = check_symmetric_filters(self.tied_network(0))
        assert ok and violations == []

    def test_perturbed_entry_listed(self):
        net = self.tied_network(1)
        levels = [list(lvl) for lvl in net.levels]
        t = levels[0][1].copy()
        t[2, 0, 1] += 1e-3
        levels[0][1] = t
        ok, violations = check_symmetric_filters(
            TreeNetwork(net.leaf_dim, tuple(tuple(lvl) for lvl in levels), net.top)
        )
        assert not ok
        assert any(v.index == (2, 0, 1) or v.index == (0, 2, 1) for v in violations)

    def test_random_untied_fails(self):
        failures = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            lvl = tuple(rng.standard_normal((2, 2, 2)) for _ in range(2))
            net = TreeNetwork(2, (lvl,), rng.standard_normal((2, 2)))
            ok, _ = check_symmetric_filters(net)
            failures += not ok
        assert failures == 100


class TestCutBounds:
    def test_hand_cases(self):
        net = random_tree(depth=3, leaf_dim=2, channel_dim=3, seed=7)
        assert tree_cut_bond_dims(net, 1) == [2]
        assert tree_cut_bond_dims(net, 2) == [3]
        assert tree_cut_bond_dims(net, 3) == [3, 2]
        assert tree_cut_bond_dims(net, 4) == [3]
        assert tree_cut_bond_dims(net, 5) == [3, 2]
        assert tree_cut_bond_dims(net, 6) == [3, 3]

    def test_entropy_never_exceeds_cut_bound(self):
        for seed in range(20):
            net = random_tree(depth=3, leaf_dim=2, channel_dim=2, seed=seed)
            state = normalize(PureState(tree_reconstruct(net)))
            prof = ee_profile(state, L=1, P=8, rep=Representation.ORIGINAL)
            for l, s in enumerate(prof.entropies, start=1):
                bound = math.log(np.prod(tree_cut_bond_dims(net, l)))
                assert s <= bound + 1e-9
