"""Binary-tree tensor networks as nonlinear sequence models.

A depth-k tree covers 2^k leaf sites. Isometry level 0 sits next to the
leaves; level l holds 2^(k-l-1) rank-3 tensors indexed (left child, right
child, parent channel), and a rank-2 top tensor joins the two surviving
channels into the scalar output. Disentanglers are deliberately absent,
and leaves pair contiguously.

With the identity nonlinearity the model is the linear tree tensor
network; with a saturating nonlinearity and delta-structured tensors it
collapses to a 2-layer temporal convolutional network, which
tcn_tensors() builds explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import check_dense_cap
from .errors import ValidationError
from .nonlin import Nonlinearity, apply, saturation_level


@dataclass(frozen=True)
class TreeNetwork:
    leaf_dim: int
    levels: tuple  # levels[l][m]: rank-3 (child, child, parent) tensors
    top: np.ndarray  # rank-2 (channel, channel)
    nonlinearity: Nonlinearity = Nonlinearity.IDENTITY

    def __post_init__(self):
        levels = tuple(tuple(np.ascontiguousarray(t, dtype=np.float64) for t in lvl) for lvl in self.levels)
        top = np.ascontiguousarray(self.top, dtype=np.float64)
        if top.ndim != 2 or top.shape[0] != top.shape[1]:
            raise ValidationError(f"top tensor must be square rank-2, got shape {top.shape}")
        depth = len(levels) + 1
        child = self.leaf_dim
        for l, lvl in enumerate(levels):
            if len(lvl) != 2 ** (depth - 1 - l):
                raise ValidationError(f"level {l} has {len(lvl)} tensors, expected {2 ** (depth - 1 - l)}")
            parents = set()
            for m, t in enumerate(lvl):
                if t.ndim != 3:
                    raise ValidationError(f"level {l} tensor {m} has rank {t.ndim}, expected 3")
                if t.shape[0] != child or t.shape[1] != child:
                    raise ValidationError(
                        f"level {l} tensor {m} child dims {t.shape[:2]} do not match {child}"
                    )
                parents.add(t.shape[2])
            if len(parents) != 1:
                raise ValidationError(f"level {l} tensors disagree on parent channel dim")
            child = parents.pop()
        if top.shape[0] != child:
            raise ValidationError(f"top tensor dim {top.shape[0]} does not match channel dim {child}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "top", top)

    @property
    def depth(self) -> int:
        return len(self.levels) + 1

    @property
    def n_leaves(self) -> int:
        return 2**self.depth

    @property
    def channel_dims(self) -> tuple:
        return tuple(lvl[0].shape[2] for lvl in self.levels)


def _subtree_dense(net: TreeNetwork, level: int, node: int) -> np.ndarray:
    """Dense tensor of the subtree under isometry node (level, node); axes
    are its leaves in order plus the parent channel last."""
    t = net.levels[level][node]
    if level == 0:
        return t
    left = _subtree_dense(net, level - 1, 2 * node)
    right = _subtree_dense(net, level - 1, 2 * node + 1)
    # (leaves_L..., c) x (c, c, p) -> (leaves_L..., c_right, p), then absorb right child
    acc = np.tensordot(left, t, axes=([left.ndim - 1], [0]))
    acc = np.tensordot(acc, right, axes=([acc.ndim - 2], [right.ndim - 1]))
    # axes now (leaves_L..., p, leaves_R...); move parent channel to the end
    return np.moveaxis(acc, left.ndim - 1, -1)


def tree_reconstruct(net: TreeNetwork) -> np.ndarray:
    """Contract the linear tree into its dense coefficient tensor over leaves."""
    if net.nonlinearity is not Nonlinearity.IDENTITY:
        raise ValidationError("tree_reconstruct requires the identity nonlinearity")
    check_dense_cap(net.leaf_dim**net.n_leaves, "tree reconstruction")
    if not net.levels:
        return net.top.copy()
    k = len(net.levels)
    left = _subtree_dense(net, k - 1, 0)
    right = _subtree_dense(net, k - 1, 1)
    acc = np.tensordot(left, net.top, axes=([left.ndim - 1], [0]))
    acc = np.tensordot(acc, right, axes=([acc.ndim - 1], [right.ndim - 1]))
    return np.ascontiguousarray(acc)


def tree_forward(net: TreeNetwork, leaf_vectors, nonlinearity: Nonlinearity | None = None) -> float:
    """Evaluate the tree as a sequence model, bottom-up.

    Each leaf supplies a local feature vector (the power basis of its
    scalar in the time-lag layout, or the shared history vector in the
    replica layout); every node contracts its children and applies the
    nonlinearity channelwise.
    """
    f = net.nonlinearity if nonlinearity is None else nonlinearity
    vectors = [np.asarray(v, dtype=np.float64).ravel() for v in leaf_vectors]
    if len(vectors) != net.n_leaves:
        raise ValidationError(f"expected {net.n_leaves} leaf vectors, got {len(vectors)}")
    for i, v in enumerate(vectors):
        if v.size != net.leaf_dim:
            raise ValidationError(f"leaf {i} vector has length {v.size}, expected {net.leaf_dim}")
    for lvl in net.levels:
        vectors = [
            apply(f, np.einsum("ijp,i,j->p", t, vectors[2 * m], vectors[2 * m + 1]))
            for m, t in enumerate(lvl)
        ]
    out = float(vectors[0] @ net.top @ vectors[1])
    return float(apply(f, out))


def power_inputs(values, dim: int):
    """Per-site power-basis vectors [x^0, ..., x^(dim-1)] for the time-lag layout."""
    return [np.asarray(x, dtype=np.float64) ** np.arange(dim) for x in np.atleast_1d(values)]


def lag_selector_inputs(history, n_leaves: int):
    """The shared history vector [1, h_1, ..., h_L], one copy per replica leaf."""
    s = np.concatenate(([1.0], np.asarray(history, dtype=np.float64).ravel()))
    return [s.copy() for _ in range(n_leaves)]


def random_tree(depth: int, leaf_dim: int, channel_dim: int, seed: int) -> TreeNetwork:
    """Seeded random linear tree with uniform channel dimension, unit-normalized.

    Normalization scales the top tensor so the reconstructed state has
    unit Frobenius norm (requires a dense-cap-sized tree).
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    levels = []
    child = leaf_dim
    for l in range(depth - 1):
        count = 2 ** (depth - 1 - l)
        levels.append(tuple(rng.standard_normal((child, child, channel_dim)) for _ in range(count)))
        child = channel_dim
    top = rng.standard_normal((child, child))
    net = TreeNetwork(leaf_dim, tuple(levels), top)
    norm = float(np.linalg.norm(tree_reconstruct(net)))
    if norm == 0.0:
        raise ValidationError("degenerate random draw with zero norm")
    return TreeNetwork(leaf_dim, tuple(levels), top / norm)


def tree_cut_bond_dims(net: TreeNetwork, cut: int):
    """Bond dimensions severed by the contiguous leaf cut [0, cut).

    Decomposes the left block into maximal aligned subtrees; each
    contributes its parent-edge dimension (the leaf dimension for a bare
    leaf). The entropy at the cut is bounded by the log of their product.
    """
    n = net.n_leaves
    if not 1 <= cut <= n - 1:
        raise ValidationError(f"cut {cut} out of range for {n} leaves")
    dims = []
    pos = 0
    while pos < cut:
        size = 1
        while size * 2 <= cut - pos and pos % (size * 2) == 0:
            size *= 2
        if size == 1:
            dims.append(net.leaf_dim)
        else:
            level = size.bit_length() - 2  # subtree of 2^(l+1) leaves roots at level l
            dims.append(net.channel_dims[level])
        pos += size
    return dims


@dataclass(frozen=True)
class TcnWeights:
    """Weights of the reference 2-layer TCN over 4 lagged inputs.

    first_layer[m] = (w1, w2) filters node m; top = (u1, u2) combines the
    two hidden units. saturation is the argument at which the nonlinearity
    is within `tolerance` of 1, used to pin the constant channel.
    """

    first_layer: np.ndarray  # shape (2, 2)
    top: np.ndarray  # shape (2,)
    saturation: float
    tolerance: float

    def __post_init__(self):
        fl = np.ascontiguousarray(self.first_layer, dtype=np.float64)
        tp = np.ascontiguousarray(self.top, dtype=np.float64)
        if fl.shape != (2, 2):
            raise ValidationError(f"first_layer must have shape (2, 2), got {fl.shape}")
        if tp.shape != (2,):
            raise ValidationError(f"top must have shape (2,), got {tp.shape}")
        if not np.isfinite(self.saturation):
            raise ValidationError("saturation constant must be finite")
        object.__setattr__(self, "first_layer", fl)
        object.__setattr__(self, "top", tp)

    @classmethod
    def for_nonlinearity(cls, first_layer, top, f: Nonlinearity, tolerance: float) -> "TcnWeights":
        return cls(first_layer, top, saturation_level(f, tolerance), tolerance)


def tcn_forward(wts: TcnWeights, h, f: Nonlinearity = Nonlinearity.TANH) -> float:
    """Reference 2-layer TCN: y_m = F(w.h_pair), out = F(u.y)."""
    h = np.asarray(h, dtype=np.float64).ravel()
    if h.size != 4:
        raise ValidationError(f"expected 4 lagged inputs, got {h.size}")
    y1 = apply(f, wts.first_layer[0, 0] * h[0] + wts.first_layer[0, 1] * h[1])
    y2 = apply(f, wts.first_layer[1, 0] * h[2] + wts.first_layer[1, 1] * h[3])
    return float(apply(f, wts.top[0] * y1 + wts.top[1] * y2))


def tcn_tensors(wts: TcnWeights, f: Nonlinearity = Nonlinearity.TANH, leaf_dim: int = 2) -> TreeNetwork:
    """Build the depth-2 delta-tensor tree equivalent to the reference TCN.

    In the time-lag layout each leaf carries the power basis of one lagged
    value. Channel 1 of each first-layer tensor holds the linear filter on
    the two first powers; channel 0 pins a constant by pushing the
    saturation level through the nonlinearity, so its output is 1 within
    the stated tolerance. The top tensor routes each hidden unit against
    the other's constant channel.
    """
    if leaf_dim < 2:
        raise ValidationError("delta construction needs leaf power basis of at least [1, x]")
    lam = wts.saturation
    achieved = 1.0 - float(apply(f, lam))
    if not np.isfinite(lam) or achieved >= wts.tolerance:
        raise ValidationError(
            f"saturation constant {lam} leaves the constant channel {achieved:.3e} away from 1, "
            f"outside tolerance {wts.tolerance}"
        )
    level0 = []
    for m in range(2):
        t = np.zeros((leaf_dim, leaf_dim, 2))
        t[0, 0, 0] = lam
        t[1, 0, 1] = wts.first_layer[m, 0]
        t[0, 1, 1] = wts.first_layer[m, 1]
        level0.append(t)
    top = np.zeros((2, 2))
    top[1, 0] = wts.top[0]
    top[0, 1] = wts.top[1]
    return TreeNetwork(leaf_dim, (tuple(level0),), top, nonlinearity=f)


@dataclass(frozen=True)
class FilterViolation:
    location: str
    index: tuple
    deviation: float


def check_symmetric_filters(net: TreeNetwork, atol: float = 1e-10):
    """Check the shared-filter conditions of the replica-site layout.

    Within each level every tensor must equal every other with its child
    indices transposed (which forces each to be child-symmetric too), and
    the top tensor must be symmetric. Returns (ok, violations) where each
    violation names the worst-deviating entry.
    """
    violations = []
    for l, lvl in enumerate(net.levels):
        for m, t in enumerate(lvl):
            for m2, t2 in enumerate(lvl):
                delta = np.abs(t - np.swapaxes(t2, 0, 1))
                worst = float(delta.max())
                if worst > atol:
                    idx = np.unravel_index(int(np.argmax(delta)), delta.shape)
                    violations.append(
                        FilterViolation(f"level{l}[{m}] vs level{l}[{m2}]^T", tuple(int(i) for i in idx), worst)
                    )
    delta = np.abs(net.top - net.top.T)
    worst = float(delta.max())
    if worst > atol:
        idx = np.unravel_index(int(np.argmax(delta)), delta.shape)
        violations.append(FilterViolation("top", tuple(int(i) for i in idx), worst))
    return (len(violations) == 0), violations
