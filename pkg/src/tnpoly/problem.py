"""Order-P lag-L polynomial problems in two lattice representations.

The *original* representation stores coefficients over P replica sites,
each holding one of L+1 lag labels (label 0 is the constant 1). The *dual*
representation stores coefficients over L+1 lag sites, each holding a
power 0..P. Both encode L-variate polynomials of total degree at most P;
the dual space is deliberately redundant (it also reaches higher-degree
monomials), and the physical subspace is picked out by the constraint that
the site powers sum to P.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dense import check_dense_cap
from .errors import SizeCapError, ValidationError

MAX_INT = 2**63 - 1
DEFAULT_ENUMERATION_CAP = 1_000_000


class Representation(str, enum.Enum):
    ORIGINAL = "original"
    DUAL = "dual"


# A multi-index is a length-P tuple of lag labels in [0, L]; an occupation
# vector is a length-(L+1) tuple of per-lag multiplicities.
MultiIndex = tuple
OccupationVector = tuple


@dataclass(frozen=True)
class ProblemSpec:
    """Lag count L, polynomial order P, and the chosen representation."""

    L: int
    P: int
    rep: Representation = Representation.ORIGINAL

    def __post_init__(self):
        if self.L < 0 or self.P < 0:
            raise ValidationError(f"L and P must be non-negative, got L={self.L}, P={self.P}")

    @property
    def shape(self) -> tuple:
        if self.rep is Representation.ORIGINAL:
            return (self.L + 1,) * self.P
        return (self.P + 1,) * (self.L + 1)


@dataclass(frozen=True)
class CoeffTensor:
    """A dense coefficient tensor together with its problem spec."""

    spec: ProblemSpec
    tensor: np.ndarray

    def __post_init__(self):
        # np.array rather than ascontiguousarray: the latter promotes rank-0 to rank-1
        arr = np.array(self.tensor, dtype=np.float64, order="C")
        if arr.shape != self.spec.shape:
            raise ValidationError(f"tensor shape {arr.shape} does not match spec shape {self.spec.shape}")
        check_dense_cap(arr.size, "coefficient tensor")
        object.__setattr__(self, "tensor", arr)


def full_dimension(spec: ProblemSpec) -> int:
    """Dense entry count of the representation: (L+1)^P or (P+1)^(L+1)."""
    if spec.rep is Representation.ORIGINAL:
        base, exp = spec.L + 1, spec.P
    else:
        base, exp = spec.P + 1, spec.L + 1
    dim = base**exp
    if dim > MAX_INT:
        raise ValidationError(f"dimension {base}^{exp} exceeds 2^63")
    return dim


def symmetric_dimension(L: int, P: int) -> int:
    """Number of independent L-variate monomials of degree <= P: C(L+P, P)."""
    if L < 0 or P < 0:
        raise ValidationError("L and P must be non-negative")
    dim = math.comb(L + P, P)
    if dim > MAX_INT:
        raise ValidationError(f"dimension C({L + P},{P}) exceeds 2^63")
    return dim


def enumerate_multi_indices(L: int, P: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """All length-P tuples over [0, L] in lexicographic order."""
    total = full_dimension(ProblemSpec(L, P, Representation.ORIGINAL))
    if total > cap:
        raise SizeCapError(f"{total} multi-indices exceed the cap of {cap}")
    return list(np.ndindex(*(L + 1,) * P)) if P > 0 else [()]


def enumerate_occupations(L: int, P: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """All length-(L+1) non-negative vectors summing to P, lexicographically."""
    count = symmetric_dimension(L, P)
    if count > cap:
        raise SizeCapError(f"{count} occupation vectors exceed the cap of {cap}")

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    return list(compositions(P, L + 1))


def occupation_of(idx, L: int) -> OccupationVector:
    """Per-lag multiplicity counts of a multi-index."""
    counts = [0] * (L + 1)
    for entry in idx:
        if not 0 <= entry <= L:
            raise ValidationError(f"multi-index entry {entry} outside [0, {L}]")
        counts[entry] += 1
    return tuple(counts)


def multinomial(P: int, counts) -> int:
    """Orbit size of an occupation class: P! / prod(counts!)."""
    if sum(counts) != P:
        raise ValidationError(f"counts {tuple(counts)} do not sum to {P}")
    out = math.factorial(P)
    for c in counts:
        out //= math.factorial(c)
    return out


# -- vectorized per-entry tables, cached per (L, P) ------------------------

@lru_cache(maxsize=8)
def _entry_tables(L: int, P: int):
    """Per flat original entry: dual flat offset and orbit size.

    The dual flat offset of entry i is the row-major position of its
    occupation vector in the (P+1)^(L+1) dual tensor; entries in the same
    permutation orbit share it.
    """
    spec = ProblemSpec(L, P, Representation.ORIGINAL)
    m = full_dimension(spec)
    check_dense_cap(m, "original representation")
    check_dense_cap(full_dimension(ProblemSpec(L, P, Representation.DUAL)), "dual representation")
    flat = np.arange(m, dtype=np.int64)
    # row-major strides of the dual tensor, indexed by lag label
    stride = np.array([(P + 1) ** (L - r) for r in range(L + 1)], dtype=np.int64)
    dual_offset = np.zeros(m, dtype=np.int64)
    counts = np.zeros((m, L + 1), dtype=np.int64)
    for k in range(P):
        digit = (flat // (L + 1) ** (P - 1 - k)) % (L + 1)
        dual_offset += stride[digit]
        counts[np.arange(m), digit] += 1
    fact = np.array([math.factorial(c) for c in range(P + 1)], dtype=np.float64)
    orbit = math.factorial(P) / np.prod(fact[counts], axis=1)
    return dual_offset, np.round(orbit).astype(np.int64)


def _require_rep(w: CoeffTensor, rep: Representation, op: str) -> None:
    if w.spec.rep is not rep:
        raise ValidationError(f"{op} expects the {rep.value} representation, got {w.spec.rep.value}")


def symmetrize(w: CoeffTensor) -> CoeffTensor:
    """Project onto the permutation-symmetric subspace.

    Each entry becomes the mean of its permutation orbit. Orbits are
    accumulated by occupation class, so no factorial-size enumeration
    happens.
    """
    _require_rep(w, Representation.ORIGINAL, "symmetrize")
    L, P = w.spec.L, w.spec.P
    if P <= 1:
        return CoeffTensor(w.spec, w.tensor.copy())
    dual_offset, orbit = _entry_tables(L, P)
    class_sums = np.bincount(dual_offset, weights=w.tensor.ravel(), minlength=(P + 1) ** (L + 1))
    out = class_sums[dual_offset] / orbit
    return CoeffTensor(w.spec, out.reshape(w.spec.shape))


def to_dual(w: CoeffTensor) -> CoeffTensor:
    """Collect original coefficients into dual occupation classes.

    The dual entry at occupation j is the sum of all original entries
    whose multi-index realizes j; every dual entry off the sum-P
    constraint surface is zero.
    """
    _require_rep(w, Representation.ORIGINAL, "to_dual")
    L, P = w.spec.L, w.spec.P
    dual_spec = ProblemSpec(L, P, Representation.DUAL)
    dual_offset, _ = _entry_tables(L, P)
    data = np.bincount(dual_offset, weights=w.tensor.ravel(), minlength=full_dimension(dual_spec))
    return CoeffTensor(dual_spec, data.reshape(dual_spec.shape))


def from_dual(v: CoeffTensor) -> CoeffTensor:
    """Spread dual coefficients back over permutation orbits (equal-weight gauge).

    Each original entry receives its class value divided by the orbit size,
    so the result is permutation-symmetric and to_dual inverts it exactly.
    Dual entries off the sum-P constraint surface must be exactly zero.
    """
    _require_rep(v, Representation.DUAL, "from_dual")
    L, P = v.spec.L, v.spec.P
    orig_spec = ProblemSpec(L, P, Representation.ORIGINAL)
    dual_offset, orbit = _entry_tables(L, P)
    flat = v.tensor.ravel()
    reachable = np.zeros(flat.size, dtype=bool)
    reachable[dual_offset] = True
    bad = np.nonzero(~reachable & (flat != 0.0))[0]
    if bad.size:
        occ = np.unravel_index(int(bad[0]), v.spec.shape)
        raise ValidationError(
            f"dual entry at occupation {tuple(int(j) for j in occ)} is nonzero but its counts do not sum to {P}"
        )
    out = flat[dual_offset] / orbit
    return CoeffTensor(orig_spec, out.reshape(orig_spec.shape))


def _history_vector(L: int, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64).ravel()
    if h.size != L:
        raise ValidationError(f"expected {L} lagged values, got {h.size}")
    return np.concatenate(([1.0], h))


def evaluate_original(w: CoeffTensor, h) -> float:
    """Polynomial value: contract w with P copies of s = [1, h_1, ..., h_L]."""
    _require_rep(w, Representation.ORIGINAL, "evaluate_original")
    s = _history_vector(w.spec.L, h)
    acc = w.tensor
    for _ in range(w.spec.P):
        acc = np.tensordot(acc, s, axes=([acc.ndim - 1], [0]))
    return float(acc)


def evaluate_dual(v: CoeffTensor, h) -> float:
    """Polynomial value in the power basis: sum_j V[j] * prod_r h_r^{j_r}.

    Sums over *all* dual entries, constrained or not; the redundant part of
    the space is a legal extension and constraint enforcement is left to
    from_dual.
    """
    _require_rep(v, Representation.DUAL, "evaluate_dual")
    s = _history_vector(v.spec.L, h)
    P = v.spec.P
    acc = v.tensor
    for r in range(v.spec.L + 1):
        powers = s[r] ** np.arange(P + 1)
        acc = np.tensordot(acc, powers, axes=([0], [0]))
    return float(acc)


def evaluate(w: CoeffTensor, h) -> float:
    """Dispatch on the tensor's representation."""
    if w.spec.rep is Representation.ORIGINAL:
        return evaluate_original(w, h)
    return evaluate_dual(w, h)


def inner_product(w1: CoeffTensor, w2: CoeffTensor) -> float:
    """Entrywise inner product; requires identical specs."""
    if w1.spec != w2.spec:
        raise ValidationError(f"spec mismatch: {w1.spec} vs {w2.spec}")
    return float(np.dot(w1.tensor.ravel(), w2.tensor.ravel()))
