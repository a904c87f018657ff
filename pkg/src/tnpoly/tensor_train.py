"""Tensor-train factorization with open boundaries.

Cores are rank-3 arrays (left bond, physical, right bond) with boundary
bonds of size 1. Decomposition is the deterministic left-to-right TT-SVD
sweep (Oseledets 2011); truncation keeps, per bond, the singular values
above a relative threshold and below the rank cap, which makes the
discarded weight an exact error accounting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import check_dense_cap, svd
from .errors import ValidationError


@dataclass(frozen=True)
class TTState:
    """An ordered chain of rank-3 cores; optionally in mixed-canonical form.

    When canonical_center = c, cores left of c are left-orthogonal and
    cores right of c are right-orthogonal.
    """

    cores: tuple
    canonical_center: int | None = None

    def __post_init__(self):
        cores = tuple(np.ascontiguousarray(c, dtype=np.float64) for c in self.cores)
        if not cores:
            raise ValidationError("a tensor train needs at least one core")
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise ValidationError(f"core {k} has rank {c.ndim}, expected 3")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValidationError("boundary bond dimensions must be 1")
        for k in range(len(cores) - 1):
            if cores[k].shape[2] != cores[k + 1].shape[0]:
                raise ValidationError(
                    f"bond mismatch between cores {k} and {k + 1}: "
                    f"{cores[k].shape[2]} vs {cores[k + 1].shape[0]}"
                )
        if self.canonical_center is not None and not 0 <= self.canonical_center < len(cores):
            raise ValidationError(f"canonical center {self.canonical_center} out of range")
        object.__setattr__(self, "cores", cores)

    @property
    def n_sites(self) -> int:
        return len(self.cores)

    @property
    def dims(self) -> tuple:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple:
        """Bond dimensions r_0 .. r_n (boundaries included)."""
        return (1,) + tuple(c.shape[2] for c in self.cores)


def tt_parameter_count(tt: TTState) -> int:
    """Total number of stored core entries."""
    return int(sum(c.size for c in tt.cores))


def _keep_count(s: np.ndarray, max_rank: int | None, tol: float) -> int:
    if s.size == 0:
        return 1
    smax = s[0]
    if smax <= 0.0:
        keep = 1
    else:
        keep = int(np.count_nonzero(s > tol * smax))
        keep = max(keep, 1)
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    return keep


def _sweep_decompose(w: np.ndarray, max_rank, tol):
    """Left-to-right TT-SVD; returns (cores, discarded squared weight)."""
    n = w.ndim
    d = w.shape[0]
    cores = []
    discarded_sq = 0.0
    rank = 1
    c = w.reshape(1, -1)
    for _ in range(n - 1):
        mat = c.reshape(rank * d, -1)
        res = svd(mat)
        keep = _keep_count(res.singular_values, max_rank, tol)
        discarded_sq += float(np.sum(res.singular_values[keep:] ** 2))
        cores.append(res.left[:, :keep].reshape(rank, d, keep))
        c = res.singular_values[:keep, None] * res.right[:keep]
        rank = keep
    cores.append(c.reshape(rank, d, 1))
    return cores, discarded_sq


def tt_decompose(w: np.ndarray, max_rank: int | None = None, tol: float = 0.0) -> TTState:
    """Factor a dense tensor into a tensor train.

    With max_rank=None and tol=0 the factorization is exact up to
    round-off. The result is left-orthogonal up to the last core
    (canonical center n-1).
    """
    tt, _ = tt_decompose_with_error(w, max_rank=max_rank, tol=tol)
    return tt


def tt_decompose_with_error(w: np.ndarray, max_rank: int | None = None, tol: float = 0.0):
    """tt_decompose plus the discarded singular weight sqrt(sum sigma^2)."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.ndim < 1:
        raise ValidationError("cannot decompose a rank-0 tensor")
    if len(set(w.shape)) != 1:
        raise ValidationError(f"local dimensions must be uniform, got shape {w.shape}")
    if max_rank is not None and max_rank < 1:
        raise ValidationError(f"max_rank must be >= 1, got {max_rank}")
    if tol < 0.0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    check_dense_cap(w.size, "decomposition input")
    cores, discarded_sq = _sweep_decompose(w, max_rank, tol)
    return TTState(tuple(cores), canonical_center=len(cores) - 1), float(np.sqrt(discarded_sq))


def tt_reconstruct(tt: TTState) -> np.ndarray:
    """Contract the chain back into a dense tensor."""
    size = int(np.prod([d for d in tt.dims], dtype=np.int64))
    check_dense_cap(size, "reconstruction")
    acc = tt.cores[0][0]  # (d, r1)
    for core in tt.cores[1:]:
        acc = np.tensordot(acc, core, axes=([acc.ndim - 1], [0]))
    return np.ascontiguousarray(acc[..., 0])


def tt_contract_history(tt: TTState, s) -> float:
    """Contract every physical leg with the same vector s.

    A chain of (rank x rank) matrix products, O(n * d * D^2); equals the
    dense evaluation of the reconstructed tensor against s x ... x s.
    """
    s = np.asarray(s, dtype=np.float64).ravel()
    for k, d in enumerate(tt.dims):
        if d != s.size:
            raise ValidationError(f"core {k} has physical dimension {d}, input has {s.size}")
    acc = np.tensordot(tt.cores[0], s, axes=([1], [0]))[0]  # (r1,)
    for core in tt.cores[1:]:
        acc = acc @ np.tensordot(core, s, axes=([1], [0]))
    return float(acc[0])


def _left_orthogonalize(cores, upto: int) -> None:
    """QR-sweep cores[0:upto] to left-orthogonal form, absorbing factors rightward."""
    for k in range(upto):
        r0, d, r1 = cores[k].shape
        q, r = np.linalg.qr(cores[k].reshape(r0 * d, r1))
        cores[k] = q.reshape(r0, d, q.shape[1])
        cores[k + 1] = np.tensordot(r, cores[k + 1], axes=([1], [0]))


def _right_orthogonalize(cores, downto: int) -> None:
    """QR-sweep cores[n-1:downto] to right-orthogonal form, absorbing leftward."""
    for k in range(len(cores) - 1, downto, -1):
        r0, d, r1 = cores[k].shape
        q, r = np.linalg.qr(cores[k].reshape(r0, d * r1).T)
        cores[k] = q.T.reshape(q.shape[1], d, r1)
        cores[k - 1] = np.tensordot(cores[k - 1], r, axes=([2], [1]))


def canonicalize(tt: TTState, center: int | None = None) -> TTState:
    """Return an equivalent chain in mixed-canonical form about `center`."""
    n = tt.n_sites
    if center is None:
        center = n - 1
    if not 0 <= center < n:
        raise ValidationError(f"canonical center {center} out of range")
    cores = [c.copy() for c in tt.cores]
    _left_orthogonalize(cores, center)
    _right_orthogonalize(cores, center)
    return TTState(tuple(cores), canonical_center=center)


def is_canonical(tt: TTState, atol: float = 1e-10) -> bool:
    """Check the orthogonality pattern implied by canonical_center."""
    if tt.canonical_center is None:
        return False
    for k, core in enumerate(tt.cores):
        if k < tt.canonical_center:
            gram = np.einsum("aib,aic->bc", core, core)
        elif k > tt.canonical_center:
            gram = np.einsum("aib,cib->ac", core, core)
        else:
            continue
        if not np.allclose(gram, np.eye(gram.shape[0]), atol=atol):
            return False
    return True


def tt_round(tt: TTState, max_rank: int | None = None, tol: float = 0.0) -> TTState:
    """Re-truncate an existing chain: canonicalize, then a truncating sweep."""
    if max_rank is not None and max_rank < 1:
        raise ValidationError(f"max_rank must be >= 1, got {max_rank}")
    cores = [c.copy() for c in tt.cores]
    _right_orthogonalize(cores, 0)
    for k in range(len(cores) - 1):
        r0, d, r1 = cores[k].shape
        res = svd(cores[k].reshape(r0 * d, r1))
        keep = _keep_count(res.singular_values, max_rank, tol)
        cores[k] = res.left[:, :keep].reshape(r0, d, keep)
        carry = res.singular_values[:keep, None] * res.right[:keep]
        cores[k + 1] = np.tensordot(carry, cores[k + 1], axes=([1], [0]))
    return TTState(tuple(cores), canonical_center=len(cores) - 1)


def tt_norm(tt: TTState) -> float:
    """Frobenius norm of the represented tensor, via transfer contractions."""
    acc = np.ones((1, 1))
    for core in tt.cores:
        acc = np.einsum("aA,aib,AiB->bB", acc, core, core, optimize=True)
    return float(np.sqrt(max(acc[0, 0], 0.0)))


def bond_spectra(tt: TTState):
    """Schmidt values of the represented state at every interior bond.

    Works from a fresh canonicalization, so any consistent chain is
    accepted; values are returned unnormalized.
    """
    cores = [c.copy() for c in tt.cores]
    _right_orthogonalize(cores, 0)
    spectra = []
    for k in range(len(cores) - 1):
        r0, d, r1 = cores[k].shape
        res = svd(cores[k].reshape(r0 * d, r1))
        spectra.append(res.singular_values.copy())
        keep = res.singular_values.size
        cores[k] = res.left.reshape(r0, d, keep)
        carry = res.singular_values[:, None] * res.right
        cores[k + 1] = np.tensordot(carry, cores[k + 1], axes=([1], [0]))
    return spectra


def random_tt(n: int, d: int, D: int, seed: int) -> TTState:
    """Seeded random chain with standard-normal cores, normalized to unit norm.

    Interior bonds are min(D, d^k, d^(n-k)), so every cut entropy is at
    most ln D by construction. Uses numpy's default PCG64 generator.
    """
    if n < 1 or d < 1 or D < 1:
        raise ValidationError("n, d, D must all be >= 1")
    rng = np.random.default_rng(seed)
    ranks = [1] + [min(D, d**k, d ** (n - k)) for k in range(1, n)] + [1]
    cores = [rng.standard_normal((ranks[k], d, ranks[k + 1])) for k in range(n)]
    tt = TTState(tuple(cores))
    norm = tt_norm(tt)
    if norm == 0.0:
        raise ValidationError("degenerate random draw with zero norm")
    scale = norm ** (-1.0 / n)
    return TTState(tuple(c * scale for c in cores))


def random_dense_state(n: int, d: int, seed: int):
    """Seeded random dense state with iid normal entries, unit-normalized."""
    from .entanglement import PureState, normalize

    if n < 1 or d < 1:
        raise ValidationError("n and d must be >= 1")
    size = d**n
    check_dense_cap(size, "random dense state")
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((d,) * n)
    return normalize(PureState(coeffs))
