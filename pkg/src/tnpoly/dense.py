"""Dense tensor substrate: row-major reshaping, contraction, SVD.

Tensors are plain float64 numpy arrays in C (row-major) order; the last
index varies fastest. Every function is pure and returns fresh arrays, so
values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeCapError, ValidationError

# Dense work beyond these caps is rejected rather than attempted.
MAX_DENSE_ELEMENTS = 1_000_000
MAX_SVD_DIM = 3000


def as_tensor(data, shape=None) -> np.ndarray:
    """Coerce to a C-contiguous float64 array, optionally reshaping."""
    a = np.array(data, dtype=np.float64, order="C")
    if shape is not None:
        if int(np.prod(shape, dtype=object)) != a.size:
            raise ValidationError(f"cannot reshape {a.size} entries into shape {tuple(shape)}")
        a = a.reshape(tuple(int(s) for s in shape))
    return a


def check_dense_cap(n_elements: int, what: str = "tensor") -> None:
    if n_elements > MAX_DENSE_ELEMENTS:
        raise SizeCapError(f"{what} with {n_elements} entries exceeds the dense cap of {MAX_DENSE_ELEMENTS}")


def flatten_index(shape, idx) -> int:
    """Row-major flat offset of a multi-index."""
    return int(np.ravel_multi_index(tuple(int(i) for i in idx), tuple(shape)))


def unflatten_index(shape, flat: int) -> tuple:
    """Inverse of flatten_index."""
    return tuple(int(i) for i in np.unravel_index(int(flat), tuple(shape)))


def matricize(t: np.ndarray, split: int) -> np.ndarray:
    """Reshape a tensor into a matrix grouping the first `split` axes as rows.

    Entry order is preserved under the row-major convention, so the rows
    enumerate the leading multi-indices and the columns the trailing ones.
    """
    t = np.asarray(t, dtype=np.float64)
    if not 0 <= split <= t.ndim:
        raise ValidationError(f"split {split} out of range for rank-{t.ndim} tensor")
    rows = int(np.prod(t.shape[:split], dtype=np.int64)) if split else 1
    cols = int(np.prod(t.shape[split:], dtype=np.int64)) if split < t.ndim else 1
    return t.reshape(rows, cols)


def contract(a: np.ndarray, b: np.ndarray, pairs) -> np.ndarray:
    """Sum products of `a` and `b` over the paired axes.

    Output axes are the unpaired axes of `a` followed by those of `b`,
    each in original order.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    axes_a, axes_b = [], []
    for ax_a, ax_b in pairs:
        if not 0 <= ax_a < a.ndim:
            raise ValidationError(f"axis {ax_a} out of range for rank-{a.ndim} tensor")
        if not 0 <= ax_b < b.ndim:
            raise ValidationError(f"axis {ax_b} out of range for rank-{b.ndim} tensor")
        if a.shape[ax_a] != b.shape[ax_b]:
            raise ValidationError(
                f"extent mismatch: axis {ax_a} of a has {a.shape[ax_a]}, axis {ax_b} of b has {b.shape[ax_b]}"
            )
        axes_a.append(ax_a)
        axes_b.append(ax_b)
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValidationError("repeated axis in contraction pairs")
    out_elems = int(
        np.prod([d for i, d in enumerate(a.shape) if i not in axes_a], dtype=np.int64)
        * np.prod([d for i, d in enumerate(b.shape) if i not in axes_b], dtype=np.int64)
    )
    check_dense_cap(out_elems, "contraction result")
    return np.tensordot(a, b, axes=(axes_a, axes_b))


@dataclass(frozen=True)
class SVDResult:
    """Thin SVD m = left @ diag(singular_values) @ right."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right


def svd(m: np.ndarray) -> SVDResult:
    """Thin SVD with singular values sorted descending.

    Falls back to the slower but more robust gesvd driver if the default
    divide-and-conquer routine fails to converge.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"svd expects a matrix, got rank {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("svd input contains non-finite entries")
    if min(m.shape) > MAX_SVD_DIM or m.size > MAX_SVD_DIM * MAX_SVD_DIM:
        raise SizeCapError(f"svd of shape {m.shape} exceeds the {MAX_SVD_DIM}x{MAX_SVD_DIM} cap")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        from scipy.linalg import svd as scipy_svd

        u, s, vt = scipy_svd(m, full_matrices=False, lapack_driver="gesvd")
    return SVDResult(left=u, singular_values=s, right=vt)


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values only (descending); same caps as svd()."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"expected a matrix, got rank {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("input contains non-finite entries")
    if min(m.shape) > MAX_SVD_DIM or m.size > MAX_SVD_DIM * MAX_SVD_DIM:
        raise SizeCapError(f"svd of shape {m.shape} exceeds the {MAX_SVD_DIM}x{MAX_SVD_DIM} cap")
    return np.linalg.svd(m, compute_uv=False)
