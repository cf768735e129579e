"""Dense complex tensor arithmetic: contraction, SVD, inner products.

Tensors are plain ``numpy.ndarray`` objects of dtype complex128 with
row-major index order; this module is the only place that talks to the
underlying linear algebra so conventions live here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "as_tensor",
    "contract",
    "inner",
    "norm",
    "svd",
    "SvdResult",
    "tensor_to_json",
    "tensor_from_json",
]


def as_tensor(data):
    """Coerce to a contiguous complex128 ndarray."""
    return np.ascontiguousarray(np.asarray(data, dtype=np.complex128))


def check_finite(t, context=""):
    if not np.all(np.isfinite(t.view(np.float64))):
        raise FloatingPointError(f"non-finite tensor entries {context}".strip())
    return t


def contract(a, b, pairs):
    """Contract ``a`` and ``b`` over the given (axis-of-a, axis-of-b) pairs.

    Result indices are the unpaired indices of ``a`` followed by those of
    ``b``; an empty ``pairs`` list yields the outer product.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    axes_a = [p[0] for p in pairs]
    axes_b = [p[1] for p in pairs]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError(f"repeated index in contraction pairs {pairs}")
    for ia, ib in pairs:
        if a.shape[ia] != b.shape[ib]:
            raise DimensionMismatchError(
                f"extent mismatch: a axis {ia} has {a.shape[ia]}, b axis {ib} has {b.shape[ib]}"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def inner(a, b):
    """Hermitian inner product <a|b> = sum conj(a) * b over all entries."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def norm(a):
    return float(np.linalg.norm(np.asarray(a)))


@dataclass
class SvdResult:
    """Truncated SVD of a tensor viewed as a matrix.

    ``left`` has shape (*row_dims, rank), ``right`` (rank, *col_dims), and
    left @ diag(s) @ right reconstructs the input up to
    ``truncation_error`` in Frobenius norm.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    truncation_error: float

    @property
    def rank(self):
        return self.singular_values.size


def svd(t, row_axes, col_axes=None, max_rank=None, cutoff=0.0):
    """SVD of ``t`` across the (row_axes | col_axes) index bipartition.

    Singular values are kept while s > cutoff * s_max (cutoff is relative)
    and the count is capped at ``max_rank``.  An all-zero input returns a
    rank-0 result with truncation_error = ||t||_F rather than erroring, so
    truncation loops tolerate collapsed tensors.
    """
    t = as_tensor(t)
    row_axes = list(row_axes)
    if col_axes is None:
        col_axes = [ax for ax in range(t.ndim) if ax not in row_axes]
    else:
        col_axes = list(col_axes)
    if sorted(row_axes + col_axes) != list(range(t.ndim)):
        raise ValueError(
            f"bipartition {row_axes}|{col_axes} must cover all {t.ndim} axes exactly once"
        )
    row_dims = [t.shape[ax] for ax in row_axes]
    col_dims = [t.shape[ax] for ax in col_axes]
    m = t.transpose(row_axes + col_axes).reshape(int(np.prod(row_dims)), -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size and s[0] > 0.0:
        keep = int(np.sum(s > cutoff * s[0]))
    else:
        keep = 0
    if max_rank is not None:
        keep = min(keep, int(max_rank))
    err = float(np.sqrt(np.sum(s[keep:] ** 2)))
    left = np.ascontiguousarray(u[:, :keep]).reshape(*row_dims, keep)
    right = np.ascontiguousarray(vh[:keep, :]).reshape(keep, *col_dims)
    return SvdResult(left, s[:keep].copy(), right, err)


def tensor_to_json(t):
    """JSON-serializable dict {shape, re, im} in row-major order."""
    t = as_tensor(t)
    flat = t.reshape(-1)
    return {
        "shape": list(t.shape),
        "re": flat.real.tolist(),
        "im": flat.imag.tolist(),
    }


def tensor_from_json(obj):
    shape = tuple(int(x) for x in obj["shape"])
    data = np.asarray(obj["re"], dtype=np.float64) + 1j * np.asarray(obj["im"], dtype=np.float64)
    if data.size != int(np.prod(shape, dtype=np.int64)):
        raise ValueError("entry count does not match shape")
    return data.reshape(shape).astype(np.complex128)
