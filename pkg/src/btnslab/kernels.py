"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The three kernels below dominate runtime in dense oracles (applying local
operators to full state vectors, assembling dense Hamiltonians, enumerating
weight-state supports).  Everything else in the package is delegated to
BLAS through numpy and gains nothing from jitting.

Backend selection: the environment variable ``BTNSLAB_BACKEND`` may be set
to ``numba``, ``numpy`` or ``auto`` (default).  ``auto`` uses numba when it
imports, numpy otherwise.  ``use_backend`` overrides the choice at runtime
(used by tests and the benchmark script).
"""

import os

import numpy as np

_VALID_BACKENDS = ("auto", "numba", "numpy")
_backend_override = None
_resolved = None
_jit_cache = {}


def _resolve_backend():
    choice = os.environ.get("BTNSLAB_BACKEND", "auto").lower()
    if choice not in _VALID_BACKENDS:
        raise ValueError(
            f"BTNSLAB_BACKEND must be one of {_VALID_BACKENDS}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise RuntimeError("BTNSLAB_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


def active_backend():
    """Name of the backend currently in use ('numba' or 'numpy')."""
    global _resolved
    if _backend_override is not None:
        return _backend_override
    if _resolved is None:
        _resolved = _resolve_backend()
    return _resolved


def use_backend(name):
    """Force a backend ('numba' / 'numpy'), or None to return to env selection."""
    global _backend_override
    if name is not None and name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba":
        import numba  # noqa: F401  (fail early if unavailable)
    _backend_override = name


def _jit_impls():
    """Compile (once) and return the numba implementations."""
    if "impls" in _jit_cache:
        return _jit_cache["impls"]
    from numba import njit

    @njit(cache=True)
    def apply_local_op(state, op, strides, offsets, d, out):
        k = strides.size
        for idx in range(state.size):
            code = 0
            base = idx
            for i in range(k):
                digit = (idx // strides[i]) % d
                code = code * d + digit
                base -= digit * strides[i]
            acc = 0j
            for c in range(offsets.size):
                acc += op[code, c] * state[base + offsets[c]]
            out[idx] = acc

    @njit(cache=True)
    def scatter_term(ham, op, offsets, rest_strides, d, nrest):
        for r in range(nrest):
            base = 0
            t = r
            for i in range(rest_strides.size - 1, -1, -1):
                base += (t % d) * rest_strides[i]
                t //= d
            for c1 in range(offsets.size):
                row = base + offsets[c1]
                for c2 in range(offsets.size):
                    ham[row, base + offsets[c2]] += op[c1, c2]

    @njit(cache=True)
    def weight_fill(out, weight, local_dim, n_sites):
        for idx in range(out.size):
            t = idx
            s = 0
            for _ in range(n_sites):
                s += t % local_dim
                t //= local_dim
            if s == weight:
                out[idx] = 1.0

    _jit_cache["impls"] = (apply_local_op, scatter_term, weight_fill)
    return _jit_cache["impls"]


def _site_strides(sites, d, n_sites):
    return np.array([d ** (n_sites - 1 - s) for s in sites], dtype=np.int64)


def _local_offsets(strides, d):
    """Flat-index offset of every local code over the given site strides."""
    k = strides.size
    offsets = np.zeros(d**k, dtype=np.int64)
    for c in range(d**k):
        t = c
        for i in range(k - 1, -1, -1):
            offsets[c] += (t % d) * strides[i]
            t //= d
    return offsets


def apply_local_op(state, op, sites, d, n_sites):
    """Apply a k-local operator to a dense state vector.

    ``state`` is the flat length-d**n_sites vector in row-major site order,
    ``op`` the (d**k, d**k) matrix acting on the ordered ``sites``.
    Returns a new flat vector.
    """
    sites = tuple(int(s) for s in sites)
    k = len(sites)
    if len(set(sites)) != k:
        raise ValueError(f"repeated site in {sites}")
    if op.shape != (d**k, d**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites of dim {d}")
    if state.size != d**n_sites:
        raise ValueError("state length does not match d**n_sites")
    state = np.ascontiguousarray(state, dtype=np.complex128)
    op = np.ascontiguousarray(op, dtype=np.complex128)
    if active_backend() == "numba":
        strides = _site_strides(sites, d, n_sites)
        offsets = _local_offsets(strides, d)
        out = np.empty_like(state)
        _jit_impls()[0](state, op, strides, offsets, d, out)
        return out
    psi = state.reshape((d,) * n_sites)
    psi = np.moveaxis(psi, sites, range(k))
    rest_shape = psi.shape
    out = op @ psi.reshape(d**k, -1)
    out = np.moveaxis(out.reshape(rest_shape), range(k), sites)
    return np.ascontiguousarray(out).reshape(-1)


def assemble_dense(terms, d, n_sites):
    """Dense matrix of a sum of local terms; ``terms`` is [(sites, matrix), ...]."""
    dim = d**n_sites
    ham = np.zeros((dim, dim), dtype=np.complex128)
    if active_backend() == "numba":
        scatter = _jit_impls()[1]
        for sites, op in terms:
            sites = tuple(int(s) for s in sites)
            strides = _site_strides(sites, d, n_sites)
            offsets = _local_offsets(strides, d)
            rest = [s for s in range(n_sites) if s not in sites]
            rest_strides = _site_strides(rest, d, n_sites)
            op = np.ascontiguousarray(op, dtype=np.complex128)
            scatter(ham, op, offsets, rest_strides, d, d ** len(rest))
        return ham
    for sites, op in terms:
        ham += _embed_numpy(np.asarray(op, dtype=np.complex128), tuple(sites), d, n_sites)
    return ham


def _embed_numpy(op, sites, d, n_sites):
    k = len(sites)
    rest = [s for s in range(n_sites) if s not in sites]
    big = np.kron(op, np.eye(d ** len(rest), dtype=np.complex128))
    big = big.reshape((d,) * (2 * n_sites))
    # current axis order is (sites..., rest...) for rows, same for columns
    inv = np.argsort(list(sites) + rest)
    perm = tuple(inv) + tuple(n_sites + p for p in inv)
    return np.ascontiguousarray(big.transpose(perm)).reshape(d**n_sites, d**n_sites)


def weight_state_tensor(weight, local_degree, n_sites):
    """Indicator tensor of digit strings with digit sum ``weight``.

    Shape (local_degree+1,) * n_sites, complex entries in {0, 1}.
    """
    local_dim = local_degree + 1
    if active_backend() == "numba":
        out = np.zeros(local_dim**n_sites, dtype=np.complex128)
        _jit_impls()[2](out, weight, local_dim, n_sites)
        return out.reshape((local_dim,) * n_sites)
    digits = np.arange(local_dim)
    total = digits
    for _ in range(n_sites - 1):
        total = np.add.outer(total, digits)
    return (total == weight).astype(np.complex128)
