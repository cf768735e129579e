"""Plain and boundary tensor network states and their dense evaluation.

Index conventions, used everywhere downstream: a vertex map carries its
physical index first, then one bond index per incident edge in ascending
edge-id order, and (for augmented maps) the weight index last.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateStateError, DimensionMismatchError, ResourceLimitError
from .tensor_core import tensor_from_json, tensor_to_json
from .graph_model import NetworkShape
from .weight_states import WeightSpec, build_weight_state, weight_mps_site_tensors

__all__ = [
    "TNSRep",
    "BTNSRep",
    "DegenerationCurve",
    "tns_evaluate",
    "btns_evaluate",
    "expectation_exact",
    "random_init",
    "DEFAULT_AMPLITUDE_CAP",
]

DEFAULT_AMPLITUDE_CAP = 2**20


def _expected_axes(shape, v):
    dims = [shape.phys_dim]
    dims += [shape.bond_dims[e] for e in shape.vertex_edges(v)]
    return tuple(dims)


@dataclass
class TNSRep:
    """Tensor network state representation: one map per vertex."""

    shape: NetworkShape
    maps: list

    def __post_init__(self):
        self.maps = [np.ascontiguousarray(m, dtype=np.complex128) for m in self.maps]
        if len(self.maps) != self.shape.vertex_count:
            raise DimensionMismatchError("one map per vertex required")
        for v, m in enumerate(self.maps):
            if m.shape != _expected_axes(self.shape, v):
                raise DimensionMismatchError(
                    f"map {v} has shape {m.shape}, expected {_expected_axes(self.shape, v)}"
                )

    def copy(self):
        return TNSRep(self.shape, [m.copy() for m in self.maps])

    def to_json(self):
        return {"shape": self.shape.to_json(), "maps": [tensor_to_json(m) for m in self.maps]}

    @staticmethod
    def from_json(obj):
        shape = NetworkShape.from_json(obj["shape"])
        return TNSRep(shape, [tensor_from_json(m) for m in obj["maps"]])


@dataclass
class BTNSRep:
    """Augmented representation with a weight index of extent dloc+1 per map."""

    shape: NetworkShape
    weight: int
    local_degree: int
    maps: list

    def __post_init__(self):
        if not 0 <= self.local_degree <= self.weight:
            raise ValueError("need 0 <= dloc <= a")
        self.maps = [np.ascontiguousarray(m, dtype=np.complex128) for m in self.maps]
        if len(self.maps) != self.shape.vertex_count:
            raise DimensionMismatchError("one map per vertex required")
        for v, m in enumerate(self.maps):
            want = _expected_axes(self.shape, v) + (self.local_degree + 1,)
            if m.shape != want:
                raise DimensionMismatchError(f"map {v} has shape {m.shape}, expected {want}")

    def copy(self):
        return BTNSRep(self.shape, self.weight, self.local_degree, [m.copy() for m in self.maps])

    def eta_slice(self, v, eta):
        """Plain map of vertex v at weight-index value eta."""
        return self.maps[v][..., eta]

    def to_json(self):
        return {
            "shape": self.shape.to_json(),
            "a": self.weight,
            "dloc": self.local_degree,
            "maps": [tensor_to_json(m) for m in self.maps],
        }

    @staticmethod
    def from_json(obj):
        shape = NetworkShape.from_json(obj["shape"])
        return BTNSRep(
            shape, int(obj["a"]), int(obj["dloc"]), [tensor_from_json(m) for m in obj["maps"]]
        )


@dataclass
class DegenerationCurve:
    """Per-vertex polynomial-in-epsilon maps realizing a boundary state.

    ``coeff_maps[v][eta]`` is the tensor multiplying eps**eta in the map of
    vertex v; ``approximation_degree`` is the power of eps carrying the
    target state in the expansion of the evaluated network.
    """

    shape: NetworkShape
    coeff_maps: list
    approximation_degree: int

    @property
    def local_degree(self):
        return max(len(powers) for powers in self.coeff_maps) - 1

    def evaluate(self, eps):
        """TNSRep at a fixed eps != 0 (the eps -> 0 limit is non-local)."""
        if eps == 0:
            raise ValueError("degenerations are evaluated at eps != 0")
        maps = []
        for powers in self.coeff_maps:
            acc = np.zeros_like(powers[0])
            for eta, coeff in enumerate(powers):
                acc = acc + (eps**eta) * coeff
            maps.append(acc)
        return TNSRep(self.shape, maps)

    def to_btns(self):
        """Stack the coefficient tensors along a trailing weight index."""
        dloc = self.local_degree
        maps = []
        for powers in self.coeff_maps:
            stacked = np.zeros(powers[0].shape + (dloc + 1,), dtype=np.complex128)
            for eta, coeff in enumerate(powers):
                stacked[..., eta] = coeff
            maps.append(stacked)
        return BTNSRep(self.shape, self.approximation_degree, dloc, maps)


def _contract_labeled(factors, out_labels):
    """Sequentially contract labelled tensors; repeated labels are summed."""
    acc = np.ones((), dtype=np.complex128)
    cur = []
    for arr, labels in factors:
        shared = [lab for lab in labels if lab in cur]
        ax_acc = [cur.index(lab) for lab in shared]
        ax_new = [labels.index(lab) for lab in shared]
        acc = np.tensordot(acc, arr, axes=(ax_acc, ax_new))
        cur = [lab for lab in cur if lab not in shared]
        cur += [lab for lab in labels if lab not in shared]
    if sorted(map(str, cur)) != sorted(map(str, out_labels)):
        raise AssertionError(f"dangling labels {cur} vs requested {out_labels}")
    return np.ascontiguousarray(acc.transpose([cur.index(lab) for lab in out_labels]))


def _check_cap(shape, cap):
    amplitudes = shape.phys_dim**shape.vertex_count
    if amplitudes > cap:
        raise ResourceLimitError(
            f"{amplitudes} amplitudes exceed the dense cap {cap}; raise `cap` explicitly"
        )


def _map_labels(shape, v):
    return [("p", v)] + [("b", e) for e in shape.vertex_edges(v)]


def tns_evaluate(rep, cap=DEFAULT_AMPLITUDE_CAP):
    """Contract a TNSRep to the full state, shape (d,)*L.

    Each edge carries the unnormalized maximally entangled pair, so
    contraction is plain index identification between the two incident maps.
    """
    shape = rep.shape
    _check_cap(shape, cap)
    factors = [(rep.maps[v], _map_labels(shape, v)) for v in range(shape.vertex_count)]
    out = [("p", v) for v in range(shape.vertex_count)]
    return _contract_labeled(factors, out)


def _chi_mps_factors(weight, dloc, L):
    """Weight-state MPS factors labelled for interleaving with vertex maps."""
    if L == 1:
        vec = np.zeros(dloc + 1, dtype=np.complex128)
        if weight <= dloc:
            vec[weight] = 1.0
        return [(vec, [("w", 0)])]
    sites = weight_mps_site_tensors(weight, L)
    sites = [s[: dloc + 1] for s in sites]  # project the physical axis
    factors = [(sites[0], [("w", 0), ("c", 0)])]
    for t in range(1, L - 1):
        factors.append((sites[t], [("w", t), ("c", t - 1), ("c", t)]))
    factors.append((sites[L - 1], [("w", L - 1), ("c", L - 2)]))
    return factors


def btns_evaluate(rep, cap=DEFAULT_AMPLITUDE_CAP):
    """Contract a BTNSRep against the maximally entangled pairs and the weight state."""
    shape = rep.shape
    _check_cap(shape, cap)
    L = shape.vertex_count
    chi = _chi_mps_factors(rep.weight, rep.local_degree, L)
    factors = []
    for v in range(L):
        factors.append((rep.maps[v], _map_labels(shape, v) + [("w", v)]))
        factors.append(chi[v])
    out = [("p", v) for v in range(L)]
    return _contract_labeled(factors, out)


def apply_observable(state, obs, d=None, n_sites=None):
    """Apply a Hamiltonian-like object (``.terms``) or a dense matrix to a flat state."""
    flat = np.asarray(state, dtype=np.complex128).reshape(-1)
    if hasattr(obs, "terms"):
        d = obs.shape.phys_dim
        n_sites = obs.shape.vertex_count
        out = np.zeros_like(flat)
        for support, matrix in obs.terms:
            out += kernels.apply_local_op(flat, matrix, support, d, n_sites)
        return out
    obs = np.asarray(obs, dtype=np.complex128)
    if obs.shape != (flat.size, flat.size):
        raise DimensionMismatchError("dense observable does not match the state dimension")
    return obs @ flat


def expectation_exact(state, obs):
    """<psi|O|psi> / <psi|psi> for a dense state and a Hermitian observable."""
    flat = np.asarray(state, dtype=np.complex128).reshape(-1)
    nrm2 = float(np.vdot(flat, flat).real)
    if nrm2 <= 0.0:
        raise DegenerateStateError("zero state has no expectation values")
    if not hasattr(obs, "terms"):
        dense = np.asarray(obs)
        if not np.allclose(dense, dense.conj().T, atol=1e-10 * max(1.0, np.abs(dense).max())):
            raise ValueError("dense observable is not Hermitian")
    val = complex(np.vdot(flat, apply_observable(flat, obs))) / nrm2
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"expectation of Hermitian observable came out complex: {val}")
    return float(val.real)


def random_init(shape, weight, local_degree, seed):
    """Seeded BTNSRep with i.i.d. complex standard Gaussian map entries."""
    rng = np.random.default_rng(seed)
    maps = []
    for v in range(shape.vertex_count):
        dims = _expected_axes(shape, v) + (local_degree + 1,)
        maps.append(rng.standard_normal(dims) + 1j * rng.standard_normal(dims))
    return BTNSRep(shape, weight, local_degree, maps)


def random_ti_init(shape, weight, local_degree, seed):
    """Translation-invariant random start on a ring: one shared Gaussian map.

    Vertex 0 stores the shared (phys, left, right, weight) tensor with its
    bond axes swapped, since it sees its incident edges in id order.
    """
    if shape.kind != "ring":
        raise ValueError("translation invariance needs a ring")
    rng = np.random.default_rng(seed)
    dims = (shape.phys_dim, shape.bond_dims[0], shape.bond_dims[0], local_degree + 1)
    shared = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    maps = [shared.transpose(0, 2, 1, 3) if v == 0 else shared for v in range(shape.vertex_count)]
    return BTNSRep(shape, weight, local_degree, maps)


def weight_state_dense(weight, local_degree, n_sites):
    """Convenience re-export used by callers holding only this module."""
    return build_weight_state(WeightSpec(weight, local_degree, n_sites))
