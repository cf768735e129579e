"""Expectation-value strategies for boundary tensor network states.

Two routes compute the same sesquilinear form: the MPS strategy embeds the
weight state's open-chain MPS along a covering path, giving back a plain
tensor network with inflated bonds; the border rank strategy expands the
weight state into a short sum of product states depending on epsilon,
evaluates the form at roots of unity and recovers the eps -> 0 value by
exact Lagrange interpolation.  Ring/chain transfer-matrix contraction
lives here as well and backs the fast path of the optimizers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UnsupportedGraphError
from .graph_model import NetworkShape
from .network_states import (
    BTNSRep,
    DEFAULT_AMPLITUDE_CAP,
    TNSRep,
    apply_observable,
    tns_evaluate,
)
from .weight_states import WeightSpec, border_rank_curve, weight_mps_site_tensors

__all__ = [
    "InterpolationPlan",
    "stable_interpolate",
    "embed_mps_strategy",
    "border_rank_expectation",
    "transfer_matrix_overlap",
]


@dataclass(frozen=True)
class InterpolationPlan:
    """Sampling plan at k-th roots of unity for the border rank strategy."""

    num_nodes: int
    degree_bound: int
    scale_degree: int

    def __post_init__(self):
        if self.num_nodes < self.degree_bound + 1:
            raise ValueError(
                f"{self.num_nodes} nodes alias a degree-{self.degree_bound} polynomial"
            )

    @property
    def nodes(self):
        k = self.num_nodes
        return np.exp(2j * np.pi * np.arange(k) / k)

    @staticmethod
    def for_state(n_sites, local_degree, weight):
        """Minimal exact plan: the sampled polynomial has degree 2(L*dloc - a)."""
        bound = 2 * (n_sites * local_degree - weight)
        return InterpolationPlan(bound + 1, bound, 2 * weight)


def stable_interpolate(samples, scale_degree):
    """Constant coefficient of eps**(-scale_degree) * q(eps) from root-of-unity samples.

    With exact samples of a polynomial q of degree < k + scale_degree whose
    terms below scale_degree vanish, this returns the exact value at 0; with
    samples off by at most delta, the result is off by at most delta.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    k = samples.size
    if k < 1:
        raise ValueError("need at least one sample")
    nodes = np.exp(2j * np.pi * np.arange(k) / k)
    return complex(np.mean(nodes ** (-scale_degree) * samples))


# ---------------------------------------------------------------------------
# MPS strategy


def _chi_path_tensors(weight, local_degree, n_sites):
    sites = weight_mps_site_tensors(weight, n_sites)
    return [s[: local_degree + 1] for s in sites]


def embed_mps_strategy(rep, path):
    """Fold the weight state's MPS into the vertex maps along ``path``.

    Returns a plain TNSRep equal (exactly) to the boundary state; every
    path edge's bond is inflated by a factor a+1.  Only simple covering
    paths (each vertex visited once) are supported, which covers all
    built-in graph kinds.
    """
    shape = rep.shape
    L = shape.vertex_count
    path.validate(shape)
    if len(path.vertices) != L:
        raise UnsupportedGraphError("embedding needs a path visiting each vertex exactly once")
    if any(m > 1 for m in path.edge_multiplicity.values()):
        raise UnsupportedGraphError("embedding needs edge multiplicities <= 1")
    a_dim = rep.weight + 1
    if L == 1:
        vec = np.zeros(rep.local_degree + 1, dtype=np.complex128)
        if rep.weight <= rep.local_degree:
            vec[rep.weight] = 1.0
        return TNSRep(shape, [np.tensordot(rep.maps[0], vec, axes=([-1], [0]))])
    chi = _chi_path_tensors(rep.weight, rep.local_degree, L)
    # chain bond of path step t lives on the graph edge (path[t], path[t+1])
    step_edge = [shape.edge_id(u, v) for u, v in zip(path.vertices, path.vertices[1:])]
    new_dims = list(shape.bond_dims)
    for e in step_edge:
        new_dims[e] *= a_dim
    new_shape = NetworkShape(
        L, shape.edges, tuple(new_dims), shape.phys_dim, shape.kind, shape.grid_dims
    )
    maps = [None] * L
    for t, v in enumerate(path.vertices):
        e_left = step_edge[t - 1] if t > 0 else None
        e_right = step_edge[t] if t < L - 1 else None
        w = chi[t]
        # contract the weight index with the chain site tensor
        T = np.tensordot(rep.maps[v], w, axes=([-1], [0]))
        # appended chain axes: (left, right) for bulk, single axis at the ends
        chain_axes = {}
        pos = rep.maps[v].ndim - 1
        if t > 0:
            chain_axes[e_left] = pos
            pos += 1
        if t < L - 1:
            chain_axes[e_right] = pos
        order = [0]
        dims = [shape.phys_dim]
        for i, e in enumerate(shape.vertex_edges(v)):
            order.append(1 + i)
            dim = shape.bond_dims[e]
            if e in chain_axes:
                order.append(chain_axes[e])
                dim *= a_dim
            dims.append(dim)
        maps[v] = T.transpose(order).reshape(dims)
    return TNSRep(new_shape, maps)


# ---------------------------------------------------------------------------
# Border rank strategy


def border_rank_expectation(rep, obs=None, plan=None, cap=DEFAULT_AMPLITUDE_CAP):
    """Unnormalized <psi|O|psi> of a BTNSRep via root-of-unity interpolation.

    Each sample expands the weight state into a+1 product terms per side
    and contracts the (a+1)^2 cross overlaps as plain tensor networks;
    ``obs=None`` gives the squared norm.  The node evaluations are
    independent pure computations combined by an ordered sum.
    """
    shape = rep.shape
    L, a, dloc = shape.vertex_count, rep.weight, rep.local_degree
    if plan is None:
        plan = InterpolationPlan.for_state(L, dloc, a)
    if plan.num_nodes < 2 * (L * dloc - a) + 1:
        raise ValueError(
            f"plan with {plan.num_nodes} nodes aliases the degree-{2 * (L * dloc - a)} form"
        )
    curve = border_rank_curve(WeightSpec(a, dloc, L))

    def product_states(eps):
        out = []
        for coeff, vec in curve.term_vectors(eps):
            maps = [np.tensordot(m, vec, axes=([-1], [0])) for m in rep.maps]
            out.append((coeff, tns_evaluate(TNSRep(shape, maps), cap=cap).reshape(-1)))
        return out

    samples = []
    for z in plan.nodes:
        kets = product_states(z)
        bras = product_states(np.conj(z))
        obs_kets = [(c, apply_observable(s, obs) if obs is not None else s) for c, s in kets]
        val = 0.0 + 0.0j
        for cb, sb in bras:
            for ck, sk in obs_kets:
                val += np.conj(cb) * ck * np.vdot(sb, sk)
        samples.append(val)
    return stable_interpolate(samples, plan.scale_degree)


# ---------------------------------------------------------------------------
# Transfer matrices on rings and chains


def _mps_site_tensors(rep):
    """Extract per-site tensors with axes (phys, left, right) from a TNSRep."""
    shape = rep.shape
    L = shape.vertex_count
    if shape.kind == "ring":
        out = []
        for v, m in enumerate(rep.maps):
            # vertex 0 sees (edge 0, edge L-1) in id order, i.e. (right, left)
            out.append(m.transpose(0, 2, 1) if v == 0 else m)
        return out
    if shape.kind == "chain":
        out = [rep.maps[0].reshape(rep.maps[0].shape[0], 1, -1)]
        out += list(rep.maps[1:-1])
        out.append(rep.maps[-1].reshape(rep.maps[-1].shape[0], -1, 1))
        return out
    raise UnsupportedGraphError(f"transfer contraction needs a ring or chain, got {shape.kind!r}")


def _transfer(kb, kk, op=None):
    if op is None:
        e = np.einsum("pab,pcd->acbd", np.conj(kb), kk)
    else:
        e = np.einsum("pab,pq,qcd->acbd", np.conj(kb), op, kk)
    s = e.shape
    return e.reshape(s[0] * s[1], s[2] * s[3])


def transfer_matrix_overlap(bra, ket, ops=None):
    """<bra|ket> (optionally with single-site operator insertions) site by site.

    ``ops`` maps vertex -> (d x d) matrix.  Works for ring and chain
    representations with arbitrary per-edge bonds; cost is polynomial in
    the bonds and linear in the length.
    """
    if bra.shape.kind != ket.shape.kind or bra.shape.vertex_count != ket.shape.vertex_count:
        raise DimensionMismatchError("bra and ket live on different graphs")
    if bra.shape.phys_dim != ket.shape.phys_dim:
        raise DimensionMismatchError("physical dimensions differ")
    ops = ops or {}
    kb = _mps_site_tensors(bra)
    kk = _mps_site_tensors(ket)
    acc = None
    for v in range(bra.shape.vertex_count):
        e = _transfer(kb[v], kk[v], ops.get(v))
        acc = e if acc is None else acc @ e
    if bra.shape.kind == "ring":
        return complex(np.trace(acc))
    return complex(acc[0, 0])


# ---------------------------------------------------------------------------
# Ring MPS view of a BTNSRep and transfer-matrix environments.  These back
# the fast path of the variational module; correctness is pinned against
# the dense evaluation in the tests.


def btns_ring_mps(rep):
    """Per-site (phys, left, right) tensors of a ring BTNSRep.

    The weight-state chain is laid on edges 0..L-2; the closing edge keeps
    bond D.  Fused bonds order the graph index before the chain index.
    """
    shape = rep.shape
    if shape.kind != "ring":
        raise UnsupportedGraphError("ring representation required")
    L = shape.vertex_count
    w = _chi_path_tensors(rep.weight, rep.local_degree, L)
    ks = []
    for v in range(L):
        b = rep.maps[v]
        if v == 0:
            # axes (p, right graph bond, left graph bond, eta)
            k = np.einsum("pabh,hc->pbac", b, w[0])
            ks.append(k.reshape(k.shape[0], k.shape[1], -1))
        elif v < L - 1:
            k = np.einsum("pabh,hcd->pacbd", b, w[v])
            ks.append(k.reshape(k.shape[0], k.shape[1] * k.shape[2], -1))
        else:
            k = np.einsum("pabh,hc->pacb", b, w[v])
            ks.append(k.reshape(k.shape[0], -1, k.shape[3]))
    return ks


def btns_ring_env_to_map(env, rep, v):
    """Chain-rule an environment on the ring MPS tensor back to the vertex map."""
    shape = rep.shape
    L = shape.vertex_count
    w = _chi_path_tensors(rep.weight, rep.local_degree, L)
    a_dim = rep.weight + 1
    d = shape.phys_dim
    if v == 0:
        alpha = shape.bond_dims[0]
        env4 = env.reshape(d, env.shape[1], alpha, a_dim)
        return np.einsum("pbac,hc->pabh", env4, np.conj(w[0]))
    if v < L - 1:
        al = shape.bond_dims[v - 1]
        ar = shape.bond_dims[v]
        env5 = env.reshape(d, al, a_dim, ar, a_dim)
        return np.einsum("pacbd,hcd->pabh", env5, np.conj(w[v]))
    al = shape.bond_dims[v - 1]
    env4 = env.reshape(d, al, a_dim, env.shape[2])
    return np.einsum("pacb,hc->pabh", env4, np.conj(w[v]))


def _ring_value_and_envs(ks, transfers, want_envs):
    """tr(E_0 ... E_{L-1}) and, optionally, d/d(conj K_v) of it."""
    L = len(ks)
    prefix = [np.eye(transfers[0].shape[0], dtype=np.complex128)]
    for e in transfers[:-1]:
        prefix.append(prefix[-1] @ e)
    suffix = [np.eye(transfers[-1].shape[1], dtype=np.complex128)]
    for e in reversed(transfers[1:]):
        suffix.append(e @ suffix[-1])
    suffix = suffix[::-1]
    value = complex(np.trace(prefix[-1] @ transfers[-1]))
    if not want_envs:
        return value, None
    envs = []
    for v in range(L):
        g = suffix[v] @ prefix[v]
        kb, kk = ks[v]
        g4 = g.reshape(kb.shape[2], kk.shape[2], kb.shape[1], kk.shape[1])
        envs.append(np.einsum("plr,srtl->pts", kk, g4))
    return value, envs


def ring_norm_and_envs(ks, want_envs=True):
    """Squared norm of the ring MPS with tensors ``ks`` and its environments."""
    pairs = [(k, k) for k in ks]
    transfers = [_transfer(k, k) for k in ks]
    return _ring_value_and_envs(pairs, transfers, want_envs)


def ring_term_and_envs(ks, support, matrix, want_envs=True):
    """<psi| h |psi> for a two-site term on ring edge ``support`` plus environments."""
    L = len(ks)
    u, u1 = support
    if u1 != (u + 1) % L:
        raise ValueError(f"support {support} is not a ring edge in order")
    d = ks[0].shape[0]
    h4 = np.asarray(matrix, dtype=np.complex128).reshape(d, d, d, d)
    rot = [(u + 2 + i) % L for i in range(L - 2)]
    transfers = [_transfer(ks[w], ks[w]) for w in rot]
    if transfers:
        p = transfers[0]
        for e in transfers[1:]:
            p = p @ e
    else:
        p = np.eye(ks[u1].shape[2] ** 2, dtype=np.complex128)
    ku, k1 = ks[u], ks[u1]
    theta = np.einsum("plm,qmr->pqlr", ku, k1)
    f = np.einsum("pqac,pqxy,xybd->abcd", np.conj(theta), h4, theta, optimize=True)
    fmat = f.reshape(f.shape[0] * f.shape[1], f.shape[2] * f.shape[3])
    value = complex(np.trace(p @ fmat))
    if not want_envs:
        return value, None
    p4 = p.reshape(k1.shape[2], k1.shape[2], ku.shape[1], ku.shape[1])
    envs = [None] * L
    # prefix/suffix products over the rotated chain, with the term block last
    pre = [np.eye(p.shape[0], dtype=np.complex128)]
    for e in transfers:
        pre.append(pre[-1] @ e)
    suf = [fmat]
    for e in reversed(transfers[1:]):
        suf.append(e @ suf[-1])
    suf = suf[::-1]
    for j, w in enumerate(rot):
        g = suf[j] @ pre[j]
        kk = ks[w]
        g4 = g.reshape(kk.shape[2], kk.shape[2], kk.shape[1], kk.shape[1])
        envs[w] = np.einsum("plr,srtl->pts", kk, g4)
    envs[u] = np.einsum("qnc,pqxy,xlm,ymr,crtl->ptn", np.conj(k1), h4, ku, k1, p4, optimize=True)
    envs[u1] = np.einsum("ptn,pqxy,xlm,ymr,crtl->qnc", np.conj(ku), h4, ku, k1, p4, optimize=True)
    return value, envs
