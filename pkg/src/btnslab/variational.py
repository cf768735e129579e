"""Ground-state search in the boundary ansatz class.

Alternating gradient descent on the Rayleigh quotient (or on overlap with
a target state) and imaginary time evolution with Trotterized two-site
gates plus degree-weighted SVD truncation.  Gradients treat the real and
imaginary parts of the maps as independent parameters; the combined
complex gradient is 2 * d(objective)/d(conj B).
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from .contraction import (
    btns_ring_env_to_map,
    btns_ring_mps,
    ring_norm_and_envs,
    ring_term_and_envs,
)
from .errors import DegenerateStateError, NormCollapseError
from .network_states import (
    BTNSRep,
    _chi_mps_factors,
    _contract_labeled,
    _map_labels,
    apply_observable,
    btns_evaluate,
)
from .tensor_core import svd

log = logging.getLogger(__name__)

__all__ = [
    "OptimizerConfig",
    "ItePlan",
    "TraceRow",
    "EnergyObjective",
    "OverlapObjective",
    "energy_and_gradient",
    "gradient_descent",
    "trotter_gate",
    "apply_gate",
    "weighted_truncate",
    "imaginary_time",
]

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 30
NORM_FLOOR = 1e-28


@dataclass
class OptimizerConfig:
    max_iters: int = 500
    step_size: float = 0.1
    armijo_factor: float = 0.5
    grad_tol: float = 1e-8
    energy_rel_tol: float = 1e-10
    seed: int = 0
    translation_invariant: bool = False

    def __post_init__(self):
        if not 0 < self.armijo_factor < 1:
            raise ValueError("armijo_factor must be in (0, 1)")
        if self.step_size <= 0 or self.grad_tol < 0 or self.energy_rel_tol < 0:
            raise ValueError("tolerances and step size must be positive")


@dataclass
class ItePlan:
    beta_step: float
    sweeps: int
    target_bond: int
    weight_p: float = 0.9
    renormalize_each_sweep: bool = True

    def __post_init__(self):
        if not 0 < self.weight_p <= 1:
            raise ValueError("weight parameter must be in (0, 1]")
        if self.target_bond < 1 or self.beta_step <= 0 or self.sweeps < 0:
            raise ValueError("invalid evolution plan")


@dataclass
class TraceRow:
    iteration: int
    objective: float
    grad_norm_or_bondmax: float
    wall_ms: float
    seed: int = -1


# ---------------------------------------------------------------------------
# environments


def _dense_hole_envs(rep, y, vertices=None):
    """d(<psi|y>)/d(conj B_v): contract conj of everything but B_v against y."""
    shape = rep.shape
    L = shape.vertex_count
    chi = _chi_mps_factors(rep.weight, rep.local_degree, L)
    y_t = np.asarray(y, dtype=np.complex128).reshape((shape.phys_dim,) * L)
    envs = {}
    for v in vertices if vertices is not None else range(L):
        factors = [(y_t, [("p", w) for w in range(L)])]
        for w in range(L):
            if w != v:
                factors.append((np.conj(rep.maps[w]), _map_labels(shape, w) + [("w", w)]))
            factors.append(chi[w])
        out = _map_labels(shape, v) + [("w", v)]
        envs[v] = _contract_labeled(factors, out)
    return envs


def _transfer_energy_envs(rep, ham, want_envs=True, vertices=None):
    ks = btns_ring_mps(rep)
    n_val, n_envs = ring_norm_and_envs(ks, want_envs)
    e_val = 0.0
    e_envs = None
    for support, matrix in ham.terms:
        val, envs = ring_term_and_envs(ks, support, matrix, want_envs)
        e_val += val.real
        if want_envs:
            if e_envs is None:
                e_envs = envs
            else:
                e_envs = [a + b for a, b in zip(e_envs, envs)]
    if not want_envs:
        return e_val, n_val.real, None, None
    to_map = lambda envs: [btns_ring_env_to_map(envs[v], rep, v) for v in range(len(ks))]
    return e_val, n_val.real, to_map(e_envs), to_map(n_envs)


def _use_transfer(rep, ham, method):
    if method == "dense":
        return False
    ok = rep.shape.kind == "ring" and ham.is_ring_edge_local()
    if method == "transfer" and not ok:
        raise ValueError("transfer method needs a ring and edge-local terms")
    return ok


def energy_and_gradient(rep, ham, method="auto", vertices=None):
    """Rayleigh quotient f = E/N and the per-vertex complex gradients 2 df/d(conj B).

    ``method`` picks the contraction route: 'transfer' (ring transfer
    matrices), 'dense' (hole contraction against the dense H|psi>), or
    'auto'.  Both routes implement the same hole environments.
    """
    if _use_transfer(rep, ham, method):
        e, n, envs_e, envs_n = _transfer_energy_envs(rep, ham)
    else:
        psi = btns_evaluate(rep).reshape(-1)
        n = float(np.vdot(psi, psi).real)
        if n < NORM_FLOOR:
            raise DegenerateStateError("state norm vanished")
        hpsi = apply_observable(psi, ham)
        e = float(np.vdot(psi, hpsi).real)
        d_e = _dense_hole_envs(rep, hpsi, vertices)
        d_n = _dense_hole_envs(rep, psi, vertices)
        envs_e = [d_e.get(v) for v in range(rep.shape.vertex_count)]
        envs_n = [d_n.get(v) for v in range(rep.shape.vertex_count)]
    if n < NORM_FLOOR:
        raise DegenerateStateError("state norm vanished")
    f = e / n
    grads = []
    for ge, gn in zip(envs_e, envs_n):
        if ge is None:
            grads.append(None)
        else:
            grads.append(2.0 * (ge * n - e * gn) / n**2)
    return f, grads


class EnergyObjective:
    """f(B) = <psi|H|psi> / <psi|psi> for a fixed local Hamiltonian."""

    def __init__(self, ham, method="auto"):
        self.ham = ham
        self.method = method

    def value(self, rep):
        if _use_transfer(rep, self.ham, self.method):
            e, n, _, _ = _transfer_energy_envs(rep, self.ham, want_envs=False)
        else:
            psi = btns_evaluate(rep).reshape(-1)
            n = float(np.vdot(psi, psi).real)
            if n < NORM_FLOOR:
                raise DegenerateStateError("state norm vanished")
            e = float(np.vdot(psi, apply_observable(psi, self.ham)).real)
        if n < NORM_FLOOR:
            raise DegenerateStateError("state norm vanished")
        return e / n

    def value_and_grads(self, rep, vertices=None):
        return energy_and_gradient(rep, self.ham, self.method, vertices)


class OverlapObjective:
    """f(B) = 1 - |<target|psi>|^2 / (|target|^2 <psi|psi>), to be minimized."""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=np.complex128).reshape(-1)
        self.t2 = float(np.vdot(self.target, self.target).real)
        if self.t2 <= 0:
            raise ValueError("target state is zero")

    def _pieces(self, rep):
        psi = btns_evaluate(rep).reshape(-1)
        n = float(np.vdot(psi, psi).real)
        if n < NORM_FLOOR:
            raise DegenerateStateError("state norm vanished")
        ov = complex(np.vdot(self.target, psi))
        return psi, n, ov

    def value(self, rep):
        _, n, ov = self._pieces(rep)
        return 1.0 - abs(ov) ** 2 / (self.t2 * n)

    def value_and_grads(self, rep, vertices=None):
        psi, n, ov = self._pieces(rep)
        env_t = _dense_hole_envs(rep, self.target, vertices)
        env_n = _dense_hole_envs(rep, psi, vertices)
        f = 1.0 - abs(ov) ** 2 / (self.t2 * n)
        grads = []
        for v in range(rep.shape.vertex_count):
            if v not in env_t:
                grads.append(None)
                continue
            d_overlap = env_t[v] * ov / (self.t2 * n) - (abs(ov) ** 2 / (self.t2 * n**2)) * env_n[v]
            grads.append(-2.0 * d_overlap)
        return f, grads


# ---------------------------------------------------------------------------
# alternating gradient descent


def _ti_gradient(grads):
    """Shared-map gradient: vertex 0 stores its bonds transposed on a ring."""
    total = np.zeros_like(grads[-1])
    for v, g in enumerate(grads):
        if v == 0:
            axes = (0, 2, 1, 3) if g.ndim == 4 else (0, 2, 1)
            total += g.transpose(axes)
        else:
            total += g
    return total


def _ti_apply(rep, shared):
    maps = []
    for v in range(rep.shape.vertex_count):
        if v == 0:
            axes = (0, 2, 1, 3) if shared.ndim == 4 else (0, 2, 1)
            maps.append(shared.transpose(axes))
        else:
            maps.append(shared)
    return BTNSRep(rep.shape, rep.weight, rep.local_degree, maps)


def gradient_descent(rep0, objective, cfg):
    """Alternating Armijo descent over the vertex maps (or one shared TI map).

    Accepted steps never increase the objective; a vertex whose state
    collapses is reinitialized from the seeded Gaussian and the run
    continues.  Returns the optimized rep and one trace row per sweep.
    """
    rep = rep0.copy()
    rng = np.random.default_rng(cfg.seed ^ 0x5EED)
    steps = {}
    trace = []
    t0 = time.perf_counter()
    f_prev = None
    for it in range(cfg.max_iters):
        grad_sq = 0.0
        f_cur = None
        slots = ["ti"] if cfg.translation_invariant else list(range(rep.shape.vertex_count))
        for slot in slots:
            wanted = None if slot == "ti" else [slot]
            try:
                f_cur, grads = objective.value_and_grads(rep, vertices=wanted)
            except DegenerateStateError:
                log.warning("degenerate state at iteration %d (slot %s); reinitializing", it, slot)
                if slot == "ti":
                    fresh = rng.standard_normal(rep.maps[-1].shape) + 1j * rng.standard_normal(
                        rep.maps[-1].shape
                    )
                    rep = _ti_apply(rep, fresh)
                else:
                    fresh = rng.standard_normal(rep.maps[slot].shape) + 1j * rng.standard_normal(
                        rep.maps[slot].shape
                    )
                    rep.maps[slot] = fresh
                continue
            if slot == "ti":
                g = _ti_gradient(grads)
                base = rep.maps[-1].copy()
            else:
                g = grads[slot]
                base = rep.maps[slot].copy()
            gn2 = float(np.vdot(g, g).real)
            grad_sq += gn2
            if gn2 == 0.0:
                continue
            t = steps.get(slot, cfg.step_size)
            accepted = False
            for _ in range(MAX_BACKTRACKS):
                candidate = base - t * g
                if slot == "ti":
                    trial = _ti_apply(rep, candidate)
                else:
                    trial = rep.copy()
                    trial.maps[slot] = candidate
                try:
                    f_trial = objective.value(trial)
                except DegenerateStateError:
                    t *= cfg.armijo_factor
                    continue
                if f_trial <= f_cur - ARMIJO_C * t * gn2:
                    rep = trial
                    f_cur = f_trial
                    steps[slot] = min(2.0 * t, 1e6 * cfg.step_size)
                    accepted = True
                    break
                t *= cfg.armijo_factor
            if not accepted:
                steps[slot] = cfg.step_size
        if f_cur is None:
            f_cur = objective.value(rep)
        wall = (time.perf_counter() - t0) * 1e3
        trace.append(TraceRow(it, float(f_cur), float(np.sqrt(grad_sq)), wall, cfg.seed))
        if np.sqrt(grad_sq) <= cfg.grad_tol:
            break
        if f_prev is not None and abs(f_prev - f_cur) <= cfg.energy_rel_tol * max(abs(f_cur), 1.0):
            break
        f_prev = f_cur
    return rep, trace


# ---------------------------------------------------------------------------
# imaginary time evolution


def trotter_gate(h_edge, dt):
    """Operator-Schmidt factors of exp(-dt * h) for a Hermitian two-site term.

    Returns [(X_l, Y_l)] with sum X_l (x) Y_l reconstructing the gate; at
    most d^2 factors survive.
    """
    h = np.asarray(h_edge, dtype=np.complex128)
    dim = h.shape[0]
    d = int(round(np.sqrt(dim)))
    if h.shape != (dim, dim) or d * d != dim:
        raise ValueError("two-site term must be a d^2 x d^2 matrix")
    if not np.allclose(h, h.conj().T, atol=1e-10 * max(1.0, np.abs(h).max())):
        raise ValueError("two-site term is not Hermitian")
    w, u = np.linalg.eigh(h)
    gate = (u * np.exp(-dt * w)) @ u.conj().T
    m = gate.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(dim, dim)
    uu, s, vv = np.linalg.svd(m)
    keep = s > 1e-14 * s[0]
    factors = []
    for l in np.where(keep)[0]:
        factors.append(
            (
                (np.sqrt(s[l]) * uu[:, l]).reshape(d, d),
                (np.sqrt(s[l]) * vv[l, :]).reshape(d, d),
            )
        )
    return factors


def _absorb_factors(mapv, ops, bond_pos):
    """Contract stacked (l, d, d) operators into the physical index and fuse l
    into the bond axis at ``bond_pos``."""
    t = np.tensordot(ops, mapv, axes=([2], [0]))  # (l, p, bonds..., [eta])
    t = np.moveaxis(t, 0, bond_pos + 1)
    new_shape = list(mapv.shape)
    new_shape[bond_pos] *= ops.shape[0]
    return np.ascontiguousarray(t).reshape(new_shape)


def apply_gate(rep, edge_id, factors):
    """Absorb a two-site gate given by Schmidt factors into the edge's endpoint maps."""
    shape = rep.shape
    v1, v2 = shape.edges[edge_id]
    xs = np.stack([x for x, _ in factors])
    ys = np.stack([y for _, y in factors])
    pos1 = 1 + shape.vertex_edges(v1).index(edge_id)
    pos2 = 1 + shape.vertex_edges(v2).index(edge_id)
    maps = list(rep.maps)
    maps[v1] = _absorb_factors(maps[v1], xs, pos1)
    maps[v2] = _absorb_factors(maps[v2], ys, pos2)
    new_shape = shape.with_bond(edge_id, shape.bond_dims[edge_id] * len(factors))
    return BTNSRep(new_shape, rep.weight, rep.local_degree, maps)


def weighted_truncate(rep, edge_id, target_bond, p):
    """Truncate one bond optimally in the degree-weighted Frobenius norm.

    The two endpoint maps are contracted, every entry is scaled by
    p**(eta1+eta2), a plain truncated SVD splits the block, and the factors
    are unscaled again.  p = 1 is the unweighted truncation; p < 1 damps
    the error made in high weight-degree sectors.
    """
    if not 0 < p <= 1:
        raise ValueError("need 0 < p <= 1")
    shape = rep.shape
    if shape.bond_dims[edge_id] <= target_bond:
        return rep
    v1, v2 = shape.edges[edge_id]
    pos1 = 1 + shape.vertex_edges(v1).index(edge_id)
    pos2 = 1 + shape.vertex_edges(v2).index(edge_id)
    m1, m2 = rep.maps[v1], rep.maps[v2]
    theta = np.tensordot(m1, m2, axes=([pos1], [pos2]))
    n1 = m1.ndim - 1  # axes of the v1 side inside theta
    wvec = p ** np.arange(rep.local_degree + 1)
    sh1 = (1,) * (n1 - 1) + (wvec.size,) + (1,) * (theta.ndim - n1)
    sh2 = (1,) * (theta.ndim - 1) + (wvec.size,)
    theta = theta * wvec.reshape(sh1) * wvec.reshape(sh2)
    res = svd(theta, row_axes=list(range(n1)), max_rank=target_bond)
    if res.rank == 0:
        rank = 1
        left = np.zeros(theta.shape[:n1] + (1,), dtype=np.complex128)
        right = np.zeros((1,) + theta.shape[n1:], dtype=np.complex128)
    else:
        rank = res.rank
        root = np.sqrt(res.singular_values)
        left = res.left * root
        right = root.reshape((rank,) + (1,) * (theta.ndim - n1)) * res.right
    left = left / wvec.reshape(sh1[: n1 - 1] + (wvec.size, 1))
    right = right / wvec.reshape((1,) * (right.ndim - 1) + (wvec.size,))
    maps = list(rep.maps)
    maps[v1] = np.moveaxis(left, -1, pos1)
    maps[v2] = np.moveaxis(right, 0, pos2)
    new_shape = shape.with_bond(edge_id, rank)
    return BTNSRep(new_shape, rep.weight, rep.local_degree, maps)


def _state_norm(rep):
    if rep.shape.kind == "ring":
        ks = btns_ring_mps(rep)
        val, _ = ring_norm_and_envs(ks, want_envs=False)
        return float(np.sqrt(max(val.real, 0.0)))
    psi = btns_evaluate(rep).reshape(-1)
    return float(np.linalg.norm(psi))


def imaginary_time(rep0, ham, plan, energy_method="auto"):
    """Trotterized evolution: per sweep, gate then truncate on every edge term.

    Terms are applied in ascending edge order (first-order splitting); the
    trace records the energy and the largest bond after each sweep.  A norm
    collapse below 1e-30 aborts with the partial trace attached.
    """
    rep = rep0.copy()
    if ham.shape.phys_dim != rep.shape.phys_dim or ham.shape.vertex_count != rep.shape.vertex_count:
        raise ValueError("Hamiltonian and state live on different systems")
    gates = []
    for support, matrix in ham.terms:
        if len(support) != 2:
            raise ValueError("imaginary time evolution needs two-site terms")
        edge_id = rep.shape.edge_id(*support)
        ordered = rep.shape.edges[edge_id]
        if tuple(support) != tuple(ordered):
            # term stored against the reversed edge orientation: swap factors
            matrix = matrix.reshape((rep.shape.phys_dim,) * 4).transpose(1, 0, 3, 2).reshape(
                matrix.shape
            )
        gates.append((edge_id, trotter_gate(matrix, plan.beta_step)))
    gates.sort(key=lambda item: item[0])
    energy = EnergyObjective(ham, method=energy_method)
    trace = []
    t0 = time.perf_counter()
    for sweep in range(plan.sweeps):
        for edge_id, factors in gates:
            rep = apply_gate(rep, edge_id, factors)
            rep = weighted_truncate(rep, edge_id, plan.target_bond, plan.weight_p)
        if plan.renormalize_each_sweep:
            nrm = _state_norm(rep)
            if nrm < 1e-30:
                err = NormCollapseError(f"state norm {nrm:.2e} collapsed at sweep {sweep}")
                err.trace = trace
                raise err
            rep.maps[0] = rep.maps[0] / nrm
        wall = (time.perf_counter() - t0) * 1e3
        trace.append(
            TraceRow(sweep, energy.value(rep), float(max(rep.shape.bond_dims)), wall)
        )
    return rep, trace
