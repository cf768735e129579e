"""Weight states: direct construction, border-rank curves, MPS factorization.

The weight state of weight ``a`` on ``L`` sites with local degree cap
``dloc`` is the unnormalized uniform superposition of all basis strings
whose digits sum to ``a`` with every digit <= dloc.  For a = dloc = 1 this
is the (unnormalized) W state.
"""

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import kernels

__all__ = [
    "WeightSpec",
    "ProductCurve",
    "build_weight_state",
    "weight_coefficient",
    "border_rank_curve",
    "central_difference_curve",
    "weight_mps",
    "weight_mps_site_tensors",
    "project_local_degree",
]


@dataclass(frozen=True)
class WeightSpec:
    """Weight a, local degree cap dloc (local dimension dloc+1), site count L."""

    weight: int
    local_degree: int
    sites: int

    def __post_init__(self):
        if self.weight < 0 or self.local_degree < 0 or self.sites < 1:
            raise ValueError(f"invalid weight spec {self}")

    @property
    def local_dim(self):
        return self.local_degree + 1

    @property
    def is_zero(self):
        # more total weight than the digits can carry
        return self.weight > self.local_degree * self.sites


def weight_coefficient(alpha, a):
    """Exact integer c_{alpha,a} = sum_j (-1)^(a-j) C(a,j) j^alpha.

    Vanishes for alpha < a and equals a! at alpha = a; these identities
    make the border-rank curves converge.
    """
    if alpha < 0 or a < 0:
        raise ValueError("alpha and a must be non-negative")
    total = 0
    for j in range(a + 1):
        power = 1 if alpha == 0 else j**alpha
        total += (-1) ** (a - j) * math.comb(a, j) * power
    return total


def build_weight_state(spec):
    """Dense weight-state tensor, shape (dloc+1,)*L, unnormalized 0/1 entries."""
    return kernels.weight_state_tensor(spec.weight, spec.local_degree, spec.sites)


def project_local_degree(t, dloc):
    """Apply the local projector onto digits <= dloc on every site."""
    t = np.asarray(t)
    if dloc + 1 > min(t.shape):
        raise ValueError("dloc exceeds the local dimension of the input")
    return np.ascontiguousarray(t[(slice(0, dloc + 1),) * t.ndim])


@dataclass(frozen=True)
class ProductCurve:
    """Sum of symmetric product states depending polynomially on epsilon.

    Each term is a scalar coefficient polynomial together with a per-site
    vector polynomial (rows are powers of epsilon); the curve value at eps
    is sum_t c_t(eps) * v_t(eps)^{tensor L}.  Rescaling by eps**(-scale_degree)
    and letting eps -> 0 recovers the target weight state.
    """

    sites: int
    scale_degree: int
    coeffs: tuple  # per-term 1-D arrays of polynomial coefficients
    site_polys: tuple  # per-term 2-D arrays (power, component)

    @property
    def num_terms(self):
        return len(self.coeffs)

    def term_vectors(self, eps):
        """[(coefficient value, site vector)] at the given epsilon."""
        out = []
        for c, p in zip(self.coeffs, self.site_polys):
            powers = np.asarray(eps, dtype=np.complex128) ** np.arange(p.shape[0])
            out.append((np.polyval(c[::-1], eps), powers @ p))
        return out

    def evaluate(self, eps):
        """Dense curve value at eps (no rescaling applied)."""
        total = 0.0
        for cval, vec in self.term_vectors(eps):
            total = total + cval * reduce(np.multiply.outer, [vec] * self.sites)
        return total

    def evaluate_scaled(self, eps):
        """eps**(-scale_degree) * evaluate(eps); converges to the weight state."""
        if eps == 0:
            raise ValueError("curves are evaluated at eps != 0; the limit is a limit")
        return np.asarray(eps, dtype=np.complex128) ** (-self.scale_degree) * self.evaluate(eps)


def _phi_site_poly(node, top_degree, local_degree):
    """Vector polynomial of phi(node * eps) truncated to components <= local_degree."""
    poly = np.zeros((local_degree + 1, local_degree + 1), dtype=np.complex128)
    for i in range(min(top_degree, local_degree) + 1):
        poly[i, i] = node**i
    return poly


def border_rank_curve(spec):
    """The (a+1)-term product curve from the binomial difference of phi(j*eps).

    Term j carries coefficient (-1)^(a-j) C(a,j) / a! and site vector
    phi(j eps) = sum_i (j eps)^i |i>, projected to the local dimension.
    """
    a = spec.weight
    coeffs = []
    polys = []
    for j in range(a + 1):
        c = (-1) ** (a - j) * math.comb(a, j) / math.factorial(a)
        coeffs.append(np.array([c], dtype=np.complex128))
        polys.append(_phi_site_poly(float(j), a, spec.local_degree))
    return ProductCurve(spec.sites, a, tuple(coeffs), tuple(polys))


def central_difference_curve(a, k, L):
    """Higher-order curve for chi_{a,a,L} from a symmetric difference stencil.

    Uses r = 2*floor((a+1)/2) + 2k sample nodes on the unit circle and
    solves the stencil system sum_j w_j z_j^m = delta_{m,a} (m < r); the
    rescaled curve then converges with order at least 2(k+1).  Even weights
    need k >= 1, since r must exceed the border rank lower bound a.
    """
    if a < 1 or k < 0:
        raise ValueError("need a >= 1 and k >= 0")
    r = 2 * ((a + 1) // 2) + 2 * k
    if r < a + 1:
        raise ValueError(f"stencil with {r} nodes cannot represent weight {a}; increase k")
    nodes = np.exp(2j * np.pi * np.arange(r) / r)
    vander = np.vander(nodes, r, increasing=True).T  # rows: powers 0..r-1
    rhs = np.zeros(r, dtype=np.complex128)
    rhs[a] = 1.0
    weights = np.linalg.solve(vander, rhs)
    # order conditions up to a + 2k + 1 must hold for the claimed accuracy
    for m in range(a + 2 * k + 2):
        residual = abs(np.sum(weights * nodes**m) - (1.0 if m == a else 0.0))
        if residual > 1e-8:
            raise ArithmeticError(f"stencil order condition m={m} violated ({residual:.2e})")
    coeffs = tuple(np.array([w], dtype=np.complex128) for w in weights)
    polys = tuple(_phi_site_poly(z, a, a) for z in nodes)
    return ProductCurve(L, a, coeffs, polys)


def weight_mps_site_tensors(a, L):
    """Open-chain MPS site tensors contracting exactly to chi_{a,a,L}.

    Site 0 has axes (phys, right), bulk sites (phys, left, right) with
    entry 1 iff right = left + digit, and the last site (phys, left) with
    entry 1 iff left = a - digit.  Bond dimension a+1 throughout.
    """
    if L < 2:
        raise ValueError("need at least two sites")
    dim = a + 1
    first = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        first[j, j] = 1.0
    bulk = np.zeros((dim, dim, dim), dtype=np.complex128)
    for j in range(dim):
        for i in range(dim - j):
            bulk[j, i, i + j] = 1.0
    last = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        last[j, a - j] = 1.0
    return [first] + [bulk] * (L - 2) + [last]


def weight_mps(spec):
    """Weight state as a TNSRep on the open chain (requires dloc == a)."""
    from .graph_model import build_graph
    from .network_states import TNSRep

    if spec.local_degree != spec.weight:
        raise ValueError("MPS construction needs dloc == a; project afterwards for dloc < a")
    a, L = spec.weight, spec.sites
    shape = build_graph("chain", L=L, D=a + 1, d=a + 1)
    return TNSRep(shape, weight_mps_site_tensors(a, L))
