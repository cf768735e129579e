"""Reference Hamiltonians, states, degenerations and analysis oracles.

The model data here is transcribed once and then cross-checked by tests
that re-derive energies and fidelities independently (dense ED, explicit
state construction), so transcription errors cannot survive.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ResourceLimitError
from .graph_model import NetworkShape, build_graph
from .network_states import (
    BTNSRep,
    DEFAULT_AMPLITUDE_CAP,
    DegenerationCurve,
    tns_evaluate,
)

__all__ = [
    "Hamiltonian",
    "KnownState",
    "EDResult",
    "TradeoffRow",
    "heisenberg_ring",
    "separation_hamiltonian",
    "psi_state",
    "separation_padded_btns",
    "t_state",
    "w_state",
    "ghz3",
    "ed_ground_state",
    "approximation_tradeoff",
    "list_models",
    "get_model",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass
class Hamiltonian:
    """Sum of Hermitian local terms on the vertices of a NetworkShape."""

    shape: NetworkShape
    terms: list  # [(support tuple, matrix on d**len(support)), ...]

    def __post_init__(self):
        d = self.shape.phys_dim
        checked = []
        for support, matrix in self.terms:
            support = tuple(int(s) for s in support)
            matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
            dim = d ** len(support)
            if matrix.shape != (dim, dim):
                raise ValueError(f"term on {support} has shape {matrix.shape}, expected {dim}")
            if not np.allclose(matrix, matrix.conj().T, atol=1e-12):
                raise ValueError(f"term on {support} is not Hermitian")
            for s in support:
                if not 0 <= s < self.shape.vertex_count:
                    raise ValueError(f"support {support} out of range")
            checked.append((support, matrix))
        self.terms = checked

    def is_ring_edge_local(self):
        """True when every term sits on a ring edge as (u, u+1 mod L)."""
        if self.shape.kind != "ring":
            return False
        L = self.shape.vertex_count
        return all(len(s) == 2 and s[1] == (s[0] + 1) % L for s, _ in self.terms)

    def dense(self):
        return kernels.assemble_dense(self.terms, self.shape.phys_dim, self.shape.vertex_count)


@dataclass
class KnownState:
    """A reference state with recorded bond data and optional representations."""

    name: str
    state: np.ndarray
    known_bond: int = None
    known_bbond: int = None
    provenance: str = ""
    degeneration: DegenerationCurve = None
    btns: BTNSRep = None


def heisenberg_ring(L):
    """Isotropic Heisenberg model on the ring: sum of Pauli exchange terms."""
    if L < 3:
        raise ValueError("ring needs L >= 3")
    shape = build_graph("ring", L=L, D=1, d=2)
    term = (
        np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)
    )
    return Hamiltonian(shape, [((i, (i + 1) % L), term) for i in range(L)])


def _separation_projector():
    p = np.zeros((9, 9), dtype=np.complex128)
    for x, y in ((0, 1), (1, 0), (0, 2), (2, 1)):
        idx = 3 * x + y
        p[idx, idx] = 1.0
    return p


def separation_hamiltonian(L):
    """The diagonal 2-local ring Hamiltonian whose TI ground state needs growing bond.

    Each edge term is (I - P) on the pair plus a 1/(2L) penalty for the
    symbol 2 on the left site; the unique TI ground state has energy 1/(2L).
    """
    if L < 5 or L % 2 == 0:
        raise ValueError("separation model needs odd L >= 5")
    shape = build_graph("ring", L=L, D=1, d=3)
    proj = _separation_projector()
    penalty = np.kron(np.diag([0.0, 0.0, 1.0]).astype(np.complex128), np.eye(3)) / (2 * L)
    term = np.eye(9, dtype=np.complex128) - proj + penalty
    return Hamiltonian(shape, [((i, (i + 1) % L), term) for i in range(L)])


def _psi_matrices(bond=2):
    """Per-symbol bond matrices of the TI degeneration of the separation state."""
    m0 = np.zeros((bond, bond), dtype=np.complex128)
    m1 = np.zeros((bond, bond), dtype=np.complex128)
    m2 = np.zeros((bond, bond), dtype=np.complex128)
    m0[1, 0] = 1.0
    m1[0, 1] = 1.0
    m2[0, 0] = 1.0
    return m0, m1, m2


def _ti_ring_curve(shape, coeff_slices):
    """TI DegenerationCurve from per-power lists of (phys, left, right) tensors."""
    maps = []
    for v in range(shape.vertex_count):
        # vertex 0 sees its incident edges in the order (right, left)
        maps.append([t.transpose(0, 2, 1) if v == 0 else t for t in coeff_slices])
    return DegenerationCurve(shape, maps, approximation_degree=1)


def psi_state(L):
    """Eq.-style shift-superposition ground state of the separation model.

    Returns the normalized state together with its bond-2 TI degeneration
    (approximation degree 1) and the exact boundary representation.
    """
    if L < 5 or L % 2 == 0:
        raise ValueError("need odd L >= 5")
    pattern = [2] + [1, 0] * ((L - 1) // 2)
    amps = np.zeros((3,) * L, dtype=np.complex128)
    for k in range(L):
        amps[tuple(pattern[(i - k) % L] for i in range(L))] += 1.0
    amps /= np.sqrt(L)

    shape = build_graph("ring", L=L, D=2, d=3)
    m0, m1, m2 = _psi_matrices()
    zero = np.zeros((2, 2), dtype=np.complex128)
    a0 = np.stack([m0, m1, zero])  # (phys, left, right) at order eps^0
    a1 = np.stack([zero, zero, m2])  # order eps^1
    curve = _ti_ring_curve(shape, [a0, a1])
    return KnownState(
        name=f"separation ground state L={L}",
        state=amps,
        known_bbond=2,
        provenance=(
            "TI border bond 2 with approximation degree 1; "
            "TI bond grows like L^(1/3)/log L and exceeds 2 for every ring size"
        ),
        degeneration=curve,
        btns=curve.to_btns(),
    )


def separation_padded_btns(L):
    """Bond-4 boundary representation of the separation state with a redundant
    degree-1 sector; the extra blocks do not change the state but dominate a
    plain SVD truncation, which is the weighted-truncation test case."""
    state = psi_state(L)
    shape = build_graph("ring", L=L, D=4, d=3)
    m0, m1, _ = _psi_matrices(bond=4)
    m2 = np.zeros((4, 4), dtype=np.complex128)
    m2[0, 0] = 1.0
    m2[2, 2] = 2.0
    m2[3, 3] = 2.0
    zero = np.zeros((4, 4), dtype=np.complex128)
    a0 = np.stack([m0, m1, zero])
    a1 = np.stack([zero, zero, m2])
    curve = _ti_ring_curve(shape, [a0, a1])
    rep = curve.to_btns()
    return state, rep


def _ket9(i):
    v = np.zeros(9, dtype=np.complex128)
    v[i] = 1.0
    return v


def _bond_matrix9(entries):
    m = np.zeros((3, 3, 9), dtype=np.complex128)
    for (r, c), k in entries.items():
        m[r, c] = _ket9(k)
    return m


def t_state():
    """The 17-term state on the 3-ring with border bond 3 but bond at least 4."""
    labels = [
        "005", "016", "040", "126", "160", "227", "251", "262", "338",
        "373", "384", "430", "501", "632", "703", "714", "824",
    ]
    amps = np.zeros((9, 9, 9), dtype=np.complex128)
    for s in labels:
        amps[int(s[0]), int(s[1]), int(s[2])] = 1.0
    amps /= np.sqrt(17)

    a0_12 = _bond_matrix9({(0, 0): 0, (0, 1): 1, (1, 1): 2, (2, 2): 3})
    a1_12 = _bond_matrix9({(0, 2): 4, (1, 0): 5, (1, 2): 6, (2, 0): 7, (2, 1): 8})
    a0_3 = _bond_matrix9({(0, 1): 1, (0, 2): 3, (1, 2): 4, (2, 0): 0, (2, 1): 2})
    a1_3 = _bond_matrix9({(0, 0): 5, (1, 0): 6, (1, 1): 7, (2, 2): 8})

    shape = build_graph("ring", L=3, D=3, d=9)
    coeff_maps = []
    for v in range(3):
        a0, a1 = (a0_3, a1_3) if v == 2 else (a0_12, a1_12)
        slices = [np.transpose(a0, (2, 0, 1)), np.transpose(a1, (2, 0, 1))]
        coeff_maps.append([t.transpose(0, 2, 1) if v == 0 else t for t in slices])
    curve = DegenerationCurve(shape, coeff_maps, approximation_degree=1)
    return KnownState(
        name="T state",
        state=amps,
        known_bond=4,
        known_bbond=3,
        provenance="border bond 3 realized with approximation degree 1; bond between 4 and 9",
        degeneration=curve,
        btns=curve.to_btns(),
    )


def w_state(L):
    """Normalized W state with its phase-twisted bond-2 TI degeneration.

    The degeneration is the classic ill-conditioned one whose overlap with
    the W state has the closed form used in the approximation-tradeoff
    checks; the exact boundary representation has trivial bonds.
    """
    if L < 3:
        raise ValueError("need L >= 3")
    amps = np.zeros((2,) * L, dtype=np.complex128)
    for k in range(L):
        amps[tuple(1 if i == k else 0 for i in range(L))] = 1.0
    amps /= np.sqrt(L)

    shape = build_graph("ring", L=L, D=2, d=2)
    a0 = np.zeros((2, 2, 2), dtype=np.complex128)
    a0[0] = np.diag([1.0, np.exp(1j * np.pi / L)])
    a1 = np.zeros((2, 2, 2), dtype=np.complex128)
    a1[1, 0, 0] = 1.0
    curve = _ti_ring_curve(shape, [a0, a1])

    triv = build_graph("ring", L=L, D=1, d=2)
    maps = [np.eye(2, dtype=np.complex128).reshape(2, 1, 1, 2)] * L
    rep = BTNSRep(triv, 1, 1, maps)
    return KnownState(
        name=f"W state L={L}",
        state=amps,
        known_bbond=2,
        provenance="TI border bond 2 via the phase-twisted curve; TI bond grows with L",
        degeneration=curve,
        btns=rep,
    )


def ghz3():
    """Level-3 GHZ on three parties: border bond 2, bond 3 (recorded, not computed)."""
    amps = np.zeros((3, 3, 3), dtype=np.complex128)
    for i in range(3):
        amps[i, i, i] = 1.0
    amps /= np.sqrt(3)
    return KnownState(
        name="ghz3",
        state=amps,
        known_bond=3,
        known_bbond=2,
        provenance="classical separation example on the 3-ring",
    )


@dataclass
class EDResult:
    energy: float
    state: np.ndarray
    ti_unique: bool
    ground_degeneracy: int
    ti_state: np.ndarray = None


def _shift_permutation(d, L):
    idx = np.arange(d**L)
    return (idx % d) * d ** (L - 1) + idx // d


def ed_ground_state(H, cap=DEFAULT_AMPLITUDE_CAP, degeneracy_tol=1e-8):
    """Dense exact diagonalization plus a shift-sector analysis of the ground space."""
    d = H.shape.phys_dim
    L = H.shape.vertex_count
    if d**L > cap:
        raise ResourceLimitError(f"dense ED needs {d**L} amplitudes, cap is {cap}")
    vals, vecs = np.linalg.eigh(H.dense())
    e0 = float(vals[0])
    sel = np.where(vals <= e0 + degeneracy_tol * max(1.0, abs(e0)))[0]
    ground = vecs[:, sel]
    perm = _shift_permutation(d, L)
    shifted = np.empty_like(ground)
    shifted[perm, :] = ground
    s_small = ground.conj().T @ shifted
    w, u = np.linalg.eig(s_small)
    ti_sel = np.where(np.abs(w - 1.0) < 1e-6)[0]
    ti_state = None
    if ti_sel.size == 1:
        ti_state = ground @ u[:, ti_sel[0]]
        ti_state = ti_state / np.linalg.norm(ti_state)
    return EDResult(
        energy=e0,
        state=vecs[:, 0],
        ti_unique=ti_sel.size == 1,
        ground_degeneracy=int(sel.size),
        ti_state=ti_state,
    )


@dataclass
class TradeoffRow:
    eps: float
    norm: float
    tau: float
    distance: float
    bound: float
    bound_applies: bool


def _fit_curve_expansion(curve, cap):
    """Coefficient states of the eps-polynomial state of a degeneration curve.

    Samples the dense evaluation at roots of unity and inverts the DFT; the
    sample count is increased a few times if the fit does not reproduce an
    off-node evaluation.
    """
    L = curve.shape.vertex_count
    deg = curve.local_degree * L
    probe = 0.43 * np.exp(0.7j)
    ref = tns_evaluate(curve.evaluate(probe), cap=cap).reshape(-1)
    for extra in range(6):
        m = deg + 1 + extra
        nodes = np.exp(2j * np.pi * np.arange(m) / m)
        samples = np.stack(
            [tns_evaluate(curve.evaluate(z), cap=cap).reshape(-1) for z in nodes]
        )
        coeffs = np.fft.fft(samples, axis=0) / m  # fft uses exp(-2pi i m s / M)
        recon = sum(coeffs[j] * probe**j for j in range(m))
        scale = max(np.linalg.norm(ref), 1.0)
        if np.linalg.norm(recon - ref) <= 1e-9 * scale:
            return coeffs
    raise ArithmeticError("polynomial fit of the degeneration expansion did not converge")


def approximation_tradeoff(curve, eps_grid, cap=DEFAULT_AMPLITUDE_CAP):
    """Distance-to-limit versus the tail bound 4*tau(eps), row per grid point.

    The curve is rescaled so the limit state is normalized; rows with
    tau > 1/2 are flagged as outside the bound's regime rather than asserted.
    """
    coeffs = _fit_curve_expansion(curve, cap)
    a = curve.approximation_degree
    norms = np.linalg.norm(coeffs, axis=1)
    top = norms.max()
    if norms[:a].size and norms[:a].max() > 1e-8 * max(top, 1.0):
        raise ValueError("curve has surviving terms below the approximation degree")
    c0 = norms[a]
    if c0 <= 0:
        raise ValueError("curve limit state vanishes")
    phi0 = coeffs[a] / c0
    tail = [(l, norms[a + l] / c0) for l in range(1, len(norms) - a) if norms[a + l] > 1e-12 * top]
    rows = []
    for eps in eps_grid:
        psi = tns_evaluate(curve.evaluate(float(eps)), cap=cap).reshape(-1)
        nrm = float(np.linalg.norm(psi))
        tau = float(sum(w * eps**l for l, w in tail))
        distance = float(np.linalg.norm(psi / nrm - phi0)) if nrm > 0 else np.inf
        rows.append(
            TradeoffRow(
                eps=float(eps),
                norm=nrm / c0,
                tau=tau,
                distance=distance,
                bound=4 * tau,
                bound_applies=tau <= 0.5,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# registry

_FIXED_SIZE = {"tstate": 3, "ghz3": 3}


def list_models():
    return ["heisenberg", "separation", "tstate", "wstate", "ghz3"]


@dataclass
class ModelBundle:
    name: str
    hamiltonian: Hamiltonian = None
    known_state: KnownState = None
    sites: int = None


def get_model(name, L=None):
    """Model registry used by the CLI; L is ignored for fixed-size models."""
    if name == "heisenberg":
        if L is None:
            raise ValueError("heisenberg needs L")
        return ModelBundle(name, hamiltonian=heisenberg_ring(L), sites=L)
    if name == "separation":
        if L is None:
            raise ValueError("separation needs L")
        return ModelBundle(
            name, hamiltonian=separation_hamiltonian(L), known_state=psi_state(L), sites=L
        )
    if name == "tstate":
        return ModelBundle(name, known_state=t_state(), sites=3)
    if name == "wstate":
        if L is None:
            raise ValueError("wstate needs L")
        return ModelBundle(name, known_state=w_state(L), sites=L)
    if name == "ghz3":
        return ModelBundle(name, known_state=ghz3(), sites=3)
    raise KeyError(f"unknown model {name!r}; known: {list_models()}")
