"""Graphs underlying tensor networks and covering paths for the MPS strategy."""

from dataclasses import dataclass, field

from .errors import UnsupportedGraphError

__all__ = ["NetworkShape", "PathCover", "build_graph", "snake_path"]


@dataclass(frozen=True)
class NetworkShape:
    """Simple graph with per-edge bond dimensions and a uniform physical dimension.

    Edges are unordered vertex pairs stored as sorted-by-construction tuples;
    ``bond_dims[e]`` is the bond dimension of ``edges[e]``.  ``kind`` records
    the builder ('ring' / 'chain' / 'grid') when one was used.
    """

    vertex_count: int
    edges: tuple
    bond_dims: tuple
    phys_dim: int
    kind: str = "custom"
    grid_dims: tuple = None

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("need at least one vertex")
        if self.phys_dim < 1:
            raise ValueError("physical dimension must be >= 1")
        if len(self.bond_dims) != len(self.edges):
            raise ValueError("one bond dimension per edge required")
        seen = set()
        degree = [0] * self.vertex_count
        for (u, v), dim in zip(self.edges, self.bond_dims):
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add(key)
            if dim < 1:
                raise ValueError("bond dimensions must be >= 1")
            degree[u] += 1
            degree[v] += 1
        if self.vertex_count > 1 and min(degree) < 1:
            raise ValueError("isolated vertex")

    def vertex_edges(self, v):
        """Edge ids incident to ``v`` in ascending order."""
        return [e for e, (a, b) in enumerate(self.edges) if v in (a, b)]

    def degree(self, v):
        return len(self.vertex_edges(v))

    def edge_id(self, u, v):
        key = frozenset((u, v))
        for e, pair in enumerate(self.edges):
            if frozenset(pair) == key:
                return e
        raise KeyError(f"no edge ({u},{v})")

    def with_bond(self, edge_id, dim):
        dims = list(self.bond_dims)
        dims[edge_id] = int(dim)
        return NetworkShape(
            self.vertex_count, self.edges, tuple(dims), self.phys_dim, self.kind, self.grid_dims
        )

    def to_json(self):
        obj = {
            "kind": self.kind,
            "L": self.vertex_count,
            "d": self.phys_dim,
            "edges": [list(e) for e in self.edges],
            "bond_dims": list(self.bond_dims),
        }
        if self.grid_dims is not None:
            obj["grid_dims"] = list(self.grid_dims)
        return obj

    @staticmethod
    def from_json(obj):
        return NetworkShape(
            int(obj["L"]),
            tuple(tuple(e) for e in obj["edges"]),
            tuple(int(b) for b in obj["bond_dims"]),
            int(obj["d"]),
            obj.get("kind", "custom"),
            tuple(obj["grid_dims"]) if obj.get("grid_dims") else None,
        )


@dataclass
class PathCover:
    """Vertex walk covering every vertex, with per-edge traversal counts."""

    vertices: tuple
    edge_multiplicity: dict = field(default_factory=dict)

    def validate(self, shape):
        if set(self.vertices) != set(range(shape.vertex_count)):
            raise ValueError("path does not cover all vertices")
        counts = {}
        for a, b in zip(self.vertices, self.vertices[1:]):
            e = shape.edge_id(a, b)  # raises if not adjacent
            counts[e] = counts.get(e, 0) + 1
        if counts != {e: m for e, m in self.edge_multiplicity.items() if m > 0}:
            raise ValueError("edge multiplicities inconsistent with vertex sequence")
        return self


def build_graph(kind, L=None, rows=None, cols=None, D=1, d=2):
    """Ring C_L, open chain P_L, or rows x cols rectangular grid."""
    if kind == "ring":
        if L is None or L < 3:
            raise ValueError("ring needs L >= 3")
        edges = tuple((i, (i + 1) % L) for i in range(L))
        return NetworkShape(L, edges, (D,) * L, d, "ring")
    if kind == "chain":
        if L is None or L < 2:
            raise ValueError("chain needs L >= 2")
        edges = tuple((i, i + 1) for i in range(L - 1))
        return NetworkShape(L, edges, (D,) * (L - 1), d, "chain")
    if kind == "grid":
        if rows is None or cols is None or rows < 2 or cols < 2:
            raise ValueError("grid needs rows, cols >= 2")
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c < cols - 1:
                    edges.append((v, v + 1))
                if r < rows - 1:
                    edges.append((v, v + cols))
        return NetworkShape(rows * cols, tuple(edges), (D,) * len(edges), d, "grid", (rows, cols))
    raise ValueError(f"unknown graph kind {kind!r}")


def snake_path(shape):
    """Covering path for the built-in graph kinds.

    Chains return the chain itself, grids a boustrophedon Hamiltonian path,
    and rings the path that omits edge 0, so every edge is used at most once.
    """
    L = shape.vertex_count
    if shape.kind == "chain":
        verts = tuple(range(L))
    elif shape.kind == "ring":
        verts = tuple(range(1, L)) + (0,)
    elif shape.kind == "grid":
        rows, cols = shape.grid_dims
        verts = []
        for r in range(rows):
            cs = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
            verts.extend(r * cols + c for c in cs)
        verts = tuple(verts)
    else:
        raise UnsupportedGraphError(f"no snake path for graph kind {shape.kind!r}")
    mult = {}
    for a, b in zip(verts, verts[1:]):
        e = shape.edge_id(a, b)
        mult[e] = mult.get(e, 0) + 1
    return PathCover(verts, mult).validate(shape)
