"""Simple undirected graphs on vertices 0..n-1, G(n,p) generation, and the
edge-counting primitives everything else is built on.

Vertex sets are plain Python ints used as bitmasks (bit v set <=> vertex v in
the set).  Adjacency is stored two ways: one bitmask row per vertex for
n <= BITSET_ADJ_LIMIT (fast popcount counting, used by the exact solvers and
the move machinery), and sorted neighbor lists (used by traversals and by the
matching code).  Both are built lazily from a canonical numpy edge array.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import InputError

BITSET_ADJ_LIMIT = 1 << 16

RNG_NAME = "philox4x64-numpy"  # counter-based; recorded in experiment metadata


# ---------------------------------------------------------------------------
# vertex-set (bitmask) helpers
# ---------------------------------------------------------------------------

def vset(members: Iterable[int]) -> int:
    """Bitmask from an iterable of vertex ids."""
    m = 0
    for v in members:
        m |= 1 << v
    return m


def vset_members(mask: int) -> list[int]:
    """Sorted vertex ids of a bitmask."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------

class Graph:
    """Immutable simple undirected graph with labeled vertices 0..n-1."""

    __slots__ = ("n", "_edges", "_adj_bits", "_adj_lists")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise InputError("vertex count must be >= 0")
        self.n = n
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InputError("edges must be (u, v) pairs")
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise InputError("edge endpoint out of range")
            u = np.minimum(arr[:, 0], arr[:, 1])
            v = np.maximum(arr[:, 0], arr[:, 1])
            if (u == v).any():
                raise InputError("self-loops are not allowed")
            keys = np.unique(u * n + v)          # dedupe + canonical lex order
            arr = np.stack([keys // n, keys % n], axis=1)
        self._edges = arr
        self._adj_bits = None
        self._adj_lists = None

    # -- basic accessors ----------------------------------------------------

    @property
    def m(self) -> int:
        return int(self._edges.shape[0])

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges as (u, v) tuples with u < v, lexicographically sorted."""
        return [(int(u), int(v)) for u, v in self._edges]

    def edge_array(self) -> np.ndarray:
        return self._edges

    @property
    def adj_bits(self) -> list[int]:
        if self._adj_bits is None:
            if self.n > BITSET_ADJ_LIMIT:
                raise InputError(
                    f"bitset adjacency unavailable for n={self.n} > {BITSET_ADJ_LIMIT}")
            rows = [bytearray((self.n + 7) // 8) for _ in range(self.n)]
            for u, v in self._edges:
                u = int(u); v = int(v)
                rows[u][v >> 3] |= 1 << (v & 7)
                rows[v][u >> 3] |= 1 << (u & 7)
            self._adj_bits = [int.from_bytes(r, "little") for r in rows]
        return self._adj_bits

    @property
    def adj_lists(self) -> list[list[int]]:
        if self._adj_lists is None:
            lists: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self._edges:
                lists[int(u)].append(int(v))
                lists[int(v)].append(int(u))
            for l in lists:
                l.sort()
            self._adj_lists = lists
        return self._adj_lists

    def has_bitset_adjacency(self) -> bool:
        return self.n <= BITSET_ADJ_LIMIT

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adj_lists[v])

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        if self.has_bitset_adjacency():
            return bool(self.adj_bits[u] >> v & 1)
        lst = self.adj_lists[u]
        i = bisect.bisect_left(lst, v)
        return i < len(lst) and lst[i] == v

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise InputError(f"vertex {v} out of range for n={self.n}")

    def _check_mask(self, mask: int) -> None:
        if mask < 0 or mask >> self.n:
            raise InputError("vertex set contains out-of-range vertices")

    # -- counting primitives --------------------------------------------------

    def edges_within(self, mask: int) -> int:
        """Number of edges with both endpoints in ``mask``."""
        self._check_mask(mask)
        if popcount(mask) <= 1:
            return 0
        if self.has_bitset_adjacency():
            adj = self.adj_bits
            total = 0
            rest = mask
            while rest:
                low = rest & -rest
                total += popcount(adj[low.bit_length() - 1] & mask)
                rest ^= low
            return total // 2
        total = 0
        for u, v in self._edges:
            if mask >> int(u) & 1 and mask >> int(v) & 1:
                total += 1
        return total

    def edges_between(self, y: int, z: int) -> int:
        """Number of edges joining disjoint vertex sets ``y`` and ``z``."""
        self._check_mask(y)
        self._check_mask(z)
        if y & z:
            raise InputError("edges_between requires disjoint vertex sets")
        if self.has_bitset_adjacency():
            adj = self.adj_bits
            small, other = (y, z) if popcount(y) <= popcount(z) else (z, y)
            total = 0
            rest = small
            while rest:
                low = rest & -rest
                total += popcount(adj[low.bit_length() - 1] & other)
                rest ^= low
            return total
        total = 0
        for u, v in self._edges:
            u = int(u); v = int(v)
            if (y >> u & 1 and z >> v & 1) or (y >> v & 1 and z >> u & 1):
                total += 1
        return total

    def degree_into(self, v: int, mask: int) -> int:
        """Number of neighbors of ``v`` inside ``mask``."""
        self._check_vertex(v)
        if self.has_bitset_adjacency():
            return popcount(self.adj_bits[v] & mask)
        return sum(1 for w in self.adj_lists[v] if mask >> w & 1)

    def edges_meeting(self, mask: int) -> int:
        """Number of edges with at least one endpoint in ``mask``."""
        self._check_mask(mask)
        rest = self.full_mask() & ~mask
        return self.m - self.edges_within(rest)

    # -- components ---------------------------------------------------------

    def components(self, removed: int = 0) -> list[int]:
        """Connected components of the graph induced on V minus ``removed``.

        Returns one bitmask per component, ordered by smallest member.  The
        parity of a component is the parity of its popcount.
        """
        self._check_mask(removed)
        alive = self.full_mask() & ~removed
        out = []
        if self.has_bitset_adjacency():
            adj = self.adj_bits
            rest = alive
            while rest:
                low = rest & -rest
                comp = low
                frontier = low
                while frontier:
                    v = (frontier & -frontier).bit_length() - 1
                    frontier ^= frontier & -frontier
                    new = adj[v] & rest & ~comp
                    comp |= new
                    frontier |= new
                out.append(comp)
                rest &= ~comp
            return out
        adj_l = self.adj_lists
        seen = [False] * self.n
        for s in range(self.n):
            if not (alive >> s & 1) or seen[s]:
                continue
            comp = 0
            stack = [s]
            seen[s] = True
            while stack:
                v = stack.pop()
                comp |= 1 << v
                for w in adj_l[v]:
                    if alive >> w & 1 and not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(comp)
        return out

    # -- serialization --------------------------------------------------------

    def to_edge_list_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{int(u)} {int(v)}" for u, v in self._edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Graph":
        tokens = text.split()
        if len(tokens) < 2:
            raise InputError("edge-list input needs a header line 'n m'")
        try:
            n, m = int(tokens[0]), int(tokens[1])
            flat = [int(t) for t in tokens[2:]]
        except ValueError as exc:
            raise InputError(f"bad edge-list token: {exc}") from exc
        if len(flat) != 2 * m:
            raise InputError(f"expected {m} edges, found {len(flat) // 2}")
        edges = list(zip(flat[0::2], flat[1::2]))
        return cls(n, edges)

    # -- dunder ----------------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n == other.n
                and self._edges.shape == other._edges.shape
                and bool((self._edges == other._edges).all()))

    def __hash__(self):
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# random graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GnpParams:
    """Parameters of one G(n,p) draw; identical params give identical graphs."""

    n: int
    p: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be >= 1")
        if not (0.0 <= self.p <= 1.0):
            raise InputError("p must lie in [0, 1]")
        if not (0 <= self.seed < 1 << 64):
            raise InputError("seed must be a 64-bit unsigned integer")


def gen_gnp(params: GnpParams) -> Graph:
    """Sample G(n,p): every vertex pair is an edge independently with prob p.

    Pairs are indexed lexicographically and sampled by geometric gap
    skipping, so the cost is O(p * n^2) rather than O(n^2).  Driven by the
    counter-based Philox generator, keyed by ``params.seed``.
    """
    n, p = params.n, params.p
    total = n * (n - 1) // 2
    if p <= 0.0 or total == 0:
        return Graph(n, [])
    if p >= 1.0:
        u, v = np.triu_indices(n, k=1)
        order = np.argsort(u * n + v, kind="stable")
        return Graph(n, np.stack([u[order], v[order]], axis=1))
    rng = np.random.Generator(np.random.Philox(key=params.seed))
    idx_chunks = []
    pos = -1
    expected = int(p * total) + 16
    while pos < total - 1:
        batch = min(max(1024, expected), 4_000_000)
        gaps = rng.geometric(p, size=batch).astype(np.int64)
        idx = pos + np.cumsum(gaps)
        take = idx[idx < total]
        idx_chunks.append(take)
        if take.size < idx.size:
            break
        pos = int(idx[-1])
        expected = int(p * (total - pos)) + 16
    if not idx_chunks:
        return Graph(n, [])
    indices = np.concatenate(idx_chunks)
    return Graph(n, _pairs_from_indices(n, indices))


def _pairs_from_indices(n: int, idx: np.ndarray) -> np.ndarray:
    """Invert lexicographic pair index: idx(u,v) = C(u) + v - u - 1 where
    C(u) = u*(n-1) - u*(u-1)/2 counts pairs whose first endpoint is < u."""
    if idx.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    idx = idx.astype(np.float64)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    idx = idx.astype(np.int64)
    # fix float rounding with exact integer checks
    for _ in range(2):
        c_u = u * (n - 1) - u * (u - 1) // 2
        u = np.where(c_u > idx, u - 1, u)
        c_next = (u + 1) * (n - 1) - (u + 1) * u // 2
        u = np.where(idx >= c_next, u + 1, u)
    c_u = u * (n - 1) - u * (u - 1) // 2
    v = idx - c_u + u + 1
    return np.stack([u, v], axis=1)


def dense_regime_p(n: int) -> tuple[float, bool]:
    """The dense-regime edge probability 8 ln(n)/n, clamped into [0, 1].

    Returns (p, clamped_flag).
    """
    if n < 2:
        return 1.0, True
    raw = 8.0 * math.log(n) / n
    if raw > 1.0:
        return 1.0, True
    return raw, False


# module-level op aliases matching the documented operation names
def edges_within(g: Graph, x: int) -> int:
    return g.edges_within(x)


def edges_between(g: Graph, y: int, z: int) -> int:
    return g.edges_between(y, z)


def components(g: Graph, removed: int = 0) -> list[int]:
    return g.components(removed)
