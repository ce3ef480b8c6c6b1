"""Maximum matching (blossom contraction), Tutte-Berge deficiency witnesses,
and exact vertex cover via kernelized branch and bound.

The Tutte-Berge formula n - 2*nu(G) = max_S o(G - S) - |S| (o = number of odd
components) certifies matching optimality and drives the witness search.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass

from .errors import CapabilityError, InputError
from .graph_core import Graph, iter_bits, popcount, vset

DEFAULT_N_EXACT_TB = 20
DEFAULT_VC_NODE_BUDGET = 10_000_000
BUDGET_ENV_VAR = "EG_MATCHLAB_BUDGET"


def _env_budget(default: int) -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputError(f"bad {BUDGET_ENV_VAR} value: {raw!r}") from exc
    if value <= 0:
        raise InputError(f"{BUDGET_ENV_VAR} must be positive")
    return value


@dataclass(frozen=True)
class Matching:
    """A set of pairwise vertex-disjoint edges of the host graph."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.pairs)

    def covered(self) -> int:
        mask = 0
        for u, v in self.pairs:
            mask |= (1 << u) | (1 << v)
        return mask


@dataclass(frozen=True)
class TBWitness:
    """A set S together with the odd-component count of G - S.

    deficiency = odd_count - |S|; for an optimal witness this equals
    n - 2*nu(G).
    """

    s_set: int
    odd_count: int
    deficiency: int
    exhaustive: bool


# ---------------------------------------------------------------------------
# maximum matching (blossom contraction, O(n^3))
# ---------------------------------------------------------------------------

def max_matching(g: Graph) -> Matching:
    """Maximum matching via augmenting-path search with blossom contraction."""
    n = g.n
    adj = g.adj_lists
    match = [-1] * n
    for u in range(n):                      # cheap greedy warm start
        if match[u] == -1:
            for v in adj[u]:
                if match[v] == -1:
                    match[u] = v
                    match[v] = u
                    break
    for root in range(n):
        if match[root] == -1:
            _augment_from(root, adj, match)
    pairs = tuple(sorted((u, match[u]) for u in range(n) if match[u] > u))
    return Matching(pairs)


def matching_number(g: Graph) -> int:
    return max_matching(g).size


def _augment_from(root: int, adj: list[list[int]], match: list[int]) -> bool:
    n = len(adj)
    parent = [-1] * n
    base = list(range(n))
    in_tree = [False] * n
    in_tree[root] = True
    queue = deque([root])
    finish = -1
    while queue and finish == -1:
        v = queue.popleft()
        for to in adj[v]:
            if base[v] == base[to] or match[v] == to:
                continue
            if to == root or (match[to] != -1 and parent[match[to]] != -1):
                # odd cycle: contract the blossom up to the common base
                cur = _lowest_common_base(v, to, base, match, parent)
                marked = [False] * n
                _mark_blossom_path(v, cur, to, marked, base, match, parent)
                _mark_blossom_path(to, cur, v, marked, base, match, parent)
                for i in range(n):
                    if marked[base[i]]:
                        base[i] = cur
                        if not in_tree[i]:
                            in_tree[i] = True
                            queue.append(i)
            elif parent[to] == -1:
                parent[to] = v
                if match[to] == -1:
                    finish = to
                    break
                in_tree[match[to]] = True
                queue.append(match[to])
    if finish == -1:
        return False
    v = finish
    while v != -1:
        pv = parent[v]
        nxt = match[pv]
        match[v] = pv
        match[pv] = v
        v = nxt
    return True


def _lowest_common_base(a, b, base, match, parent):
    seen = set()
    a = base[a]
    while True:
        seen.add(a)
        if match[a] == -1:
            break
        a = base[parent[match[a]]]
    b = base[b]
    while b not in seen:
        b = base[parent[match[b]]]
    return b


def _mark_blossom_path(v, b, child, marked, base, match, parent):
    while base[v] != b:
        marked[base[v]] = True
        marked[base[match[v]]] = True
        parent[v] = child
        child = match[v]
        v = parent[match[v]]


# ---------------------------------------------------------------------------
# Tutte-Berge witness
# ---------------------------------------------------------------------------

def odd_components(g: Graph, s_mask: int) -> int:
    return sum(1 for comp in g.components(s_mask) if popcount(comp) & 1)


def tutte_berge_witness(g: Graph, n_exact: int = DEFAULT_N_EXACT_TB,
                        allow_heuristic: bool = False) -> TBWitness:
    """A set S maximizing (odd components of G - S) - |S|.

    Exact mode (n <= n_exact) enumerates candidate sets in increasing size and
    returns the first achiever of the known optimum n - 2*nu(G), so it always
    returns a minimum-cardinality optimal witness.  Above the cutoff a witness
    derived from maximum-matching structure is returned when
    ``allow_heuristic`` is set (it is optimal in practice, but flagged), else
    a CapabilityError is raised.
    """
    n = g.n
    deficiency = n - 2 * matching_number(g)
    if n <= n_exact:
        for size in range(n + 1):
            for combo in itertools.combinations(range(n), size):
                s_mask = vset(combo)
                o = odd_components(g, s_mask)
                if o - size == deficiency:
                    return TBWitness(s_mask, o, deficiency, exhaustive=True)
        raise AssertionError("Tutte-Berge identity violated")  # unreachable
    if not allow_heuristic:
        raise CapabilityError(
            f"exhaustive witness search limited to n <= {n_exact} (got n={n}); "
            "pass allow_heuristic=True for a structural witness")
    s_mask = _structural_witness_set(g)
    o = odd_components(g, s_mask)
    return TBWitness(s_mask, o, o - popcount(s_mask), exhaustive=False)


def _structural_witness_set(g: Graph) -> int:
    """S = vertices adjacent to, but outside, the set D of vertices missed by
    some maximum matching.  D is found by per-vertex matching probes."""
    nu = matching_number(g)
    d_mask = 0
    for v in range(g.n):
        if matching_number(_without_vertex(g, v)) == nu:
            d_mask |= 1 << v
    s_mask = 0
    for v in range(g.n):
        if not (d_mask >> v & 1) and any(d_mask >> w & 1 for w in g.adj_lists[v]):
            s_mask |= 1 << v
    return s_mask


def _without_vertex(g: Graph, v: int) -> Graph:
    edges = [(a, b) for a, b in g.edge_list() if a != v and b != v]
    return Graph(g.n, edges)


# ---------------------------------------------------------------------------
# forests / bipartite
# ---------------------------------------------------------------------------

def is_forest(g: Graph) -> bool:
    return g.m == g.n - len(g.components())


def is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    adj = g.adj_lists
    for s in range(g.n):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if color[w] == -1:
                    color[w] = color[v] ^ 1
                    queue.append(w)
                elif color[w] == color[v]:
                    return False
    return True


# ---------------------------------------------------------------------------
# vertex cover (exact, branch and bound with kernelization)
# ---------------------------------------------------------------------------

def vertex_cover_number(g: Graph, node_budget: int | None = None) -> int:
    """Exact vertex cover number.

    Kernel rules (isolated, degree-1, dominated vertex) run before every
    branch; branching is on a maximum-degree vertex, per component.  Raises
    CapabilityError carrying the best bounds when the node budget runs out.
    """
    budget = _env_budget(DEFAULT_VC_NODE_BUDGET if node_budget is None else node_budget)
    total = 0
    counter = [0]
    for comp in g.components():
        verts = [v for v in iter_bits(comp)]
        local = {v: i for i, v in enumerate(verts)}
        k = len(verts)
        masks = [0] * k
        for v in verts:
            for w in g.adj_lists[v]:
                if comp >> w & 1:
                    masks[local[v]] |= 1 << local[w]
        total += _vc_component(masks, (1 << k) - 1, counter, budget)
    return total


def _vc_component(adj: list[int], alive: int, counter: list[int], budget: int) -> int:
    # greedy upper bound: take both endpoints of a maximal matching
    best = [_vc_greedy(adj, alive)]

    def lower_bound(mask: int) -> int:
        lb = 0
        avail = mask
        while avail:
            v = (avail & -avail).bit_length() - 1
            avail ^= avail & -avail
            nb = adj[v] & avail
            if nb:
                avail &= ~(nb & -nb)
                lb += 1
        return lb

    def rec(mask: int, taken: int) -> None:
        counter[0] += 1
        if counter[0] > budget:
            raise CapabilityError("vertex cover node budget exceeded",
                                  lower=None, upper=best[0])
        mask, taken = _vc_kernel(adj, mask, taken)
        if taken >= best[0]:
            return
        live_edges_vertex = -1
        max_deg = 0
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest ^= rest & -rest
            d = popcount(adj[v] & mask)
            if d > max_deg:
                max_deg = d
                live_edges_vertex = v
        if live_edges_vertex == -1:        # edgeless
            best[0] = min(best[0], taken)
            return
        if taken + lower_bound(mask) >= best[0]:
            return
        v = live_edges_vertex
        nb = adj[v] & mask
        # branch 1: v in the cover
        rec(mask & ~(1 << v), taken + 1)
        # branch 2: all neighbors of v in the cover
        rec(mask & ~nb & ~(1 << v), taken + popcount(nb))

    rec(alive, 0)
    return best[0]


def _vc_kernel(adj: list[int], mask: int, taken: int) -> tuple[int, int]:
    changed = True
    while changed:
        changed = False
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest ^= rest & -rest
            if not (mask >> v & 1):
                continue
            nb = adj[v] & mask
            d = popcount(nb)
            if d == 0:
                mask &= ~(1 << v)
                changed = True
            elif d == 1:
                u = (nb & -nb).bit_length() - 1
                mask &= ~(1 << v) & ~(1 << u)
                taken += 1
                changed = True
        if changed:
            continue
        # dominated vertex: u ~ v with N(v) subset of N[u]  ->  take u
        verts = list(iter_bits(mask))
        for v in verts:
            if not (mask >> v & 1):
                continue
            nv = adj[v] & mask
            for u in iter_bits(nv):
                if nv & ~(adj[u] | (1 << u)) == 0:
                    mask &= ~(1 << u)
                    taken += 1
                    changed = True
                    break
            if changed:
                break
    return mask, taken


def _vc_greedy(adj: list[int], alive: int) -> int:
    size = 0
    mask = alive
    rest = alive
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest ^= rest & -rest
        if not (mask >> v & 1):
            continue
        nb = adj[v] & mask
        if nb:
            u = (nb & -nb).bit_length() - 1
            mask &= ~(1 << v) & ~(1 << u)
            rest &= mask
            size += 2
    return size
