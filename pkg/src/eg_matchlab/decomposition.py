"""Vertex decompositions Pi = (S, A_1..A_d) with odd blocks, their induced
edge sets, canonical forms, and the exact search for the largest subgraph
with a given matching number.

A decomposition's subgraph keeps every edge meeting S plus every edge inside
a block; edges between different blocks are dropped.  Writing r = d - |S|,
any subgraph H with nu(H) = k embeds in a decomposition with r = n - 2k, so
maximizing over decompositions solves the constrained-matching extremal
problem.  The two canonical shapes are:

  form 1: all edges inside a fixed (2k+1)-set W   (S empty, one big block)
  form 2: all edges meeting a fixed k-set T       (S = T, singleton blocks)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, InputError
from .graph_core import Graph, popcount, vset, vset_members
from .matching import max_matching, matching_number

DEFAULT_N_EXACT_EXTREMAL = 12
DEFAULT_FORM_ENUM_BUDGET = 200_000


# ---------------------------------------------------------------------------
# decomposition type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """Partition of 0..n-1 into S and odd blocks A_1 >= A_2 >= ... (by size).

    Derived statistics: s = |S|, d = number of blocks, r = d - s,
    B = union of A_2..A_d, y = |B| - (d - 1) (the excess beyond singletons).
    """

    n: int
    s_set: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        if self.n <= 0:
            raise InputError("decomposition needs n >= 1")
        if not self.blocks:
            raise InputError("decomposition needs at least one block")
        full = (1 << self.n) - 1
        if self.s_set < 0 or self.s_set >> self.n:
            raise InputError("S contains out-of-range vertices")
        seen = self.s_set
        for b in self.blocks:
            if b <= 0 or b >> self.n:
                raise InputError("block out of range or empty")
            if popcount(b) % 2 == 0:
                raise InputError("blocks must have odd size")
            if seen & b:
                raise InputError("blocks and S must be pairwise disjoint")
            seen |= b
        if seen != full:
            raise InputError("S and the blocks must cover all vertices")
        if len(self.blocks) < popcount(self.s_set):
            raise InputError("r = d - |S| must be nonnegative")
        ordered = tuple(sorted(self.blocks,
                               key=lambda b: (-popcount(b), b & -b)))
        object.__setattr__(self, "blocks", ordered)

    # -- statistics -----------------------------------------------------------

    @property
    def s(self) -> int:
        return popcount(self.s_set)

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def r(self) -> int:
        return self.d - self.s

    @property
    def a1(self) -> int:
        return self.blocks[0]

    @property
    def a1_size(self) -> int:
        return popcount(self.blocks[0])

    @property
    def b_mask(self) -> int:
        mask = 0
        for b in self.blocks[1:]:
            mask |= b
        return mask

    @property
    def b_size(self) -> int:
        return popcount(self.b_mask)

    @property
    def y(self) -> int:
        return self.b_size - (self.d - 1)

    # -- conversion -------------------------------------------------------------

    @classmethod
    def from_lists(cls, n, s_members, block_members) -> "Decomposition":
        return cls(n, vset(s_members), tuple(vset(b) for b in block_members))

    def to_json_obj(self) -> dict:
        return {"S": vset_members(self.s_set),
                "blocks": [vset_members(b) for b in self.blocks]}

    @classmethod
    def from_json_obj(cls, n: int, obj: dict) -> "Decomposition":
        try:
            return cls.from_lists(n, obj["S"], obj["blocks"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad decomposition object: {exc}") from exc


def edge_set(g: Graph, pi: Decomposition) -> tuple[tuple[int, int], ...]:
    """Edges of the subgraph induced by ``pi``: meeting S or inside a block."""
    if pi.n != g.n:
        raise InputError("decomposition and graph disagree on n")
    s_mask = pi.s_set
    owner = [-1] * g.n
    for i, b in enumerate(pi.blocks):
        for v in vset_members(b):
            owner[v] = i
    keep = []
    for u, v in g.edge_list():
        if s_mask >> u & 1 or s_mask >> v & 1 or owner[u] == owner[v]:
            keep.append((u, v))
    return tuple(keep)


def decomposition_size(g: Graph, pi: Decomposition) -> int:
    """|Pi| = number of edges meeting S plus edges inside blocks."""
    if pi.n != g.n:
        raise InputError("decomposition and graph disagree on n")
    total = g.edges_meeting(pi.s_set)
    for b in pi.blocks:
        if popcount(b) > 1:
            total += g.edges_within(b)
    return total


def nu_of_decomposition(g: Graph, pi: Decomposition) -> int:
    """Matching number of the decomposition's subgraph (always <= (n-r)/2)."""
    return matching_number(Graph(g.n, edge_set(g, pi)))


# ---------------------------------------------------------------------------
# canonical-form optimizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormResult:
    witness: int            # vertex-set mask (W for form 1, T for form 2)
    size: int
    exact: bool


def best_form1(g: Graph, k: int,
               enum_budget: int = DEFAULT_FORM_ENUM_BUDGET) -> FormResult:
    """Best W of size 2k+1 maximizing the edge count inside W."""
    n = g.n
    w_size = 2 * k + 1
    if k < 0 or w_size > n:
        raise InputError(f"form 1 needs 2k+1 <= n (k={k}, n={n})")
    if _ncr(n, w_size) <= enum_budget:
        best, best_mask = -1, 0
        for combo in itertools.combinations(range(n), w_size):
            mask = vset(combo)
            val = g.edges_within(mask)
            if val > best:
                best, best_mask = val, mask
        return FormResult(best_mask, best, exact=True)
    mask = _greedy_dense_set(g, w_size)
    mask, val = _swap_improve(g, mask, g.edges_within)
    return FormResult(mask, val, exact=False)


def best_form2(g: Graph, k: int,
               enum_budget: int = DEFAULT_FORM_ENUM_BUDGET) -> FormResult:
    """Best T of size k maximizing the number of edges meeting T."""
    n = g.n
    if k < 0 or k > n:
        raise InputError(f"form 2 needs 0 <= k <= n (k={k}, n={n})")
    if k == 0:
        return FormResult(0, 0, exact=True)
    if _ncr(n, k) <= enum_budget:
        best, best_mask = -1, 0
        for combo in itertools.combinations(range(n), k):
            mask = vset(combo)
            val = g.edges_meeting(mask)
            if val > best:
                best, best_mask = val, mask
        return FormResult(best_mask, best, exact=True)
    order = sorted(range(n), key=lambda v: (-g.degree(v), v))
    mask = vset(order[:k])
    mask, val = _swap_improve(g, mask, g.edges_meeting)
    return FormResult(mask, val, exact=False)


def _greedy_dense_set(g: Graph, size: int) -> int:
    mask = 0
    for _ in range(size):
        best_gain, best_v = -1, -1
        for v in range(g.n):
            if mask >> v & 1:
                continue
            gain = g.degree_into(v, mask)
            if gain > best_gain:
                best_gain, best_v = gain, v
        mask |= 1 << best_v
    return mask


def _swap_improve(g: Graph, mask: int, objective, max_passes: int = 20):
    val = objective(mask)
    for _ in range(max_passes):
        improved = False
        inside = vset_members(mask)
        outside = [v for v in range(g.n) if not mask >> v & 1]
        for v in inside:
            for u in outside:
                cand = (mask & ~(1 << v)) | (1 << u)
                cval = objective(cand)
                if cval > val:
                    mask, val = cand, cval
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    return mask, val


def _ncr(n: int, r: int) -> int:
    if r < 0 or r > n:
        return 0
    return math.comb(n, r)


# ---------------------------------------------------------------------------
# exact extremal search
# ---------------------------------------------------------------------------

@dataclass
class ExtremalResult:
    k: int
    size: int
    maximizers: list[tuple[tuple[int, int], ...]] = field(default_factory=list)
    forms: list[dict] = field(default_factory=list)   # aligned with maximizers
    exact: bool = True
    lower_bound_only: bool = False
    heuristic_witnesses: dict = field(default_factory=dict)

    @property
    def maximizer_count(self) -> int:
        return len(self.maximizers)


def extremal(g: Graph, k: int, mode: str = "exact",
             n_exact: int = DEFAULT_N_EXACT_EXTREMAL,
             seed: int = 0) -> ExtremalResult:
    """Largest subgraph of g with matching number exactly k.

    Exact mode enumerates decompositions (S, odd-block family) with
    r = n - 2k, keeps every candidate whose size reaches a guaranteed
    lower bound, and scans candidate values downward until one level
    contains a subgraph of matching number exactly k; that level's
    qualifying edge sets are precisely the maximizers.
    """
    nu_g = matching_number(g)
    if k < 0 or k > nu_g:
        raise InputError(f"k={k} outside 0..nu(g)={nu_g}")
    if mode == "exact":
        if g.n > n_exact:
            raise CapabilityError(
                f"exact extremal search limited to n <= {n_exact} (got {g.n})")
        return _extremal_exact(g, k)
    if mode in ("heur", "heuristic"):
        return _extremal_heuristic(g, k, seed)
    raise InputError(f"unknown mode {mode!r}")


def _extremal_exact(g: Graph, k: int) -> ExtremalResult:
    n = g.n
    full = g.full_mask()
    mm = max_matching(g)
    t_mask = vset(u for u, _ in mm.pairs[:k])

    best_block = _densest_subsets(g)
    ub_gain = _gain_upper_bounds(best_block, n)

    # The cut starts at a size certified achievable with matching number
    # exactly k (all edges meeting one endpoint per matching edge) and rises
    # whenever a larger candidate certifies; for a fixed S every candidate is
    # a subgraph of the keep-components-whole optimum, so matching numbers
    # only drop below it and pruning against certified cuts stays exact.
    state = {"cut": g.edges_meeting(t_mask), "certified": -1}

    # value -> {edge_key: edges tuple}
    buckets: dict[int, dict[bytes, tuple]] = {}

    def collect(s_mask: int, family: tuple[int, ...], value: int) -> None:
        edges = _edges_of(g, s_mask, family)
        key = _edge_key(edges)
        buckets.setdefault(value, {}).setdefault(key, edges)
        if value > state["certified"]:
            if matching_number(Graph(n, edges)) == k:
                state["certified"] = value
                state["cut"] = max(state["cut"], value)

    for s in range(0, k + 1):
        d = n - 2 * k + s
        if d < 1 or d > n - s:
            continue
        z = 2 * (k - s)
        if z and z + 1 > n - s:
            continue
        for combo in itertools.combinations(range(n), s):
            s_mask = vset(combo)
            base = g.edges_meeting(s_mask)
            avail = full & ~s_mask
            comps = g.components(s_mask)
            odd = sum(1 for c in comps if popcount(c) & 1)
            e_avail = g.m - base
            if odd >= d:
                # components can be grouped whole into d odd blocks: the
                # per-S optimum keeps every available edge
                if base + e_avail >= state["cut"]:
                    collect(s_mask, tuple(comps), base + e_avail)
                continue
            # each cut of a connected piece adds one piece and at most two
            # odd pieces, so reaching d odd blocks severs at least this many
            loss_lb = max((d - odd + 1) // 2, d - len(comps))
            if base + e_avail - loss_lb < state["cut"]:
                continue
            _enumerate_families(g, avail, z, base, state, ub_gain, collect,
                                s_mask)

    for value in sorted(buckets, reverse=True):
        winners = []
        for key in sorted(buckets[value]):
            edges = buckets[value][key]
            if matching_number(Graph(n, edges)) == k:
                winners.append(edges)
        if winners:
            forms = [classify_forms(g, k, e) for e in winners]
            return ExtremalResult(k=k, size=value, maximizers=winners,
                                  forms=forms, exact=True)
    raise AssertionError("extremal search lost its lower-bound candidate")


def _enumerate_families(g, avail, z, base, state, ub_gain, collect, s_mask):
    """All families of disjoint odd blocks (size >= 3) inside ``avail`` with
    total excess sum(|block| - 1) = z; remaining vertices become singletons.

    Blocks are anchored at their minimum vertex and anchors increase, so each
    family is produced exactly once.  Families whose optimistic value falls
    below the current cut are pruned.
    """
    if z == 0:
        if base >= state["cut"]:
            collect(s_mask, (), base)
        return
    avail_list = vset_members(avail)

    def rec(start_idx, avail_mask, z_left, blocks, acc):
        if z_left == 0:
            if acc >= state["cut"]:
                collect(s_mask, tuple(blocks), acc)
            return
        if acc + ub_gain[z_left] < state["cut"]:
            return
        for i in range(start_idx, len(avail_list)):
            a = avail_list[i]
            if not avail_mask >> a & 1:
                continue
            higher = [v for v in avail_list[i + 1:] if avail_mask >> v & 1]
            c = 3
            while c - 1 <= z_left and c - 1 <= len(higher):
                for members in itertools.combinations(higher, c - 1):
                    block = (1 << a) | vset(members)
                    w = g.edges_within(block)
                    rest_gain = ub_gain[z_left - (c - 1)]
                    if acc + w + rest_gain < state["cut"]:
                        continue
                    blocks.append(block)
                    rec(i + 1, avail_mask & ~block, z_left - (c - 1),
                        blocks, acc + w)
                    blocks.pop()
                c += 2

    rec(0, avail, z, [], base)


def _densest_subsets(g: Graph) -> dict[int, int]:
    """best[c] = max edges inside any c-subset, for odd c >= 3."""
    n = g.n
    best = {}
    for c in range(3, n + 1, 2):
        top = 0
        for combo in itertools.combinations(range(n), c):
            val = g.edges_within(vset(combo))
            if val > top:
                top = val
        best[c] = top
    return best


def _gain_upper_bounds(best_block: dict[int, int], n: int) -> list[int]:
    """ub[z] = optimistic total block-edge gain achievable with excess z
    (vertex disjointness relaxed, so this is a valid upper bound)."""
    ub = [0] * (n + 2)
    for z in range(2, n + 2, 2):
        top = 0
        for c in range(3, min(z + 1, n) + 1, 2):
            cand = best_block.get(c, 0) + ub[z - (c - 1)]
            if cand > top:
                top = cand
        ub[z] = top
    return ub


def _edges_of(g: Graph, s_mask: int, family: tuple[int, ...]) -> tuple:
    keep = []
    for u, v in g.edge_list():
        if s_mask >> u & 1 or s_mask >> v & 1:
            keep.append((u, v))
            continue
        for b in family:
            if b >> u & 1 and b >> v & 1:
                keep.append((u, v))
                break
    return tuple(keep)


def _edge_key(edges: tuple) -> bytes:
    return b"".join(u.to_bytes(2, "big") + v.to_bytes(2, "big")
                    for u, v in edges)


def _extremal_heuristic(g: Graph, k: int, seed: int) -> ExtremalResult:
    from . import moves  # local import: moves depends on this module

    candidates = []
    if 2 * k + 1 <= g.n:
        f1 = best_form1(g, k)
        candidates.append(("form1", f1.witness, f1.size))
    f2 = best_form2(g, k)
    candidates.append(("form2", f2.witness, f2.size))

    best_label, best_witness, best_size = max(candidates, key=lambda c: c[2])

    # a couple of move-improved random starts can only raise the lower bound
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(3):
        pi = _random_decomposition(g.n, k, rng)
        if pi is None:
            break
        result = moves.improve(g, pi, max_steps=50, seed=int(rng.integers(1 << 62)))
        final_size = decomposition_size(g, result.final)
        if final_size > best_size and nu_of_decomposition(g, result.final) == k:
            best_label, best_witness, best_size = "moves", 0, final_size
    return ExtremalResult(
        k=k, size=best_size, maximizers=[], forms=[], exact=False,
        lower_bound_only=True,
        heuristic_witnesses={"source": best_label,
                             "witness": vset_members(best_witness)})


def _random_decomposition(n: int, k: int, rng):
    """A random valid decomposition with r = n - 2k, or None if infeasible."""
    for s in rng.permutation(k + 1).tolist():
        d = n - 2 * k + s
        z = 2 * (k - s)
        if d < 1 or d > n - s or (z and z + 1 > n - s):
            continue
        perm = rng.permutation(n).tolist()
        s_members, rest = perm[:s], perm[s:]
        blocks = []
        i = 0
        z_left = z
        while z_left > 0:
            remaining = len(rest) - i
            sizes = [c for c in (3, 5, z_left + 1)
                     if c <= z_left + 1 and
                     (z_left - (c - 1) == 0 or remaining - c >= z_left - (c - 1) + 1)]
            size = int(sizes[rng.integers(len(sizes))])
            blocks.append(rest[i:i + size])
            i += size
            z_left -= size - 1
        blocks.extend([v] for v in rest[i:])
        return Decomposition.from_lists(n, s_members, blocks)
    return None


# ---------------------------------------------------------------------------
# form classification and EG verdicts
# ---------------------------------------------------------------------------

def classify_forms(g: Graph, k: int, edges: tuple) -> dict:
    """All witnesses under which ``edges`` is form 1 and/or form 2."""
    n = g.n
    m_h = len(edges)
    support = 0
    for u, v in edges:
        support |= (1 << u) | (1 << v)
    form1 = []
    w_size = 2 * k + 1
    if w_size <= n and popcount(support) <= w_size:
        for combo in itertools.combinations(range(n), w_size):
            mask = vset(combo)
            if support & ~mask:
                continue
            if g.edges_within(mask) == m_h:
                form1.append(mask)
    form2 = []
    if k <= n:
        hset = set(edges)
        for combo in itertools.combinations(range(n), k):
            mask = vset(combo)
            if any(not (mask >> u & 1 or mask >> v & 1) for u, v in hset):
                continue
            if g.edges_meeting(mask) == m_h:
                form2.append(mask)
    return {"form1": form1, "form2": form2,
            "canonical": bool(form1 or form2)}


@dataclass
class EgCheckResult:
    k: int
    verdict: str                       # "holds" | "fails"
    size: int
    maximizer_count: int
    forms: list[dict]
    counterexample: tuple | None


def eg_check(g: Graph, k: int,
             n_exact: int = DEFAULT_N_EXACT_EXTREMAL) -> EgCheckResult:
    """Does every maximizer at this k have one of the two canonical forms?"""
    res = extremal(g, k, mode="exact", n_exact=n_exact)
    counterexample = None
    for edges, forms in zip(res.maximizers, res.forms):
        if not forms["canonical"]:
            counterexample = edges
            break
    verdict = "holds" if counterexample is None else "fails"
    return EgCheckResult(k=k, verdict=verdict, size=res.size,
                         maximizer_count=res.maximizer_count,
                         forms=res.forms, counterexample=counterexample)


def eg_check_all(g: Graph,
                 n_exact: int = DEFAULT_N_EXACT_EXTREMAL) -> dict[int, EgCheckResult]:
    return {k: eg_check(g, k, n_exact=n_exact)
            for k in range(matching_number(g) + 1)}
