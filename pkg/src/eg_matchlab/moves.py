"""Improvement moves on decompositions.

A decomposition that is not of canonical form 1 / form 2 falls into exactly
one of seven cases, determined by the size of its largest block A_1, the
excess y, |B| (vertices outside S and A_1), and |S|.  Each case has a
transformation producing a new decomposition with the same r = d - |S|
(hence the same matching-number budget) that, on graphs with the expected
edge-density behavior, is strictly larger.  Where a choice is left open, we
pick the variant that maximizes the chance of improvement at finite n and
record it in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import Decomposition, decomposition_size
from .errors import InputError, MoveError
from .graph_core import Graph, popcount, vset_members


@dataclass(frozen=True)
class CaseThresholds:
    """Cutoffs separating the seven cases, all functions of n (natural log)."""

    n: int
    frac_small: float       # n / 2000
    ratio_num: int          # |A_1| vs (399/100) * |B|
    ratio_den: int
    y_small: float          # 1e-4 * n
    log_half: float         # sqrt(ln n)
    s_cut: float            # n / sqrt(ln n)

    @classmethod
    def from_n(cls, n: int) -> "CaseThresholds":
        if n < 2:
            raise InputError("case thresholds need n >= 2")
        root = math.sqrt(math.log(n))
        return cls(n=n, frac_small=n / 2000.0, ratio_num=399, ratio_den=100,
                   y_small=1e-4 * n, log_half=root, s_cut=n / root)

    def as_dict(self) -> dict:
        return {"n": self.n, "frac_small": self.frac_small,
                "ratio": self.ratio_num / self.ratio_den,
                "y_small": self.y_small, "log_half": self.log_half,
                "s_cut": self.s_cut}


@dataclass
class MoveReport:
    case_id: int
    pi_before: Decomposition
    pi_after: Decomposition
    size_before: int
    size_after: int
    moved_set: int
    thresholds: CaseThresholds
    accepted: bool = True

    @property
    def delta(self) -> int:
        return self.size_after - self.size_before


@dataclass
class ImproveResult:
    final: Decomposition
    trace: list[MoveReport]
    reason: str   # "canonical" | "no_improvement" | "max_steps" | "blocked"
    start_size: int
    final_size: int


def is_canonical(pi: Decomposition) -> bool:
    """Form 1 (S empty, all excess in A_1) or form 2 (all blocks singleton)."""
    if pi.a1_size == 1:
        return True
    return pi.s == 0 and pi.y == 0


def classify_case(g: Graph, pi: Decomposition,
                  thresholds: CaseThresholds | None = None) -> int:
    """The unique case 1..7 whose guard matches a non-canonical decomposition.

    Integer-exact comparisons are used for the rational cutoffs (n/2000,
    399/100, 1e-4 n); at the 6/7 boundary (s exactly n/sqrt(ln n)) the
    lower-numbered case wins.
    """
    if is_canonical(pi):
        raise MoveError("decomposition is already canonical")
    th = thresholds or CaseThresholds.from_n(pi.n)
    n = pi.n
    a1, y, s, b = pi.a1_size, pi.y, pi.s, pi.b_size
    if 2000 * a1 < n:
        return 1 if 2000 * y >= n else 2
    if th.ratio_den * a1 <= th.ratio_num * b:
        return 3
    if 10_000 * y >= n:
        return 4
    if y > 0:
        return 5
    if s > th.s_cut or b < th.log_half:
        return 6
    if b >= th.log_half and s < th.s_cut:
        return 7
    return 6             # s == s_cut exactly: lower case wins


def _guard_check(g: Graph, pi: Decomposition, case_id: int,
                 thresholds: CaseThresholds | None) -> CaseThresholds:
    th = thresholds or CaseThresholds.from_n(pi.n)
    actual = classify_case(g, pi, th)
    if actual != case_id:
        raise MoveError(f"case {case_id} move applied to a case {actual} "
                        "decomposition")
    return th


def _min_degree_vertex(g: Graph, block: int) -> int:
    best_v, best_d = -1, None
    for v in vset_members(block):
        d = g.degree_into(v, block)
        if best_d is None or d < best_d:
            best_v, best_d = v, d
    return best_v


# ---------------------------------------------------------------------------
# cases 1 and 4: merge all excess into A_1
# ---------------------------------------------------------------------------

def _merge_excess(g: Graph, pi: Decomposition, case_id: int,
                  thresholds: CaseThresholds | None) -> MoveReport:
    th = _guard_check(g, pi, case_id, thresholds)
    merged = pi.a1
    singles = []
    moved = 0
    for block in pi.blocks[1:]:
        if popcount(block) == 1:
            singles.append(block)
            continue
        x = _min_degree_vertex(g, block)   # cheapest representative to leave
        rest = block & ~(1 << x)
        merged |= rest
        moved |= rest
        singles.append(1 << x)
    pi2 = Decomposition(pi.n, pi.s_set, tuple([merged] + singles))
    return MoveReport(case_id, pi, pi2, decomposition_size(g, pi),
                      decomposition_size(g, pi2), moved, th)


def apply_case1(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    return _merge_excess(g, pi, 1, thresholds)


def apply_case4(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    return _merge_excess(g, pi, 4, thresholds)


# ---------------------------------------------------------------------------
# case 2: promote a well-connected singleton into S
# ---------------------------------------------------------------------------

def apply_case2(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    th = _guard_check(g, pi, 2, thresholds)
    singles = [b for b in pi.blocks if popcount(b) == 1]
    bigs = [b for b in pi.blocks if popcount(b) >= 3]
    if not singles:
        raise MoveError("case 2 needs a singleton block")
    if not bigs:
        raise MoveError("case 2 needs a non-singleton block")
    union = 0
    for b in pi.blocks:
        union |= b

    # x: singleton with the most neighbors among the blocks
    x, x_deg = -1, -1
    for b in singles:
        v = b.bit_length() - 1
        d = g.degree_into(v, union)
        if d > x_deg:
            x, x_deg = v, d

    # (v, z): pair with the smallest in-block degree sum over non-singletons
    best = None
    for b in bigs:
        degs = sorted((g.degree_into(v, b), v) for v in vset_members(b))
        cost = degs[0][0] + degs[1][0]
        key = (cost, b & -b)
        if best is None or key < best[0]:
            best = (key, b, degs[0][1], degs[1][1])
    _, block_j, v1, v2 = best

    new_blocks = []
    for b in pi.blocks:
        if b == (1 << x):
            continue
        if b == block_j:
            new_blocks.append(b & ~(1 << v1) & ~(1 << v2))
            new_blocks.append(1 << v1)
            new_blocks.append(1 << v2)
        else:
            new_blocks.append(b)
    pi2 = Decomposition(pi.n, pi.s_set | (1 << x), tuple(new_blocks))
    return MoveReport(2, pi, pi2, decomposition_size(g, pi),
                      decomposition_size(g, pi2),
                      (1 << x) | (1 << v1) | (1 << v2), th)


# ---------------------------------------------------------------------------
# case 3: split A_1, half into S, half into singletons
# ---------------------------------------------------------------------------

def apply_case3(g: Graph, pi: Decomposition, rng=None,
                thresholds: CaseThresholds | None = None,
                seed: int = 0) -> MoveReport:
    th = _guard_check(g, pi, 3, thresholds)
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=seed))
    members = vset_members(pi.a1)
    half = len(members) // 2
    pick = rng.permutation(len(members))[:half]
    a11 = 0
    for i in pick:
        a11 |= 1 << members[int(i)]
    a12 = pi.a1 & ~a11
    new_blocks = [1 << v for v in vset_members(a12)]
    new_blocks.extend(pi.blocks[1:])
    pi2 = Decomposition(pi.n, pi.s_set | a11, tuple(new_blocks))
    return MoveReport(3, pi, pi2, decomposition_size(g, pi),
                      decomposition_size(g, pi2), a11, th)


# ---------------------------------------------------------------------------
# case 5: absorb the excess vertices of B into A_1
# ---------------------------------------------------------------------------

def apply_case5(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    th = _guard_check(g, pi, 5, thresholds)
    a1 = pi.a1
    merged = a1
    moved = 0
    new_blocks = []
    for block in pi.blocks[1:]:
        if popcount(block) == 1:
            new_blocks.append(block)
            continue
        # keep the vertex least connected to A_1; the rest join A_1
        keep_v, keep_d = -1, None
        for v in vset_members(block):
            d = g.degree_into(v, a1)
            if keep_d is None or d < keep_d:
                keep_v, keep_d = v, d
        rest = block & ~(1 << keep_v)
        merged |= rest
        moved |= rest
        new_blocks.append(1 << keep_v)
    if moved == 0:
        raise MoveError("case 5 needs positive excess")
    pi2 = Decomposition(pi.n, pi.s_set, tuple([merged] + new_blocks))
    return MoveReport(5, pi, pi2, decomposition_size(g, pi),
                      decomposition_size(g, pi2), moved, th)


# ---------------------------------------------------------------------------
# cases 6 and 7: dissolve S into A_1 (with an M from B to fix parity)
# ---------------------------------------------------------------------------

def _absorb_s(g: Graph, pi: Decomposition, case_id: int,
              thresholds: CaseThresholds | None) -> MoveReport:
    th = _guard_check(g, pi, case_id, thresholds)
    s = pi.s
    b_mask = pi.b_mask
    if s > popcount(b_mask):
        raise MoveError(f"case {case_id} needs |S| <= |B| "
                        f"(s={s}, |B|={popcount(b_mask)})")
    a1 = pi.a1
    ranked = sorted(((-g.degree_into(v, a1), v) for v in vset_members(b_mask)))
    m_mask = 0
    for _, v in ranked[:s]:
        m_mask |= 1 << v
    merged = a1 | pi.s_set | m_mask
    new_blocks = [merged]
    new_blocks.extend(1 << v for v in vset_members(b_mask & ~m_mask))
    pi2 = Decomposition(pi.n, 0, tuple(new_blocks))
    return MoveReport(case_id, pi, pi2, decomposition_size(g, pi),
                      decomposition_size(g, pi2), m_mask, th)


def apply_case6(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    return _absorb_s(g, pi, 6, thresholds)


def apply_case7(g: Graph, pi: Decomposition,
                thresholds: CaseThresholds | None = None) -> MoveReport:
    return _absorb_s(g, pi, 7, thresholds)


_APPLY = {1: apply_case1, 2: apply_case2, 4: apply_case4,
          5: apply_case5, 6: apply_case6, 7: apply_case7}


def apply_case(g: Graph, pi: Decomposition, case_id: int, rng=None,
               thresholds: CaseThresholds | None = None) -> MoveReport:
    if case_id == 3:
        return apply_case3(g, pi, rng=rng, thresholds=thresholds)
    try:
        fn = _APPLY[case_id]
    except KeyError:
        raise InputError(f"unknown case id {case_id}") from None
    return fn(g, pi, thresholds=thresholds)


# ---------------------------------------------------------------------------
# improvement loop
# ---------------------------------------------------------------------------

def improve(g: Graph, pi: Decomposition, max_steps: int = 100,
            seed: int = 0) -> ImproveResult:
    """Classify and apply moves until a canonical form is reached, a move
    fails to increase size (rejected, loop stops), or max_steps runs out.

    r is invariant across the whole trace; size never decreases across
    accepted steps.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    thresholds = CaseThresholds.from_n(pi.n) if pi.n >= 2 else None
    trace: list[MoveReport] = []
    start_size = decomposition_size(g, pi)
    cur = pi
    cur_size = start_size
    reason = "max_steps"
    for _ in range(max_steps):
        if is_canonical(cur):
            reason = "canonical"
            break
        case_id = classify_case(g, cur, thresholds)
        try:
            report = apply_case(g, cur, case_id, rng=rng,
                                thresholds=thresholds)
        except MoveError:
            # structurally impossible move (e.g. |S| = |B| + 1 at r = 0):
            # stop with a flag rather than raising
            reason = "blocked"
            break
        if report.size_after <= report.size_before:
            report.accepted = False
            trace.append(report)
            reason = "no_improvement"
            break
        trace.append(report)
        cur = report.pi_after
        cur_size = report.size_after
    else:
        if is_canonical(cur):
            reason = "canonical"
    return ImproveResult(final=cur, trace=trace, reason=reason,
                         start_size=start_size, final_size=cur_size)
