"""Closed-form probability machinery: the rate function phi, binomial tail
bounds (Chernoff two ways, large deviations), exact binomial tails as the
domination oracle, finite-n union-bound budgets for the density events, the
extremal size formula, and the isolated-3-path moment formulas.

All sums that can span hundreds of orders of magnitude are evaluated
term-exactly in log space with log-gamma binomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InputError

_LN_MAX = 709.0          # exp overflow threshold for float64


# ---------------------------------------------------------------------------
# tail queries and pointwise bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailQuery:
    """Parameters of a binomial tail question: X ~ Bin(m, q), mu = m*q."""

    m: int
    q: float
    lam: float = 0.0
    k_factor: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise InputError("m must be >= 1")
        if not (0.0 <= self.q <= 1.0):
            raise InputError("q must lie in [0, 1]")
        if self.lam < 0:
            raise InputError("lambda must be >= 0")

    @property
    def mu(self) -> float:
        return self.m * self.q


@dataclass(frozen=True)
class BoundPair:
    phi_form: float
    quadratic_form: float
    degenerate: bool = False
    clamped: bool = False

    @property
    def vacuous(self) -> bool:
        return min(self.phi_form, self.quadratic_form) >= 1.0


def phi(x: float) -> float:
    """(1+x) ln(1+x) - x, extended by continuity with phi(-1) = 1."""
    if x < -1:
        raise InputError("phi is defined on x >= -1")
    if x == -1:
        return 1.0
    if x == 0:
        return 0.0
    return (1.0 + x) * math.log1p(x) - x


def chernoff_upper(query: TailQuery) -> BoundPair:
    """Bounds on Pr(X > mu + lambda): exp[-mu*phi(lam/mu)] and the weaker
    exp[-lam^2 / (2(mu + lam/3))]."""
    mu, lam = query.mu, query.lam
    if lam == 0:
        return BoundPair(1.0, 1.0, degenerate=(mu == 0))
    if mu == 0:
        return BoundPair(0.0, 0.0, degenerate=True)   # X = 0 a.s.
    phi_b = math.exp(-mu * phi(lam / mu))
    quad_b = math.exp(-lam * lam / (2.0 * (mu + lam / 3.0)))
    return BoundPair(phi_b, quad_b)


def chernoff_lower(query: TailQuery) -> BoundPair:
    """Bounds on Pr(X < mu - lambda): exp[-mu*phi(-lam/mu)] and
    exp[-lam^2/(2 mu)].  lambda > mu is clamped to mu (the event is then
    contained in {X < 0})."""
    mu, lam = query.mu, query.lam
    clamped = False
    if lam == 0:
        return BoundPair(1.0, 1.0, degenerate=(mu == 0))
    if mu == 0:
        return BoundPair(1.0, 1.0, degenerate=True, clamped=True)
    if lam > mu:
        lam = mu
        clamped = True
    phi_b = math.exp(-mu * phi(-lam / mu))
    quad_b = math.exp(-lam * lam / (2.0 * mu))
    return BoundPair(phi_b, quad_b, clamped=clamped)


@dataclass(frozen=True)
class LargeDeviationBound:
    value: float
    vacuous: bool


def large_deviation(query: TailQuery) -> LargeDeviationBound:
    """Bound on Pr(X > K m q): exp[-K m q ln(K/e)]; vacuous when K <= e."""
    k = query.k_factor
    if k <= 0:
        raise InputError("K must be positive")
    exponent = -k * query.mu * (math.log(k) - 1.0)
    value = math.exp(min(exponent, _LN_MAX))
    return LargeDeviationBound(value=value, vacuous=value >= 1.0)


def binom_tail_exact(m: int, q: float, t: float, side: str) -> float:
    """Exact binomial tail Pr(X <side> t), summed in log space.

    side is one of 'gt', 'ge', 'lt', 'le'.
    """
    if m < 0:
        raise InputError("m must be >= 0")
    if not (0.0 <= q <= 1.0):
        raise InputError("q must lie in [0, 1]")
    if side == "gt":
        j0, j1 = math.floor(t) + 1, m
    elif side == "ge":
        j0, j1 = math.ceil(t), m
    elif side == "lt":
        j0, j1 = 0, math.ceil(t) - 1
    elif side == "le":
        j0, j1 = 0, math.floor(t)
    else:
        raise InputError(f"unknown side {side!r}")
    j0 = max(j0, 0)
    j1 = min(j1, m)
    if j0 > j1:
        return 0.0
    if q == 0.0:
        return 1.0 if j0 == 0 else 0.0
    if q == 1.0:
        return 1.0 if j1 == m else 0.0
    js = np.arange(j0, j1 + 1, dtype=np.float64)
    logpmf = (_log_comb(m, js) + js * math.log(q)
              + (m - js) * math.log1p(-q))
    return float(min(1.0, math.exp(logsumexp(logpmf))))


def _log_comb(n, k):
    n_arr = np.asarray(n, dtype=np.float64)
    k_arr = np.asarray(k, dtype=np.float64)
    return gammaln(n_arr + 1) - gammaln(k_arr + 1) - gammaln(n_arr - k_arr + 1)


def _log_comb_table(n: int) -> np.ndarray:
    """log C(n, k) for k = 0..n, as an indexable array."""
    ks = np.arange(n + 1, dtype=np.float64)
    return gammaln(n + 1) - gammaln(ks + 1) - gammaln(n - ks + 1)


# ---------------------------------------------------------------------------
# union-bound budgets
# ---------------------------------------------------------------------------

BUDGET_TAGS = ("P24a", "P24b", "P25", "P26", "P27a", "P27b", "CUT",
               "C7a", "C7b")


@dataclass(frozen=True)
class BudgetQuery:
    """One union-bound budget question: which sum, at which (n, p, eps)."""

    tag: str
    n: int
    p: float
    epsilon: float = 0.5

    def __post_init__(self):
        if self.tag not in BUDGET_TAGS:
            raise InputError(f"unknown budget tag {self.tag!r}")
        if self.n < 2:
            raise InputError("budgets need n >= 2")
        if not (0.0 < self.p <= 1.0):
            raise InputError("budgets need 0 < p <= 1")
        if not (0.0 < self.epsilon < 1.0):
            raise InputError("budgets need 0 < epsilon < 1")

    def evaluate(self) -> "BudgetResult":
        return union_budget(self.tag, self.n, self.p, self.epsilon)


@dataclass
class BudgetResult:
    tag: str
    n: int
    p: float
    epsilon: float
    log_value: float                 # natural log; -inf when the sum is empty
    notes: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        if self.log_value == -math.inf:
            return 0.0
        if self.log_value > _LN_MAX:
            return math.inf
        return math.exp(self.log_value)

    @property
    def log10_value(self) -> float:
        return self.log_value / math.log(10.0)

    @property
    def vacuous(self) -> bool:
        return self.log_value >= 0.0


def union_budget(tag: str, n: int, p: float, epsilon: float = 0.5) -> BudgetResult:
    """Finite-n numeric value of one of the union-bound failure budgets.

    Tags: P24a interior density (sets above eps*n), P24b 300-factor cap,
    P25 sparse-set log cap, P26 bipartite density, P27a/P27b the two
    three-part-partition sums, CUT the no-crossing-edges partition sum,
    C7a/C7b the final-case bad-event sums (large and small middle part).
    """
    if n < 2:
        raise InputError("budgets need n >= 2")
    if not (0.0 < p <= 1.0):
        raise InputError("budgets need 0 < p <= 1")
    if not (0.0 < epsilon < 1.0):
        raise InputError("budgets need 0 < epsilon < 1")
    try:
        fn = _BUDGET_FNS[tag]
    except KeyError:
        raise InputError(f"unknown budget tag {tag!r}; "
                         f"known: {', '.join(BUDGET_TAGS)}") from None
    log_value, notes = fn(n, p, epsilon)
    return BudgetResult(tag=tag, n=n, p=p, epsilon=epsilon,
                        log_value=log_value, notes=notes)


def _budget_p24a(n, p, eps):
    w0 = math.floor(eps * n) + 1
    if w0 > n:
        return -math.inf, {"empty_range": True}
    ws = np.arange(w0, n + 1, dtype=np.float64)
    terms = _log_comb(n, ws) - (eps * eps / 2.0) * (ws * (ws - 1) / 2.0) * p
    note = {"w_min": w0,
            "exponent": "eps^2/2 * C(w,2) * p (summation form; the pointwise "
                        "statement uses eps^2/3)"}
    return float(logsumexp(terms)), note


def _budget_p24b(n, p, eps):
    w0 = math.floor(math.log(n) / (150.0 * p)) + 1
    if w0 > n:
        return -math.inf, {"empty_range": True}
    ws = np.arange(w0, n + 1, dtype=np.float64)
    terms = _log_comb(n, ws) - 700.0 * ws * (ws - 1) * p
    return float(logsumexp(terms)), {"w_min": w0}


def _budget_p25(n, p, eps):
    lo = math.ceil(2.0 * math.log(n) / 3.0)
    hi = math.floor(math.log(n) / (150.0 * p))
    if lo > hi:
        return -math.inf, {"empty_range": True, "w_lo": lo, "w_hi": hi}
    ws = np.arange(lo, hi + 1, dtype=np.float64)
    terms = _log_comb(n, ws) - 1.5 * ws * math.log(n)
    return float(logsumexp(terms)), {"w_lo": lo, "w_hi": hi}


def _budget_p26(n, p, eps):
    y_min = math.floor(eps * n) + 1
    z_min = math.floor(n / math.sqrt(math.log(n))) + 1
    if y_min + z_min > n:
        return -math.inf, {"empty_range": True}
    c = eps * eps * p / 3.0
    # one layer per z; layers shrink at least geometrically once the
    # binomial growth rate is beaten, which bounds the truncated tail
    gmax = math.log((n - z_min) / (z_min + 1.0))
    ratio_log = gmax - c * y_min
    total = -math.inf
    notes = {"y_min": y_min, "z_min": z_min}
    for z in range(z_min, n - y_min + 1):
        ys = np.arange(y_min, n - z + 1, dtype=np.float64)
        layer = float(logsumexp(
            _log_comb(n, ys) + float(_log_comb(n, z)) - c * z * ys))
        total = np.logaddexp(total, layer)
        if ratio_log < 0:
            tail = layer + ratio_log - math.log1p(-math.exp(ratio_log))
            if tail < total - 46.0:
                notes["z_stop"] = z
                notes["tail_log_bound"] = tail
                break
    return float(total), notes


def _budget_p27a(n, p, eps):
    b0 = math.floor(math.sqrt(math.log(n))) + 1
    a_stmt = math.floor(33 * n / 50) + 1          # a > 33n/50
    total = -math.inf
    peak = -math.inf
    decreasing = 0
    notes = {"b_min": b0}
    for b in range(b0, n):
        a_min = max(a_stmt, b + 1)                 # b < a
        c_hi = min(b + 1, n - b - a_min)           # c - 1 <= b
        if c_hi < 0:
            if n - b - a_min < 0 and b > n - a_stmt:
                break
            continue
        cs = np.arange(0, c_hi + 1, dtype=np.float64)
        a_vals = n - b - cs
        layer = float(logsumexp(
            float(_log_comb(n, b)) + _log_comb(n, cs)
            - (0.81 / 2.0) * a_vals * b * p))
        total = np.logaddexp(total, layer)
        if layer >= peak:
            peak = layer
            decreasing = 0
        else:
            decreasing += 1
        if decreasing >= 3 and layer + math.log(max(n - b, 1)) < total - 46.0:
            notes["b_stop"] = b
            break
    return float(total), notes


def _budget_p27b(n, p, eps):
    lo = math.ceil(n / math.sqrt(math.log(n)))     # b, c >= n / sqrt(ln n)
    total = -math.inf
    peak = -math.inf
    decreasing = 0
    notes = {"bc_min": lo}
    if 2 * lo > n:
        return -math.inf, {"empty_range": True, "bc_min": lo}
    for b in range(lo, n):
        c_hi = min(b + 1, n - b)                   # a = n - b - c >= 0
        if c_hi < lo:
            break
        cs = np.arange(lo, c_hi + 1, dtype=np.float64)
        layer = float(logsumexp(
            float(_log_comb(n, b)) + _log_comb(n, cs) - 1.2 * b * cs * p))
        total = np.logaddexp(total, layer)
        if layer >= peak:
            peak = layer
            decreasing = 0
        else:
            decreasing += 1
        if decreasing >= 3 and layer + math.log(max(n - b, 1)) < total - 46.0:
            notes["b_stop"] = b
            break
    return float(total), notes


def _budget_cut(n, p, eps):
    cs = np.arange(1, n // 2 + 1, dtype=np.float64)
    terms = _log_comb(n, cs) - cs * (n - cs) * p
    return float(logsumexp(terms)), {"c_max": n // 2,
                                     "form": "C(n,c) exp(-|B||C| p)"}


_C7_WINDOW = 256          # parity steps kept around the dominant end
                          # (per-step decay of the omitted tails exceeds
                          # 1 nat, so truncation error is below e^-250)


def _budget_case7(n, p, big):
    """Bad-event budget for the final case: decompositions with S nonempty,
    all excess in A_1, and A_1 > 3.99 |B|.  For every (k, s) pair the middle
    part B has size b = n + s - 2k - 1; two of k, s, a, b determine the rest.
    ``big`` selects b > 1e-3 n (events at 0.9abp / 0.9asp), else b < 1e-3 n
    (events at 0.1abp / 0.1asp)."""
    s_cut_hi = math.ceil(n / math.sqrt(math.log(n))) - 1   # s < n/sqrt(ln n)
    if big:
        b_lo = math.floor(1e-3 * n) + 1
        b_hi = (100 * (n - 1) - 1) // 499                  # from s >= 1
        k1 = 0.1 * 0.1 / 2.0
    else:
        b_lo = 1
        b_hi = math.ceil(1e-3 * n) - 1
        k1 = 0.9 * 0.9 / 2.0
    if b_lo > b_hi or s_cut_hi < 1:
        return -math.inf, {"empty_range": True}

    bs_all = np.arange(b_lo, b_hi + 1, dtype=np.int64)
    # s caps: s <= s_cut_hi, s <= b+1 (r >= 0), a > 3.99 b, a >= 3
    s_hi = np.minimum.reduce([
        np.full_like(bs_all, s_cut_hi),
        bs_all + 1,
        (100 * (n - bs_all) - 399 * bs_all - 1) // 100,
        n - bs_all - 3,
    ])
    # parity: a = n - s - b must be odd, i.e. s == n - b - 1 (mod 2)
    want = (n - bs_all - 1) & 1
    s_hi = np.where((s_hi & 1) == want, s_hi, s_hi - 1)
    keep = s_hi >= 1
    bs_all = bs_all[keep]
    s_hi = s_hi[keep]
    if bs_all.size == 0:
        return -math.inf, {"empty_range": True}

    total = -math.inf
    offs = np.arange(_C7_WINDOW, dtype=np.int64) * 2
    table = _log_comb_table(n)
    for lo_idx in range(0, bs_all.size, 4096):
        bs = bs_all[lo_idx:lo_idx + 4096]
        shi = s_hi[lo_idx:lo_idx + 4096]
        logc_b = table[bs]
        # event 1 terms grow with s: window descends from s_hi
        s1 = shi[:, None] - offs[None, :]
        valid1 = s1 >= 1
        s1 = np.where(valid1, s1, 1)
        a1 = n - s1 - bs[:, None]
        t1 = table[s1] + logc_b[:, None] - k1 * a1 * bs[:, None] * p
        t1 = np.where(valid1, t1, -np.inf)
        # event 2 terms fall with s: window ascends from the parity floor
        s_lo = np.where((shi & 1) == 1, 1, 2)
        s2 = s_lo[:, None] + offs[None, :]
        valid2 = s2 <= shi[:, None]
        s2 = np.where(valid2, s2, 1)
        a2 = n - s2 - bs[:, None]
        if big:
            lam_part = 0.9 * a2 - bs[:, None]
            expo = (s2 * p * lam_part * lam_part
                    / (2.0 * (bs[:, None] + lam_part / 3.0)))
        else:
            ratio = a2 / (10.0 * math.e * bs[:, None])
            expo = 0.1 * a2 * s2 * p * np.log(ratio)
        t2 = table[s2] - expo
        t2 = np.where(valid2, t2, -np.inf)
        chunk = logsumexp(np.concatenate([t1.ravel(), t2.ravel()]))
        total = np.logaddexp(total, chunk)
    notes = {"b_lo": b_lo, "b_hi": int(bs_all[-1]),
             "s_window": _C7_WINDOW,
             "events": ("0.9abp/0.9asp" if big else "0.1abp/0.1asp")}
    return float(total), notes


def _budget_c7a(n, p, eps):
    return _budget_case7(n, p, big=True)


def _budget_c7b(n, p, eps):
    return _budget_case7(n, p, big=False)


_BUDGET_FNS = {
    "P24a": _budget_p24a,
    "P24b": _budget_p24b,
    "P25": _budget_p25,
    "P26": _budget_p26,
    "P27a": _budget_p27a,
    "P27b": _budget_p27b,
    "CUT": _budget_cut,
    "C7a": _budget_c7a,
    "C7b": _budget_c7b,
}


# ---------------------------------------------------------------------------
# extremal size formula and 3-path moments
# ---------------------------------------------------------------------------

def eg_size_formula(n: int, k: int, l: int = 2) -> tuple[int, int]:
    """max{ C(l(k+1)-1, l), C(n,l) - C(n-k,l) } and the branch attaining it
    (1 = edges inside a fixed set, 2 = edges meeting a fixed set)."""
    if l < 2:
        raise InputError("l must be >= 2")
    if k < 0 or l * k > n:
        raise InputError(f"infeasible k={k} for n={n}, l={l}")
    inside = math.comb(l * (k + 1) - 1, l)
    meeting = math.comb(n, l) - math.comb(n - k, l)
    if inside >= meeting:
        return inside, 1
    return meeting, 2


@dataclass(frozen=True)
class P3Moments:
    mean: float
    second_moment: float
    ratio: float | None       # second / mean^2; None when the mean is 0


def p3_moments(n: int, p: float) -> P3Moments:
    """Moments of the number of isolated 3-vertex paths in G(n,p):
    mean = 3 C(n,3) p^2 (1-p)^(3n-8),
    E X^2 = mean + 9 C(n,3) C(n-3,3) p^4 (1-p)^(6n-25)."""
    if n < 0:
        raise InputError("n must be >= 0")
    if not (0.0 <= p <= 1.0):
        raise InputError("p must lie in [0, 1]")
    if n < 3 or p == 0.0 or p == 1.0:
        # p = 1 kills the (1-p)^(3n-8) isolation factor for every n >= 3
        return P3Moments(0.0, 0.0, None)
    log_mean = (math.log(3) + _log_comb_int(n, 3) + 2 * math.log(p)
                + (3 * n - 8) * math.log1p(-p))
    mean = math.exp(log_mean)
    if n >= 6:
        log_pair = (math.log(9) + _log_comb_int(n, 3) + _log_comb_int(n - 3, 3)
                    + 4 * math.log(p) + (6 * n - 25) * math.log1p(-p))
        second = mean + math.exp(log_pair)
    else:
        second = mean
    ratio = None if mean == 0.0 else second / (mean * mean)
    return P3Moments(mean, second, ratio)


def _log_comb_int(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
