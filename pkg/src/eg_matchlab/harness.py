"""Seeded Monte Carlo experiments over the three density regimes, density
event audits, the isolated-3-path census, and the deterministic certificate
that the canonical-forms property fails at k = nu.

Per-trial seeds are a fixed 64-bit avalanche mix of (master_seed, index), so
any published number replays from the master seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import decomposition as dec
from .errors import CapabilityError, InputError
from .graph_core import (Graph, GnpParams, RNG_NAME, dense_regime_p, gen_gnp,
                         popcount, vset_members)
from .matching import (_env_budget, is_forest, matching_number,
                       vertex_cover_number)

SCHEMA = "eg-matchlab/1"
DEFAULT_IS_NODE_BUDGET = 100_000_000
CSV_COLUMNS = ("trial", "seed", "n", "p", "m", "nu", "is_forest", "p3_count",
               "empty_half", "tau_eq_nu", "eg_all", "notes")


def splitmix64(x: int) -> int:
    """Fixed 64-bit avalanche permutation (splitmix64 finalizer)."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def trial_seed(master_seed: int, index: int) -> int:
    return splitmix64((master_seed ^ splitmix64(index)) & 0xFFFFFFFFFFFFFFFF)


# ---------------------------------------------------------------------------
# isolated 3-paths
# ---------------------------------------------------------------------------

def count_isolated_p3(g: Graph) -> tuple[int, list[tuple[int, int, int]]]:
    """Components that are exactly a 3-vertex path; up to two witnesses,
    each reported as (end, middle, end)."""
    count = 0
    witnesses = []
    for comp in g.components():
        if popcount(comp) != 3:
            continue
        members = vset_members(comp)
        if g.edges_within(comp) != 2:
            continue
        mid = next(v for v in members if g.degree_into(v, comp) == 2)
        ends = [v for v in members if v != mid]
        count += 1
        if len(witnesses) < 2:
            witnesses.append((ends[0], mid, ends[1]))
    return count, witnesses


def _p3_configs(n: int) -> list[tuple[int, int]]:
    """(required, forbidden) edge bitmaps for every (triple, center) pattern
    that realizes an isolated 3-path; edges indexed lexicographically."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if len(pairs) > 60:
        raise InputError("packed 3-path counting supports n <= 11")
    pair_idx = {e: i for i, e in enumerate(pairs)}

    def bit(u, v):
        return 1 << pair_idx[(min(u, v), max(u, v))]

    configs = []
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                triple = (a, b, c)
                for mid in triple:
                    e1, e2 = [v for v in triple if v != mid]
                    required = bit(mid, e1) | bit(mid, e2)
                    forbidden = bit(e1, e2)
                    for v in triple:
                        for w in range(n):
                            if w not in triple:
                                forbidden |= bit(v, w)
                    configs.append((required, forbidden))
    return configs


def count_isolated_p3_packed(n: int, packed: int) -> int:
    """Isolated-3-path count from a lexicographically packed edge bitmap;
    an independent counting route from count_isolated_p3."""
    return sum(1 for req, forb in _p3_configs(n)
               if packed & req == req and packed & forb == 0)


def sample_p3_counts(n: int, p: float, trials: int, seed: int) -> np.ndarray:
    """Vectorized isolated-3-path counts over many G(n,p) samples (n <= 11),
    built on the packed (triple, center) configurations."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    configs = _p3_configs(n)
    req = np.array([c[0] for c in configs], dtype=np.uint64)
    forb = np.array([c[1] for c in configs], dtype=np.uint64)

    rng = np.random.Generator(np.random.Philox(key=seed))
    powers = (np.uint64(1) << np.arange(len(pairs), dtype=np.uint64))
    counts = np.zeros(trials, dtype=np.int32)
    done = 0
    while done < trials:
        chunk = min(200_000, trials - done)
        bits = rng.random((chunk, len(pairs))) < p
        packed = (bits.astype(np.uint64) * powers[None, :]).sum(axis=1)
        acc = np.zeros(chunk, dtype=np.int32)
        for r, f in zip(req, forb):
            acc += ((packed & r) == r) & ((packed & f) == 0)
        counts[done:done + chunk] = acc
        done += chunk
    return counts


# ---------------------------------------------------------------------------
# independence / empty-half
# ---------------------------------------------------------------------------

def independence_at_least(g: Graph, target: int,
                          node_budget: int | None = None):
    """True/False for alpha(g) >= target; None when the budget runs out."""
    node_budget = _env_budget(DEFAULT_IS_NODE_BUDGET if node_budget is None
                              else node_budget)
    if target <= 0:
        return True
    counter = [0]
    comps = []
    for comp in g.components():
        verts = vset_members(comp)
        local = {v: i for i, v in enumerate(verts)}
        masks = [0] * len(verts)
        for v in verts:
            for w in g.adj_lists[v]:
                if comp >> w & 1:
                    masks[local[v]] |= 1 << local[w]
        comps.append(masks)
    comps.sort(key=len)

    # alpha is additive over components: solve each exactly, short-circuit
    # as soon as the confirmed total plus optimistic remainder settles it
    remaining_vertices = sum(len(m) for m in comps)
    confirmed = 0
    try:
        for masks in comps:
            remaining_vertices -= len(masks)
            comp_alpha = _mis_component(masks, counter, node_budget)
            confirmed += comp_alpha
            if confirmed >= target:
                return True
            if confirmed + remaining_vertices < target:
                return False
        return confirmed >= target
    except CapabilityError:
        return None


def _mis_component(adj: list[int], counter: list[int], budget: int) -> int:
    n = len(adj)
    best = [0]

    def clique_cover_bound(mask: int) -> int:
        # greedy clique cover: alpha takes at most one vertex per clique
        cliques = 0
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            clique = 1 << v
            common = adj[v] & rest
            while common:
                w = (common & -common).bit_length() - 1
                clique |= 1 << w
                common &= adj[w]
            rest &= ~clique
            cliques += 1
        return cliques

    def rec(mask: int, size: int) -> None:
        counter[0] += 1
        if counter[0] > budget:
            raise CapabilityError("independent-set node budget exceeded",
                                  lower=best[0])
        # kernel: vertices of degree <= 1 always join the set
        while mask:
            picked = False
            rest = mask
            while rest:
                v = (rest & -rest).bit_length() - 1
                rest ^= rest & -rest
                if not (mask >> v & 1):
                    continue
                nb = adj[v] & mask
                if popcount(nb) <= 1:
                    mask &= ~(1 << v) & ~nb
                    size += 1
                    picked = True
            if not picked:
                break
        if not mask:
            best[0] = max(best[0], size)
            return
        if size + clique_cover_bound(mask) <= best[0]:
            return
        # branch on a max-degree vertex
        v_best, d_best = -1, -1
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest ^= rest & -rest
            d = popcount(adj[v] & mask)
            if d > d_best:
                v_best, d_best = v, d
        rec(mask & ~(1 << v_best) & ~adj[v_best], size + 1)
        rec(mask & ~(1 << v_best), size)

    rec((1 << n) - 1, 0)
    return best[0]


def has_empty_half(g: Graph, node_budget: int | None = None):
    """'yes' iff some ceil(n/2)-subset spans no edge (independence number at
    least ceil(n/2)); 'unknown' carries the budget reason."""
    resolved = _env_budget(DEFAULT_IS_NODE_BUDGET if node_budget is None
                           else node_budget)
    target = (g.n + 1) // 2
    verdict = independence_at_least(g, target, resolved)
    if verdict is None:
        return "unknown", f"independent-set node budget {resolved} exceeded"
    return ("yes" if verdict else "no"), None


# ---------------------------------------------------------------------------
# failure of the canonical-forms property at k = nu
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EgAtNuVerdict:
    verdict: str               # "holds" | "fails" | "unknown"
    form_a: bool               # all edges fit inside some (2 nu + 1)-set
    form_b: bool | None        # tau == nu (None when tau unknown)
    nu: int
    tau: int | None
    reason: str | None = None


def eg_fails_at_nu(g: Graph, vc_budget: int | None = None) -> EgAtNuVerdict:
    """At k = nu(G) the unique largest subgraph is G itself, so the property
    holds iff G's edges fit in a (2 nu + 1)-set or tau(G) = nu(G)."""
    nu = matching_number(g)
    nonisolated = sum(1 for v in range(g.n) if g.degree(v) > 0)
    form_a = (2 * nu + 1 <= g.n) and (nonisolated <= 2 * nu + 1)
    if form_a:
        return EgAtNuVerdict("holds", True, None, nu, None,
                             "edge support fits in a (2 nu + 1)-set")
    try:
        tau = vertex_cover_number(g, vc_budget)
    except CapabilityError as exc:
        return EgAtNuVerdict("unknown", False, None, nu, None,
                             f"vertex cover budget exceeded: {exc}")
    form_b = (tau == nu)
    verdict = "holds" if form_b else "fails"
    return EgAtNuVerdict(verdict, form_a, form_b, nu, tau)


@dataclass(frozen=True)
class FailureCertificate:
    """Two vertex-disjoint isolated 3-paths plus 'every half-set spans an
    edge' together force both canonical shapes to fail at k = nu."""

    p3_pair: tuple[tuple[int, int, int], tuple[int, int, int]]
    empty_half_absent: bool
    conclusion: str = "eg_fails_at_nu"


def build_failure_certificate(g: Graph,
                              node_budget: int = DEFAULT_IS_NODE_BUDGET):
    """Returns (certificate, reason); certificate is None with a reason when
    either half of the evidence is missing or undecided."""
    count, witnesses = count_isolated_p3(g)
    if count < 2:
        return None, f"only {count} isolated 3-path component(s)"
    verdict, reason = has_empty_half(g, node_budget)
    if verdict == "unknown":
        return None, reason
    if verdict == "yes":
        return None, "an empty half-set exists"
    return FailureCertificate(p3_pair=(witnesses[0], witnesses[1]),
                              empty_half_absent=True), None


# ---------------------------------------------------------------------------
# density audits
# ---------------------------------------------------------------------------

def interior_event_holds(g: Graph, p: float, eps: float, mask: int) -> bool:
    """|E(X)| = (1 +- eps) C(|X|,2) p, strict on both sides."""
    w = popcount(mask)
    expected = w * (w - 1) / 2.0 * p
    val = g.edges_within(mask)
    return (1 - eps) * expected < val < (1 + eps) * expected


def cap300_event_holds(g: Graph, p: float, mask: int) -> bool:
    w = popcount(mask)
    return g.edges_within(mask) <= 300.0 * w * (w - 1) / 2.0 * p


def sparse_event_holds(g: Graph, mask: int) -> bool:
    w = popcount(mask)
    return g.edges_within(mask) <= w * math.log(g.n) / 3.0


def between_event_holds(g: Graph, p: float, eps: float,
                        y_mask: int, z_mask: int) -> bool:
    expected = popcount(y_mask) * popcount(z_mask) * p
    val = g.edges_between(y_mask, z_mask)
    return (1 - eps) * expected < val < (1 + eps) * expected


@dataclass
class DensityAuditReport:
    epsilon: float
    p: float
    samples: int
    events: dict = field(default_factory=dict)   # name -> [checked, violations]

    def violation_total(self) -> int:
        return sum(v for _, v in self.events.values())


def density_audit(g: Graph, p: float, epsilon: float, samples: int,
                  seed: int) -> DensityAuditReport:
    """Sample random vertex sets meeting each density event's size
    precondition and count violations of the stated event."""
    if not (0 < epsilon < 1):
        raise InputError("epsilon must lie in (0, 1)")
    n = g.n
    rng = np.random.Generator(np.random.Philox(key=seed))
    report = DensityAuditReport(epsilon=epsilon, p=p, samples=samples)
    events = {name: [0, 0] for name in
              ("interior_eq", "cap300", "sparse_log", "between_eq")}

    big_lo = math.floor(epsilon * n) + 1
    cap_lo = math.floor(math.log(n) / (150.0 * p)) + 1 if p > 0 else n + 1
    sparse_hi = math.floor(math.log(n) / (150.0 * p)) if p > 0 else n
    z_lo = math.floor(n / math.sqrt(math.log(n))) + 1 if n >= 2 else n + 1

    for _ in range(samples):
        if big_lo <= n:
            w = int(rng.integers(big_lo, n + 1))
            mask = _random_subset(rng, n, w)
            events["interior_eq"][0] += 1
            events["interior_eq"][1] += not interior_event_holds(g, p, epsilon, mask)
        if cap_lo <= n:
            w = int(rng.integers(cap_lo, n + 1))
            mask = _random_subset(rng, n, w)
            events["cap300"][0] += 1
            events["cap300"][1] += not cap300_event_holds(g, p, mask)
        if 1 <= sparse_hi:
            w = int(rng.integers(1, min(sparse_hi, n) + 1))
            mask = _random_subset(rng, n, w)
            events["sparse_log"][0] += 1
            events["sparse_log"][1] += not sparse_event_holds(g, mask)
        if big_lo + z_lo <= n:
            y_size = int(rng.integers(big_lo, n - z_lo + 1))
            z_size = int(rng.integers(z_lo, n - y_size + 1))
            both = _random_subset(rng, n, y_size + z_size)
            members = vset_members(both)
            pick = rng.permutation(len(members))
            y_mask = 0
            for i in pick[:y_size]:
                y_mask |= 1 << members[int(i)]
            z_mask = both & ~y_mask
            events["between_eq"][0] += 1
            events["between_eq"][1] += not between_event_holds(
                g, p, epsilon, y_mask, z_mask)
    report.events = {k: tuple(v) for k, v in events.items()}
    return report


def _random_subset(rng, n: int, size: int) -> int:
    mask = 0
    for v in rng.choice(n, size=size, replace=False):
        mask |= 1 << int(v)
    return mask


# ---------------------------------------------------------------------------
# regimes and trials
# ---------------------------------------------------------------------------

def middle_regime_interval(n: int) -> tuple[float, float, bool]:
    """(lower, upper, feasible) for the failure-regime window
    4 ln(2e)/n < p < ln(n)/(3n); empty until n exceeds ~6.6e8."""
    lo = 4.0 * math.log(2.0 * math.e) / n
    hi = math.log(n) / (3.0 * n)
    return lo, hi, lo < hi


DEFAULT_CHECKS = {
    "dense": ("nu", "forest", "p3", "eg", "density"),
    "forest": ("nu", "forest", "p3", "eg", "tau"),
    "middle": ("nu", "forest", "p3", "empty_half", "tau"),
    "custom": ("nu", "forest", "p3"),
}


@dataclass(frozen=True)
class RegimeSpec:
    """One experiment: a density rule, trial count, master seed, checks."""

    n: int
    p_rule: str                      # dense | forest | middle | custom
    trials: int
    master_seed: int
    checks: tuple[str, ...] = ()
    p_explicit: float | None = None  # required for middle / custom
    forest_c: float = 0.1            # p = c / n in the forest regime
    eg_exact_cutoff: int = 12
    density_epsilon: float = 0.5
    density_samples: int = 100
    vc_budget: int | None = None
    is_budget: int = DEFAULT_IS_NODE_BUDGET

    def resolve_p(self) -> tuple[float, dict]:
        flags = {}
        if self.p_rule == "dense":
            p, clamped = dense_regime_p(self.n)
            if clamped:
                flags["p_clamped"] = True
        elif self.p_rule == "forest":
            p = self.forest_c / self.n
            if self.forest_c >= 1.0:
                flags["forest_c_not_small"] = True
        elif self.p_rule in ("middle", "custom"):
            if self.p_explicit is None:
                raise InputError(f"{self.p_rule} regime needs an explicit p")
            p = self.p_explicit
            if self.p_rule == "middle":
                lo, hi, feasible = middle_regime_interval(self.n)
                flags["middle_interval"] = (lo, hi)
                flags["middle_feasible"] = feasible
                if feasible and not (lo < p < hi):
                    flags["p_outside_middle_interval"] = True
        else:
            raise InputError(f"unknown p_rule {self.p_rule!r}")
        if not (0.0 <= p <= 1.0):
            raise InputError(f"resolved p={p} outside [0, 1]")
        return p, flags

    def resolved_checks(self) -> tuple[str, ...]:
        return self.checks or DEFAULT_CHECKS.get(self.p_rule, ("nu",))


@dataclass
class TrialRecord:
    trial: int
    seed: int
    n: int
    p: float
    m: int
    nu: int | None = None
    is_forest: bool | None = None
    p3_count: int | None = None
    empty_half: str = ""             # yes | no | unknown | ""
    tau: int | None = None
    tau_eq_nu: str = ""              # yes | no | unknown | ""
    eg_all: str = ""                 # holds | fails | skipped | ""
    eg_per_k: dict | None = None
    density: dict | None = None
    move_stats: dict | None = None
    notes: list[str] = field(default_factory=list)

    def csv_row(self) -> str:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return "1" if x else "0"
            if isinstance(x, float):
                return repr(x)
            return str(x)

        cells = [fmt(self.trial), fmt(self.seed), fmt(self.n), fmt(self.p),
                 fmt(self.m), fmt(self.nu), fmt(self.is_forest),
                 fmt(self.p3_count), self.empty_half, self.tau_eq_nu,
                 self.eg_all, ";".join(self.notes)]
        return ",".join(cells)


def run_trials(spec: RegimeSpec):
    """Run the experiment: returns (records, summary).  Byte-identical output
    for identical specs."""
    p, flags = spec.resolve_p()
    checks = spec.resolved_checks()
    records = []
    for i in range(spec.trials):
        seed = trial_seed(spec.master_seed, i)
        g = gen_gnp(GnpParams(spec.n, p, seed))
        rec = TrialRecord(trial=i, seed=seed, n=spec.n, p=p, m=g.m)
        if "nu" in checks:
            rec.nu = matching_number(g)
        if "forest" in checks:
            rec.is_forest = is_forest(g)
        if "p3" in checks:
            rec.p3_count = count_isolated_p3(g)[0]
        if "empty_half" in checks:
            rec.empty_half, why = has_empty_half(g, spec.is_budget)
            if why:
                rec.notes.append(why)
        if "tau" in checks:
            try:
                rec.tau = vertex_cover_number(g, spec.vc_budget)
                nu = rec.nu if rec.nu is not None else matching_number(g)
                rec.tau_eq_nu = "yes" if rec.tau == nu else "no"
            except CapabilityError as exc:
                rec.tau_eq_nu = "unknown"
                rec.notes.append(f"tau budget exceeded ({exc})")
        if "eg" in checks:
            if spec.n <= spec.eg_exact_cutoff:
                verdicts = dec.eg_check_all(g, n_exact=spec.eg_exact_cutoff)
                rec.eg_per_k = {k: v.verdict for k, v in verdicts.items()}
                rec.eg_all = ("holds" if all(v.verdict == "holds"
                                             for v in verdicts.values())
                              else "fails")
            else:
                rec.eg_all = "skipped"
                rec.notes.append(
                    f"exact eg check limited to n <= {spec.eg_exact_cutoff}")
        if "density" in checks:
            audit = density_audit(g, p, spec.density_epsilon,
                                  spec.density_samples,
                                  trial_seed(seed, 0xD0))
            rec.density = dict(audit.events)
        if "moves" in checks:
            rec.move_stats = _move_improvement_stats(g, seed)
        records.append(rec)
    summary = _summarize(spec, p, flags, records)
    return records, summary


def _move_improvement_stats(g: Graph, seed: int) -> dict:
    from . import moves

    rng = np.random.Generator(np.random.Philox(key=trial_seed(seed, 0x40)))
    nu = matching_number(g)
    if nu == 0:
        return {"skipped": "nu = 0"}
    k = int(rng.integers(1, nu + 1))
    pi = dec._random_decomposition(g.n, k, rng)
    if pi is None:
        return {"skipped": f"no decomposition for k={k}"}
    result = moves.improve(g, pi, max_steps=100,
                           seed=trial_seed(seed, 0x41))
    return {"k": k, "steps": len(result.trace), "reason": result.reason,
            "gain": result.final_size - result.start_size}


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    """Wilson score interval for a binomial rate."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _rate_entry(successes: int, trials: int) -> dict:
    lo, hi = wilson_interval(successes, trials)
    return {"count": successes, "trials": trials,
            "rate": (successes / trials) if trials else None,
            "wilson_low": lo, "wilson_high": hi}


def _summarize(spec: RegimeSpec, p: float, flags: dict, records) -> dict:
    t = len(records)
    summary = {
        "schema": SCHEMA,
        "rng": RNG_NAME,
        "regime": spec.p_rule,
        "n": spec.n,
        "p": p,
        "trials": t,
        "master_seed": spec.master_seed,
        "checks": list(spec.resolved_checks()),
        "flags": flags,
        "degenerate": t == 0,
    }
    rates = {}
    if any(r.is_forest is not None for r in records):
        rates["is_forest"] = _rate_entry(
            sum(1 for r in records if r.is_forest), t)
    if any(r.eg_all in ("holds", "fails") for r in records):
        done = [r for r in records if r.eg_all in ("holds", "fails")]
        rates["eg_all_holds"] = _rate_entry(
            sum(1 for r in done if r.eg_all == "holds"), len(done))
    if any(r.tau_eq_nu in ("yes", "no") for r in records):
        done = [r for r in records if r.tau_eq_nu in ("yes", "no")]
        rates["tau_eq_nu"] = _rate_entry(
            sum(1 for r in done if r.tau_eq_nu == "yes"), len(done))
    if any(r.empty_half in ("yes", "no") for r in records):
        done = [r for r in records if r.empty_half in ("yes", "no")]
        rates["empty_half"] = _rate_entry(
            sum(1 for r in done if r.empty_half == "yes"), len(done))
    if any(r.p3_count is not None for r in records):
        done = [r for r in records if r.p3_count is not None]
        rates["two_isolated_p3"] = _rate_entry(
            sum(1 for r in done if r.p3_count >= 2), len(done))
    if any(r.density is not None for r in records):
        checked = violated = 0
        for r in records:
            if r.density:
                for c, v in r.density.values():
                    checked += c
                    violated += v
        rates["density_violation"] = _rate_entry(violated, checked)
    summary["rates"] = rates
    return summary


def records_to_csv(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"
