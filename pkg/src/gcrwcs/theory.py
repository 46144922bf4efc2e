"""Executable vulnerable-set machinery.

Families of attack sets are tuples of frozensets. The evaluator-backed
functions run full GCN forward passes; the pure set functions (minimal-set
extraction, the singleton coverage identity) work on any family.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .gcn import GcnModel, forward, predict
from .graph import Graph
from .perturb import Epsilon, apply_tau

MAX_POOL = 15


class OracleCapacityError(ValueError):
    pass


class NotMonotoneError(ValueError):
    pass


def _canon(sets: Iterable[Iterable[int]]) -> tuple[frozenset, ...]:
    uniq = {frozenset(int(v) for v in s) for s in sets}
    return tuple(sorted(uniq, key=lambda s: (len(s), sorted(s))))


@dataclass(frozen=True)
class SetFamily:
    """Family of subsets of ``universe`` (default: every id below ``ground_size``).

    A family enumerated over a candidate pool keeps the pool as its universe,
    so closure checks only add pool members.
    """
    ground_size: int
    sets: tuple[frozenset, ...]
    universe: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sets", _canon(self.sets))
        uni = range(self.ground_size) if self.universe is None else self.universe
        object.__setattr__(self, "universe", tuple(sorted({int(v) for v in uni})))
        if any(v < 0 or v >= self.ground_size for v in self.universe):
            raise ValueError("universe not inside the ground set")
        allowed = set(self.universe)
        for s in self.sets:
            if not s <= allowed:
                raise ValueError(f"set {sorted(s)} not inside the universe")

    def __contains__(self, s) -> bool:
        return frozenset(s) in set(self.sets)

    def __len__(self):
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"ground_size": self.ground_size, "universe": list(self.universe),
                "sets": [sorted(s) for s in self.sets]}


def powerset(items: Sequence[int]):
    items = list(items)
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def upward_closure(generators: Iterable[Iterable[int]], ground_size: int,
                   universe: Sequence[int] | None = None) -> SetFamily:
    gens = [frozenset(s) for s in generators]
    uni = range(ground_size) if universe is None else universe
    out = [s for s in powerset(sorted(uni)) if any(t <= s for t in gens)]
    return SetFamily(ground_size, tuple(out), None if universe is None else tuple(uni))


def is_upward_closed(a: SetFamily) -> bool:
    members = set(a.sets)
    return all(s | {v} in members for s in members for v in a.universe)


@dataclass
class VulnEvaluator:
    model: GcnModel
    graph: Graph
    x: np.ndarray
    y: np.ndarray
    eps: Epsilon | np.ndarray

    def predictions(self, s) -> np.ndarray:
        return predict(forward(self.model, self.graph, apply_tau(self.x, list(s), self.eps)))

    def with_eps(self, eps) -> "VulnEvaluator":
        return VulnEvaluator(self.model, self.graph, self.x, self.y, eps)


def vulnerable_function(ev: VulnEvaluator, target: int, s) -> int:
    """1 iff ``target`` is misclassified after perturbing the nodes in ``s``."""
    if not 0 <= target < ev.graph.n:
        raise IndexError(f"target {target} out of range")
    return int(ev.predictions(s)[target] != ev.y[target])


def _check_pool(pool) -> list[int]:
    pool = sorted({int(v) for v in pool})
    if len(pool) > MAX_POOL:
        raise OracleCapacityError(f"pool of {len(pool)} nodes exceeds the 2^{MAX_POOL} enumeration cap")
    return pool


def enumerate_vulnerable_set(ev: VulnEvaluator, target: int, pool) -> SetFamily:
    """All subsets of ``pool`` that misclassify ``target``.

    Sets are expressed in original node ids; ``ground_size`` is the graph
    size and the pool is the family's universe.
    """
    pool = _check_pool(pool)
    hits = [s for s in powerset(pool) if vulnerable_function(ev, target, s)]
    return SetFamily(ev.graph.n, tuple(hits), tuple(pool))


def enumerate_vulnerable_sets(ev: VulnEvaluator, targets, pool) -> dict[int, SetFamily]:
    """Vulnerable families for many targets sharing one forward pass per subset."""
    pool = _check_pool(pool)
    targets = [int(t) for t in targets]
    hits: dict[int, list] = {t: [] for t in targets}
    for s in powerset(pool):
        wrong = ev.predictions(s) != ev.y
        for t in targets:
            if wrong[t]:
                hits[t].append(s)
    return {t: SetFamily(ev.graph.n, tuple(v), tuple(pool)) for t, v in hits.items()}


def basic_set_conditions(a: SetFamily, b: SetFamily) -> tuple[bool, bool, bool]:
    """Check the three basic-vulnerable-set conditions of ``b`` against ``a``."""
    a_sets, b_sets = set(a.sets), set(b.sets)
    empty = frozenset()
    c1 = empty not in b_sets and (empty not in a_sets or not b_sets)
    c2 = empty in a_sets or all(any(t <= s for t in b_sets) for s in a_sets if s)
    c3 = all(len(s & t) < min(len(s), len(t))
             for s, t in itertools.combinations(b.sets, 2))
    return c1, c2, c3


def basic_vulnerable_set(a: SetFamily) -> SetFamily:
    """Inclusion-minimal members of an upward-closed family (empty if it holds the empty set)."""
    if not is_upward_closed(a):
        raise NotMonotoneError("family is not upward closed; no basic vulnerable set is defined")
    if frozenset() in set(a.sets):
        b = SetFamily(a.ground_size, (), a.universe)
    else:
        kept: list[frozenset] = []
        for s in sorted(a.sets, key=len):
            if not any(t <= s for t in kept):
                kept.append(s)
        b = SetFamily(a.ground_size, tuple(kept), a.universe)
    assert set(b.sets) <= set(a.sets) and all(basic_set_conditions(a, b)), \
        "basic vulnerable set violates its definition"
    return b


def misclassification_rate(ev: VulnEvaluator, targets, s) -> float:
    targets = np.asarray(list(targets), dtype=np.int64)
    if targets.size == 0:
        return float("nan")
    wrong = ev.predictions(s) != ev.y
    return float(wrong[targets].mean())


def coverage_identity_check(bs: Sequence[SetFamily | None], s) -> dict:
    """Compare the mean vulnerable function with its coverage form.

    ``bs[j]`` is node j's basic vulnerable set; ``None`` marks a node that
    can never be misclassified (empty vulnerable set). An empty family marks
    a node misclassified under every attack set. Both sides are exact
    fractions.
    """
    n = len(bs)
    s = frozenset(int(v) for v in s)
    for j, b in enumerate(bs):
        if b is not None and any(len(t) != 1 for t in b.sets):
            raise ValueError(f"node {j}: basic vulnerable set has a non-singleton member")
    # left: average of g_j(S), membership of S in the upward closure of B_j
    lhs_count = 0
    for b in bs:
        if b is None:
            continue
        if not b.sets or any(t <= s for t in b.sets):
            lhs_count += 1
    # right: coverage |U_{i in S} e(i)| plus always-vulnerable nodes
    e: dict[int, set[int]] = {}
    for j, b in enumerate(bs):
        if b is None:
            continue
        for t in b.sets:
            (i,) = t
            e.setdefault(i, set()).add(j)
    covered = set().union(*(e.get(i, set()) for i in s)) if s else set()
    always = sum(1 for b in bs if b is not None and not b.sets)
    lhs = Fraction(lhs_count, n)
    rhs = Fraction(len(covered) + always, n)
    return {"lhs": lhs, "rhs": rhs, "equal": lhs == rhs}


def monotonicity_violations(ev: VulnEvaluator, target: int, pool) -> dict:
    """Fraction of pairs T subset-of S (within ``pool``) with g(T) > g(S)."""
    pool = _check_pool(pool)
    g = {s: vulnerable_function(ev, target, s) for s in powerset(pool)}
    pairs = violations = 0
    for big, gb in g.items():
        for small in powerset(sorted(big)):
            pairs += 1
            violations += g[small] > gb
    return {"pairs": pairs, "violations": violations,
            "fraction": violations / pairs if pairs else 0.0}


def homophily_statistics(families: dict[int, SetFamily]) -> dict:
    """Empirical b(S) and p(S) over every multi-node set in some vulnerable family.

    b(S) counts targets whose family holds S; p(S) is the share of those
    targets that a single member of S already misclassifies.
    """
    stats = []
    all_sets = {s for fam in families.values() for s in fam.sets if len(s) > 1}
    lookup = {t: set(f.sets) for t, f in families.items()}
    for s in sorted(all_sets, key=lambda s: (len(s), sorted(s))):
        holders = [t for t, fam in lookup.items() if s in fam]
        single = [t for t in holders if any(frozenset({v}) in lookup[t] for v in s)]
        stats.append((len(holders), len(single) / len(holders)))
    if not stats:
        return {"sets": 0, "mean_b": math.nan, "min_b": math.nan, "mean_p": math.nan, "min_p": math.nan}
    b = np.array([x[0] for x in stats], dtype=float)
    p = np.array([x[1] for x in stats])
    return {"sets": len(stats), "mean_b": float(b.mean()), "min_b": float(b.min()),
            "mean_p": float(p.mean()), "min_p": float(p.min())}


def diminishing_return_profile(ev: VulnEvaluator, order: Sequence[int], r_values: Sequence[int],
                               lam: float | None = None, targets=None,
                               n_probes: int = 10) -> dict:
    """Misclassification rate h(S_r) along a ranked attack order.

    S_r is the first r nodes of ``order``. The violation statistic is the
    largest observed [h(T+v) - h(T)] - [h(S+v) - h(S)] over prefix pairs
    S_a subset of S_b and probe nodes v taken from ``order`` past the
    largest prefix; positive values mean a marginal gain grew with the set.
    """
    if lam is not None:
        eps = ev.eps if isinstance(ev.eps, Epsilon) else Epsilon(np.asarray(ev.eps), 0, 1.0)
        ev = ev.with_eps(eps.scaled(lam))
    targets = np.arange(ev.graph.n) if targets is None else np.asarray(targets)
    order = [int(v) for v in order]
    r_values = sorted(int(r) for r in r_values)
    if r_values and r_values[-1] > len(order):
        raise ValueError("r exceeds the length of the attack order")

    def h(s):
        return misclassification_rate(ev, targets, s)

    curve = [h(order[:r]) for r in r_values]
    probes = order[r_values[-1]:r_values[-1] + n_probes] if r_values else []
    gain = {}
    for r in r_values:
        base = curve[r_values.index(r)]
        gain[r] = [h(order[:r] + [v]) - base for v in probes]
    worst = -math.inf
    for a, b in itertools.combinations(r_values, 2):
        for gv_small, gv_big in zip(gain[a], gain[b]):
            worst = max(worst, gv_big - gv_small)
    return {"r": r_values, "h": curve,
            "violation": worst if worst > -math.inf else 0.0}
