"""Constraint-based graph discovery over the factor matrix.

Discovery produces a partial ancestral graph (PAG): an undirected
skeleton whose edge endpoints carry one of three marks (tail, arrow,
circle).  Admissible edges are directed (tail/arrow), bidirected
(arrow/arrow), partially directed (circle/arrow), and undecided
(circle/circle).

The skeleton comes from stratified G-squared independence tests with
growing conditioning sets; endpoints are oriented by the unshielded
collider rule plus the standard completion rules for ancestral graphs
without selection bias (R1 to R4 and R8 to R10).  Domain constraints
then force arrowheads (nothing causes the label; a factor that starts
later cannot cause an earlier one), and the remaining uncertainty is
resolved into a weighted set of candidate DAGs that a BIC score ranks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import chi2

from .encode import FactorMatrix, PrecedenceRelation

TAIL = "-"
ARROW = ">"
CIRCLE = "o"

_ADMISSIBLE = {
    (TAIL, ARROW),
    (ARROW, TAIL),
    (ARROW, ARROW),
    (CIRCLE, ARROW),
    (ARROW, CIRCLE),
    (CIRCLE, CIRCLE),
}

# Strata thinner than this are pooled out of the G^2 statistic.
MIN_STRATUM = 5

DEFAULT_MAX_COND_SIZE = 3
ENUMERATION_CUTOFF = 4096


# ---------------------------------------------------------------------------
# graph containers
# ---------------------------------------------------------------------------


class Pag:
    """Mixed graph with endpoint marks, keyed by unordered node pair."""

    def __init__(self, n_nodes: int, label_node: int | None = None):
        self.n_nodes = int(n_nodes)
        self.label_node = label_node
        self._marks: dict[tuple[int, int], list[str]] = {}
        self.sepsets: dict[tuple[int, int], frozenset[int]] = {}

    @staticmethod
    def _key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def add_edge(self, u: int, v: int, mark_u: str = CIRCLE, mark_v: str = CIRCLE):
        if u == v:
            raise ValueError("self loops are not representable")
        key = self._key(u, v)
        marks = [mark_u, mark_v] if u < v else [mark_v, mark_u]
        self._marks[key] = marks

    def remove_edge(self, u: int, v: int):
        self._marks.pop(self._key(u, v), None)

    def has_edge(self, u: int, v: int) -> bool:
        return self._key(u, v) in self._marks

    def mark_at(self, node: int, other: int) -> str:
        """The mark sitting at ``node``'s end of the edge node--other."""
        marks = self._marks[self._key(node, other)]
        return marks[0] if node < other else marks[1]

    def set_mark(self, node: int, other: int, mark: str):
        marks = self._marks[self._key(node, other)]
        marks[0 if node < other else 1] = mark

    def orient(self, node: int, other: int, mark: str) -> bool:
        """Upgrade a circle at ``node``'s end to ``mark``.

        Hard marks (tail and arrow) are never overwritten by rules, so
        conflicting rule firings keep the first decision.  Returns True
        when the mark actually changed.
        """
        current = self.mark_at(node, other)
        if current == mark or current != CIRCLE:
            return False
        self.set_mark(node, other, mark)
        return True

    def neighbors(self, node: int) -> list[int]:
        out = []
        for (u, v) in self._marks:
            if u == node:
                out.append(v)
            elif v == node:
                out.append(u)
        return sorted(out)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self._marks)

    def marks(self, u: int, v: int) -> tuple[str, str]:
        """Marks at (u's end, v's end)."""
        return self.mark_at(u, v), self.mark_at(v, u)

    def copy(self) -> "Pag":
        out = Pag(self.n_nodes, self.label_node)
        out._marks = {k: list(v) for k, v in self._marks.items()}
        out.sepsets = dict(self.sepsets)
        return out

    def validate(self):
        for (u, v), marks in self._marks.items():
            if tuple(marks) not in _ADMISSIBLE:
                raise ValueError(
                    f"edge {u}--{v} carries inadmissible marks {marks}"
                )

    def __repr__(self):
        def render(u, v):
            left = {TAIL: "-", ARROW: "<", CIRCLE: "o"}[self.mark_at(u, v)]
            right = {TAIL: "-", ARROW: ">", CIRCLE: "o"}[self.mark_at(v, u)]
            return f"{u} {left}-{right} {v}"

        body = ", ".join(render(u, v) for u, v in self.edges())
        return f"Pag({self.n_nodes}, [{body}])"


def _has_cycle(n_nodes: int, edges: Iterable[tuple[int, int]]) -> bool:
    children: dict[int, list[int]] = {}
    indeg = [0] * n_nodes
    for u, v in edges:
        children.setdefault(u, []).append(v)
        indeg[v] += 1
    queue = [v for v in range(n_nodes) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in children.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen != n_nodes


@dataclass(frozen=True)
class CausalDag:
    """A directed acyclic graph over the matrix nodes.

    Edges are canonically sorted (from, to) pairs, which makes equal
    DAGs compare and hash equal.  The label node, when present, can
    only ever be a sink.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    label_node: int | None = None

    def __post_init__(self):
        canon = tuple(sorted({(int(u), int(v)) for u, v in self.edges}))
        object.__setattr__(self, "edges", canon)
        for u, v in canon:
            if u == v:
                raise ValueError("self loop")
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError(f"edge ({u}, {v}) outside node range")
            if self.label_node is not None and u == self.label_node:
                raise ValueError("label node cannot have outgoing edges")
        if _has_cycle(self.n_nodes, canon):
            raise ValueError("graph contains a cycle")

    def parents(self, v: int) -> tuple[int, ...]:
        return tuple(u for u, w in self.edges if w == v)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in set(self.edges)


@dataclass(frozen=True)
class Candidate:
    """One resolved DAG with its resolution weight and (optional) score."""

    dag: CausalDag
    weight: float
    bic: float | None = None


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[Candidate, ...]
    exhaustive: bool
    no_acyclic_warning: bool = False

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


# ---------------------------------------------------------------------------
# conditional independence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CiResult:
    independent: bool
    p_value: float
    g2: float
    dof: int
    pooled_strata: int = 0
    degenerate: bool = False


def ci_test(
    matrix: FactorMatrix,
    i: int,
    j: int,
    given: Sequence[int] = (),
    alpha: float = 0.05,
) -> CiResult:
    """Stratified likelihood-ratio (G^2) independence test.

    Rows are grouped by the configuration of the conditioning columns;
    strata with fewer than ``MIN_STRATUM`` rows are pooled out of the
    statistic (their count is reported).  Each remaining stratum adds
    2 * sum(O * ln(O / E)) and (r_i - 1)(r_j - 1) degrees of freedom.
    If no stratum lets both variables vary, the pair is declared
    independent at p = 1 with the degenerate flag raised.
    """
    if i == j or i in given or j in given:
        raise ValueError("test variables and conditioning set must be disjoint")
    xi = matrix.node_values(i)
    xj = matrix.node_values(j)
    ri = matrix.node_levels(i)
    rj = matrix.node_levels(j)

    if given:
        code = np.zeros(matrix.n_rows, dtype=np.int64)
        for s in given:
            code = code * matrix.node_levels(s) + matrix.node_values(s)
    else:
        code = np.zeros(matrix.n_rows, dtype=np.int64)

    g2 = 0.0
    dof = 0
    pooled = 0
    informative = 0
    for stratum in np.unique(code):
        mask = code == stratum
        count = int(mask.sum())
        if count < MIN_STRATUM:
            pooled += 1
            continue
        table = np.zeros((ri, rj))
        np.add.at(table, (xi[mask], xj[mask]), 1.0)
        row_tot = table.sum(axis=1)
        col_tot = table.sum(axis=0)
        if (row_tot > 0).sum() >= 2 and (col_tot > 0).sum() >= 2:
            informative += 1
        expected = np.outer(row_tot, col_tot) / count
        occupied = table > 0
        g2 += 2.0 * float(
            (table[occupied] * np.log(table[occupied] / expected[occupied])).sum()
        )
        dof += (ri - 1) * (rj - 1)

    if dof == 0 or informative == 0:
        return CiResult(True, 1.0, 0.0, 0, pooled, True)
    p = float(chi2.sf(g2, dof))
    return CiResult(p > alpha, p, g2, dof, pooled, False)


# ---------------------------------------------------------------------------
# skeleton + orientation
# ---------------------------------------------------------------------------


def _skeleton(matrix, alpha, max_cond_size, adj, tester):
    """PC-style edge removal with per-level frozen adjacencies."""
    sepsets: dict[tuple[int, int], frozenset[int]] = {}
    nodes = sorted(adj)
    for level in range(max_cond_size + 1):
        snapshot = {v: sorted(adj[v]) for v in nodes}
        for i in nodes:
            for j in [w for w in snapshot[i] if w > i]:
                if j not in adj[i]:
                    continue
                pools = (
                    [w for w in snapshot[i] if w != j],
                    [w for w in snapshot[j] if w != i],
                )
                tried: set[tuple[int, ...]] = set()
                separated = False
                for pool in pools:
                    if separated or len(pool) < level:
                        continue
                    for sub in itertools.combinations(pool, level):
                        if sub in tried:
                            continue
                        tried.add(sub)
                        if tester(i, j, sub).independent:
                            adj[i].discard(j)
                            adj[j].discard(i)
                            sepsets[(i, j)] = frozenset(sub)
                            separated = True
                            break
    return adj, sepsets


def _is_directed(pag: Pag, a: int, b: int) -> bool:
    return (
        pag.has_edge(a, b)
        and pag.mark_at(a, b) == TAIL
        and pag.mark_at(b, a) == ARROW
    )


def _pd_edge(pag: Pag, u: int, v: int) -> bool:
    """Edge u--v traversable from u toward v (no arrow back, no tail ahead)."""
    return (
        pag.has_edge(u, v)
        and pag.mark_at(u, v) != ARROW
        and pag.mark_at(v, u) != TAIL
    )


def _orient_colliders(pag: Pag, sepsets):
    for b in range(pag.n_nodes):
        nbrs = pag.neighbors(b)
        for a, c in itertools.combinations(nbrs, 2):
            if pag.has_edge(a, c):
                continue
            sep = sepsets.get((min(a, c), max(a, c)), frozenset())
            if b not in sep:
                pag.orient(b, a, ARROW)
                pag.orient(b, c, ARROW)


def _rule1(pag: Pag) -> bool:
    changed = False
    for b in range(pag.n_nodes):
        nbrs = pag.neighbors(b)
        for a in nbrs:
            if pag.mark_at(b, a) != ARROW:
                continue
            for c in nbrs:
                if c == a or pag.has_edge(a, c):
                    continue
                if pag.mark_at(b, c) == CIRCLE:
                    changed |= pag.orient(b, c, TAIL)
                    changed |= pag.orient(c, b, ARROW)
    return changed


def _rule2(pag: Pag) -> bool:
    changed = False
    for a in range(pag.n_nodes):
        for c in pag.neighbors(a):
            if pag.mark_at(c, a) != CIRCLE:
                continue
            for b in pag.neighbors(a):
                if b == c or not pag.has_edge(b, c):
                    continue
                chain1 = _is_directed(pag, a, b) and pag.mark_at(c, b) == ARROW
                chain2 = pag.mark_at(b, a) == ARROW and _is_directed(pag, b, c)
                if chain1 or chain2:
                    changed |= pag.orient(c, a, ARROW)
                    break
    return changed


def _rule3(pag: Pag) -> bool:
    changed = False
    for b in range(pag.n_nodes):
        for d in pag.neighbors(b):
            if pag.mark_at(b, d) != CIRCLE:
                continue
            shared = [
                x
                for x in pag.neighbors(b)
                if x != d and pag.has_edge(x, d)
            ]
            hit = False
            for a, c in itertools.combinations(shared, 2):
                if pag.has_edge(a, c):
                    continue
                if (
                    pag.mark_at(b, a) == ARROW
                    and pag.mark_at(b, c) == ARROW
                    and pag.mark_at(d, a) == CIRCLE
                    and pag.mark_at(d, c) == CIRCLE
                ):
                    hit = True
                    break
            if hit:
                changed |= pag.orient(b, d, ARROW)
    return changed


def _discriminating_start(pag: Pag, b: int, c: int):
    """Candidate third-from-last vertices of a discriminating path for b."""
    for a in pag.neighbors(b):
        if a == c:
            continue
        if pag.mark_at(a, b) == ARROW and _is_directed(pag, a, c):
            yield a


def _rule4(pag: Pag, sepsets) -> bool:
    changed = False
    for b in range(pag.n_nodes):
        for c in pag.neighbors(b):
            if pag.mark_at(b, c) != CIRCLE:
                continue
            # grow paths <theta, ..., a, b, c> leftward; every inner vertex
            # is a collider on the path and a parent of c
            found = None
            for a in _discriminating_start(pag, b, c):
                stack = [(a, (c, b, a))]
                while stack and found is None:
                    head, path = stack.pop()
                    for d in pag.neighbors(head):
                        if d in path:
                            continue
                        if pag.mark_at(head, d) != ARROW:
                            continue
                        if not pag.has_edge(d, c):
                            found = (d, path[2])  # theta and b's predecessor
                            break
                        if pag.mark_at(d, head) == ARROW and _is_directed(pag, d, c):
                            stack.append((d, path + (d,)))
                if found:
                    break
            if not found:
                continue
            theta, a = found
            key = (min(theta, c), max(theta, c))
            if b in sepsets.get(key, frozenset()):
                changed |= pag.orient(b, c, TAIL)
                changed |= pag.orient(c, b, ARROW)
            else:
                changed |= pag.orient(a, b, ARROW)
                changed |= pag.orient(b, a, ARROW)
                changed |= pag.orient(b, c, ARROW)
                changed |= pag.orient(c, b, ARROW)
    return changed


def _rule8(pag: Pag) -> bool:
    changed = False
    for a in range(pag.n_nodes):
        for c in pag.neighbors(a):
            if pag.mark_at(a, c) != CIRCLE or pag.mark_at(c, a) != ARROW:
                continue
            for b in pag.neighbors(a):
                if b == c:
                    continue
                if _is_directed(pag, a, b) and _is_directed(pag, b, c):
                    changed |= pag.orient(a, c, TAIL)
                    break
    return changed


def _uncovered_pd_first_hops(pag: Pag, a: int, target: int) -> set[int]:
    """First vertices of uncovered potentially-directed paths a -> target."""
    hops: set[int] = set()
    for mu in pag.neighbors(a):
        if not _pd_edge(pag, a, mu):
            continue
        if mu == target:
            hops.add(mu)
            continue
        stack = [(mu, (a, mu))]
        ok = False
        while stack and not ok:
            v, path = stack.pop()
            prev = path[-2]
            for w in pag.neighbors(v):
                if w in path or pag.has_edge(prev, w) or not _pd_edge(pag, v, w):
                    continue
                if w == target:
                    ok = True
                    break
                stack.append((w, path + (w,)))
        if ok:
            hops.add(mu)
    return hops


def _rule9(pag: Pag) -> bool:
    changed = False
    for a in range(pag.n_nodes):
        for c in pag.neighbors(a):
            if pag.mark_at(a, c) != CIRCLE or pag.mark_at(c, a) != ARROW:
                continue
            hops = _uncovered_pd_first_hops(pag, a, c)
            if any(mu != c and not pag.has_edge(mu, c) for mu in hops):
                changed |= pag.orient(a, c, TAIL)
    return changed


def _rule10(pag: Pag) -> bool:
    changed = False
    for a in range(pag.n_nodes):
        for c in pag.neighbors(a):
            if pag.mark_at(a, c) != CIRCLE or pag.mark_at(c, a) != ARROW:
                continue
            parents = [b for b in pag.neighbors(c) if b != a and _is_directed(pag, b, c)]
            done = False
            for b, d in itertools.permutations(parents, 2):
                mus = _uncovered_pd_first_hops(pag, a, b)
                omegas = _uncovered_pd_first_hops(pag, a, d)
                for mu in mus:
                    for om in omegas:
                        if mu != om and not pag.has_edge(mu, om):
                            changed |= pag.orient(a, c, TAIL)
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
    return changed


def _family_ll_params(matrix: FactorMatrix, v: int, parents: Sequence[int]):
    """Smoothed log-likelihood and free-parameter count of one family."""
    vals = matrix.node_values(v)
    rv = matrix.node_levels(v)
    nconf = 1
    code = np.zeros(matrix.n_rows, dtype=np.int64)
    for p in sorted(parents):
        rp = matrix.node_levels(p)
        code = code * rp + matrix.node_values(p)
        nconf *= rp
    joint = code * rv + vals
    counts = np.bincount(joint, minlength=nconf * rv).reshape(nconf, rv)
    totals = counts.sum(axis=1, keepdims=True)
    phat = (counts + 1.0) / (totals + rv)
    ll = float((counts * np.log(phat)).sum())
    return ll, (rv - 1) * nconf


def bic_score(dag: CausalDag, matrix: FactorMatrix) -> float:
    """Laplace-smoothed log-likelihood minus (params / 2) ln N."""
    if matrix.n_rows < 1:
        raise ValueError("cannot score against an empty matrix")
    ll = 0.0
    params = 0
    for v in range(matrix.node_count):
        fll, fp = _family_ll_params(matrix, v, dag.parents(v))
        ll += fll
        params += fp
    return ll - 0.5 * params * math.log(matrix.n_rows)


def _greedy_skeleton(matrix: FactorMatrix) -> dict[int, set[int]]:
    """Skeleton of a greedily BIC-hill-climbed DAG (warm start only)."""
    nodes = list(range(matrix.node_count))
    edges: set[tuple[int, int]] = set()
    fam_cache: dict[tuple[int, tuple[int, ...]], tuple[float, int]] = {}
    n = matrix.n_rows

    def family(v, parents):
        key = (v, tuple(sorted(parents)))
        if key not in fam_cache:
            fam_cache[key] = _family_ll_params(matrix, v, key[1])
        ll, p = fam_cache[key]
        return ll - 0.5 * p * math.log(n)

    def parents_of(v):
        return [u for u, w in edges if w == v]

    while True:
        best_gain, best_move = 1e-9, None
        for u, v in itertools.permutations(nodes, 2):
            pv = parents_of(v)
            if (u, v) in edges:
                gain = family(v, [p for p in pv if p != u]) - family(v, pv)
                move = ("del", u, v)
            else:
                if matrix.label_node is not None and u == matrix.label_node:
                    continue
                if _has_cycle(matrix.node_count, edges | {(u, v)}):
                    continue
                gain = family(v, pv + [u]) - family(v, pv)
                move = ("add", u, v)
            if gain > best_gain:
                best_gain, best_move = gain, move
        if best_move is None:
            break
        op, u, v = best_move
        if op == "add":
            edges.add((u, v))
        else:
            edges.discard((u, v))

    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def discover_pag(
    matrix: FactorMatrix,
    alpha: float = 0.05,
    max_cond_size: int = DEFAULT_MAX_COND_SIZE,
    score_warm_start: bool = False,
) -> Pag:
    """Discover a partial ancestral graph over the matrix columns.

    A PC-stable skeleton search with stratified G^2 tests feeds the
    unshielded-collider rule and the ancestral completion rules, applied
    to a fixpoint.  With ``score_warm_start`` the initial adjacency
    comes from a greedy BIC hill climb instead of the complete graph;
    pairs that never got an independence test are then given one, and
    re-added if no separating set can be found.
    """
    n = matrix.node_count
    if n < 2:
        raise ValueError("graph discovery needs at least two columns")
    if matrix.n_rows < 20:
        raise ValueError("graph discovery needs at least 20 rows")

    cache: dict[tuple, CiResult] = {}

    def tester(i, j, sub):
        key = (min(i, j), max(i, j), tuple(sorted(sub)))
        if key not in cache:
            cache[key] = ci_test(matrix, i, j, sub, alpha)
        return cache[key]

    nodes = list(range(n))
    if score_warm_start:
        adj = _greedy_skeleton(matrix)
    else:
        adj = {v: set(w for w in nodes if w != v) for v in nodes}

    adj, sepsets = _skeleton(matrix, alpha, max_cond_size, adj, tester)

    if score_warm_start:
        # pairs the warm start dropped without ever testing: find them a
        # separating set or put the edge back
        for i, j in itertools.combinations(nodes, 2):
            if j in adj[i] or (i, j) in sepsets:
                continue
            pool = sorted((adj[i] | adj[j]) - {i, j})
            found = None
            for size in range(min(max_cond_size, len(pool)) + 1):
                for sub in itertools.combinations(pool, size):
                    if tester(i, j, sub).independent:
                        found = frozenset(sub)
                        break
                if found is not None:
                    break
            if found is not None:
                sepsets[(i, j)] = found
            else:
                adj[i].add(j)
                adj[j].add(i)

    pag = Pag(n, matrix.label_node)
    for i in nodes:
        for j in adj[i]:
            if i < j:
                pag.add_edge(i, j)
    pag.sepsets = dict(sepsets)

    _orient_colliders(pag, sepsets)
    changed = True
    while changed:
        changed = _rule1(pag) or False
        changed = _rule2(pag) or changed
        changed = _rule3(pag) or changed
        changed = _rule4(pag, sepsets) or changed
        changed = _rule8(pag) or changed
        changed = _rule9(pag) or changed
        changed = _rule10(pag) or changed
    pag.validate()
    return pag


# ---------------------------------------------------------------------------
# constraints and resolution
# ---------------------------------------------------------------------------


def apply_constraints(
    pag: Pag,
    label_node: int | None = None,
    precedence: PrecedenceRelation | None = None,
    theta_prec: float = 0.9,
) -> Pag:
    """Force domain arrowheads onto a copy of the graph.

    Label ban: the label end of every label-incident edge becomes an
    arrowhead, so nothing can flow out of the label.  Precedence ban:
    when factor x starts after factor y in at least ``theta_prec`` of
    their co-occurrences, the x end of the x--y edge becomes an
    arrowhead, banning x -> y.  Forcing overwrites whatever mark sits
    there; since an arrowhead is always admissible company for any
    other mark, no conflict can arise and the call is idempotent.
    """
    out = pag.copy()
    if label_node is not None:
        for nb in out.neighbors(label_node):
            out.set_mark(label_node, nb, ARROW)
    if precedence is not None:
        k = precedence.after.shape[0]
        for u, v in out.edges():
            if u >= k or v >= k:
                continue
            if precedence.after[u, v] >= theta_prec:
                out.set_mark(u, v, ARROW)
            if precedence.after[v, u] >= theta_prec:
                out.set_mark(v, u, ARROW)
    out.validate()
    return out


def resolve_candidates(
    pag: Pag,
    budget: int = 1000,
    seed: int = 0,
    enumeration_cutoff: int = ENUMERATION_CUTOFF,
) -> CandidateSet:
    """Expand residual edge uncertainty into weighted candidate DAGs.

    Directed edges stay; bidirected edges drop (their latent confounder
    is outside the model).  A circle/arrow edge resolves to the directed
    edge or a drop with probability 1/2 each; a circle/circle edge to
    either direction or a drop with probability 1/3 each.  When the
    option product is at most ``enumeration_cutoff`` every combination
    is enumerated, otherwise ``budget`` seeded draws sample it.  Cyclic
    combinations are discarded and the surviving weights renormalized;
    should nothing survive, the empty graph becomes the single
    candidate and the set is flagged.
    """
    fixed: list[tuple[int, int]] = []
    options: list[list[tuple[tuple[int, int], ...]]] = []
    for u, v in pag.edges():
        mu, mv = pag.marks(u, v)
        if (mu, mv) == (TAIL, ARROW):
            fixed.append((u, v))
        elif (mu, mv) == (ARROW, TAIL):
            fixed.append((v, u))
        elif (mu, mv) == (ARROW, ARROW):
            continue
        elif (mu, mv) == (CIRCLE, ARROW):
            options.append([((u, v),), ()])
        elif (mu, mv) == (ARROW, CIRCLE):
            options.append([((v, u),), ()])
        elif (mu, mv) == (CIRCLE, CIRCLE):
            options.append([((u, v),), ((v, u),), ()])
        else:
            raise ValueError(f"inadmissible marks {mu}{mv} on edge {u}--{v}")

    n_combos = 1
    for opts in options:
        n_combos *= len(opts)

    weights: dict[tuple[tuple[int, int], ...], float] = {}

    def consider(choice, w):
        edge_list = list(fixed)
        for picked in choice:
            edge_list.extend(picked)
        if _has_cycle(pag.n_nodes, edge_list):
            return
        key = tuple(sorted(edge_list))
        weights[key] = weights.get(key, 0.0) + w

    exhaustive = n_combos <= enumeration_cutoff
    if exhaustive:
        for choice in itertools.product(*options):
            w = 1.0
            for opts in options:
                w /= len(opts)
            consider(choice, w)
    else:
        rng = np.random.default_rng(seed)
        draws = np.stack(
            [rng.integers(0, len(opts), size=budget) for opts in options]
        )
        for b in range(budget):
            choice = [options[e][draws[e, b]] for e in range(len(options))]
            consider(choice, 1.0 / budget)

    if not weights:
        empty = CausalDag(pag.n_nodes, (), pag.label_node)
        return CandidateSet(
            (Candidate(empty, 1.0),), exhaustive=exhaustive, no_acyclic_warning=True
        )

    total = sum(weights.values())
    cands = tuple(
        Candidate(CausalDag(pag.n_nodes, edges, pag.label_node), w / total)
        for edges, w in sorted(weights.items())
    )
    return CandidateSet(cands, exhaustive=exhaustive)


def score_candidates(candidates: CandidateSet, matrix: FactorMatrix) -> CandidateSet:
    """Fill in the BIC score of every candidate."""
    scored = tuple(
        replace(c, bic=bic_score(c.dag, matrix)) for c in candidates.candidates
    )
    return replace(candidates, candidates=scored)


def select_graph(
    candidates: CandidateSet, matrix: FactorMatrix
) -> tuple[CausalDag, CandidateSet]:
    """Best-scoring candidate DAG, with ties broken toward fewer edges
    and then the lexicographically smallest edge list."""
    scored = score_candidates(candidates, matrix)
    best = min(
        scored.candidates,
        key=lambda c: (-c.bic, len(c.dag.edges), c.dag.edges),
    )
    return best.dag, scored
