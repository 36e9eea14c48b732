"""Graph-level analyses of structured transition matrices: connectivity,
Rome certificates and simple paths to infinity.

Vertices beyond a cut index are handled through *family classes*: all
vertices Tail(F, n, k) with n above the cut share one node whose arrows come
from the tail templates.  A class may point to itself only when every such
arrow strictly lowers (n, k); that is what makes a ranking by
(class level, n, k) strictly decreasing on the complement of a Rome.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

from .partition import Finite, Tail
from .symbolic import StructuredMatrix, Template

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

# -- class graph helpers --------------------------------------------------------------------


def _class_targets(t: Template, shapes, cut: dict):
    """Targets of the family class of template ``t`` (rows n > cut[t.fam]).

    Returns (finite ids, explicit tail ids (superset), target classes,
    decreasing-self flag).  Over-approximating targets only makes
    certification harder, so it is sound for Rome certificates.
    """
    n1 = cut[t.fam] + 1
    fin, explicit, classes = set(), set(), set()
    self_ok = True
    for lap in t.laps:
        fin.update(lap.finite)
        for r in lap.ranges:
            sh = shapes[r.fam]
            c = cut[r.fam]
            lo_m = r.lo.at(n1, sh)[0] if r.lo.q >= 1 else r.lo.c
            lo_m = max(lo_m, sh.n0)
            for m in range(lo_m, c + 1):
                explicit.update(Tail(r.fam, m, k) for k in range(sh.count(m)))
            reaches_class = r.hi is None or r.hi.q >= 1 or r.hi.c > c
            if not reaches_class:
                continue
            if r.fam != t.fam:
                classes.add(r.fam)
                continue
            # arrows inside the class must strictly decrease (n, k)
            hi = r.hi
            if hi is None or hi.q > 1:
                self_ok = False
            elif hi.q == 1:
                if hi.c > 0:
                    self_ok = False
                elif hi.c == 0:
                    if t.sub is None or hi.k < 0 or hi.k >= t.sub:
                        self_ok = False
            # q == 0 with hi.c > cut: targets of bounded index above the cut
            elif hi.q == 0:
                self_ok = False
    return fin, explicit, classes, self_ok


@dataclass
class RomeCertificate:
    rome: frozenset
    cut: dict  # family -> largest explicit index
    levels: dict  # node -> level; nodes are IntervalIds or ("class", fam)
    templates_used: dict = field(default_factory=dict)

    def node(self, iid):
        if isinstance(iid, Tail) and iid.n > self.cut[iid.fam]:
            return ("class", iid.fam)
        return iid

    def rank(self, iid) -> tuple:
        """Lexicographic rank (level, n, k); strictly decreasing along complement arrows."""
        lvl = self.levels[self.node(iid)]
        if isinstance(iid, Tail):
            return (lvl, iid.n, iid.sub)
        return (lvl, 0, 0)

    def flat_rank(self, iid, depth: int, max_subs: int) -> int:
        """Integer rank valid on the depth truncation."""
        lvl, n, k = self.rank(iid)
        stride = (depth + 2) * max_subs + 1
        return lvl * stride + n * max_subs + k

    def describe(self) -> list:
        return sorted((str(r) for r in self.rome))

    def to_json(self):
        return {
            "rome": self.describe(),
            "cut": {str(k): v for k, v in self.cut.items()},
            "levels": {str(k): v for k, v in sorted(self.levels.items(), key=lambda kv: str(kv[0]))},
        }


def _explicit_nodes(A: StructuredMatrix, cut: dict) -> list:
    out = [Finite(k) for k in range(A.n_finite)]
    for f, sh in enumerate(A.shapes):
        for n in range(sh.n0, cut[f] + 1):
            out.extend(Tail(f, n, k) for k in range(sh.count(n)))
    return out


def verify_rome(A: StructuredMatrix, rome, cut: dict, templates: dict) -> RomeCertificate | None:
    """Certificate that every infinite path meets ``rome`` (or None)."""
    rome = frozenset(rome)
    G = nx.DiGraph()
    explicit = [v for v in _explicit_nodes(A, cut) if v not in rome]
    G.add_nodes_from(explicit)
    classes = [("class", f) for f in range(len(A.shapes))]
    G.add_nodes_from(classes)

    def node_of(iid):
        if isinstance(iid, Tail) and iid.n > cut[iid.fam]:
            return ("class", iid.fam)
        return iid

    for v in explicit:
        row = A.row(v)
        tgts = set()
        for k in row.explicit:
            if row.explicit[k]:
                tgts.add(node_of(k))
        for s in list(row.patterns) + list(row.support):
            sh = A.shapes[s.fam]
            tgts.add(("class", s.fam))
            for m in range(max(s.start, sh.n0), cut[s.fam] + 1):
                subs = range(sh.count(m)) if s.sub is None else (s.sub,)
                tgts.update(Tail(s.fam, m, k) for k in subs)
        if not row.exact and not row.support:
            return None
        for w in tgts:
            if w in rome:
                continue
            G.add_edge(v, w)
    for (f, sub), t in templates.items():
        fin, expl, cls, self_ok = _class_targets(t, A.shapes, cut)
        src = ("class", f)
        for k in fin:
            if Finite(k) not in rome:
                G.add_edge(src, Finite(k))
        for w in expl:
            if w not in rome:
                G.add_edge(src, w)
        for g in cls:
            G.add_edge(src, ("class", g))
        if not self_ok:
            G.add_edge(src, src)
    if not nx.is_directed_acyclic_graph(G):
        return None
    levels = {}
    for v in reversed(list(nx.topological_sort(G))):
        succ = list(G.successors(v))
        levels[v] = 1 + max(levels[w] for w in succ) if succ else 0
    return RomeCertificate(rome, dict(cut), levels, dict(templates))


ROME_NODE_CAP = 512


def find_finite_rome(A: StructuredMatrix, candidate_depth: int = 16) -> RomeCertificate | None:
    """Start from all finite vertices plus tail vertices up to the cut, then
    drop vertices greedily (deepest first) while a certificate survives."""
    templates = A.templates()
    if templates is None:
        return None
    cut = {}
    for f, sh in enumerate(A.shapes):
        starts = [t.start for (g, _), t in templates.items() if g == f]
        c = max([sh.n0] + [s - 1 for s in starts])
        # deepen toward candidate_depth while the explicit vertex count stays small
        nodes = sum(sh.count(n) for n in range(sh.n0, c + 1))
        while c < candidate_depth and nodes + sh.count(c + 1) <= ROME_NODE_CAP:
            c += 1
            nodes += sh.count(c)
        cut[f] = c
    explicit = _explicit_nodes(A, cut)
    rome = set(explicit)
    cert = verify_rome(A, rome, cut, templates)
    if cert is None:
        return None
    tails = sorted((v for v in explicit if isinstance(v, Tail)), key=lambda v: (-v.n, v.fam, -v.sub))
    finites = [v for v in explicit if isinstance(v, Finite)][::-1]
    for v in tails + finites:
        trial = rome - {v}
        if not trial:
            continue
        c = verify_rome(A, trial, cut, templates)
        if c is not None:
            rome, cert = trial, c
    return cert


# -- paths to infinity ----------------------------------------------------------------------------


@dataclass
class PathToInfinity:
    cycle: list  # families visited
    drift: float  # total index gain per turn (inf when unbounded)

    def to_json(self):
        return {"cycle": [f"T{f}" for f in self.cycle], "drift": self.drift}


def _template_drift_graph(templates: dict) -> dict:
    weights: dict = {}
    for (f, _), t in templates.items():
        for lap in t.laps:
            for r in lap.ranges:
                if r.hi is None or r.hi.q >= 2:
                    w = math.inf
                elif r.hi.q == 1:
                    w = r.hi.c
                else:
                    continue
                # the range must be nonempty for large n
                if r.hi is not None and r.lo.q > r.hi.q:
                    continue
                key = (f, r.fam)
                weights[key] = max(weights.get(key, -math.inf), w)
    return weights


def find_simple_path_to_infinity(A: StructuredMatrix) -> PathToInfinity | None:
    """A cycle of family templates whose total drift is positive: following it
    from a deep enough vertex produces infinitely many distinct vertices."""
    templates = A.templates()
    if templates is None:
        return None
    weights = _template_drift_graph(templates)
    G = nx.DiGraph()
    for (a, b), w in weights.items():
        G.add_edge(a, b, weight=w)
    best = None
    for cyc in nx.simple_cycles(G):
        edges = list(zip(cyc, cyc[1:] + cyc[:1]))
        total = sum(G.edges[e]["weight"] for e in edges)
        if total >= 1 and (best is None or total > best.drift):
            best = PathToInfinity(list(cyc), float(total))
    return best


# -- connectivity --------------------------------------------------------------------------------


@dataclass
class ConnectivityReport:
    irreducible: str
    aperiodic: str
    leo: str
    leo_witness: tuple | None = None  # (vertex, n)
    period: int | None = None
    depth: int = 0
    notes: list = field(default_factory=list)

    def all_pass(self) -> bool:
        return self.irreducible == PASS and self.aperiodic == PASS and self.leo == PASS

    def to_json(self):
        return {
            "irreducible": self.irreducible,
            "aperiodic": self.aperiodic,
            "locally_eventually_onto": self.leo,
            "leo_witness": None if self.leo_witness is None else [str(self.leo_witness[0]), self.leo_witness[1]],
            "period": self.period,
            "depth": self.depth,
            "notes": self.notes,
        }


def _period(G: nx.DiGraph) -> int:
    root = next(iter(G.nodes))
    level = nx.single_source_shortest_path_length(G, root)
    g = 0
    for u, v in G.edges:
        g = math.gcd(g, level[u] + 1 - level[v])
    return g


def _class_reach(A: StructuredMatrix, templates: dict, depth: int):
    """Families whose deep vertices reach the truncation (down) and are all
    reached from it (up)."""
    down = set()
    changed = True
    while changed:
        changed = False
        for f in range(len(A.shapes)):
            if f in down:
                continue
            ok = True
            for s in A.template_subs(f):
                t = templates[(f, s)]
                hit = False
                for lap in t.laps:
                    if lap.finite:
                        hit = True
                    for r in lap.ranges:
                        if r.fam in down and r.fam != f:
                            hit = True
                        if r.fam == f and r.lo.q <= 1 and (r.lo.q == 0 or r.lo.c < 0):
                            hit = True
                        if r.fam != f and r.lo.q == 0:
                            hit = True
                if not hit:
                    ok = False
            if ok:
                down.add(f)
                changed = True
    up = set()
    for iid in A.ids(depth):
        for s in A.row(iid).support:
            if s.start <= depth + 1 and s.sub is None:
                up.add(s.fam)
    return down, up


def connectivity_report(A: StructuredMatrix, depth: int = 16, horizon: int = 64) -> ConnectivityReport:
    depth = A.capped_depth(depth)
    T = A.truncation(depth)
    G = nx.DiGraph()
    G.add_nodes_from(range(T.size))
    for i, row in enumerate(T.rows):
        for j, v in row.items():
            if v > 0:
                G.add_edge(i, j)
    has_fams = bool(A.shapes)
    strong = nx.is_strongly_connected(G)
    rep = ConnectivityReport(INCONCLUSIVE, INCONCLUSIVE, INCONCLUSIVE, depth=depth)
    templates = A.templates() if has_fams else {}
    if not has_fams:
        rep.irreducible = PASS if strong else FAIL
    elif strong and templates is not None:
        down, up = _class_reach(A, templates, depth)
        if len(down) == len(A.shapes) and len(up) == len(A.shapes):
            rep.irreducible = PASS
        else:
            rep.notes.append("deep family vertices not certified to communicate with the truncation")
    elif templates is None:
        rep.notes.append("no tail template for some family")
    if strong:
        rep.period = _period(G)
        if rep.period == 1:
            rep.aperiodic = PASS if rep.irreducible == PASS else INCONCLUSIVE
        elif not has_fams:
            rep.aperiodic = FAIL
    elif not has_fams:
        rep.aperiodic = FAIL
    if rep.irreducible == PASS:
        w = _leo_witness(A, T, templates or {}, depth, horizon)
        if w is not None:
            rep.leo = PASS
            rep.leo_witness = w
        elif not has_fams:
            rep.leo = FAIL
    elif rep.irreducible == FAIL:
        rep.leo = FAIL
    return rep


def _leo_witness(A, T, templates, depth, horizon):
    """Vertex r and n with A^n_{rJ} > 0 for every J (truncation plus all deep
    family vertices).  Since every vertex reaches r, this gives leo for all rows."""
    n_fams = len(A.shapes)
    everything = set(range(T.size))
    starts = [T.index[Finite(k)] for k in range(A.n_finite)] or [0]
    rows_support = [A.row(iid).support for iid in T.ids]
    for r in starts[:8]:
        cur = {r}
        deep = set()  # families all of whose vertices beyond depth are reached
        for n in range(1, horizon + 1):
            nxt = set()
            nxt_deep = set()
            for u in cur:
                nxt.update(j for j, v in T.rows[u].items() if v > 0)
                for s in rows_support[u]:
                    if s.sub is None and s.start <= depth + 1:
                        nxt_deep.add(s.fam)
            for f in deep:
                for s in A.template_subs(f):
                    t = templates.get((f, s))
                    if t is None:
                        continue
                    n1 = depth + 1
                    for mult, cov in t.coverage(n1, A.shapes):
                        nxt.update(T.index[Finite(k)] for k in cov.finite)
                        for rr in cov.ranges:
                            sh = A.shapes[rr.fam]
                            top = (depth, sh.count(depth) - 1)
                            hi = top if rr.hi is None or rr.hi > top else rr.hi
                            m, k = rr.lo
                            while (m, k) <= hi:
                                nxt.add(T.index[Tail(rr.fam, m, k)])
                                m, k = sh.next_index(m, k)
                    # vertices of class f map onto whole classes when their
                    # ranges run to the accumulation point
                    for lap in t.laps:
                        for rr in lap.ranges:
                            if rr.hi is None and rr.lo.q <= 1:
                                nxt_deep.add(rr.fam)
            cur, deep = nxt, nxt_deep
            if cur == everything and len(deep) == n_fams:
                return (T.ids[r], n)
    return None
