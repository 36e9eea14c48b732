"""Countable transition matrices with structured rows.

A_IJ counts the preimage components of J inside I.  Rows are produced from
the laps of the map on I: every lap (or group of identical laps) covers a set
of partition intervals, described exactly by a ``Coverage``.  Three kinds of
row occur:

* rows with finitely many laps: exact, the coverage gives every entry;
* rows of an interval containing infinitely many laps: entries per family
  column are fitted to alpha + beta*m on a window and verified on the next
  columns, otherwise the row is flagged truncation-only;
* tail rows Tail(F, n, k) for large n: a *template* describing the coverage
  as a function of n (range endpoints q*n + c) is fitted on consecutive n and
  verified further out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import BrokenPath, HitsAccumulation, IndexMismatch
from .intervalmap import LapRule, PwAffineMap
from .numbers import exact
from .partition import ON_PARTITION, Coverage, FamRange, Finite, MarkovPartition, Tail

# -- rows ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Pattern:
    """Entries alpha + beta*m for columns Tail(fam, m, sub), m >= start."""

    fam: int
    sub: int | None  # None: every sub-interval of cell m
    alpha: int
    beta: int
    start: int

    def at(self, m: int) -> int:
        return self.alpha + self.beta * m

    def covers(self, iid) -> bool:
        return isinstance(iid, Tail) and iid.fam == self.fam and iid.n >= self.start and (
            self.sub is None or self.sub == iid.sub
        )


@dataclass(frozen=True)
class Support:
    """Entries are positive on Tail(fam, m, sub) for every m >= start."""

    fam: int
    sub: int | None
    start: int


@dataclass
class StructuredRow:
    explicit: dict
    patterns: tuple = ()
    exact: bool = True
    support: tuple = ()  # Support records for infinite column ranges

    def entry(self, iid) -> int:
        v = self.explicit.get(iid, 0)
        for p in self.patterns:
            if p.covers(iid):
                v += p.at(iid.n)
        return v

    def families_hit(self) -> set:
        return {s.fam for s in self.support}


@dataclass(frozen=True)
class FamilyShape:
    n0: int
    rule: LapRule

    def count(self, n: int) -> int:
        return self.rule.count(n)

    def next_index(self, n, k):
        return (n, k + 1) if k + 1 < self.count(n) else (n + 1, 0)


def _iter_range(shape: FamilyShape, lo, hi):
    m, k = lo
    while (m, k) <= hi:
        yield m, k
        m, k = shape.next_index(m, k)


def row_from_coverage(laps, shapes) -> StructuredRow:
    """Structured row of an interval whose laps (mult, Coverage) are all listed."""
    explicit: dict = {}
    patterns = []
    support = []
    for mult, cov in laps:
        for k in cov.finite:
            explicit[Finite(k)] = explicit.get(Finite(k), 0) + mult
        for r in cov.ranges:
            shape = shapes[r.fam]
            if r.hi is not None:
                for m, k in _iter_range(shape, r.lo, r.hi):
                    key = Tail(r.fam, m, k)
                    explicit[key] = explicit.get(key, 0) + mult
                continue
            m, k = r.lo
            start = m
            if k > 0:
                for kk in range(k, shape.count(m)):
                    key = Tail(r.fam, m, kk)
                    explicit[key] = explicit.get(key, 0) + mult
                start = m + 1
            patterns.append(Pattern(r.fam, None, mult, 0, start))
            support.append(Support(r.fam, None, start))
    return StructuredRow(explicit, _merge_patterns(patterns), True, tuple(support))


def _merge_patterns(patterns):
    """Sum constant patterns on the same family into a staircase-free form when they share a start."""
    merged: dict = {}
    for p in patterns:
        key = (p.fam, p.sub, p.start)
        if key in merged:
            q = merged[key]
            merged[key] = Pattern(p.fam, p.sub, q.alpha + p.alpha, q.beta + p.beta, p.start)
        else:
            merged[key] = p
    return tuple(sorted(merged.values(), key=lambda p: (p.fam, -1 if p.sub is None else p.sub, p.start)))


# -- templates ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RangeEnd:
    """Column index (m, k) as a function of the row index n: m = q*n + c; k >= 0 is a
    sub-interval index, k < 0 counts from the end of cell m."""

    q: int
    c: int
    k: int

    def at(self, n: int, shape: FamilyShape):
        m = self.q * n + self.c
        return m, (self.k if self.k >= 0 else shape.count(m) + self.k)


@dataclass(frozen=True)
class TemplateRange:
    fam: int
    lo: RangeEnd
    hi: RangeEnd | None


@dataclass(frozen=True)
class TemplateLap:
    mult: int
    finite: frozenset
    ranges: tuple


@dataclass(frozen=True)
class Template:
    """Coverage of the rows Tail(fam, n, sub), n >= start, as a function of n.
    ``sub`` is None for families whose cells have a variable number of
    sub-intervals: all of them share the template."""

    fam: int
    sub: int | None
    start: int
    laps: tuple

    def coverage(self, n: int, shapes) -> list:
        out = []
        for lap in self.laps:
            ranges = []
            for r in lap.ranges:
                sh = shapes[r.fam]
                hi = None if r.hi is None else r.hi.at(n, sh)
                lo = r.lo.at(n, sh)
                if hi is not None and hi < lo:
                    continue
                ranges.append(FamRange(r.fam, lo, hi))
            out.append((lap.mult, Coverage(lap.finite, tuple(ranges))))
        return out

    def describe(self) -> str:
        parts = []
        for lap in self.laps:
            bits = [f"F{k}" for k in sorted(lap.finite)]
            for r in lap.ranges:
                lo = _fmt_end(r.lo)
                hi = "inf" if r.hi is None else _fmt_end(r.hi)
                bits.append(f"T{r.fam}[{lo}..{hi}]")
            parts.append(f"{lap.mult}x{{{', '.join(bits)}}}")
        sub = "*" if self.sub is None else self.sub
        return f"T{self.fam}.n.{sub} (n>={self.start}): " + " + ".join(parts)


def _fmt_end(e: RangeEnd) -> str:
    if e.q == 0:
        m = str(e.c)
    else:
        m = ("n" if e.q == 1 else f"{e.q}n") + (f"{e.c:+d}" if e.c else "")
    return m if e.k == 0 else f"{m}.{e.k}"


def _fit_end(points, ns, shape: FamilyShape):
    ms = [p[0] for p in points]
    q = ms[1] - ms[0]
    c = ms[0] - q * ns[0]
    if q < 0 or any(m != q * n + c for m, n in zip(ms, ns)):
        return None
    ks = [p[1] for p in points]
    if all(k == ks[0] for k in ks):
        return RangeEnd(q, c, ks[0])
    back = [k - shape.count(m) for m, k in points]
    if all(b == back[0] for b in back):
        return RangeEnd(q, c, back[0])
    return None


def fit_template(fam: int, sub, ns, covs, shapes) -> Template | None:
    """Fit a template to coverages observed at consecutive row indices ``ns``."""
    first = covs[0]
    if any(len(c) != len(first) for c in covs):
        return None
    laps = []
    for j in range(len(first)):
        mult, cov0 = first[j]
        if any(c[j][0] != mult or c[j][1].finite != cov0.finite for c in covs):
            return None
        fams = [r.fam for r in cov0.ranges]
        if any([r.fam for r in c[j][1].ranges] != fams for c in covs):
            return None
        ranges = []
        for i, f in enumerate(fams):
            rs = [c[j][1].ranges[i] for c in covs]
            lo = _fit_end([r.lo for r in rs], ns, shapes[f])
            if lo is None:
                return None
            if all(r.hi is None for r in rs):
                hi = None
            elif any(r.hi is None for r in rs):
                return None
            else:
                hi = _fit_end([r.hi for r in rs], ns, shapes[f])
                if hi is None:
                    return None
            ranges.append(TemplateRange(f, lo, hi))
        laps.append(TemplateLap(mult, cov0.finite, tuple(ranges)))
    return Template(fam, sub, ns[0], tuple(laps))


# -- matrices ----------------------------------------------------------------------------------


@dataclass
class Truncation:
    """Principal submatrix on the intervals of family index <= depth."""

    depth: int
    ids: list
    index: dict
    rows: list  # list of {column position: exact int}

    @property
    def size(self) -> int:
        return len(self.ids)

    def dense(self) -> np.ndarray:
        M = np.zeros((self.size, self.size))
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                M[i, j] = float(v)
        return M

    def max_entry(self) -> int:
        return max((v for row in self.rows for v in row.values()), default=0)

    def exact_power_entry(self, i: int, n: int) -> list:
        """(A^k)_{ii} for k = 0..n, exact integers."""
        out = [1]
        vec = {i: 1}
        for _ in range(n):
            nxt: dict = {}
            for u, a in vec.items():
                for w, b in self.rows[u].items():
                    nxt[w] = nxt.get(w, 0) + a * b
            vec = nxt
            out.append(vec.get(i, 0))
        return out

    def successors(self, i: int):
        return self.rows[i].keys()


class StructuredMatrix:
    """Common interface of transition matrices with family structure."""

    n_finite: int
    shapes: tuple

    def row(self, iid) -> StructuredRow:
        raise NotImplementedError

    def template(self, fam: int, sub) -> Template | None:
        raise NotImplementedError

    def ids(self, depth: int) -> list:
        out = [Finite(k) for k in range(self.n_finite)]
        for f, sh in enumerate(self.shapes):
            for n in range(sh.n0, depth + 1):
                out.extend(Tail(f, n, k) for k in range(sh.count(n)))
        return out

    def template_subs(self, fam: int) -> list:
        sh = self.shapes[fam]
        return list(range(sh.count(sh.n0))) if sh.rule.constant else [None]

    def templates(self) -> dict | None:
        """All tail templates, or None if some family has none."""
        out = {}
        for f in range(len(self.shapes)):
            for s in self.template_subs(f):
                t = self.template(f, s)
                if t is None:
                    return None
                out[(f, s)] = t
        return out

    def template_for(self, iid: Tail):
        sh = self.shapes[iid.fam]
        return self.template(iid.fam, iid.sub if sh.rule.constant else None)

    def interval_count(self, depth: int) -> int:
        return self.n_finite + sum(
            sum(sh.count(n) for n in range(sh.n0, depth + 1)) for sh in self.shapes
        )

    def capped_depth(self, depth: int, cap: int = 6000) -> int:
        d = depth
        while d > 1 and self.interval_count(d) > cap:
            d -= 1
        return d

    def truncated_row(self, iid, depth: int) -> dict:
        """Entries of the row on columns of index <= depth, as {IntervalId: int}."""
        row = self.row(iid)
        out = {k: v for k, v in row.explicit.items() if not isinstance(k, Tail) or k.n <= depth}
        for p in row.patterns:
            sh = self.shapes[p.fam]
            for m in range(max(p.start, sh.n0), depth + 1):
                subs = range(sh.count(m)) if p.sub is None else (p.sub,)
                val = p.at(m)
                for k in subs:
                    key = Tail(p.fam, m, k)
                    out[key] = out.get(key, 0) + val
        return {k: v for k, v in out.items() if v}

    def truncation(self, depth: int) -> Truncation:
        ids = self.ids(depth)
        index = {iid: i for i, iid in enumerate(ids)}
        rows = []
        for iid in ids:
            r = self.truncated_row(iid, depth)
            rows.append({index[k]: v for k, v in r.items() if k in index})
        return Truncation(depth, ids, index, rows)

    def entry(self, I, J) -> int:
        row = self.row(I)
        if row.exact:
            return row.entry(J)
        depth = J.n if isinstance(J, Tail) else 0
        return self.truncated_row(I, depth).get(J, 0)


class TransitionMatrix(StructuredMatrix):
    """A(f, P) built lazily from the laps of the map."""

    def __init__(self, cmap: PwAffineMap, P: MarkovPartition):
        self.map = cmap
        self.partition = P
        self.n_finite = P.n_finite
        self.shapes = tuple(FamilyShape(f.n0, f.rule) for f in P.families)
        self._rows: dict = {}
        self._templates: dict = {}
        self.mismatches: list = []  # rows that only exist in truncation mode

    def __repr__(self):
        return f"TransitionMatrix({self.map!r}, {self.partition!r})"

    def ids(self, depth: int) -> list:
        return [iid for iid, _, _ in self.partition.enumerate_intervals(depth)]

    # -- laps of a partition interval ---------------------------------------------------
    def lap_coverage(self, iid, min_height=None) -> list:
        lo, hi = self.partition.interval_bounds(iid)
        out = []
        for lap in self.map.iter_laps(lo, hi, min_height):
            out.append((lap.mult, self.partition.coverage(lap.lo, lap.hi)))
        return out

    def _finite_laps(self, iid):
        try:
            return self.lap_coverage(iid)
        except ValueError as e:
            if "infinite family" in str(e):
                return None
            raise

    # -- rows ---------------------------------------------------------------------------------
    def row(self, iid) -> StructuredRow:
        if iid in self._rows:
            return self._rows[iid]
        if isinstance(iid, Tail):
            t = self.template_for(iid)
            if t is not None and iid.n >= t.start:
                return row_from_coverage(t.coverage(iid.n, self.shapes), self.shapes)
        laps = self._finite_laps(iid)
        row = row_from_coverage(laps, self.shapes) if laps is not None else self._infinite_row(iid)
        self._rows[iid] = row
        return row

    def _min_width(self, fam, m):
        f = self.partition.families[fam]
        w = abs(f.x(m + 1) - f.x(m))
        return w / f.count(m)

    def _infinite_row(self, iid) -> StructuredRow:
        P = self.partition
        fin_w = min((b - a for a, b in P.finite_intervals), default=None)
        for extra in (2, 8, 20):
            starts = [sh.n0 + extra for sh in self.shapes]
            tops = [s + 5 for s in starts]
            widths = [self._min_width(f, tops[f]) for f in range(len(self.shapes))]
            if fin_w is not None:
                widths.append(fin_w)
            laps = self.lap_coverage(iid, min(widths))
            dense = {}
            for mult, cov in laps:
                for k in cov.finite:
                    dense[Finite(k)] = dense.get(Finite(k), 0) + mult
                for r in cov.ranges:
                    sh = self.shapes[r.fam]
                    top = (tops[r.fam], sh.count(tops[r.fam]) - 1)
                    hi = top if r.hi is None or r.hi > top else r.hi
                    for m, k in _iter_range(sh, r.lo, hi):
                        key = Tail(r.fam, m, k)
                        dense[key] = dense.get(key, 0) + mult
            explicit = {k: v for k, v in dense.items() if isinstance(k, Finite)}
            patterns = []
            ok = True
            for f, sh in enumerate(self.shapes):
                s = starts[f]
                for m in range(sh.n0, s):
                    for k in range(sh.count(m)):
                        v = dense.get(Tail(f, m, k), 0)
                        if v:
                            explicit[Tail(f, m, k)] = v
                subs = range(sh.count(s)) if sh.rule.constant else [None]
                for sub in subs:
                    def val(m):
                        if sub is not None:
                            return dense.get(Tail(f, m, sub), 0)
                        vs = {dense.get(Tail(f, m, k), 0) for k in range(sh.count(m))}
                        return vs.pop() if len(vs) == 1 else None
                    seq = [val(m) for m in range(s, s + 6)]
                    if None in seq:
                        ok = False
                        break
                    beta = seq[1] - seq[0]
                    alpha = seq[0] - beta * s
                    if any(v != alpha + beta * (s + i) for i, v in enumerate(seq)) or beta < 0:
                        ok = False
                        break
                    if alpha or beta:
                        patterns.append(Pattern(f, sub, alpha, beta, s))
                if not ok:
                    break
            if ok:
                support = tuple(Support(p.fam, p.sub, p.start) for p in patterns)
                return StructuredRow(explicit, tuple(patterns), True, support)
        # truncation-only: keep the support of the lap coverages
        self.mismatches.append(iid)
        support = []
        for mult, cov in laps:
            for r in cov.ranges:
                if r.hi is None:
                    support.append(Support(r.fam, None, r.lo[0] + (1 if r.lo[1] else 0)))
        return StructuredRow({}, (), False, tuple(support))

    def truncated_row(self, iid, depth: int) -> dict:
        row = self.row(iid)
        if row.exact:
            return super().truncated_row(iid, depth)
        widths = [self._min_width(f, depth) for f in range(len(self.shapes))]
        widths += [b - a for a, b in self.partition.finite_intervals]
        out: dict = {}
        # constant-count families accumulate ranges in a difference array
        diffs = {f: [0] * ((depth - sh.n0 + 1) * sh.count(sh.n0) + 1)
                 for f, sh in enumerate(self.shapes) if sh.rule.constant and depth >= sh.n0}
        for mult, cov in self.lap_coverage(iid, min(widths)):
            for k in cov.finite:
                out[Finite(k)] = out.get(Finite(k), 0) + mult
            for r in cov.ranges:
                sh = self.shapes[r.fam]
                top = (depth, sh.count(depth) - 1)
                hi = top if r.hi is None or r.hi > top else r.hi
                if r.lo > hi:
                    continue
                if r.fam in diffs:
                    S = sh.count(sh.n0)
                    d = diffs[r.fam]
                    d[(r.lo[0] - sh.n0) * S + r.lo[1]] += mult
                    d[(hi[0] - sh.n0) * S + hi[1] + 1] -= mult
                    continue
                for m, k in _iter_range(sh, r.lo, hi):
                    key = Tail(r.fam, m, k)
                    out[key] = out.get(key, 0) + mult
        for f, d in diffs.items():
            sh = self.shapes[f]
            S = sh.count(sh.n0)
            acc = 0
            for pos, v in enumerate(d[:-1]):
                acc += v
                if acc:
                    out[Tail(f, sh.n0 + pos // S, pos % S)] = acc
        return out

    # -- templates ------------------------------------------------------------------------------
    def _tail_coverage(self, fam: int, n: int, sub):
        sh = self.shapes[fam]
        if sub is not None:
            return self._finite_laps(Tail(fam, n, sub))
        S = sh.count(n)
        covs = [self._finite_laps(Tail(fam, n, k)) for k in sorted({0, min(1, S - 1), min(2, S - 1), S - 1})]
        if any(c is None or c != covs[0] for c in covs):
            return None
        return covs[0]

    def template(self, fam: int, sub) -> Template | None:
        key = (fam, sub)
        if key in self._templates:
            return self._templates[key]
        sh = self.shapes[fam]
        result = None
        for offset in (1, 4, 10, 20):
            start = sh.n0 + offset
            ns = list(range(start, start + 5))
            covs = [self._tail_coverage(fam, n, sub) for n in ns]
            if any(c is None for c in covs):
                continue
            t = fit_template(fam, sub, ns, covs, self.shapes)
            if t is None:
                continue
            probe = start + 12
            if self._tail_coverage(fam, probe, sub) != t.coverage(probe, self.shapes):
                continue
            result = t
            break
        self._templates[key] = result
        return result

    # -- oracle ------------------------------------------------------------------------------------
    def entry_by_preimages(self, I, J) -> int:
        """Independent count of the components of I ∩ f^-1(J) via lap inversion."""
        a, b = self.partition.interval_bounds(I)
        c, d = self.partition.interval_bounds(J)
        return sum(1 for lo, hi in self.map.preimage_components(c, d) if a <= lo and hi <= b)


class SyntheticMatrix(StructuredMatrix):
    """A structured matrix given directly by rows and templates (no map)."""

    def __init__(self, n_finite: int, shapes, rows: dict, templates: dict):
        self.n_finite = n_finite
        self.shapes = tuple(shapes)
        self._rows = dict(rows)
        self._templates = dict(templates)

    def row(self, iid) -> StructuredRow:
        if iid in self._rows:
            return self._rows[iid]
        if isinstance(iid, Tail):
            t = self.template_for(iid)
            if t is not None and iid.n >= t.start:
                return row_from_coverage(t.coverage(iid.n, self.shapes), self.shapes)
        raise KeyError(f"no row for {iid}")

    def template(self, fam: int, sub) -> Template | None:
        return self._templates.get((fam, sub))


def finite_matrix(rows) -> SyntheticMatrix:
    """A finite nonnegative integer matrix as a structured matrix."""
    rows = [list(r) for r in rows]
    data = {}
    for i, r in enumerate(rows):
        data[Finite(i)] = StructuredRow({Finite(j): v for j, v in enumerate(r) if v})
    return SyntheticMatrix(len(rows), (), data, {})


def build_transition_matrix(cmap: PwAffineMap, P: MarkovPartition) -> TransitionMatrix:
    return TransitionMatrix(cmap, P)


# -- zero patterns --------------------------------------------------------------------------------


def zero_pattern_equal(A: StructuredMatrix, B: StructuredMatrix, depth: int = 16):
    """(equal, witness): compares supports on the depth truncation, the
    infinite column supports of every row there, and the zero pattern of the
    tail templates."""
    if A.n_finite != B.n_finite or A.shapes != B.shapes:
        raise IndexMismatch("matrices are indexed by different partitions")
    depth = min(A.capped_depth(depth), B.capped_depth(depth))
    for iid in A.ids(depth):
        ra, rb = A.truncated_row(iid, depth), B.truncated_row(iid, depth)
        sa = {k for k, v in ra.items() if v}
        sb = {k for k, v in rb.items() if v}
        if sa != sb:
            diff = sorted(sa ^ sb, key=str)[0]
            return False, f"row {iid}: column {diff} is zero in one matrix only"
        fa = {(s.fam, s.sub) for s in A.row(iid).support}
        fb = {(s.fam, s.sub) for s in B.row(iid).support}
        if fa != fb:
            return False, f"row {iid}: infinite column supports differ"
    for f in range(len(A.shapes)):
        for s in A.template_subs(f):
            ta, tb = A.template(f, s), B.template(f, s)
            if (ta is None) != (tb is None):
                return False, f"family {f}: template exists for one matrix only"
            if ta is not None and not _same_template_support(ta, tb, A.shapes, depth):
                return False, f"family {f} sub {s}: template supports differ"
    return True, None


def _same_template_support(ta: Template, tb: Template, shapes, depth) -> bool:
    n = max(ta.start, tb.start, depth + 1)
    for m in (n, n + 1, n + 7):
        ca = row_from_coverage(ta.coverage(m, shapes), shapes)
        cb = row_from_coverage(tb.coverage(m, shapes), shapes)
        if set(ca.explicit) != set(cb.explicit):
            return False
        if {(p.fam, p.sub, p.start) for p in ca.patterns} != {(p.fam, p.sub, p.start) for p in cb.patterns}:
            return False
    return True


# -- itineraries ------------------------------------------------------------------------------------


def adjacent_interval(P: MarkovPartition, x, direction: int):
    """The partition interval having the partition point x as its left end
    (direction > 0) or right end (direction < 0)."""
    pid = P.point_id(x)
    if pid is None:
        raise ValueError(f"{x} is not a partition point")
    if pid[0] == "s":
        i = pid[1]
        if direction > 0:
            if i + 1 >= len(P.skeleton):
                return None
            kind, idx, a, b = P.regions[i]
        else:
            if i == 0:
                return None
            kind, idx, a, b = P.regions[i - 1]
        if kind == "fin":
            return Finite(idx)
        fam = P.families[idx]
        if x == fam.anchor:
            return None
        return Tail(idx, fam.n0, 0)
    _, fi, m, k = pid
    fam = P.families[fi]
    toward_anchor = (direction > 0) == (fam.side < 0)
    if toward_anchor:
        return Tail(fi, m, k)
    if (m, k) == (fam.n0, 0):
        return adjacent_interval_beyond(P, fam, direction)
    pm, pk = fam.prev_index(m, k)
    return Tail(fi, pm, pk)


def adjacent_interval_beyond(P, fam, direction):
    i = P._skel_index[fam.outer]
    kind, idx, a, b = P.regions[i] if direction > 0 else P.regions[i - 1]
    return Finite(idx) if kind == "fin" else Tail(idx, P.families[idx].n0, 0)


def itinerary(cmap: PwAffineMap, P: MarkovPartition, x, horizon: int) -> list:
    """Intervals I_0 -> ... -> I_horizon with f^n(x) in the closure of I_n.

    At a partition point the side is chosen so that the previous interval's
    image meets the chosen interval (the first step prefers the right side)."""
    x = exact(x)
    acc = set(P.accumulation)
    path = []
    y = x
    prev = None
    for n in range(horizon + 1):
        if y in acc:
            raise HitsAccumulation(f"f^{n}(x) = {y} is an accumulation point of the partition", witness=(n, y))
        loc = P.locate_interval(y)
        if loc is ON_PARTITION:
            right, left = adjacent_interval(P, y, +1), adjacent_interval(P, y, -1)
            cands = [c for c in (right, left) if c is not None]
            if prev is not None:
                lo, hi = cmap.image_of_interval(*P.interval_bounds(prev))
                preferred = right if hi > y else left
                if preferred is None or not _meets(P, preferred, lo, hi):
                    preferred = next(c for c in cands if _meets(P, c, lo, hi))
                loc = preferred
            else:
                loc = cands[0]
        path.append(loc)
        prev = loc
        y = cmap.evaluate(y)
    return path


def _meets(P, iid, lo, hi) -> bool:
    a, b = P.interval_bounds(iid)
    return max(a, lo) < min(b, hi)


def realize_path(cmap: PwAffineMap, P: MarkovPartition, path: list, A: StructuredMatrix | None = None):
    """A point y with f^n(y) in the closure of path[n] for every n (pullback of closures)."""
    A = A or TransitionMatrix(cmap, P)
    for I, J in zip(path, path[1:]):
        if A.entry(I, J) <= 0:
            raise BrokenPath(f"no arrow {I} -> {J}", witness=(I, J))
    u, w = P.interval_bounds(path[-1])
    for iid in reversed(path[:-1]):
        a, b = P.interval_bounds(iid)
        found = None
        for group in cmap.iter_laps(a, b, min_height=w - u):
            if group.lo <= u and w <= group.hi:
                for lap in group.split():
                    if lap.lo <= u and w <= lap.hi:
                        s, t = lap.inverse(u), lap.inverse(w)
                        found = (min(s, t), max(s, t))
                        break
            if found:
                break
        if found is None:
            raise BrokenPath(f"image of {iid} does not cover the pulled-back set")
        u, w = found
    y = (u + w) / 2
    z = y
    for n, iid in enumerate(path):
        a, b = P.interval_bounds(iid)
        if not (a <= z <= b):
            raise BrokenPath(f"realized orbit leaves {iid} at step {n}")
        z = cmap.evaluate(z)
    return y


# -- exports ------------------------------------------------------------------------------------------


def to_dot(T: Truncation, rome: Iterable = (), name: str = "transition_graph") -> str:
    rome = set(rome)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for iid in T.ids:
        style = ' style=filled fillcolor="#f4c542"' if iid in rome else ""
        lines.append(f'  "{iid}" [shape=box{style}];')
    for i, row in enumerate(T.rows):
        for j, v in sorted(row.items()):
            label = f' [label="{v}"]' if v != 1 else ""
            lines.append(f'  "{T.ids[i]}" -> "{T.ids[j]}"{label};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_csv(T: Truncation) -> str:
    header = "row," + ",".join(str(i) for i in T.ids)
    lines = [header]
    for i, row in enumerate(T.rows):
        lines.append(str(T.ids[i]) + "," + ",".join(str(row.get(j, 0)) for j in range(T.size)))
    return "\n".join(lines) + "\n"
