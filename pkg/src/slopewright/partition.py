"""Taut and slack Markov partitions: countable closed invariant point sets.

A partition is a finite set of points plus geometric point families
x_{n,k} (n >= n0, 0 <= k < S(n)): the cell between x_n and x_{n+1} of a family
may be subdivided into S(n) equal sub-intervals.  Every family accumulates at
one of the listed accumulation points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .errors import InvalidPartition, NotTransverse, UnrepresentableCriticalStructure
from .intervalmap import LapRule, PwAffineMap, _rpow, geometric_index
from .numbers import Exact, exact, floor_exact, log_abs, sign

ONE_SUB = LapRule("const", 1, 0)


# -- interval identifiers --------------------------------------------------------


@dataclass(frozen=True, order=True)
class Finite:
    k: int

    def __str__(self):
        return f"F{self.k}"


@dataclass(frozen=True, order=True)
class Tail:
    fam: int
    n: int
    sub: int = 0

    def __str__(self):
        return f"T{self.fam}.{self.n}" if self.sub == 0 else f"T{self.fam}.{self.n}.{self.sub}"


IntervalId = Union[Finite, Tail]


class _OnPartition:
    def __repr__(self):
        return "OnPartition"

    __str__ = __repr__


ON_PARTITION = _OnPartition()


def parse_interval_id(text: str) -> IntervalId:
    text = text.strip()
    if text.startswith("F"):
        return Finite(int(text[1:]))
    if text.startswith("T"):
        parts = [int(p) for p in text[1:].split(".")]
        if len(parts) == 2:
            return Tail(parts[0], parts[1])
        if len(parts) == 3:
            return Tail(parts[0], parts[1], parts[2])
    raise ValueError(f"bad interval id {text!r}")


# -- families ---------------------------------------------------------------------


@dataclass(frozen=True)
class PointFamily:
    anchor: Exact
    coeff: Exact
    ratio: Exact
    n0: int
    subdivisions: LapRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "anchor", exact(self.anchor))
        object.__setattr__(self, "coeff", exact(self.coeff))
        object.__setattr__(self, "ratio", exact(self.ratio))

    @property
    def rule(self) -> LapRule:
        return self.subdivisions if self.subdivisions is not None else ONE_SUB

    def count(self, n: int) -> int:
        return self.rule.count(n)

    def x(self, n: int):
        return self.anchor + self.coeff * _rpow(self.ratio, n)

    def sub_x(self, n: int, k: int):
        S = self.count(n)
        xn = self.x(n)
        return xn + (self.x(n + 1) - xn) * Fraction(k, S)

    @property
    def outer(self):
        return self.x(self.n0)

    @property
    def side(self) -> int:
        return sign(self.coeff)

    def span(self):
        return tuple(sorted((self.anchor, self.outer)))

    def locate(self, x):
        """(n, s): x = x_n + s (x_{n+1} - x_n), 0 <= s < 1."""
        n, on = geometric_index(self.anchor, self.coeff, self.ratio, self.n0, x)
        if on:
            return n, Fraction(0)
        xn = self.x(n)
        return n, (x - xn) / (self.x(n + 1) - xn)

    def point_index(self, x):
        """(n, k) if x is a family point, else None (x must lie in the span)."""
        n, s = self.locate(x)
        S = self.count(n)
        t = s * S
        if isinstance(t, Fraction) and t.denominator == 1:
            return n, int(t)
        return None

    def next_index(self, n: int, k: int):
        return (n, k + 1) if k + 1 < self.count(n) else (n + 1, 0)

    def prev_index(self, n: int, k: int):
        return (n, k - 1) if k > 0 else (n - 1, self.count(n - 1) - 1)


# -- coverage of an image interval ---------------------------------------------------


@dataclass(frozen=True)
class FamRange:
    fam: int
    lo: tuple  # (m, k)
    hi: tuple | None  # inclusive (m, k); None: up to the accumulation point


@dataclass(frozen=True)
class Coverage:
    """Partition intervals contained in an image interval."""

    finite: frozenset
    ranges: tuple  # FamRange


# -- validation report -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    witness: str | None = None

    def to_json(self):
        return {"check": self.name, "ok": self.ok, "witness": self.witness}


@dataclass
class ValidationReport:
    kind: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name, ok, witness=None):
        self.checks.append(Check(name, bool(ok), None if ok else (str(witness) if witness is not None else None)))

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def to_json(self):
        return {"kind": self.kind, "ok": self.ok, "checks": [c.to_json() for c in self.checks]}


# -- the partition -------------------------------------------------------------------------


class MarkovPartition:
    def __init__(self, points, families=(), accumulation=(), kind: str = "taut"):
        self.points = tuple(exact(p) for p in points)
        self.families = tuple(families)
        self.accumulation = tuple(exact(a) for a in accumulation)
        if kind not in ("taut", "slack"):
            raise InvalidPartition(f"kind must be taut or slack, got {kind!r}")
        self.kind = kind
        self._build()

    def _build(self):
        for i, fam in enumerate(self.families):
            if fam.coeff == 0 or not (0 < fam.ratio < 1):
                raise InvalidPartition(f"family {i}: need coeff != 0 and 0 < ratio < 1")
            if fam.anchor not in self.accumulation:
                raise InvalidPartition(f"family {i}: anchor {fam.anchor} missing from accumulation points", witness=fam.anchor)
        skel = sorted(set(self.points) | set(self.accumulation) | {f.outer for f in self.families})
        if not skel or skel[0] != 0 or skel[-1] != 1:
            raise InvalidPartition("partition must contain 0 and 1")
        spans = {f.span(): i for i, f in enumerate(self.families)}
        if len(spans) != len(self.families):
            raise InvalidPartition("two families share a span")
        regions = []
        finite = []
        for a, b in zip(skel, skel[1:]):
            fi = spans.pop((a, b), None)
            if fi is None:
                regions.append(("fin", len(finite), a, b))
                finite.append((a, b))
            else:
                regions.append(("fam", fi, a, b))
        if spans:
            raise InvalidPartition("a family span contains other partition points")
        self.skeleton = tuple(skel)
        self._skel_index = {x: i for i, x in enumerate(skel)}
        self.regions = tuple(regions)
        self.finite_intervals = tuple(finite)

    # -- identity ------------------------------------------------------------------------
    def __eq__(self, other):
        return (
            isinstance(other, MarkovPartition)
            and set(self.points) == set(other.points)
            and self.families == other.families
            and set(self.accumulation) == set(other.accumulation)
            and self.kind == other.kind
        )

    def __hash__(self):
        return hash((frozenset(self.points), self.families, frozenset(self.accumulation), self.kind))

    def same_set(self, other: "MarkovPartition") -> bool:
        return self.skeleton == other.skeleton and self.families == other.families

    def __repr__(self):
        return f"MarkovPartition({len(self.skeleton)} points, {len(self.families)} families, {self.kind})"

    @property
    def n_finite(self) -> int:
        return len(self.finite_intervals)

    # -- geometry ---------------------------------------------------------------------------
    def _region_of(self, x):
        lo, hi = 0, len(self.regions) - 1
        while lo < hi:
            m = (lo + hi + 1) // 2
            if self.regions[m][2] <= x:
                lo = m
            else:
                hi = m - 1
        return self.regions[lo]

    def interval_bounds(self, iid: IntervalId) -> tuple:
        if isinstance(iid, Finite):
            return self.finite_intervals[iid.k]
        fam = self.families[iid.fam]
        if iid.n < fam.n0 or not (0 <= iid.sub < fam.count(iid.n)):
            raise KeyError(f"no interval {iid}")
        a, b = fam.sub_x(iid.n, iid.sub), fam.sub_x(iid.n, iid.sub + 1)
        return (a, b) if a < b else (b, a)

    def width(self, iid: IntervalId):
        a, b = self.interval_bounds(iid)
        return b - a

    def contains(self, x) -> bool:
        return self.point_id(x) is not None

    def point_id(self, x):
        """('s', i) for a skeleton point, ('f', fam, n, k) for a family point, else None."""
        x = exact(x)
        if x in self._skel_index:
            return ("s", self._skel_index[x])
        if not (0 <= x <= 1):
            return None
        kind, idx, a, b = self._region_of(x)
        if kind == "fin":
            return None
        pi = self.families[idx].point_index(x)
        return None if pi is None else ("f", idx, pi[0], pi[1])

    def locate_interval(self, x):
        x = exact(x)
        if self.contains(x):
            return ON_PARTITION
        kind, idx, a, b = self._region_of(x)
        if kind == "fin":
            return Finite(idx)
        fam = self.families[idx]
        n, s = fam.locate(x)
        k = floor_exact(s * fam.count(n))
        return Tail(idx, n, k)

    def enumerate_intervals(self, depth: int) -> list:
        out = []
        for kind, idx, a, b in self.regions:
            if kind == "fin":
                out.append((Finite(idx), a, b))
                continue
            fam = self.families[idx]
            cells = []
            for n in range(fam.n0, depth + 1):
                for k in range(fam.count(n)):
                    lo, hi = self.interval_bounds(Tail(idx, n, k))
                    cells.append((Tail(idx, n, k), lo, hi))
            cells.sort(key=lambda c: c[1])
            out.extend(cells)
        return out

    def interval_count(self, depth: int) -> int:
        total = self.n_finite
        for fam in self.families:
            total += sum(fam.count(n) for n in range(fam.n0, depth + 1))
        return total

    def position_key(self, iid: IntervalId):
        return self.interval_bounds(iid)[0]

    # -- coverage ------------------------------------------------------------------------------
    def coverage(self, y_lo, y_hi, strict: bool = True) -> Coverage:
        """Partition intervals inside [y_lo, y_hi].

        With ``strict`` an interval that meets the image without being
        contained in it raises NotTransverse (a Markov-property failure).
        """
        fin = set()
        for k, (a, b) in enumerate(self.finite_intervals):
            if y_lo <= a and b <= y_hi:
                fin.add(k)
            elif strict and max(a, y_lo) < min(b, y_hi):
                raise NotTransverse(f"image [{y_lo},{y_hi}] cuts interval F{k}=({a},{b})", witness=(y_lo, y_hi))
        ranges = []
        for fi, fam in enumerate(self.families):
            slo, shi = fam.span()
            a, b = max(slo, y_lo), min(shi, y_hi)
            if a >= b:
                continue
            far, near = (b, a) if fam.side > 0 else (a, b)
            if far == fam.outer:
                first = (fam.n0, 0)
            else:
                first = fam.point_index(far)
                if first is None:
                    if strict:
                        raise NotTransverse(f"image endpoint {far} is not a partition point", witness=far)
                    n, s = fam.locate(far)
                    first = fam.next_index(n, floor_exact(s * fam.count(n)))
            if near == fam.anchor:
                last = None
            else:
                pi = fam.point_index(near)
                if pi is None:
                    if strict:
                        raise NotTransverse(f"image endpoint {near} is not a partition point", witness=near)
                    n, s = fam.locate(near)
                    pi = (n, floor_exact(s * fam.count(n)))
                if pi == (fam.n0, 0):
                    continue
                last = fam.prev_index(*pi)
                if last < first:
                    continue
            ranges.append(FamRange(fi, first, last))
        return Coverage(frozenset(fin), tuple(ranges))

    # -- validation -----------------------------------------------------------------------------
    def validate(self, cmap: PwAffineMap, markov_depth: int = 8) -> ValidationReport:
        rep = ValidationReport(self.kind)
        # closedness: families accumulate only at listed points; listed points are limits
        anchors = {f.anchor for f in self.families}
        stray = [a for a in self.accumulation if a not in anchors]
        rep.add("closed", not stray, stray[0] if stray else None)
        rep.add("accumulation-finite", True)
        # invariance
        bad = None
        for x in self.skeleton:
            y = cmap.evaluate(x)
            if not self.contains(y):
                bad = f"f({x}) = {y} not in P"
                break
        if bad is None:
            for fi, fam in enumerate(self.families):
                for k in self._sub_classes(fam):
                    ok, w = self.sequence_in_partition(lambda n, fam=fam, k=k: cmap.evaluate(fam.sub_x(n, k if k >= 0 else fam.count(n) + k)), fam.n0)
                    if not ok:
                        bad = f"images of family {fi} points (sub {k}): {w}"
                        break
                if bad:
                    break
        rep.add("invariant", bad is None, bad)
        # kind-specific containment
        crit = cmap.critical_points()
        if self.kind == "taut":
            miss = self._crit_missing(cmap, crit)
            rep.add("contains-critical", miss is None, miss)
        else:
            miss = self._crit_values_missing(cmap, crit)
            rep.add("contains-critical-values", miss is None, miss)
        # Acc P invariant
        acc_bad = [a for a in self.accumulation if cmap.evaluate(a) not in self.accumulation]
        rep.add("accumulation-invariant", not acc_bad, f"f({acc_bad[0]}) = {cmap.evaluate(acc_bad[0])}" if acc_bad else None)
        # Markov property on intervals up to a depth
        mk = None
        try:
            for iid, a, b in self.enumerate_intervals_capped(markov_depth):
                lo, hi = cmap.image_of_interval(a, b)
                if not (self.contains(lo) and self.contains(hi)):
                    mk = f"image of {iid} = [{lo},{hi}] has an endpoint outside P"
                    break
        except NotTransverse as e:
            mk = str(e)
        rep.add("markov", mk is None, mk)
        return rep

    def enumerate_intervals_capped(self, depth: int, cap: int = 4000) -> list:
        d = depth
        while d > 0 and self.interval_count(d) > cap:
            d -= 1
        return self.enumerate_intervals(d)

    @staticmethod
    def _sub_classes(fam) -> list:
        if fam.rule.constant:
            return list(range(fam.count(fam.n0)))
        return [0, 1, 2, -1]

    def _crit_missing(self, cmap, crit):
        for c in crit.points:
            if not self.contains(c):
                return f"critical point {c} not in P"
        for cf in crit.families:
            fam = cmap.tails[cf.tail]
            if self._has_family_like(fam.anchor, fam.coeff, fam.ratio, fam.rule, fam.n0):
                continue
            if cf.boundaries:
                ok, w = self.sequence_in_partition(fam.x, fam.n0 + 1)
                if not ok:
                    return f"critical family {cf.tail} boundaries: {w}"
            if cf.interior:
                ks = range(1, fam.count(fam.n0)) if fam.rule.constant else [1, 2, -1]
                for k in ks:
                    ok, w = self.sequence_in_partition(
                        lambda n, k=k: fam.sub_x(n, k if k > 0 else fam.lap_count(n) + k), fam.n0
                    )
                    if not ok:
                        return f"critical family {cf.tail} junctions: {w}"
        return None

    def _has_family_like(self, anchor, coeff, ratio, rule, n0) -> bool:
        for fam in self.families:
            if fam.anchor == anchor and fam.coeff == coeff and fam.ratio == ratio and fam.rule == rule and fam.n0 <= n0:
                return True
        return False

    def _crit_values_missing(self, cmap, crit):
        for c in crit.points:
            y = cmap.evaluate(c)
            if not self.contains(y):
                return f"f({c}) = {y} not in P"
        for cf in crit.families:
            fam = cmap.tails[cf.tail]
            seqs = []
            if cf.boundaries:
                seqs.append(("yA", fam.yA.at, fam.n0 + 1))
            if cf.interior:
                seqs.append(("yB", fam.yB.at, fam.n0))
                if fam.rule.count(fam.n0) >= 3 or not fam.rule.constant:
                    seqs.append(("yA", fam.yA.at, fam.n0))
            for name, fn, start in seqs:
                ok, w = self.sequence_in_partition(fn, start)
                if not ok:
                    return f"critical values {name} of family {cf.tail}: {w}"
        return None

    def sequence_in_partition(self, fn, n_from: int, window: int = 8):
        """Decide whether {fn(n): n >= n_from} lies in P, for sequences that are
        eventually geometric.  The geometric law is fitted on a window and
        verified; membership of the tail is then decided by matching the law
        against a partition family exactly."""
        for start in (n_from, n_from + 6, n_from + 20):
            vals = [fn(n) for n in range(start, start + window)]
            law = _fit_geometric(vals)
            if law is None:
                continue
            for n in range(n_from, start):
                y = fn(n)
                if not self.contains(y):
                    return False, f"value {y} at n={n} not in P"
            a, c, rho = law
            if c == 0:
                return (True, None) if self.contains(a) else (False, f"value {a} not in P")
            ok = self._geometric_in_families(a, c, rho, vals)
            return (True, None) if ok else (False, f"sequence {vals[0]}, {vals[1]}, ... not in P")
        # not eventually geometric on the probed windows: check pointwise on a window only
        for n in range(n_from, n_from + 40):
            y = fn(n)
            if not self.contains(y):
                return False, f"value {y} at n={n} not in P"
        return False, "sequence is not geometric; membership not decidable"

    def _geometric_in_families(self, a, c, rho, vals) -> bool:
        if a not in self.accumulation:
            return False
        for fi, fam in enumerate(self.families):
            if fam.anchor != a or sign(fam.coeff) != sign(c):
                continue
            lo, hi = fam.span()
            inside = [j for j, v in enumerate(vals) if lo < v <= hi]
            if len(inside) < 2 or inside[0] + 1 != inside[1]:
                continue
            j0 = inside[0]
            if any(not self.contains(v) for v in vals[:j0]):
                continue
            p0, p1 = fam.point_index(vals[j0]), fam.point_index(vals[j0 + 1])
            if p0 is None or p1 is None:
                continue
            (m0, k0), (m1, k1) = p0, p1
            q = m1 - m0
            if q < 1 or k0 != k1 or (k0 != 0 and not fam.rule.constant):
                continue
            if _rpow(fam.ratio, q) != rho:
                continue
            # two single-ratio geometric sequences with a common limit agreeing
            # at two indices agree everywhere
            if all(fam.sub_x(m0 + q * (j - j0), k0) == vals[j] for j in range(j0, len(vals))):
                return True
        return False

    # -- refinement ------------------------------------------------------------------------------
    def refine_to_taut(self, cmap: PwAffineMap) -> "MarkovPartition":
        crit = cmap.critical_points()
        points = set(self.points)
        families = list(self.families)
        acc = set(self.accumulation)
        for c in crit.points:
            if self.contains(c):
                continue
            kind, idx, a, b = self._region_of(c)
            if kind == "fam":
                raise UnrepresentableCriticalStructure(f"critical point {c} inside a point family span")
            points.add(c)
        for cf in crit.families:
            fam = cmap.tails[cf.tail]
            if self._crit_missing_family(cmap, cf) is None:
                continue
            if not cf.boundaries and cf.interior:
                raise UnrepresentableCriticalStructure(
                    f"tail {cf.tail}: junction points without cell boundaries do not form a point family"
                )
            lo, hi = sorted((fam.anchor, fam.outer))
            for p in list(points):
                if lo < p < hi:
                    raise UnrepresentableCriticalStructure(f"partition point {p} inside the critical family span")
            for pf in families:
                plo, phi = pf.span()
                if max(plo, lo) < min(phi, hi):
                    raise UnrepresentableCriticalStructure("critical family overlaps an existing point family")
            subs = fam.rule if cf.interior else ONE_SUB
            families.append(PointFamily(fam.anchor, fam.coeff, fam.ratio, fam.n0, None if subs == ONE_SUB else subs))
            acc.add(fam.anchor)
        families.sort(key=lambda f: f.span())
        # keep family order stable for existing families: original first, then new ones by position
        ordered = list(self.families) + [f for f in families if f not in self.families]
        q = MarkovPartition(sorted(points), ordered, sorted(acc), "taut")
        return q

    def _crit_missing_family(self, cmap, cf):
        from .intervalmap import CriticalSet

        return self._crit_missing(cmap, CriticalSet((), (cf,)))


def _fit_geometric(vals):
    """(a, c, rho) with vals[j] = a + c*rho**j for all j, or None."""
    if len(vals) < 4:
        return None
    d0 = vals[1] - vals[0]
    if d0 == 0:
        return (vals[0], Fraction(0), Fraction(0)) if all(v == vals[0] for v in vals) else None
    rho = (vals[2] - vals[1]) / d0
    if rho == 1 or rho == 0:
        return None
    c = d0 / (rho - 1)
    a = vals[0] - c
    p = Fraction(1)
    for v in vals:
        if a + c * p != v:
            return None
        p = p * rho
    if not (0 < rho < 1):
        return None
    return a, c, rho

