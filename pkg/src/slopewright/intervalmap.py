"""Countably piecewise affine self-maps of [0,1] with exact coordinates.

A map is given by finitely many breakpoints plus *tail families*: geometric
sequences of breakpoints x_n = anchor + coeff*ratio**n (n >= n0) accumulating
at ``anchor``.  The stretch between x_n and x_{n+1} is a *cell*; it is split
into ``laps(n)`` laps of equal width whose ordinates alternate between
yA(n) and yB(n), the cell ending at yA(n+1).  Joins fix the value at each
anchor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import InvalidMap, NotPiecewiseMonotone, NotTransverse, OutOfDomain
from .numbers import Exact, exact, floor_exact, log_abs, sign


@lru_cache(maxsize=200_000)
def _rpow(r, n: int):
    return r**n


@lru_cache(maxsize=4096)
def catalan(n: int) -> int:
    if n <= 0:
        return 1
    return catalan(n - 1) * 2 * (2 * n - 1) // (n + 1)


@dataclass(frozen=True)
class Geo:
    """The sequence n -> anchor + coeff*ratio**n."""

    anchor: Exact
    coeff: Exact
    ratio: Exact

    def __post_init__(self):
        object.__setattr__(self, "anchor", exact(self.anchor))
        object.__setattr__(self, "coeff", exact(self.coeff))
        object.__setattr__(self, "ratio", exact(self.ratio))

    def at(self, n: int):
        if self.coeff == 0:
            return self.anchor
        return self.anchor + self.coeff * _rpow(self.ratio, n)

    def dist(self, n: int):
        """|value(n) - limit|."""
        if self.coeff == 0:
            return Fraction(0)
        return abs(self.coeff) * _rpow(self.ratio, n)


@dataclass(frozen=True)
class LapRule:
    """Number of laps (or sub-intervals) in cell n.

    kind ``const``: a;  ``affine``: a + b*n;  ``catalan``: a * Catalan(n + b).
    """

    kind: str = "const"
    a: int = 2
    b: int = 0

    def count(self, n: int) -> int:
        if self.kind == "const":
            return self.a
        if self.kind == "affine":
            return self.a + self.b * n
        if self.kind == "catalan":
            return self.a * catalan(n + self.b)
        raise ValueError(f"unknown lap rule {self.kind!r}")

    @property
    def constant(self) -> bool:
        return self.kind == "const"

    def to_json(self):
        if self.kind == "const":
            return self.a
        if self.kind == "affine":
            return {"kind": "affine", "alpha": self.a, "beta": self.b}
        return {"kind": "catalan", "scale": self.a, "shift": self.b}

    @staticmethod
    def from_json(obj) -> "LapRule":
        if isinstance(obj, int):
            return LapRule("const", obj, 0)
        kind = obj["kind"]
        if kind == "const":
            return LapRule("const", int(obj["count"]), 0)
        if kind == "affine":
            return LapRule("affine", int(obj["alpha"]), int(obj["beta"]))
        if kind == "catalan":
            return LapRule("catalan", int(obj["scale"]), int(obj["shift"]))
        raise ValueError(f"unknown lap rule {kind!r}")


ZIGZAG = LapRule("const", 2, 0)


def geometric_index(anchor, coeff, ratio, n0: int, x) -> tuple[int, bool]:
    """Locate x in the family x_n = anchor + coeff*ratio**n.

    Returns (n, on_point) with x_n = x when on_point, otherwise x strictly
    between x_n and x_{n+1}.  Requires x strictly inside the span (anchor, x_n0].
    """
    t = (x - anchor) / coeff
    if t <= 0:
        raise ValueError("point is not on the family side of the anchor")
    # estimate n from logarithms, then correct exactly
    est = log_abs(t) / log_abs(ratio)
    n = max(n0, math.floor(est + 1e-9) if math.isfinite(est) else n0)
    while n > n0 and t > _rpow(ratio, n):
        n -= 1
    while t <= _rpow(ratio, n + 1):
        n += 1
    if n < n0 or t > _rpow(ratio, n):
        raise ValueError("point lies outside the family span")
    return n, t == _rpow(ratio, n)


@dataclass(frozen=True)
class TailFamily:
    """A geometric family of breakpoints accumulating at ``anchor``."""

    anchor: Exact
    coeff: Exact
    ratio: Exact
    n0: int
    yA: Geo
    yB: Geo
    laps: LapRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "anchor", exact(self.anchor))
        object.__setattr__(self, "coeff", exact(self.coeff))
        object.__setattr__(self, "ratio", exact(self.ratio))

    @property
    def rule(self) -> LapRule:
        return self.laps if self.laps is not None else ZIGZAG

    def x(self, n: int):
        return self.anchor + self.coeff * _rpow(self.ratio, n)

    @property
    def outer(self):
        return self.x(self.n0)

    @property
    def side(self) -> int:
        """+1 when the family lies to the right of its anchor."""
        return sign(self.coeff)

    def lap_count(self, n: int) -> int:
        return self.rule.count(n)

    def sub_x(self, n: int, k, L: int | None = None):
        L = self.lap_count(n) if L is None else L
        xn = self.x(n)
        return xn + (self.x(n + 1) - xn) * Fraction(k) / L

    def sub_y(self, n: int, k: int, L: int | None = None):
        L = self.lap_count(n) if L is None else L
        if k == 0:
            return self.yA.at(n)
        if k == L:
            return self.yA.at(n + 1)
        return self.yB.at(n) if k % 2 else self.yA.at(n)

    def cell_height_bound(self, n: int, limit):
        """Upper bound for the spread of ordinates inside cell n (decreasing in n)."""
        return (
            abs(self.yA.at(n) - limit)
            + abs(self.yB.at(n) - limit)
            + abs(self.yA.at(n + 1) - limit)
        )

    def locate(self, x) -> tuple[int, object]:
        """(n, s) with x = x_n + s*(x_{n+1}-x_n), 0 <= s < 1."""
        n, on = geometric_index(self.anchor, self.coeff, self.ratio, self.n0, x)
        if on:
            return n, Fraction(0)
        xn = self.x(n)
        return n, (x - xn) / (self.x(n + 1) - xn)


@dataclass(frozen=True)
class Lap:
    """``mult`` affine laps of equal width filling [x0, x1]; the first runs from
    y0 to y1 and orientations alternate."""

    x0: Exact
    x1: Exact
    y0: Exact
    y1: Exact
    mult: int = 1

    @property
    def lo(self):
        return min(self.y0, self.y1)

    @property
    def hi(self):
        return max(self.y0, self.y1)

    def split(self) -> Iterator["Lap"]:
        if self.mult == 1:
            yield self
            return
        w = (self.x1 - self.x0) / self.mult
        for i in range(self.mult):
            a = self.x0 + w * i
            if i % 2 == 0:
                yield Lap(a, a + w, self.y0, self.y1)
            else:
                yield Lap(a, a + w, self.y1, self.y0)

    def value(self, x):
        """Value of a single lap at x (mult must be 1)."""
        return self.y0 + (self.y1 - self.y0) * (x - self.x0) / (self.x1 - self.x0)

    def inverse(self, y):
        return self.x0 + (y - self.y0) * (self.x1 - self.x0) / (self.y1 - self.y0)


@dataclass(frozen=True)
class Region:
    lo: Exact
    hi: Exact
    ylo: Exact
    yhi: Exact
    tail: int | None = None


@dataclass(frozen=True)
class CriticalFamily:
    """Turning points carried by a tail family, kept in structured form."""

    tail: int
    n0: int
    boundaries: bool  # cell boundaries x_n, n > n0
    interior: bool  # lap junctions inside every cell n >= n0

    def describe(self, fam: TailFamily) -> str:
        parts = []
        if self.boundaries:
            parts.append(f"x_n = {fam.anchor} + ({fam.coeff})*({fam.ratio})^n, n>{self.n0}")
        if self.interior:
            parts.append(f"lap junctions inside cells n>={self.n0}")
        return "; ".join(parts)


@dataclass(frozen=True)
class CriticalSet:
    points: tuple
    families: tuple = ()

    def contains(self, cmap: "PwAffineMap", x) -> bool:
        if x in self.points:
            return True
        for cf in self.families:
            fam = cmap.tails[cf.tail]
            try:
                n, s = fam.locate(x)
            except ValueError:
                continue
            if n < cf.n0:
                continue
            L = fam.lap_count(n)
            if s == 0 and cf.boundaries and n > fam.n0:
                return True
            if cf.interior and s != 0 and (s * L).denominator == 1:
                return True
        return False


class PwAffineMap:
    """Continuous countably piecewise affine map [0,1] -> [0,1]."""

    def __init__(self, breakpoints: Sequence, tails: Sequence[TailFamily] = (), joins: Sequence = ()):
        self.breakpoints = tuple((exact(x), exact(y)) for x, y in breakpoints)
        self.tails = tuple(tails)
        self.joins = tuple((exact(x), exact(y)) for x, y in joins)
        self._build()

    # -- structure --------------------------------------------------------
    def _build(self):
        skel: dict = {}

        def put(x, y, what):
            if x in skel and skel[x] != y:
                raise InvalidMap(f"conflicting values at x={x}: {skel[x]} vs {y} ({what})", witness=x)
            skel[x] = y

        for x, y in self.breakpoints:
            put(x, y, "breakpoint")
        for x, y in self.joins:
            put(x, y, "join")
        fam_span = {}
        for i, fam in enumerate(self.tails):
            if fam.coeff == 0 or not (0 < fam.ratio < 1):
                raise InvalidMap(f"tail {i}: need coeff != 0 and 0 < ratio < 1")
            for g in (fam.yA, fam.yB):
                if g.coeff != 0 and not (0 < g.ratio < 1):
                    raise InvalidMap(f"tail {i}: ordinate ratio must lie in (0,1)")
            if fam.anchor not in dict(self.joins):
                raise InvalidMap(f"tail {i}: anchor {fam.anchor} has no join value", witness=fam.anchor)
            jy = dict(self.joins)[fam.anchor]
            if fam.yA.anchor != jy or (fam.rule.count(fam.n0) >= 2 and fam.yB.anchor != jy):
                raise InvalidMap(f"tail {i}: ordinates do not converge to the join value {jy}", witness=fam.anchor)
            put(fam.outer, fam.yA.at(fam.n0), f"tail {i} outer point")
            lo, hi = sorted((fam.anchor, fam.outer))
            fam_span[(lo, hi)] = i
            self._check_tail(i, fam)
        xs = sorted(skel)
        if not xs or xs[0] != 0 or xs[-1] != 1:
            raise InvalidMap("breakpoints must start at 0 and end at 1")
        regions = []
        for a, b in zip(xs, xs[1:]):
            t = fam_span.pop((a, b), None)
            ya, yb = skel[a], skel[b]
            if t is None and ya == yb:
                raise InvalidMap(f"flat lap on [{a},{b}]", witness=a)
            regions.append(Region(a, b, ya, yb, t))
        if fam_span:
            raise InvalidMap("a tail family span contains other breakpoints")
        for x, y in skel.items():
            if not (0 <= y <= 1):
                raise InvalidMap(f"value {y} at {x} outside [0,1]", witness=x)
        self.skeleton = skel
        self.regions = tuple(regions)
        self._region_lo = [r.lo for r in regions]

    def _check_tail(self, i, fam: TailFamily):
        for g in (fam.yA, fam.yB):
            for v in (g.at(fam.n0), g.anchor):
                if not (0 <= v <= 1):
                    raise InvalidMap(f"tail {i}: ordinate {v} outside [0,1]")
        for n in list(range(fam.n0, fam.n0 + 12)) + [fam.n0 + 60]:
            L = fam.lap_count(n)
            if L < 1:
                raise InvalidMap(f"tail {i}: cell {n} has no laps")
            if L >= 2 and fam.yA.at(n) == fam.yB.at(n):
                raise InvalidMap(f"tail {i}: flat lap in cell {n}")
            if fam.sub_y(n, L - 1, L) == fam.yA.at(n + 1):
                raise InvalidMap(f"tail {i}: flat last lap in cell {n}")

    def __eq__(self, other):
        return (
            isinstance(other, PwAffineMap)
            and self.breakpoints == other.breakpoints
            and self.tails == other.tails
            and self.joins == other.joins
        )

    def __hash__(self):
        return hash((self.breakpoints, self.tails, self.joins))

    def __repr__(self):
        return f"PwAffineMap({len(self.breakpoints)} breakpoints, {len(self.tails)} tails)"

    @property
    def piecewise_monotone(self) -> bool:
        return not self.tails

    def region_index(self, x) -> int:
        lo, hi = 0, len(self.regions) - 1
        while lo < hi:
            m = (lo + hi + 1) // 2
            if self.regions[m].lo <= x:
                lo = m
            else:
                hi = m - 1
        return lo

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, x):
        x = exact(x)
        if not (0 <= x <= 1):
            raise OutOfDomain(f"x={x} outside [0,1]", witness=x)
        if x in self.skeleton:
            return self.skeleton[x]
        r = self.regions[self.region_index(x)]
        if r.tail is None:
            return r.ylo + (r.yhi - r.ylo) * (x - r.lo) / (r.hi - r.lo)
        fam = self.tails[r.tail]
        n, s = fam.locate(x)
        L = fam.lap_count(n)
        sl = s * L
        k = floor_exact(sl)
        if k >= L:
            k = L - 1
        y0 = fam.sub_y(n, k, L)
        y1 = fam.sub_y(n, k + 1, L)
        return y0 + (y1 - y0) * (sl - k)

    __call__ = evaluate

    # -- laps ------------------------------------------------------------------
    def iter_laps(self, lo=Fraction(0), hi=Fraction(1), min_height=None) -> Iterator[Lap]:
        """Affine laps meeting [lo, hi], clipped to it.

        Inside tail families the scan stops once cell heights drop below
        ``min_height`` (laps that low cannot cover an interval of that
        length); without ``min_height`` an infinite family raises.
        """
        lo, hi = exact(lo), exact(hi)
        i0 = self.region_index(lo)
        for r in self.regions[i0:]:
            if r.lo >= hi:
                break
            a, b = max(r.lo, lo), min(r.hi, hi)
            if a >= b:
                continue
            if r.tail is None:
                if a == r.lo and b == r.hi:
                    yield Lap(a, b, r.ylo, r.yhi)
                else:
                    yield Lap(a, b, self.evaluate(a), self.evaluate(b))
            else:
                yield from self._family_laps(r.tail, a, b, min_height)

    def _family_laps(self, ti: int, a, b, min_height) -> Iterator[Lap]:
        fam = self.tails[ti]
        far, near = (b, a) if fam.side > 0 else (a, b)
        n_first = fam.locate(far)[0]
        if near == fam.anchor:
            n_last = None
        else:
            n_last, s_last = fam.locate(near)
            if s_last == 0:
                n_last -= 1
        limit = fam.yA.anchor
        n = n_first
        while n_last is None or n <= n_last:
            if n_last is None:
                if min_height is None:
                    raise ValueError("infinite family of laps; pass min_height")
                if fam.cell_height_bound(n, limit) < min_height:
                    return
            yield from self._cell_laps(fam, n, a, b)
            n += 1

    def _cell_laps(self, fam: TailFamily, n: int, a, b) -> Iterator[Lap]:
        L = fam.lap_count(n)
        xn, xm = fam.x(n), fam.x(n + 1)
        a, b = max(a, min(xn, xm)), min(b, max(xn, xm))
        if a >= b:
            return
        s0, s1 = sorted(((a - xn) / (xm - xn), (b - xn) / (xm - xn)))
        k_lo = floor_exact(s0 * L)
        k_hi = -floor_exact(-(s1 * L)) - 1
        lo_part = s0 * L > k_lo
        hi_part = s1 * L < k_hi + 1
        out = []
        if k_lo == k_hi and (lo_part or hi_part):
            out.append(self._partial(fam, n, L, k_lo, s0, s1))
        else:
            f1, f2 = k_lo, k_hi
            if lo_part:
                out.append(self._partial(fam, n, L, k_lo, s0, Fraction(k_lo + 1, L)))
                f1 += 1
            if hi_part:
                out.append(self._partial(fam, n, L, k_hi, Fraction(k_hi, L), s1))
                f2 -= 1
            g2 = min(f2, L - 2)
            if f1 <= g2:
                out.append(self._group(fam, n, L, f1, g2))
            if f1 <= L - 1 <= f2:
                out.append(self._group(fam, n, L, L - 1, L - 1))
        out.sort(key=lambda lp: lp.x0)
        yield from out

    def _group(self, fam, n, L, k1, k2) -> Lap:
        xa, xb = fam.sub_x(n, k1, L), fam.sub_x(n, k2 + 1, L)
        ya, yb = fam.sub_y(n, k1, L), fam.sub_y(n, k1 + 1, L)
        m = k2 - k1 + 1
        if xa < xb:
            return Lap(xa, xb, ya, yb, m)
        # leftmost lap is the last in cell order
        yl = fam.sub_y(n, k2 + 1, L)
        yr = fam.sub_y(n, k2, L)
        return Lap(xb, xa, yl, yr, m)

    def _partial(self, fam, n, L, k, s0, s1) -> Lap:
        xn, xm = fam.x(n), fam.x(n + 1)
        y0, y1 = fam.sub_y(n, k, L), fam.sub_y(n, k + 1, L)

        def at(s):
            t = s * L - k
            return xn + (xm - xn) * s, y0 + (y1 - y0) * t

        (xa, ya), (xb, yb) = at(s0), at(s1)
        if xa > xb:
            xa, ya, xb, yb = xb, yb, xa, ya
        return Lap(xa, xb, ya, yb)

    def laps_list(self, limit: int = 1_000_000) -> list[Lap]:
        """All individual laps of a piecewise monotone map."""
        if self.tails:
            raise NotPiecewiseMonotone("map has tail families")
        out = []
        for lap in self.iter_laps():
            out.extend(lap.split())
            if len(out) > limit:
                raise ValueError("too many laps")
        return out

    # -- analysis ----------------------------------------------------------------
    def image_of_interval(self, lo, hi) -> tuple:
        lo, hi = exact(lo), exact(hi)
        if not (0 <= lo <= hi <= 1):
            raise OutOfDomain(f"[{lo},{hi}] not inside [0,1]")
        vals = [self.evaluate(lo), self.evaluate(hi)]
        for x, y in self.skeleton.items():
            if lo < x < hi:
                vals.append(y)
        for r in self.regions:
            if r.tail is None or r.hi <= lo or r.lo >= hi:
                continue
            vals.extend(self._family_extremes(r.tail, max(r.lo, lo), min(r.hi, hi)))
        return min(vals), max(vals)

    def _family_extremes(self, ti, a, b) -> list:
        """Ordinates at family sub-points strictly inside (a, b), reduced to the
        candidates that can be extreme (sequences are monotone in n)."""
        fam = self.tails[ti]
        far, near = (b, a) if fam.side > 0 else (a, b)
        n1 = fam.locate(far)[0]
        n2 = None if near == fam.anchor else fam.locate(near)[0]
        out = []

        def inside_values(n):
            L = fam.lap_count(n)
            xn, xm = fam.x(n), fam.x(n + 1)
            s0, s1 = sorted(((a - xn) / (xm - xn), (b - xn) / (xm - xn)))
            k1 = floor_exact(s0 * L) + 1
            k2 = -floor_exact(-(s1 * L)) - 1
            k1, k2 = max(k1, 0), min(k2, L)
            if k1 > k2:
                return
            ks = {k1, k2}
            if k2 > k1:
                ks.add(k1 + 1)
            for k in ks:
                out.append(fam.sub_y(n, k, L))

        inside_values(n1)
        if n2 is not None and n2 != n1:
            inside_values(n2)
        m1 = n1 + 1
        m2 = None if n2 is None else n2 - 1
        if m2 is None or m1 <= m2:
            for n in (m1,) if m2 is None else (m1, m2):
                L = fam.lap_count(n)
                out.append(fam.yA.at(n))
                out.append(fam.yA.at(n + 1))
                if L >= 2:
                    out.append(fam.yB.at(n))
        if n2 is None:
            out.append(fam.yA.anchor)
        return out

    def preimage_components(self, c, d) -> list[tuple]:
        c, d = exact(c), exact(d)
        if not c < d:
            raise ValueError("need c < d")
        comps = []
        for group in self.iter_laps(min_height=d - c):
            if group.hi <= c or group.lo >= d:
                continue
            if group.lo > c or group.hi < d:
                raise NotTransverse(
                    f"lap on [{group.x0},{group.x1}] has image [{group.lo},{group.hi}] partially overlapping ({c},{d})",
                    witness=(group.x0, group.x1),
                )
            if group.mult > 100_000:
                raise ValueError("too many preimage components to list")
            for lap in group.split():
                x_c, x_d = lap.inverse(c), lap.inverse(d)
                comps.append((min(x_c, x_d), max(x_c, x_d)))
        comps.sort()
        return comps

    def critical_points(self) -> CriticalSet:
        pts = {Fraction(0), Fraction(1)}
        fams = []
        regs = self.regions

        def left_dir(i):
            r = regs[i]
            if r.tail is None:
                return sign(r.yhi - r.ylo)
            fam = self.tails[r.tail]
            if fam.side < 0:  # outer point is the left end of the region
                return None
            # region's right end is the outer point, cell n0 sub-lap 0 (reversed)
            L = fam.lap_count(fam.n0)
            return sign(fam.sub_y(fam.n0, 0, L) - fam.sub_y(fam.n0, 1, L))

        def right_dir(i):
            r = regs[i]
            if r.tail is None:
                return sign(r.yhi - r.ylo)
            fam = self.tails[r.tail]
            if fam.side > 0:
                return None
            L = fam.lap_count(fam.n0)
            return sign(fam.sub_y(fam.n0, 1, L) - fam.sub_y(fam.n0, 0, L))

        for i in range(len(regs) - 1):
            ld, rd = left_dir(i), right_dir(i + 1)
            x = regs[i].hi
            if ld is None or rd is None:
                # one side is an accumulation of breakpoints
                side_fam = regs[i].tail if ld is None else regs[i + 1].tail
                cf = self._family_critical(side_fam)
                other = rd if ld is None else ld
                if cf.boundaries or cf.interior or self._family_direction(side_fam) != other:
                    pts.add(x)
            elif ld != rd:
                pts.add(x)
        for r in regs:
            if r.tail is not None:
                cf = self._family_critical(r.tail)
                if cf.boundaries or cf.interior:
                    fams.append(cf)
        return CriticalSet(tuple(sorted(pts)), tuple(fams))

    def _family_direction(self, ti) -> int | None:
        """Common orientation (in increasing x) of a monotone family, else None."""
        fam = self.tails[ti]
        dirs = set()
        for n in range(fam.n0, fam.n0 + 6):
            L = fam.lap_count(n)
            d = sign(fam.sub_y(n, L, L) - fam.sub_y(n, L - 1, L)) * sign(fam.x(n + 1) - fam.x(n))
            dirs.add(d)
            if L >= 2:
                dirs.add(sign(fam.sub_y(n, 1, L) - fam.sub_y(n, 0, L)) * sign(fam.x(n + 1) - fam.x(n)))
        return dirs.pop() if len(dirs) == 1 else None

    def _family_critical(self, ti) -> CriticalFamily:
        """Turning pattern of a family: cell boundaries x_n (n > n0) and lap
        junctions inside cells.  Signs of differences of geometric sequences
        settle quickly; the pattern is probed on a window and far out."""
        from .errors import UnrepresentableCriticalStructure

        fam = self.tails[ti]
        probe = list(range(fam.n0, fam.n0 + 10)) + [fam.n0 + 80]
        bnd = set()
        inner = set()
        for n in probe:
            L = fam.lap_count(n)
            if n > fam.n0:
                Lp = fam.lap_count(n - 1)
                before = fam.sub_y(n, 0, L) - fam.sub_y(n - 1, Lp - 1, Lp)
                after = fam.sub_y(n, 1, L) - fam.sub_y(n, 0, L)
                bnd.add(sign(before) * sign(after) < 0)
            if L >= 2:
                a1 = fam.sub_y(n, L - 1, L) - fam.sub_y(n, L - 2, L)
                a2 = fam.sub_y(n, L, L) - fam.sub_y(n, L - 1, L)
                turning_last = sign(a1) * sign(a2) < 0
                if L >= 3 and not turning_last:
                    raise UnrepresentableCriticalStructure(f"tail {ti}: mixed turning pattern in cell {n}")
                inner.add(turning_last)
            else:
                inner.add(False)
        if len(bnd) > 1 or len(inner) > 1:
            raise UnrepresentableCriticalStructure(f"tail {ti}: turning pattern is not uniform in n")
        return CriticalFamily(ti, fam.n0, bnd.pop() if bnd else False, inner.pop())

    def check_constant_slope(self):
        lam = None

        def agree(s):
            nonlocal lam
            s = abs(s)
            if lam is None:
                lam = s
                return True
            return s == lam

        for r in self.regions:
            if r.tail is None:
                if not agree((r.yhi - r.ylo) / (r.hi - r.lo)):
                    return None
                continue
            fam = self.tails[r.tail]
            for n in list(range(fam.n0, fam.n0 + 12)) + [fam.n0 + 40, fam.n0 + 100]:
                L = fam.lap_count(n)
                w = abs(fam.x(n + 1) - fam.x(n)) / L
                if L >= 2 and not agree((fam.yB.at(n) - fam.yA.at(n)) / w):
                    return None
                if not agree((fam.sub_y(n, L, L) - fam.sub_y(n, L - 1, L)) / w):
                    return None
        return lam

    def slopes(self) -> list:
        return [(r.yhi - r.ylo) / (r.hi - r.lo) for r in self.regions if r.tail is None]


def lap_entropy_oracle(cmap: PwAffineMap, n_max: int) -> list[tuple[int, int, float]]:
    """Lap counts of the iterates f^n, n = 1..n_max, by exact subdivision.

    Only image intervals of laps are tracked: a lap of f^n with image [c, d]
    splits into as many laps of f^{n+1} as there are laps of f meeting (c, d).
    """
    if cmap.tails:
        raise NotPiecewiseMonotone("lap counting needs finitely many laps")
    laps = cmap.laps_list()
    images: dict = {}
    for lap in laps:
        key = (lap.lo, lap.hi)
        images[key] = images.get(key, 0) + 1
    out = []
    cache: dict = {}
    for n in range(1, n_max + 1):
        count = sum(images.values())
        out.append((n, count, math.log(count) / n))
        if n == n_max:
            break
        nxt: dict = {}
        for (c, d), mult in images.items():
            if (c, d) not in cache:
                sub = []
                for lap in laps:
                    a, b = max(lap.x0, c), min(lap.x1, d)
                    if a < b:
                        ya, yb = lap.value(a), lap.value(b)
                        sub.append((min(ya, yb), max(ya, yb)))
                cache[(c, d)] = sub
            for key in cache[(c, d)]:
                nxt[key] = nxt.get(key, 0) + mult
        images = nxt
    return out


def identity_map() -> PwAffineMap:
    return PwAffineMap([(0, 0), (1, 1)])


def tent_map() -> PwAffineMap:
    return PwAffineMap([(0, 0), (Fraction(1, 2), 1), (1, 0)])
