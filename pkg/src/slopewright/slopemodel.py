"""Constant slope models.

A normalized summable eigenvector v of A(f, P) at lam defines an
orientation preserving homeomorphism psi with |psi(J)| = v_J for every
partition interval J, and psi o f o psi^-1 then has slope +-lam on every lap.
This module builds psi, the conjugate map, checks it on a grid and runs the
whole analysis pipeline.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import format_poly, minimal_polynomial
from .config import RunConfig
from .errors import (
    Diverging,
    InvalidMap,
    InvalidPartition,
    NotNormalized,
    ResidualTooLarge,
    SlopewrightError,
    TilingMismatch,
    UnrepresentableCriticalStructure,
)
from .graphs import (
    ConnectivityReport,
    PathToInfinity,
    RomeCertificate,
    connectivity_report,
    find_finite_rome,
    find_simple_path_to_infinity,
)
from .intervalmap import Geo, PwAffineMap, TailFamily, _rpow
from .numbers import exact, floor_exact, format_exact, sign, to_float
from .partition import Finite, MarkovPartition, PointFamily, Tail, ValidationReport
from .spectral import (
    INCONCLUSIVE,
    RECURRENT,
    TRANSIENT,
    Eigenvector,
    NoClosedForm,
    SpectralReport,
    _rome_eigenvector,
    check_exclusion,
    is_exact,
    parry_eigenvector,
    spectral_report,
)
from .symbolic import TransitionMatrix


def _fmt(x):
    return format_exact(x) if is_exact(x) else float(x)


def _same(a, b, exact_mode: bool, rel: float = 1e-12) -> bool:
    if exact_mode:
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


# -- conjugacy on partition points ------------------------------------------------------


@dataclass(frozen=True)
class _FamilyMass:
    subs: int
    coefs: tuple
    rho: object
    last: int


class ConjugacyMap:
    """psi on the partition points: psi(x) is the total v-mass of the partition
    intervals left of x.  Between partition points psi is singular in general;
    ConstantSlopeModel.psi extends it through the dynamics."""

    def __init__(self, P: MarkovPartition, v: Eigenvector, tol: float = 1e-12):
        self.P = P
        self.v = v
        self.exact = bool(v.exact)
        self._fams = [self._family_mass(i) for i in range(len(P.families))]
        masses = []
        for kind, idx, a, b in P.regions:
            if kind == "fin":
                m = v.value(Finite(idx))
            else:
                m = self.tail_mass(idx, P.families[idx].n0, 0)
            if not m > 0:
                raise NotNormalized(f"nonpositive mass {m} on [{a}, {b}]", witness=(a, b))
            masses.append(m)
        total = sum(masses, Fraction(0)) if self.exact else math.fsum(float(m) for m in masses)
        if not _same(total, 1, self.exact, tol):
            raise NotNormalized(f"masses sum to {total}, not 1", witness=total)
        acc = Fraction(0) if self.exact else 0.0
        psi = {P.skeleton[0]: acc}
        for (kind, idx, a, b), m in zip(P.regions, masses):
            acc = acc + m
            psi[b] = acc
        psi[P.skeleton[-1]] = Fraction(1) if self.exact else 1.0
        self._skel = psi

    def _family_mass(self, f: int) -> _FamilyMass:
        fam = self.P.families[f]
        if not fam.rule.constant:
            raise UnrepresentableCriticalStructure(f"family {f}: subdivision counts vary with n")
        S = fam.count(fam.n0)
        coefs, rhos = [], set()
        for k in range(S):
            a, rho = self.v.tail_formula(f, k)
            coefs.append(a)
            rhos.add(rho)
        if len(rhos) != 1:
            raise UnrepresentableCriticalStructure(f"family {f}: sub-intervals decay at different rates")
        if self.v.fp is not None:
            last = self.v.fp.fams[f].last
        else:
            last = max(self.v.tails[(f, k)][2] for k in range(S))
        return _FamilyMass(S, tuple(coefs), rhos.pop(), last)

    def tail_mass(self, f: int, n: int, k: int):
        """Total mass of the family intervals T(f, m, j) with (m, j) >= (n, k)."""
        fm = self._fams[f]
        zero = Fraction(0) if self.exact else 0.0
        tot = zero
        m, j = n, k
        while m <= fm.last:
            tot = tot + self.v.value(Tail(f, m, j))
            j += 1
            if j == fm.subs:
                m, j = m + 1, 0
        if j > 0:
            tot = tot + sum(fm.coefs[j:], zero) * _rpow(fm.rho, m) if self.exact else tot + sum(
                float(c) for c in fm.coefs[j:]) * float(fm.rho) ** m
            m += 1
        rho = fm.rho if self.exact else float(fm.rho)
        head = sum(fm.coefs, zero) if self.exact else sum(float(c) for c in fm.coefs)
        return tot + head * (_rpow(rho, m) if self.exact else rho ** m) / (1 - rho)

    def point(self, x):
        """psi(x) for a partition point x; None if x is not one."""
        pid = self.P.point_id(x)
        if pid is None:
            return None
        if pid[0] == "s":
            return self._skel[self.P.skeleton[pid[1]]]
        _, f, n, k = pid
        fam = self.P.families[f]
        return self._skel[fam.anchor] + fam.side * self.tail_mass(f, n, k)

    def is_identity(self) -> bool:
        """True when v_J = |J| for every interval J, so that psi is the identity."""
        if not self.exact:
            return False
        P = self.P
        for k, (a, b) in enumerate(P.finite_intervals):
            if self.v.value(Finite(k)) != b - a:
                return False
        for f, fam in enumerate(P.families):
            fm = self._fams[f]
            if fm.rho != fam.ratio:
                return False
            for n in range(fam.n0, fm.last + 2):
                for k in range(fm.subs):
                    if self.v.value(Tail(f, n, k)) != P.width(Tail(f, n, k)):
                        return False
            width = abs(fam.coeff) * (1 - fam.ratio) / fm.subs
            if any(c != width for c in fm.coefs):
                return False
        return True

    def length(self, iid):
        a, b = self.P.interval_bounds(iid)
        return self.point(b) - self.point(a)

    def image_partition(self) -> MarkovPartition:
        """psi(P): the partition of the conjugate map."""
        if not self.exact:
            raise UnrepresentableCriticalStructure("numeric eigenvector: psi(P) is not exactly representable")
        P = self.P
        points = {self.point(p) for p in P.points}
        fams = []
        for f, fam in enumerate(P.families):
            fm = self._fams[f]
            if fm.subs > 1 and len(set(fm.coefs)) != 1:
                raise UnrepresentableCriticalStructure(f"family {f}: unequal sub-interval masses")
            C = sum(fm.coefs, Fraction(0)) / (1 - fm.rho)
            n1 = fam.n0
            for n in range(fm.last + 2, fam.n0 - 1, -1):
                if self.tail_mass(f, n, 0) != C * _rpow(fm.rho, n) or (
                        fm.subs > 1 and any(self.v.value(Tail(f, n, j)) != fm.coefs[0] * _rpow(fm.rho, n)
                                            for j in range(fm.subs))):
                    n1 = n + 1
                    break
            for n in range(fam.n0, n1):
                for k in range(fm.subs):
                    points.add(self.point(fam.sub_x(n, k)))
            subs = fam.subdivisions
            fams.append(PointFamily(self._skel[fam.anchor], fam.side * C, fm.rho, n1, subs))
        acc = [self._skel[a] for a in P.accumulation]
        return MarkovPartition(sorted(points), fams, acc, P.kind)

    def samples(self, depth: int = 4) -> list:
        out = []
        for x in self.P.skeleton:
            out.append((x, self.point(x)))
        for fam in self.P.families:
            for n in range(fam.n0, fam.n0 + depth):
                for k in range(fam.count(n)):
                    x = fam.sub_x(n, k)
                    out.append((x, self.point(x)))
        return sorted(set(out), key=lambda t: t[0])


def build_conjugacy(P: MarkovPartition, v: Eigenvector, tol: float = 1e-12) -> ConjugacyMap:
    return ConjugacyMap(P, v, tol)


# -- psi away from the partition ----------------------------------------------------------------


class _Psi:
    """Extends psi from the partition points to all points reachable by the
    dynamics, using psi(x) = psi(t) + s*(psi(f x) - psi(f t))/lam for t in the
    same monotone piece as x (s = +-1 its orientation).  Orbits that cycle are
    solved exactly; orbits longer than ``depth_cap`` end in linear
    interpolation and mark the result approximate."""

    def __init__(self, cmap: PwAffineMap, conj: ConjugacyMap, lam, depth_cap: int | None = None):
        self.f = cmap
        self.conj = conj
        self.P = conj.P
        self.exact = conj.exact
        self.lam = lam if self.exact else float(lam)
        self.identity = conj.is_identity()
        # interpolation after D steps is off by at most lam**-D
        self.accurate = math.ceil(40 * math.log(10) / math.log(to_float(lam)))
        self.depth_cap = depth_cap or max(400, 2 * self.accurate)
        self.approximate = False
        self.memo: dict = {}
        self._busy: set = set()
        pts = set(cmap.critical_points().points)
        for t in cmap.tails:
            pts.update((t.anchor, t.outer))
        self.turning = sorted(pts)
        self.tails: dict = {}  # tail index -> TailFamily in psi coordinates

    def _num(self, x):
        return x if self.exact else float(x)

    def direct(self, x):
        if self.identity:
            return x
        if x in self.memo:
            return self.memo[x]
        v = self.conj.point(x)
        if v is None:
            r = self.f.regions[self.f.region_index(x)]
            if r.tail is not None and r.tail in self.tails:
                fam = self.f.tails[r.tail]
                if x == fam.outer:
                    v = self.tails[r.tail].outer
                elif r.lo < x < r.hi:
                    n, s = fam.locate(x)
                    L = fam.lap_count(n)
                    t = s * L
                    if t == floor_exact(t):
                        v = self.tails[r.tail].sub_x(n, int(t), L)
        if v is not None:
            v = self._num(v)
            self.memo[x] = v
        return v

    def _piece_start(self, x):
        """(t, orientation) with psi(t) computable and f monotone between t and x."""
        r = self.f.regions[self.f.region_index(x)]
        if r.tail is not None and r.lo < x < r.hi:
            fam = self.f.tails[r.tail]
            n, s = fam.locate(x)
            L = fam.lap_count(n)
            k = min(floor_exact(s * L), L - 1)
            t = fam.sub_x(n, k, L)
        else:
            iid = self.P.locate_interval(x)
            a, _ = self.P.interval_bounds(iid)
            i = bisect_left(self.turning, x)
            t = self.turning[i - 1] if i > 0 and self.turning[i - 1] > a else a
        return t, sign(self.f(x) - self.f(t)) * sign(x - t)

    def __call__(self, x):
        x = exact(x)
        val = self.direct(x)
        if val is not None:
            return val
        if x in self._busy:
            raise UnrepresentableCriticalStructure(f"psi({x}) depends on itself outside an orbit cycle")
        self._busy.add(x)
        try:
            return self._orbit(x)
        finally:
            self._busy.discard(x)

    def _orbit(self, x):
        chain, pos = [], {}
        cur = x
        cut = False
        while True:
            val = self.direct(cur)
            if val is not None:
                break
            if cur in pos:
                j = pos[cur]
                A, B = 0, 1
                for _, al, be in reversed(chain[j:]):
                    A, B = al + be * A, be * B
                val = A / (1 - B)
                for y, al, be in chain[j:]:
                    self.memo[y] = val
                    val = (val - al) / be
                val = self.memo[cur]
                chain = chain[:j]
                break
            if len(chain) >= self.depth_cap:
                val = self._interpolate(cur)
                self.approximate = cut = True
                break
            t, s = self._piece_start(cur)
            al = self(t) - s * self(self.f(t)) / self.lam
            be = Fraction(s) / self.lam if self.exact else s / self.lam
            pos[cur] = len(chain)
            chain.append((cur, al, be))
            cur = self.f(cur)
        # near a cut the values are too coarse to be reused
        store = len(chain) - self.accurate if cut else len(chain)
        for i in range(len(chain) - 1, -1, -1):
            y, al, be = chain[i]
            val = al + be * val
            if i < store:
                self.memo[y] = val
        return val

    def _interpolate(self, x):
        a, b = self.P.interval_bounds(self.P.locate_interval(x))
        pa, pb = self.conj.point(a), self.conj.point(b)
        return self._num(pa + (pb - pa) * (x - a) / (b - a))


def _fit_geo(anchor, vals: dict, ratio_hint, exact_mode: bool) -> Geo:
    """Geo(anchor, c, r) through the values {n: value}."""
    ns = sorted(vals)
    d = {n: vals[n] - anchor for n in ns}
    if all(_same(d[n], 0, exact_mode) for n in ns):
        return Geo(anchor, 0, ratio_hint)
    r = d[ns[1]] / d[ns[0]]
    if not exact_mode:
        raise UnrepresentableCriticalStructure("numeric psi values: tail ordinates kept only approximately")
    c = d[ns[0]] / _rpow(r, ns[0])
    for n in ns:
        if c * _rpow(r, n) != d[n]:
            raise UnrepresentableCriticalStructure("conjugated tail ordinates are not geometric")
    return Geo(anchor, c, r)


def _model_tail(psi: _Psi, ti: int, fam: TailFamily) -> TailFamily:
    lam = psi.lam
    if psi.conj.point(fam.anchor) is None:
        raise UnrepresentableCriticalStructure(f"tail {ti}: anchor {fam.anchor} is not a partition point")
    probe = list(range(fam.n0, fam.n0 + 10)) + [fam.n0 + 40]
    heights = {}
    for n in probe:
        L = fam.lap_count(n)
        ys = [psi(fam.sub_y(n, k, L)) for k in range(L + 1)]
        hs = [abs(ys[k + 1] - ys[k]) for k in range(L)]
        if not all(_same(h, hs[0], psi.exact, 1e-9) for h in hs):
            raise UnrepresentableCriticalStructure(
                f"tail {ti}: laps of cell {n} have unequal heights after conjugation")
        heights[n] = sum(hs[1:], hs[0])
    r = heights[fam.n0 + 1] / heights[fam.n0]
    c = heights[fam.n0] / _rpow(r, fam.n0)
    for n in probe:
        if not _same(c * _rpow(r, n), heights[n], psi.exact, 1e-9):
            raise UnrepresentableCriticalStructure(f"tail {ti}: conjugated cell heights are not geometric")
    anchor = psi(fam.anchor)
    coeff = fam.side * c / (lam * (1 - r))
    if not psi.exact:
        raise UnrepresentableCriticalStructure(f"tail {ti}: numeric model tails are not supported")
    jy = dict(psi.f.joins)[fam.anchor]
    yA = _fit_geo(psi(jy), {n: psi(fam.yA.at(n)) for n in probe}, fam.yA.ratio, True)
    yB = _fit_geo(psi(jy), {n: psi(fam.yB.at(n)) for n in probe}, fam.yB.ratio, True)
    return TailFamily(anchor, coeff, r, fam.n0, yA, yB, fam.laps)


# -- the model ------------------------------------------------------------------------------------


@dataclass
class ConstantSlopeModel:
    model: PwAffineMap
    conjugacy: ConjugacyMap
    lam: object
    residual: object
    exact: bool
    grid_size: int
    psi: _Psi = field(repr=False)
    notes: list = field(default_factory=list)

    @property
    def minimal_polynomial(self):
        return minimal_polynomial(self.lam) if is_exact(self.lam) else None

    def to_json(self, depth: int = 4) -> dict:
        from .io import map_to_json

        out = {
            "lambda": _fmt(self.lam),
            "exact": self.exact,
            "residual": _fmt(self.residual) if self.exact else float(self.residual),
            "grid_points": self.grid_size,
            "model": map_to_json(self.model) if self.exact else None,
            "psi_samples": [[format_exact(x), _fmt(y)] for x, y in self.conjugacy.samples(depth)],
            "notes": self.notes,
        }
        if self.minimal_polynomial is not None:
            out["minimal_polynomial"] = format_poly(self.minimal_polynomial, "x")
        return out


def verification_grid(cmap: PwAffineMap, P: MarkovPartition, size: int = 1000, depth: int = 16) -> list:
    """size+1 evenly spaced rationals plus every breakpoint and partition point
    down to the given depth in each family."""
    pts = {Fraction(i, size) for i in range(size + 1)}
    pts.update(cmap.skeleton)
    for fam in cmap.tails:
        for n in range(fam.n0, fam.n0 + depth):
            L = fam.lap_count(n)
            if L > 64:
                break
            pts.update(fam.sub_x(n, k, L) for k in range(L))
    pts.update(P.skeleton)
    for fam in P.families:
        for n in range(fam.n0, fam.n0 + depth):
            S = fam.count(n)
            if S > 64:
                break
            pts.update(fam.sub_x(n, k) for k in range(S))
    return sorted(pts)


def _check_slopes(model: PwAffineMap, lam, exact_mode: bool):
    for r in model.regions:
        if r.tail is None:
            s = abs((r.yhi - r.ylo) / (r.hi - r.lo))
            if not _same(s, lam, exact_mode, 1e-9):
                raise TilingMismatch(f"lap [{_fmt(r.lo)}, {_fmt(r.hi)}] has slope {_fmt(s)}, expected {_fmt(lam)}",
                                     witness=(r.lo, r.hi))
    got = model.check_constant_slope()
    if got is None or not _same(got, lam, exact_mode, 1e-9):
        raise TilingMismatch(f"model tail laps do not have slope {_fmt(lam)}")


def build_constant_slope_model(cmap: PwAffineMap, P: MarkovPartition, v: Eigenvector, lam,
                               grid: int = 1000, tol: float = 1e-9, depth: int = 16) -> ConstantSlopeModel:
    conj = build_conjugacy(P, v)
    psi = _Psi(cmap, conj, lam)
    if not conj.exact:
        raise UnrepresentableCriticalStructure(
            "the eigenvector is only known numerically; an exact model is not available")
    for ti, fam in enumerate(cmap.tails):
        psi.tails[ti] = _model_tail(psi, ti, fam)
    keep = set(psi.turning)
    bps = [(psi(x), psi(y)) for x, y in cmap.breakpoints if x in keep]
    joins = [(psi(x), psi(y)) for x, y in cmap.joins]
    tails = [psi.tails[i] for i in range(len(cmap.tails))]
    try:
        model = PwAffineMap(bps, tails, joins)
    except InvalidMap as e:
        raise TilingMismatch(f"conjugated laps do not form a map: {e}") from None
    _check_slopes(model, psi.lam, True)
    resid = Fraction(0)
    pts = verification_grid(cmap, P, grid, depth)
    for x in pts:
        d = abs(psi(cmap(x)) - model(psi(x)))
        if d > resid:
            resid = d
    notes = []
    exact_flag = not psi.approximate
    if psi.approximate:
        notes.append("some grid orbits were cut off; residual includes interpolation error")
        resid = float(resid)
    if float(resid) > tol:
        raise ResidualTooLarge(f"conjugacy residual {float(resid):.3e} exceeds {tol:g}", witness=resid)
    return ConstantSlopeModel(model, conj, lam, resid, exact_flag, len(pts), psi, notes)


# -- the pipeline ----------------------------------------------------------------------------------


NO_MODEL_TRANSIENT = "no constant slope model: the map is Vere-Jones transient"
NO_MODEL_DIVERGING = "infinite entropy, no Lipschitz model possible"


@contextmanager
def _stage(name: str):
    try:
        yield
    except SlopewrightError as e:
        if e.stage is None:
            e.tagged(name)
        raise


@dataclass
class AnalysisReport:
    config: RunConfig
    name: str | None
    validation: ValidationReport
    refinement: MarkovPartition | None
    connectivity: ConnectivityReport | None
    rome: RomeCertificate | None
    path: PathToInfinity | None
    spectral: SpectralReport | None
    eigenvector: Eigenvector | None = None
    model: ConstantSlopeModel | None = None
    absent_reason: str | None = None
    notes: list = field(default_factory=list)

    @property
    def kind(self) -> str:
        if self.spectral is None:
            return "diverging"
        return self.spectral.classification.kind

    @property
    def lam(self):
        if self.spectral is None:
            return math.inf
        return self.spectral.lam_exact if self.spectral.lam_exact is not None else self.spectral.lam

    @property
    def entropy(self) -> float:
        return math.log(to_float(self.lam)) if self.spectral is not None else math.inf

    @property
    def unique(self) -> bool | None:
        if self.spectral is None or self.kind != RECURRENT:
            return None
        spread = self.spectral.perron.start_spread
        return spread is not None and spread <= self.config.tol

    def to_json(self) -> dict:
        sp = self.spectral
        return {
            "config": self.config.to_json(),
            "name": self.name,
            "validation": self.validation.to_json(),
            "taut_refinement": None if self.refinement is None else _partition_summary(self.refinement),
            "connectivity": None if self.connectivity is None else self.connectivity.to_json(),
            "rome": None if self.rome is None else self.rome.to_json(),
            "path_to_infinity": None if self.path is None else str(self.path),
            "spectral": None if sp is None else sp.to_json(),
            "lambda": "inf" if sp is None else _fmt(self.lam),
            "entropy": self.entropy,
            "class": self.kind,
            "unique": self.unique,
            "eigenvector": None if self.eigenvector is None else self.eigenvector.to_json(),
            "model": None if self.model is None else self.model.to_json(),
            "model_absent_reason": self.absent_reason,
            "notes": self.notes,
        }

    def to_text(self) -> str:
        lines = [f"# config: {_config_line(self.config)}"]
        if self.name:
            lines.append(f"instance = {self.name}")
        lines.append(f"validation = {self.validation.kind} partition, {'ok' if self.validation.ok else 'FAILED'}")
        if self.refinement is not None:
            lines.append(f"taut refinement = {_partition_summary(self.refinement)}")
        c = self.connectivity
        if c is not None:
            lines.append(f"irreducible = {c.irreducible}, aperiodic = {c.aperiodic}, leo = {c.leo}")
        lines.append(f"rome = {self.rome.describe() if self.rome else 'not found'}")
        if self.path is not None:
            lines.append(f"simple path to infinity = {self.path}")
        if self.spectral is None:
            lines.append("lambda = inf")
            lines.append("class = diverging")
        else:
            lam = self.lam
            lines.append(f"lambda = {_fmt(lam)}" + ("" if not is_exact(lam) or isinstance(lam, int)
                                                    or getattr(lam, 'denominator', 0) == 1
                                                    else f" ({float(lam):.12g})"))
            if is_exact(lam):
                lines.append(f"minimal polynomial = {format_poly(minimal_polynomial(lam), 'x')}")
            lines.append(f"entropy = log({_fmt(lam)}) = {self.entropy:.12g}")
            cls = self.spectral.classification
            lines.append(f"class = {cls.kind}")
            if cls.value is not None:
                lines.append(f"F(1/lambda) = {_fmt(cls.value)}")
            if cls.upper_bound is not None:
                lines.append(f"upper bound F(1/lambda) <= {float(cls.upper_bound):.12g}")
            pr = self.spectral.perron
            lines.append(f"perron power iteration = {pr.value:.15g} (converged: {pr.converged}, "
                         f"start spread {pr.start_spread})")
        if self.eigenvector is not None:
            ev = self.eigenvector
            lines.append(f"eigenvector = {ev.method}, exact: {ev.exact}, residual {ev.residual}")
        if self.model is not None:
            m = self.model
            lines.append(f"model slope = {_fmt(m.lam)}, conjugacy residual = {_fmt(m.residual)} "
                         f"on {m.grid_size} grid points (exact: {m.exact})")
            lines.append(f"model unique = {self.unique}")
        else:
            lines.append(f"model = {self.absent_reason}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"


def _config_line(cfg: RunConfig) -> str:
    return " ".join(f"{k}={v}" for k, v in cfg.to_json().items())


def _partition_summary(P: MarkovPartition) -> str:
    return f"{P.kind}: {len(P.points)} points, {len(P.families)} families"


def analyze(cmap: PwAffineMap, P: MarkovPartition, config: RunConfig | None = None,
            name: str | None = None) -> AnalysisReport:
    cfg = config or RunConfig()
    notes = []
    with _stage("validate"):
        val = P.validate(cmap)
        if not val.ok:
            bad = val.failures()[0]
            raise InvalidPartition(f"{bad.name} failed" + (f" at {bad.witness}" if bad.witness else ""),
                                   witness=bad.witness)
    Q = None
    if P.kind == "slack":
        with _stage("refine"):
            try:
                Q = P.refine_to_taut(cmap)
            except UnrepresentableCriticalStructure as e:
                notes.append(f"taut refinement not representable: {e}")
    with _stage("matrix"):
        A = TransitionMatrix(cmap, P)
    with _stage("connectivity"):
        conn = connectivity_report(A, cfg.depth, cfg.horizon)
    with _stage("rome"):
        cert = find_finite_rome(A, cfg.depth)
        path = find_simple_path_to_infinity(A) if cert is None else None
    report = AnalysisReport(cfg, name, val, Q, conn, cert, path, None, notes=notes)
    with _stage("spectral"):
        try:
            sp = spectral_report(A, cert, cfg.tol, cfg.max_depth, cfg.series_length, cfg.seed)
        except Diverging:
            report.absent_reason = NO_MODEL_DIVERGING
            return report
    report.spectral = sp
    cls = sp.classification
    lam = sp.lam_exact if sp.lam_exact is not None else sp.lam
    ev = None
    if cls.kind == RECURRENT:
        with _stage("eigenvector"):
            ev = parry_eigenvector(A, lam, cert, cfg.tol)
        report.eigenvector = ev
        with _stage("model"):
            try:
                report.model = build_constant_slope_model(cmap, P, ev, lam, cfg.grid, cfg.tol, cfg.depth)
            except UnrepresentableCriticalStructure as e:
                report.absent_reason = f"model exists but is not representable here: {e}"
    elif cls.kind == TRANSIENT:
        report.absent_reason = NO_MODEL_TRANSIENT
        if cert is not None:
            # a transient Perron value admits no eigenvector; finding one is an inconsistency
            try:
                ev = _rome_eigenvector(A, lam, cert, is_exact(lam), cfg.tol)
            except (NoClosedForm, SlopewrightError):
                ev = None
    else:
        report.absent_reason = "classification inconclusive; model not attempted"
    if Q is not None:
        with _stage("cross-partition"):
            notes.append(_cross_partition(cmap, Q, cls, lam, cfg))
    with _stage("consistency"):
        check_exclusion(cert, cls, ev, path)
    return report


CROSS_PARTITION_CAP = 600


def _cross_partition(cmap: PwAffineMap, Q: MarkovPartition, cls, lam, cfg: RunConfig) -> str:
    """Classify again on the taut refinement; a disagreement is reported, not resolved."""
    AQ = TransitionMatrix(cmap, Q)
    if AQ.shapes and AQ.interval_count(cfg.depth) > CROSS_PARTITION_CAP:
        return "class on the taut refinement not checked: its truncation is too large"
    try:
        certQ = find_finite_rome(AQ, cfg.depth)
        spQ = spectral_report(AQ, certQ, cfg.tol, cfg.max_depth, cfg.series_length, cfg.seed)
    except (Diverging, NoClosedForm, SlopewrightError) as e:
        return f"class on the taut refinement not checked: {e}"
    lamQ = spQ.lam_exact if spQ.lam_exact is not None else spQ.lam
    same_lam = lamQ == lam if is_exact(lamQ) and is_exact(lam) else abs(to_float(lamQ) - to_float(lam)) <= 1e-8 * to_float(lam)
    if spQ.classification.kind == cls.kind and same_lam:
        return f"class on the taut refinement agrees: {cls.kind} at lambda = {_fmt(lamQ)}"
    return (f"class on the taut refinement DISAGREES: {spQ.classification.kind} at lambda = {_fmt(lamQ)} "
            f"versus {cls.kind} at lambda = {_fmt(lam)}")


def analyze_model(report: AnalysisReport, config: RunConfig | None = None) -> AnalysisReport:
    """Re-run the analysis on the constructed model with the conjugated partition."""
    if report.model is None:
        raise ValueError("the report has no model")
    m = report.model
    return analyze(m.model, m.conjugacy.image_partition(), config or report.config,
                   None if report.name is None else report.name + ":model")
