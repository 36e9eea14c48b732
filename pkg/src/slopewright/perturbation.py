"""Global window perturbations and certificates for finitely generated maps.

A window perturbation of (f, P) replaces the graph of f over a partition
interval I by another graph with the same image f(I), keeping the values at
the ends of I inside P.  Accordions fold a lap into m equal-width laps; a
geometric accordion fills I with countably many laps accumulating at one end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    EndpointMismatch,
    InvalidMap,
    NotPAffine,
    SlopewrightError,
    SpecFormatError,
    UnrepresentableCriticalStructure,
    WindowImageMismatch,
)
from .graphs import ConnectivityReport, RomeCertificate, connectivity_report, find_finite_rome, verify_rome
from .intervalmap import Geo, LapRule, PwAffineMap, TailFamily
from .numbers import exact, format_exact
from .partition import Check, Finite, MarkovPartition, Tail, parse_interval_id
from .symbolic import TransitionMatrix, zero_pattern_equal

# -- window specs --------------------------------------------------------------------------


@dataclass(frozen=True)
class Keep:
    def to_json(self):
        return "keep"


@dataclass(frozen=True)
class Accordion:
    m: int

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise EndpointMismatch(f"accordion lap count must be odd and positive, got {self.m}")

    def to_json(self):
        return {"kind": "accordion", "m": self.m}


@dataclass(frozen=True)
class GeometricAccordion:
    """Laps accumulating at ``anchor`` ("auto" picks the end of the window that
    is an accumulation point of P).  With phase "constant" the cell boundaries
    all map to f(anchor), so the far end of the window changes value; with
    "matching" the boundary values approach f(anchor) geometrically and the far
    end keeps f's value."""

    ratio: Fraction
    anchor: str = "auto"
    phase: str = "constant"
    laps: int = 2

    def __post_init__(self):
        object.__setattr__(self, "ratio", exact(self.ratio))
        if not 0 < self.ratio < 1:
            raise SpecFormatError("geometric accordion ratio must lie in (0, 1)")
        if self.anchor not in ("auto", "left", "right"):
            raise SpecFormatError("anchor must be auto, left or right")
        if self.phase not in ("constant", "matching"):
            raise SpecFormatError("phase must be constant or matching")
        if self.laps < 2 or self.laps % 2:
            raise EndpointMismatch("geometric accordion cells need an even number of laps")

    def to_json(self):
        out = {"kind": "geometric", "ratio": format_exact(self.ratio)}
        if self.anchor != "auto":
            out["anchor"] = self.anchor
        if self.phase != "constant":
            out["phase"] = self.phase
        if self.laps != 2:
            out["laps"] = self.laps
        return out


KEEP = Keep()


def parse_window(obj):
    if obj == "keep" or obj is None:
        return KEEP
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecFormatError(f"bad window spec {obj!r}")
    kind = obj["kind"]
    if kind == "keep":
        return KEEP
    if kind == "accordion":
        return Accordion(int(obj["m"]))
    if kind == "geometric":
        return GeometricAccordion(exact(str(obj["ratio"])), obj.get("anchor", "auto"),
                                  obj.get("phase", "constant"), int(obj.get("laps", 2)))
    raise SpecFormatError(f"unknown window kind {kind!r}")


def parse_perturbation(obj: dict) -> dict:
    if not isinstance(obj, dict):
        raise SpecFormatError("perturbation spec must be an object keyed by interval id")
    out = {}
    for k, v in obj.items():
        try:
            iid = parse_interval_id(k)
        except ValueError as e:
            raise SpecFormatError(str(e)) from None
        out[iid] = parse_window(v)
    return out


def perturbation_to_json(spec: dict) -> dict:
    return {str(k): w.to_json() for k, w in spec.items() if not isinstance(w, Keep)}


# -- the operator ---------------------------------------------------------------------------


def as_slack(P: MarkovPartition) -> MarkovPartition:
    return MarkovPartition(P.points, P.families, P.accumulation, "slack")


def _window_region(f: PwAffineMap, a, b):
    i = f.region_index(a)
    r = f.regions[i]
    if r.tail is not None:
        raise InvalidMap(f"window [{a}, {b}] lies inside a tail family of the map", witness=a)
    return i


def window_perturb(f: PwAffineMap, P: MarkovPartition, spec: dict) -> PwAffineMap:
    """The perturbed map g; windows not named in ``spec`` are kept."""
    if P.kind != "taut":
        raise SpecFormatError("window perturbations start from a taut partition")
    spec = {k: v for k, v in spec.items() if not isinstance(v, Keep)}
    if not spec:
        return f
    skel = dict(f.skeleton)
    drop = set()
    extra = {}
    tails = list(f.tails)
    joins = list(f.joins)
    acc = set(P.accumulation)
    for iid, w in sorted(spec.items(), key=lambda kv: P.interval_bounds(kv[0])[0]):
        a, b = P.interval_bounds(iid)
        _window_region(f, a, b)
        ya, yb = f(a), f(b)
        inner = [x for x in skel if a < x < b]
        if isinstance(w, Accordion):
            drop.update(inner)
            # window ends inside an affine piece of f become breakpoints
            for e, ye in ((a, ya), (b, yb)):
                if e not in skel:
                    extra[e] = ye
            for j in range(1, w.m):
                x = a + (b - a) * Fraction(j, w.m)
                extra[x] = yb if j % 2 else ya
            continue
        # geometric accordion
        side = w.anchor
        if side == "auto":
            ends = [e for e, s in ((a, "left"), (b, "right")) if e in acc]
            if len(ends) != 1:
                raise EndpointMismatch(f"window {iid}: give the accumulation end explicitly", witness=iid)
            side = "left" if ends[0] == a else "right"
        anchor, outer = (a, b) if side == "left" else (b, a)
        c, far = f(anchor), f(outer)
        if c == far:
            raise EndpointMismatch(f"window {iid}: f takes the same value at both ends", witness=iid)
        if w.phase == "constant":
            yA, yB = Geo(c, 0, w.ratio), Geo(c, far - c, w.ratio)
            outer_val = c
        else:
            yA, yB = Geo(c, far - c, w.ratio), Geo(c, 0, w.ratio)
            outer_val = far
        if outer_val != far:
            if outer not in (0, 1):
                raise EndpointMismatch(
                    f"window {iid}: the far end {outer} would change value and break continuity; "
                    "use phase 'matching'", witness=outer)
        drop.update(inner)
        if outer in skel and skel[outer] != outer_val:
            drop.add(outer)
        tails.append(TailFamily(anchor, outer - anchor, w.ratio, 0, yA, yB,
                                None if w.laps == 2 else LapRule("const", w.laps, 0)))
        if anchor not in dict(joins):
            joins.append((anchor, c))
    bps = [(x, y) for x, y in f.breakpoints if x not in drop]
    bps += [(x, y) for x, y in extra.items()]
    bps.sort(key=lambda t: t[0])
    outers = {t.outer for t in tails}
    bps = [(x, y) for x, y in bps if not (x in outers and x in drop)]
    g = PwAffineMap(bps, tails, joins)
    _check_windows(f, g, P, spec)
    return g


def _check_windows(f, g, P, spec):
    for iid in spec:
        a, b = P.interval_bounds(iid)
        if f.image_of_interval(a, b) != g.image_of_interval(a, b):
            raise WindowImageMismatch(f"window {iid}: image changed", witness=iid)
        for e in (a, b):
            if not P.contains(g(e)):
                raise EndpointMismatch(f"window {iid}: g({e}) = {g(e)} is not in P", witness=e)


def random_accordion_spec(P: MarkovPartition, rng, max_m: int = 9, depth: int = 4, p: float = 0.5) -> dict:
    """A random accordion spec on the finite intervals and the first family cells."""
    ids = [Finite(k) for k in range(P.n_finite)]
    for fi, fam in enumerate(P.families):
        for n in range(fam.n0, fam.n0 + depth):
            ids.extend(Tail(fi, n, k) for k in range(fam.count(n)))
    spec = {}
    for iid in ids:
        if rng.random() < p:
            spec[iid] = Accordion(int(rng.choice(range(1, max_m + 1, 2))))
    return spec


# -- certificates --------------------------------------------------------------------------


def p_affine_witness(f: PwAffineMap, P: MarkovPartition):
    """None when f is affine on every interval of P, else a witness."""
    for k, (a, b) in enumerate(P.finite_intervals):
        r = f.regions[f.region_index(a)]
        if r.tail is not None or r.hi < b:
            return Finite(k)
    for fi, fam in enumerate(P.families):
        lo, hi = fam.span()
        r = f.regions[f.region_index(lo)]
        if r.tail is None:
            if r.hi < hi:
                return Tail(fi, fam.n0, 0)
            continue
        t = f.tails[r.tail]
        same_cells = (t.anchor, t.coeff, t.ratio) == (fam.anchor, fam.coeff, fam.ratio) and t.n0 <= fam.n0
        if not same_cells or t.rule != fam.rule or (r.lo, r.hi) != (lo, hi):
            return Tail(fi, fam.n0, 0)
    return None


@dataclass
class MixingCertificate:
    connectivity: ConnectivityReport
    rome: RomeCertificate

    def to_json(self):
        return {"connectivity": self.connectivity.to_json(), "rome": self.rome.to_json()}


def certify_mixing(f: PwAffineMap, P: MarkovPartition, depth: int = 16, horizon: int = 64):
    """Irreducible + aperiodic + finite Rome, on a partition on which f is affine."""
    w = p_affine_witness(f, P)
    if w is not None:
        raise NotPAffine(f"map is not affine on partition interval {w}", witness=w)
    A = TransitionMatrix(f, P)
    conn = connectivity_report(A, depth, horizon)
    if not (conn.irreducible == "pass" and conn.aperiodic == "pass"):
        return None
    cert = find_finite_rome(A, depth)
    if cert is None:
        return None
    return MixingCertificate(conn, cert)


def _parent(P: MarkovPartition, Q: MarkovPartition, iid):
    a, b = Q.interval_bounds(iid)
    return P.locate_interval((a + b) / 2)


def lifted_rome(P: MarkovPartition, Q: MarkovPartition, rome, depth: int):
    """Q-intervals whose P-parent lies in ``rome`` (explicit part up to depth)."""
    out = [Finite(k) for k in range(Q.n_finite) if _parent(P, Q, Finite(k)) in rome]
    for fi, fam in enumerate(Q.families):
        for n in range(fam.n0, depth + 1):
            for k in range(fam.count(n)):
                if _parent(P, Q, Tail(fi, n, k)) in rome:
                    out.append(Tail(fi, n, k))
    return out


def verify_lifted_rome(g: PwAffineMap, P: MarkovPartition, Q: MarkovPartition, cert_P: RomeCertificate,
                       depth: int = 16):
    AQ = TransitionMatrix(g, Q)
    templates = AQ.templates()
    if templates is None:
        return None
    cut = {}
    for fi, sh in enumerate(AQ.shapes):
        starts = [t.start for (h, _), t in templates.items() if h == fi]
        cut[fi] = max([depth, sh.n0] + [s - 1 for s in starts])
    lifted = lifted_rome(P, Q, set(cert_P.rome), max(cut.values(), default=depth))
    return verify_rome(AQ, lifted, cut, templates)


@dataclass
class FgCertificate:
    checks: list = field(default_factory=list)
    taut: MarkovPartition | None = None
    refinement: MarkovPartition | None = None
    mixing_f: MixingCertificate | None = None
    mixing_g: MixingCertificate | None = None

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.ok for c in self.checks)

    def add(self, name, ok, witness=None):
        self.checks.append(Check(name, bool(ok), None if witness is None else str(witness)))

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def to_json(self):
        return {
            "certified": self.ok,
            "checks": [c.to_json() for c in self.checks],
            "rome_f": None if self.mixing_f is None else self.mixing_f.rome.describe(),
            "rome_g": None if self.mixing_g is None else self.mixing_g.rome.describe(),
        }

    def summary(self) -> str:
        lines = [f"finitely generated: {'certified' if self.ok else 'not certified'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.name}" + (f" ({c.witness})" if c.witness and not c.ok else ""))
        return "\n".join(lines)


def _geometric_windows(g: PwAffineMap, P: MarkovPartition) -> bool:
    """Every critical family of g fills one partition interval and accumulates at its end."""
    crit = g.critical_points()
    for cf in crit.families:
        t = g.tails[cf.tail]
        lo, hi = sorted((t.anchor, t.outer))
        iid = P.locate_interval((lo + hi) / 2)
        if iid is None or P.interval_bounds(iid) != (lo, hi):
            return False
    return True


def certify_finitely_generated(f: PwAffineMap, P: MarkovPartition, g: PwAffineMap,
                               depth: int = 16, horizon: int = 64) -> FgCertificate:
    cert = FgCertificate()
    crit_f = f.critical_points()
    cert.add("crit(f) finite", not crit_f.families)
    cert.add("acc(P) finite", True)
    try:
        T = P if P.kind == "taut" else P.refine_to_taut(f)
        cert.taut = T
        cert.mixing_f = certify_mixing(f, T, depth, horizon)
        cert.add("mixing(f)", cert.mixing_f is not None)
    except SlopewrightError as e:
        cert.add("mixing(f)", False, e)
    S = as_slack(P)
    rep = S.validate(g)
    cert.add("windows: P slack for g", rep.ok, None if rep.ok else rep.failures()[0].name)
    images = all(f.image_of_interval(a, b) == g.image_of_interval(a, b) for a, b in P.finite_intervals)
    cert.add("windows: images preserved", images)
    cert.add("crit(g) finite in each window or a geometric window", _geometric_windows(g, P))
    try:
        Q = S.refine_to_taut(g)
        cert.refinement = Q
    except UnrepresentableCriticalStructure as e:
        cert.add("taut refinement Q", False, e)
        return cert
    w = p_affine_witness(g, Q)
    cert.add("g is Q-affine", w is None, w)
    try:
        rome_P = find_finite_rome(TransitionMatrix(g, S), depth)
        if rome_P is not None:
            lifted = verify_lifted_rome(g, S, Q, rome_P, depth)
            cert.add("finite Rome lifts from P to Q", lifted is not None)
        else:
            cert.add("finite Rome lifts from P to Q", False, "no finite Rome for g on P")
        cert.mixing_g = certify_mixing(g, Q, depth, horizon) if w is None else None
        cert.add("mixing(g)", cert.mixing_g is not None)
    except SlopewrightError as e:
        cert.add("mixing(g)", False, e)
    return cert


def zero_patterns_agree(f: PwAffineMap, g: PwAffineMap, P: MarkovPartition, depth: int = 16):
    return zero_pattern_equal(TransitionMatrix(f, P), TransitionMatrix(g, as_slack(P)), depth)
