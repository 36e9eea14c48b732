"""Perron value, first-return series, Vere-Jones classification, the Parry
eigenvector and the stochastic chain built from a (sub)harmonic vector.

Exact arithmetic is used wherever the structure allows it: first-return
counts are exact integers, closed forms are detected over Q, and the
eigenvector is computed over Q or Q(sqrt d) through the acyclic complement
of a finite Rome (first-passage values with geometric family tails).
"""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import algebra as alg
from .errors import (
    Diverging,
    InconsistencyAlarm,
    NoRomeCertificate,
    NotEigenvector,
    NotRecurrent,
    ResidualTooLarge,
)
from .graphs import RomeCertificate
from .numbers import QuadraticSurd, format_exact
from .partition import Finite, Tail
from .symbolic import StructuredMatrix, StructuredRow, Truncation

RECURRENT, TRANSIENT, INCONCLUSIVE = "recurrent", "transient", "inconclusive"

_EXACT = (int, Fraction, QuadraticSurd)


def is_exact(x) -> bool:
    return isinstance(x, _EXACT)


def _log_int(n: int) -> float:
    return math.log(n) if n > 0 else -math.inf


# -- first-return series ----------------------------------------------------------------------


@dataclass
class ClosedForm:
    """Generating function F(z) = sum f_n z^n, either rational num/den or
    algebraic P0 + P1 F + P2 F^2 = 0."""

    kind: str
    num: list = field(default_factory=list)
    den: list = field(default_factory=list)
    relation: tuple = ()
    recurrence: list | None = None  # connection polynomial of (f_n)

    def describe(self) -> str:
        if self.kind == "rational":
            return f"F(z) = ({alg.format_poly(self.num, 'z')}) / ({alg.format_poly(self.den, 'z')})"
        P0, P1, P2 = self.relation
        return (
            f"({alg.format_poly(P2, 'z')})*F^2 + ({alg.format_poly(P1, 'z')})*F"
            f" + ({alg.format_poly(P0, 'z') if P0 else '0'}) = 0"
        )

    def recurrence_text(self) -> str | None:
        if not self.recurrence:
            return None
        C = self.recurrence
        terms = []
        for i in range(1, len(C)):
            c = -C[i]
            if c:
                terms.append(f"{c}*f(n-{i})" if c != 1 else f"f(n-{i})")
        return "f(n) = " + (" + ".join(terms) if terms else "0")

    def to_json(self):
        out = {"kind": self.kind, "text": self.describe()}
        if self.recurrence is not None:
            out["recurrence"] = self.recurrence_text()
        return out


@dataclass
class FirstReturnSeries:
    vertex: object
    counts: list  # counts[n - 1] = f_n
    depth: int
    certified: bool
    closed_form: ClosedForm | None = None
    renewal: list = field(default_factory=list)  # booleans for n = 1..8
    notes: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.counts)

    def f(self, n: int) -> int:
        return self.counts[n - 1]

    def coefficients(self) -> list:
        return [0] + list(self.counts)

    def partial_sums(self, lam) -> list:
        ll = _log_of(lam)
        out, acc = [], []
        for n, c in enumerate(self.counts, start=1):
            acc.append(math.exp(_log_int(c) - n * ll) if c else 0.0)
            out.append(math.fsum(acc))
        return out

    def to_json(self):
        return {
            "vertex": str(self.vertex),
            "counts": [str(c) for c in self.counts],
            "depth": self.depth,
            "certified_depth": self.certified,
            "closed_form": None if self.closed_form is None else self.closed_form.to_json(),
            "renewal_identity": all(self.renewal) if self.renewal else None,
            "notes": self.notes,
        }

    def to_csv(self, lam) -> str:
        sums = self.partial_sums(lam)
        lines = ["n,f_n,partial_sum"]
        lines += [f"{n},{c},{s!r}" for n, (c, s) in enumerate(zip(self.counts, sums), start=1)]
        return "\n".join(lines) + "\n"


def _log_of(lam) -> float:
    if isinstance(lam, Fraction):
        return _log_int(lam.numerator) - _log_int(lam.denominator)
    return math.log(float(lam))


def return_depth(A: StructuredMatrix, vertex, N: int):
    """Truncation depth that contains every first-return loop of length <= N
    at ``vertex``, when the tail templates bound how fast indices can drop.
    Returns None when no such bound is available."""
    if not A.shapes:
        return 0
    templates = A.templates()
    if templates is None:
        return None
    drop = 0
    for t in templates.values():
        for lap in t.laps:
            if lap.finite:
                return None
            for r in lap.ranges:
                if r.lo.q == 0:
                    return None
                if r.lo.q == 1:
                    drop = max(drop, -r.lo.c)
    base = max([t.start for t in templates.values()] + [sh.n0 for sh in A.shapes])
    if isinstance(vertex, Tail):
        base = max(base, vertex.n)
    return base + drop * N


def _distances_to(T: Truncation, r: int) -> list:
    preds = [[] for _ in range(T.size)]
    for u, row in enumerate(T.rows):
        for w, v in row.items():
            if v:
                preds[w].append(u)
    dist = [math.inf] * T.size
    dist[r] = 0
    q = deque([r])
    while q:
        w = q.popleft()
        for u in preds[w]:
            if dist[u] == math.inf:
                dist[u] = dist[w] + 1
                q.append(u)
    return dist


def first_returns_on(T: Truncation, r: int, N: int) -> list:
    """Exact first-return counts f_1..f_N at position r of a truncation,
    pruning states that cannot reach r within the remaining budget."""
    dist = _distances_to(T, r)
    counts = [T.rows[r].get(r, 0)]
    vec = {w: a for w, a in T.rows[r].items() if w != r and a and dist[w] <= N - 1}
    for n in range(2, N + 1):
        counts.append(sum(a * T.rows[u].get(r, 0) for u, a in vec.items()))
        nxt: dict = {}
        for u, a in vec.items():
            for w, b in T.rows[u].items():
                if w == r or not b or dist[w] > N - n:
                    continue
                nxt[w] = nxt.get(w, 0) + a * b
        vec = nxt
    return counts


def renewal_identity(T: Truncation, r: int, counts: list, n_max: int = 8) -> list:
    """For n <= n_max: sum_k f_k (A^{n-k})_rr == (A^n)_rr, exact integers."""
    powers = T.exact_power_entry(r, n_max)
    out = []
    for n in range(1, n_max + 1):
        rhs = sum(counts[k - 1] * powers[n - k] for k in range(1, n + 1) if k <= len(counts))
        out.append(rhs == powers[n])
    return out


def rome_vertex(cert: RomeCertificate):
    fin = sorted((v for v in cert.rome if isinstance(v, Finite)), key=lambda v: v.k)
    if fin:
        return fin[0]
    return sorted(cert.rome, key=lambda v: (v.fam, v.n, v.sub))[0]


def first_return_series(
    A: StructuredMatrix,
    vertex=None,
    N: int = 32,
    cert: RomeCertificate | None = None,
    detect: bool = True,
    depth_cap: int = 6000,
) -> FirstReturnSeries:
    if vertex is None:
        if cert is None:
            raise NoRomeCertificate("first-return series needs a vertex of a verified finite Rome")
        vertex = rome_vertex(cert)
    notes = []
    D = return_depth(A, vertex, N)
    certified = D is not None and cert is not None
    if cert is None:
        notes.append("no Rome certificate: depth chosen by stabilization, not certified")
    if D is None:
        D = _stable_depth(A, vertex, N)
        notes.append(f"no drift bound on tail templates; counts stabilized at depth {D}")
    if A.shapes and A.interval_count(D) > depth_cap:
        D = A.capped_depth(D, depth_cap)
        certified = False
        notes.append(f"truncation capped at depth {D}")
    T = A.truncation(D)
    r = T.index[vertex]
    counts = first_returns_on(T, r, N)
    series = FirstReturnSeries(vertex, counts, D, certified, notes=notes)
    series.renewal = renewal_identity(T, r, counts)
    if detect:
        series.closed_form = detect_closed_form(counts)
    return series


def _stable_depth(A, vertex, N):
    d = max(2 * N, 8)
    prev = None
    while True:
        T = A.truncation(A.capped_depth(d))
        cur = first_returns_on(T, T.index[vertex], N)
        if cur == prev or A.capped_depth(2 * d) == T.depth:
            return T.depth
        prev = cur
        d *= 2


# -- closed forms ----------------------------------------------------------------------------------------


def detect_closed_form(counts: list, window: int = 24, max_order: int = 8) -> ClosedForm | None:
    """Linear recurrence from the first ``window`` terms verified on the
    rest; otherwise a quadratic algebraic relation for F."""
    if len(counts) >= window:
        C, L = alg.berlekamp_massey(counts[:window])
        if L <= max_order and 2 * L < window and alg.recurrence_holds(C, counts, L):
            P, den = alg.rational_gf(counts, C)
            num = alg.trim([Fraction(0)] + P)
            g = alg.pgcd(num, den) if num else [Fraction(1)]
            if len(g) > 1:
                num = alg.pdivmod(num, g)[0]
                den = alg.pdivmod(den, g)[0]
            c0 = den[0]
            num, den = alg.pscale(num, 1 / c0), alg.pscale(den, 1 / c0)
            return ClosedForm("rational", num, den, recurrence=list(C))
    rel = alg.quadratic_relation([0] + list(counts), verify=8)
    if rel is not None:
        return ClosedForm("algebraic", relation=rel)
    return None


@dataclass
class ClosedFormAnalysis:
    """Radius of convergence R, F(R) (None when infinite) and the root z* of
    F(z) = 1 in (0, R] when it exists.  Exact values when identifiable."""

    radius: object  # exact, float, or math.inf
    value_at_radius: object | None
    z_star: object | None

    @property
    def lam(self):
        z = self.z_star if self.z_star is not None else self.radius
        if z == math.inf:
            return None
        return 1 / z


def _partial(counts, z: float) -> float:
    if z <= 0:
        return 0.0
    lz = math.log(z)
    return math.fsum(math.exp(_log_int(c) + n * lz) for n, c in enumerate(counts, start=1) if c)


def _ratio_radius(counts) -> float | None:
    for n in range(len(counts) - 1, 1, -1):
        if counts[n] and counts[n - 1]:
            return counts[n - 1] / counts[n] if counts[n] < 10**300 else math.exp(
                _log_int(counts[n - 1]) - _log_int(counts[n])
            )
    return None


def analyze_closed_form(cf: ClosedForm, counts: list) -> ClosedFormAnalysis:
    if cf.kind == "rational":
        return _analyze_rational(cf)
    return _analyze_algebraic(cf, counts)


def _exact_or_float(p, approx):
    e = alg.exact_root(p, approx)
    return e if e is not None else approx


def _analyze_rational(cf: ClosedForm) -> ClosedFormAnalysis:
    pole_roots = alg.positive_real_roots(cf.den)
    R = min(pole_roots) if pole_roots else math.inf
    G = alg.padd(cf.num, alg.pscale(cf.den, -1))
    cands = [z for z in alg.positive_real_roots(G) if z < R * (1 - 1e-12)]
    if R != math.inf:
        R = _exact_or_float(cf.den, R)
    if not cands:
        return ClosedFormAnalysis(R, None, None)
    z = _exact_or_float(G, min(cands))
    return ClosedFormAnalysis(R, None, z)


def _analyze_algebraic(cf: ClosedForm, counts: list) -> ClosedFormAnalysis:
    P0, P1, P2 = cf.relation
    disc = alg.padd(alg.pmul(P1, P1), alg.pscale(alg.pmul(P0, P2), -4))
    cands = []
    for z in alg.positive_real_roots(disc):
        ze = alg.exact_root(disc, z)
        if ze is not None and alg.root_multiplicity(disc, ze) % 2 == 0:
            continue
        cands.append((z, ze if ze is not None else z, "branch"))
    for z in alg.positive_real_roots(P2):
        ze = alg.exact_root(P2, z)
        cands.append((z, ze if ze is not None else z, "pole"))
    est = _ratio_radius(counts)
    if est is None:
        return ClosedFormAnalysis(math.inf, None, None)
    below = [c for c in cands if 0.8 * est <= c[0] <= 1.02 * est]
    if not below:
        return ClosedFormAnalysis(est, None, None)
    zf, R, kind = max(below, key=lambda c: c[0])
    H = alg.padd(alg.padd(P0, P1), P2)  # F = 1
    if kind == "branch" and alg.peval(P2, R) != 0:
        FR = -alg.peval(P1, R) / (2 * alg.peval(P2, R))
        if float(FR) < 1:
            return ClosedFormAnalysis(R, FR, None)
        if FR == 1:
            return ClosedFormAnalysis(R, FR, R)
    # F reaches 1 before the singularity: pick the series branch root
    for z in alg.positive_real_roots(H):
        if z <= zf * (1 + 1e-12) and abs(_partial(counts, z) - 1) < 0.5:
            return ClosedFormAnalysis(R, None, _exact_or_float(H, z))
    return ClosedFormAnalysis(R, None, None)


# -- classification --------------------------------------------------------------------------------------


@dataclass
class Classification:
    kind: str
    lam: float
    lam_exact: object | None
    value: object | None  # F(1/lambda), exact when known
    partial_sum: float
    tail_bound: float | None
    upper_bound: float | None  # certified upper bound on F(1/lambda) (transient)
    method: str
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "class": self.kind,
            "lambda": self.lam,
            "lambda_exact": None if self.lam_exact is None else format_exact(self.lam_exact),
            "F_at_inverse_lambda": None if self.value is None else _fmt_num(self.value),
            "partial_sum": self.partial_sum,
            "tail_bound": self.tail_bound,
            "upper_bound": None if self.upper_bound is None else _fmt_num(self.upper_bound),
            "method": self.method,
            "notes": self.notes,
        }


def _fmt_num(x):
    return format_exact(x) if is_exact(x) else float(x)


def _tail_estimate(counts, lam, last: int = 8):
    """(partial sum, rho_hat, tail bound) for sum f_n lam^-n."""
    ll = _log_of(lam)
    terms = [math.exp(_log_int(c) - n * ll) if c else 0.0 for n, c in enumerate(counts, start=1)]
    s = math.fsum(terms)
    ratios = []
    for n in range(max(1, len(counts) - last), len(counts)):
        a, b = counts[n - 1], counts[n]
        if a:
            ratios.append(math.exp(_log_int(b) - _log_int(a) - ll) if b else 0.0)
    if not ratios:
        return s, None, None
    rho = max(ratios)
    if terms[-1] == 0.0 and rho == 0.0:
        return s, 0.0, 0.0
    if rho >= 1:
        return s, rho, math.inf
    return s, rho, terms[-1] * rho / (1 - rho)


def classify_vere_jones(series: FirstReturnSeries, lam=None, tol: float = 1e-9) -> Classification:
    """Tri-state decision of F(1/lam) = 1 versus < 1.  With lam None the
    Perron value implied by the closed form is used."""
    cf = series.closed_form
    ana = analyze_closed_form(cf, series.counts) if cf is not None else None
    lam_cf = ana.lam if ana is not None else None
    notes = []
    lam_exact = None
    if lam is None:
        if lam_cf is None:
            raise ValueError("no closed form: pass the Perron value explicitly")
        lam = lam_cf
    if is_exact(lam):
        lam_exact = lam
    elif lam_cf is not None and abs(float(lam) - float(lam_cf)) <= max(tol, 1e-9) * float(lam_cf):
        lam_exact = lam_cf
    lam_f = float(lam)
    s, rho, tail = _tail_estimate(series.counts, lam_exact if lam_exact is not None else lam_f)

    if lam_cf is not None and lam_exact is not None and lam_exact == lam_cf:
        if ana.z_star is not None:
            return Classification(RECURRENT, lam_f, lam_exact, Fraction(1), s, tail, None,
                                  f"closed form ({cf.kind}): F(1/lambda) = 1 exactly", notes)
        FR = ana.value_at_radius
        return Classification(TRANSIENT, lam_f, lam_exact, FR, s, tail, FR,
                              f"closed form ({cf.kind}): F at the radius of convergence < 1", notes)
    if lam_cf is not None and lam_exact is not None and cf.kind == "rational" and lam_exact > lam_cf:
        z = 1 / lam_exact
        val = alg.peval(cf.num, z) / alg.peval(cf.den, z)
        return Classification(TRANSIENT, lam_f, lam_exact, val, s, tail, val,
                              "closed form (rational): lambda above the Perron value", notes)
    if lam_cf is not None and lam_f < float(lam_cf) * (1 - 1e-12):
        notes.append("lambda lies below the Perron value implied by the closed form")
        return Classification(INCONCLUSIVE, lam_f, lam_exact, None, s, tail, None, "closed form", notes)
    # numeric route
    if s >= 1 - tol:
        return Classification(RECURRENT, lam_f, lam_exact, None, s, tail, None,
                              "partial sums reach 1 - tol", notes)
    if rho is not None and rho < 1 - 10 * tol and tail is not None and s + tail < 1:
        return Classification(TRANSIENT, lam_f, lam_exact, None, s, tail, s + tail,
                              "partial sum plus geometric tail bound < 1", notes)
    return Classification(INCONCLUSIVE, lam_f, lam_exact, None, s, tail, None, "partial sums", notes)


# -- Perron value ------------------------------------------------------------------------------------------

_FLOAT_CAP = 1e250


@dataclass
class PerronReport:
    value: float
    converged: bool
    trace: list  # (depth, lambda_N, upper_N)
    exact: object | None = None
    start_spread: float | None = None
    notes: list = field(default_factory=list)

    @property
    def estimates(self) -> list:
        return [lam for _, lam, _ in self.trace]

    @property
    def entropy(self) -> float:
        return math.log(float(self.exact) if self.exact is not None else self.value)

    def to_json(self):
        return {
            "lambda": self.value,
            "lambda_exact": None if self.exact is None else format_exact(self.exact),
            "converged": self.converged,
            "trace": [{"depth": d, "lambda": lam, "upper": up} for d, lam, up in self.trace],
            "five_start_spread": self.start_spread,
            "notes": self.notes,
        }

    def to_csv(self) -> str:
        return "N,lambda_N\n" + "".join(f"{d},{lam!r}\n" for d, lam, _ in self.trace)


class _Sparse:
    def __init__(self, T: Truncation):
        rows, cols, vals = [], [], []
        for i, row in enumerate(T.rows):
            for j, v in row.items():
                if v:
                    rows.append(i)
                    cols.append(j)
                    vals.append(float(v))
        self.n = T.size
        self.rows = np.array(rows, dtype=np.int64)
        self.cols = np.array(cols, dtype=np.int64)
        self.vals = np.array(vals)

    def matvec(self, x):
        return np.bincount(self.rows, weights=self.vals * x[self.cols], minlength=self.n)


def _power(S: _Sparse, x0: np.ndarray, iters: int = 20000, tol: float = 1e-14) -> np.ndarray:
    """Power iteration for A + I (the shift removes periodic oscillation).
    Stops on the relative change of every component: sums of positive terms
    keep small components accurate relative to themselves, which is what the
    Collatz-Wielandt bounds need."""
    x = x0 / x0.max()
    for _ in range(iters):
        y = S.matvec(x) + x
        y /= y.max()
        live = y > 1e-280
        if np.all(np.abs(y[live] - x[live]) <= tol * y[live]):
            return y
        x = y
    return x


def collatz_wielandt(T: Truncation, x: np.ndarray, floor: float = 1e-280):
    """(min, max) of (Ax)_i / x_i over coordinates with x_i > floor.  The
    minimum is a lower bound for the spectral radius of the truncation."""
    lo, hi = math.inf, -math.inf
    for i, row in enumerate(T.rows):
        xi = x[i]
        if xi <= floor:
            continue
        s = math.fsum(float(v) * x[j] for j, v in row.items() if x[j] > floor)
        r = s / xi
        lo, hi = min(lo, r), max(hi, r)
    return lo, hi


def perron_value(
    A: StructuredMatrix,
    tol: float = 1e-12,
    max_depth: int = 1024,
    start_depth: int = 16,
    bound: float = 1e6,
    starts: int = 5,
    seed: int = 0,
    size_cap: int = 4200,
) -> PerronReport:
    """Monotone lower estimates lambda_N on truncations of depth 16, 32, ...

    At each depth the Collatz-Wielandt lower bound of the new Perron vector is
    compared with that of the previous best vector padded by zeros (which is
    again a lower bound for the larger truncation), so the reported sequence
    is non-decreasing by construction.
    """
    notes = []
    trace = []
    depths = [0] if not A.shapes else []
    d = start_depth
    while A.shapes and d <= max_depth:
        depths.append(d)
        d *= 2
    best_x, best_ids, prev = None, None, None
    converged = False
    T = S = None
    for d in depths:
        if A.shapes and A.interval_count(d) > size_cap:
            notes.append(f"stopped before depth {d}: truncation too large")
            break
        Tn = A.truncation(d)
        if Tn.max_entry() > _FLOAT_CAP / max(Tn.size, 1):
            notes.append(f"stopped before depth {d}: entries exceed binary64 range")
            break
        T, S = Tn, _Sparse(Tn)
        x0 = np.ones(T.size)
        padded = None
        if best_x is not None:
            padded = np.zeros(T.size)
            for iid, v in zip(best_ids, best_x):
                padded[T.index[iid]] = v
            x0 = padded + padded.max() * 1e-3
        x = _power(S, x0)
        lo, hi = collatz_wielandt(T, x)
        lam, vec = lo, x
        if padded is not None:
            plo, _ = collatz_wielandt(T, padded)
            if plo > lam:
                lam, vec = plo, padded
        best_x, best_ids = vec, T.ids
        trace.append((T.depth if A.shapes else 0, lam, hi))
        if lam > bound:
            raise Diverging(f"lambda_N = {lam:.6g} exceeds the bound {bound:g}", witness=trace)
        if not A.shapes:
            converged = hi - lo <= tol * max(1.0, lam)
            break
        if prev is not None and lam - prev <= tol * max(1.0, lam):
            converged = True
            break
        prev = lam
    if not trace:
        raise Diverging("no truncation could be evaluated in binary64", witness=notes)
    rep = PerronReport(trace[-1][1], converged, trace, notes=notes)
    if T is not None and starts > 1:
        rep.start_spread = _start_spread(S, starts, seed)
    return rep


def _start_spread(S: _Sparse, starts: int, seed: int) -> float:
    vecs = []
    for i in range(starts):
        rng = np.random.default_rng([seed, i])
        x = _power(S, rng.random(S.n) + 0.05)
        vecs.append(x / x.sum())
    return max(float(np.max(np.abs(a - b))) for a in vecs for b in vecs)


# -- first-passage values through a Rome ----------------------------------------------------------------


class NoClosedForm(Exception):
    """Internal: the exact route does not apply; use the numeric one."""


def _close(a, b, exact: bool, rel: float = 1e-10) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def _sum_geo(rho, m0: int, beta: bool):
    """sum_{m >= m0} rho^m (beta False) or sum m rho^m (beta True)."""
    one = 1
    head = rho ** m0
    if not beta:
        return head / (one - rho)
    return head * (m0 * (one - rho) + rho) / ((one - rho) * (one - rho))


@dataclass
class FamilyValues:
    last: int  # values stored explicitly for cut < n <= last
    values: dict
    geo: dict  # sub key -> (coefficient vector, ratio); valid for n > last


class FirstPassage:
    """Values c_J (vectors over the Rome) with c_R = e_R on the Rome and
    c_J = (1/lam) sum_K A_JK c_K off it.  c_J . x is the weight of paths from
    J to their first Rome vertex, weighted by x there."""

    def __init__(self, A: StructuredMatrix, cert: RomeCertificate, lam, exact: bool | None = None,
                 window: int = 10, verify: int = 6):
        self.A = A
        self.cert = cert
        self.lam = lam
        self.exact = is_exact(lam) if exact is None else exact
        if not self.exact:
            self.lam = float(lam)
        elif isinstance(lam, int):
            self.lam = Fraction(lam)
        self.rome = sorted(cert.rome, key=_sort_key)
        self.pos = {r: i for i, r in enumerate(self.rome)}
        self.window, self.verify = window, verify
        self.nodes: dict = {}
        self.fams: dict = {}
        self._build()

    # vectors
    def _zero(self):
        return [0] * len(self.rome)

    def _unit(self, r):
        v = self._zero()
        v[self.pos[r]] = 1
        return v

    def _num(self, x):
        return x if self.exact else float(x)

    def value(self, iid) -> list:
        if iid in self.pos:
            return self._unit(iid)
        if isinstance(iid, Tail) and iid.n > self.cert.cut[iid.fam]:
            fv = self.fams.get(iid.fam)
            if fv is None:
                raise KeyError(f"class of family {iid.fam} not evaluated yet")
            key = self._sub_key(iid.fam, iid.sub)
            if iid.n <= fv.last:
                got = fv.values.get((iid.n, key))
                if got is None:
                    raise KeyError(f"{iid} not evaluated yet")
                return got
            if fv.geo is None:
                raise KeyError(f"{iid} beyond the evaluated window")
            coef, rho = fv.geo[key]
            p = rho ** iid.n
            return [c * p for c in coef]
        return self.nodes[iid]

    def _sub_key(self, fam, sub):
        return sub if self.A.shapes[fam].rule.constant else 0

    def pattern_sum(self, p) -> list:
        sh = self.A.shapes[p.fam]
        cut = self.cert.cut[p.fam]
        total = self._zero()
        fv = self.fams.get(p.fam)
        last = fv.last if fv is not None and fv.geo is not None else None
        if last is None:
            raise KeyError(f"family {p.fam} has no tail formula yet")
        start = max(p.start, sh.n0)
        for m in range(start, last + 1):
            subs = range(sh.count(m)) if p.sub is None else (p.sub,)
            val = p.at(m)
            for k in subs:
                vec = self.value(Tail(p.fam, m, k))
                total = [a + val * b for a, b in zip(total, vec)]
        m0 = max(start, last + 1)
        if sh.rule.constant:
            subs = range(sh.count(m0)) if p.sub is None else (p.sub,)
            for k in subs:
                coef, rho = fv.geo[k]
                if rho == 0:
                    continue
                s = p.alpha * _sum_geo(rho, m0, False) + (p.beta * _sum_geo(rho, m0, True) if p.beta else 0)
                total = [a + c * s for a, c in zip(total, coef)]
            return total
        if self.exact:
            raise NoClosedForm("variable sub-interval counts have no closed-form tail sum")
        coef, rho = fv.geo[0]
        acc = 0.0
        m = m0
        while True:
            t = p.at(m) * sh.count(m) * float(rho) ** m
            acc += t
            if m > m0 + 50 and t < 1e-18 * max(acc, 1e-300) or m > m0 + 100000:
                break
            m += 1
        return [a + c * acc for a, c in zip(total, coef)]

    def row_value(self, row: StructuredRow) -> list:
        if not row.exact:
            raise NoClosedForm("row is only available through truncations")
        total = self._zero()
        for iid, a in row.explicit.items():
            if a:
                vec = self.value(iid)
                total = [t + a * v for t, v in zip(total, vec)]
        for p in row.patterns:
            vec = self.pattern_sum(p)
            total = [t + v for t, v in zip(total, vec)]
        return total

    def _apply(self, row):
        inv = 1 / self.lam
        return [v * inv for v in self.row_value(row)]

    def _build(self):
        order = sorted(self.cert.levels.items(), key=lambda kv: (kv[1], _node_key(kv[0])))
        for node, _ in order:
            if isinstance(node, tuple) and node and node[0] == "class":
                self._build_class(node[1])
            elif node not in self.pos:
                self.nodes[node] = self._apply(self.A.row(node))

    def _build_class(self, fam: int):
        sh = self.A.shapes[fam]
        cut = self.cert.cut[fam]
        fv = FamilyValues(cut, {}, None)
        self.fams[fam] = fv
        keys = list(range(sh.count(cut + 1))) if sh.rule.constant else [0]
        top = cut + self.window
        for n in range(cut + 1, top + 1):
            fv.last = n
            for k in keys:
                fv.values[(n, k)] = self._apply(self.A.row(Tail(fam, n, k)))
        geo = {}
        for k in keys:
            seq = [fv.values[(n, k)] for n in range(cut + 1, top + 1)]
            fit = self._fit_geometric(seq, top)
            if fit is None:
                raise NoClosedForm(f"family {fam} sub {k}: tail values are not geometric")
            geo[k] = fit
        fv.geo = geo
        # verify the tail formula against the rows beyond the window
        for n in range(top + 1, top + self.verify + 1):
            for k in keys:
                got = self._apply(self.A.row(Tail(fam, n, k)))
                want = self.value(Tail(fam, n, k))
                if not all(_close(a, b, self.exact) for a, b in zip(got, want)):
                    raise NoClosedForm(f"family {fam} sub {k}: tail formula fails at n = {n}")

    def _fit_geometric(self, seq, top):
        last, prev = seq[-1], seq[-2]
        if all(v == 0 for v in last) and all(v == 0 for v in prev):
            return [0] * len(last), 0
        idx = next((i for i, v in enumerate(prev) if v != 0), None)
        if idx is None:
            return None
        rho = last[idx] / prev[idx]
        for a, b in zip(seq[-5:], seq[-4:]):
            if not all(_close(rho * x, y, self.exact) for x, y in zip(a, b)):
                return None
        if not (0 <= float(rho) < 1):
            return None
        p = rho ** top
        return [v / p for v in last], rho

    def family_mass(self, fam: int) -> list:
        """Sum of c_J over the tail vertices of the family beyond the cut."""
        sh = self.A.shapes[fam]
        fv = self.fams[fam]
        total = self._zero()
        cut = self.cert.cut[fam]
        for n in range(cut + 1, fv.last + 1):
            for k in range(sh.count(n)):
                total = [a + b for a, b in zip(total, self.value(Tail(fam, n, k)))]
        m0 = fv.last + 1
        if sh.rule.constant:
            for k, (coef, rho) in fv.geo.items():
                if rho == 0:
                    continue
                s = _sum_geo(rho, m0, False)
                total = [a + c * s for a, c in zip(total, coef)]
            return total
        if self.exact:
            raise NoClosedForm("variable sub-interval counts have no closed-form mass")
        coef, rho = fv.geo[0]
        acc = math.fsum(sh.count(m) * float(rho) ** m for m in range(m0, m0 + 2000))
        return [a + c * acc for a, c in zip(total, coef)]

    def quotient_matrix(self) -> list:
        """K[r][s]: row r of A pushed through first passage, K x = sum_J A_rJ c_J . x."""
        return [self.row_value(self.A.row(r)) for r in self.rome]


def _sort_key(iid):
    if isinstance(iid, Finite):
        return (0, iid.k, 0, 0)
    return (1, iid.fam, iid.n, iid.sub)


def _node_key(node):
    if isinstance(node, tuple) and node and node[0] == "class":
        return (2, node[1], 0, 0)
    return _sort_key(node)


# -- eigenvectors --------------------------------------------------------------------------------------------


@dataclass
class Eigenvector:
    """Normalized eigenvector v (sum v_J = 1) at lam."""

    lam: object
    fp: FirstPassage | None
    x: list
    scale: object
    exact: bool
    residual: float = math.nan
    method: str = ""
    checked_rows: int = 0
    numeric: dict | None = None  # iid -> value for the numeric route
    tails: dict | None = None  # numeric tail fits (fam, sub) -> (coef, rho, last)

    def value(self, iid):
        if self.fp is not None:
            vec = self.fp.value(iid)
            return sum((a * b for a, b in zip(vec, self.x)), 0) * self.scale
        if iid in self.numeric:
            return self.numeric[iid]
        key = (iid.fam, iid.sub)
        coef, rho, last = self.tails.get(key, (0.0, 0.0, 0))
        return coef * rho ** iid.n if iid.n > last else 0.0

    def tail_formula(self, fam: int, sub: int = 0):
        """(a, rho) with v(fam, n, sub) = a * rho**n beyond the explicit range."""
        if self.fp is not None:
            key = self.fp._sub_key(fam, sub)
            coef, rho = self.fp.fams[fam].geo[key]
            a = sum((c * y for c, y in zip(coef, self.x)), 0) * self.scale
            return a, rho
        coef, rho, _ = self.tails[(fam, sub)]
        return coef, rho

    def to_json(self, depth: int = 4):
        out = {
            "lambda": format_exact(self.lam) if is_exact(self.lam) else float(self.lam),
            "exact": self.exact,
            "method": self.method,
            "residual": self.residual,
            "checked_rows": self.checked_rows,
            "entries": {},
            "tails": {},
        }
        A = self.fp.A if self.fp is not None else None
        ids = A.ids(depth) if A is not None else list(self.numeric)[: 4 * depth]
        for iid in ids:
            v = self.value(iid)
            out["entries"][str(iid)] = format_exact(v) if self.exact else float(v)
        shapes = A.shapes if A is not None else ()
        for f, sh in enumerate(shapes):
            subs = range(sh.count(sh.n0)) if sh.rule.constant else [0]
            for k in subs:
                a, rho = self.tail_formula(f, k)
                fmt = format_exact if self.exact else float
                out["tails"][f"T{f}.n.{k if sh.rule.constant else '*'}"] = {"a": fmt(a), "rho": fmt(rho)}
        return out


def _nullspace_numeric(K: list, lam: float):
    M = np.array(K, dtype=float) - lam * np.eye(len(K))
    _, s, vt = np.linalg.svd(M)
    if s[-1] > 1e-8 * max(1.0, lam):
        return []
    return [list(vt[-1])]


def parry_eigenvector(A: StructuredMatrix, lam, cert: RomeCertificate | None = None,
                      tol: float = 1e-9, depth: int = 24) -> Eigenvector:
    """Exact route through the Rome quotient when lam is exact and the
    matrix structure allows closed-form tails; otherwise the same route in
    binary64; without a Rome, truncated power iteration."""
    if cert is not None:
        modes = [True, False] if is_exact(lam) else [False]
        last_err = None
        for exact in modes:
            try:
                return _rome_eigenvector(A, lam, cert, exact, tol)
            except NoClosedForm as e:
                last_err = e
        if last_err is not None and not A.shapes:
            raise ResidualTooLarge(str(last_err))
    return numeric_eigenvector(A, float(lam), depth=depth, tol=tol)


def _rome_eigenvector(A, lam, cert, exact, tol) -> Eigenvector:
    fp = FirstPassage(A, cert, lam, exact=exact)
    K = fp.quotient_matrix()
    lam_v = fp.lam
    if exact:
        M = [[K[i][j] - (lam_v if i == j else 0) for j in range(len(K))] for i in range(len(K))]
        basis = alg.nullspace(M, len(K))
    else:
        basis = _nullspace_numeric(K, lam_v)
    if len(basis) != 1:
        raise NotRecurrent(
            f"lambda = {format_exact(lam) if is_exact(lam) else lam} is not a simple eigenvalue of the Rome quotient"
            f" (nullspace dimension {len(basis)})"
        )
    x = basis[0]
    if sum(float(c) for c in x) < 0:
        x = [-c for c in x]
    if any(float(c) < -1e-12 for c in x):
        raise NotRecurrent("the eigenvector of the Rome quotient changes sign")
    # normalization: sum of all entries
    mass = fp._zero()
    for k in range(A.n_finite):
        mass = [a + b for a, b in zip(mass, fp.value(Finite(k)))]
    for f, sh in enumerate(A.shapes):
        for n in range(sh.n0, cert.cut[f] + 1):
            for k in range(sh.count(n)):
                mass = [a + b for a, b in zip(mass, fp.value(Tail(f, n, k)))]
        mass = [a + b for a, b in zip(mass, fp.family_mass(f))]
    total = sum((a * b for a, b in zip(mass, x)), 0)
    scale = 1 / total
    ev = Eigenvector(lam_v, fp, x, scale, exact, method="rome quotient" + (" (exact)" if exact else " (binary64)"))
    res, rows = eigen_residual(A, ev, cert)
    ev.residual, ev.checked_rows = res, rows
    if res > tol:
        raise ResidualTooLarge(f"eigen-equation residual {res:.3g} exceeds {tol:g}")
    return ev


def eigen_residual(A: StructuredMatrix, ev: Eigenvector, cert: RomeCertificate | None, extra: int = 4):
    """max over checked rows of |sum_J A_IJ v_J - lam v_I| / (lam v_I).
    Rows: every explicit vertex, the Rome, and tail rows across the window
    boundary up to a few indices past it."""
    fp = ev.fp
    rows = [Finite(k) for k in range(A.n_finite)]
    for f, sh in enumerate(A.shapes):
        hi = fp.fams[f].last + extra if fp is not None else cert.cut[f] + extra if cert else sh.n0 + 24
        rows.extend(Tail(f, n, k) for n in range(sh.n0, hi + 1) for k in range(min(sh.count(n), 4)))
    worst = 0.0
    for iid in rows:
        row = A.row(iid)
        if not row.exact:
            continue
        if fp is not None:
            lhs_vec = fp.row_value(row)
            lhs = sum((a * b for a, b in zip(lhs_vec, ev.x)), 0) * ev.scale
        else:
            lhs = _numeric_row_value(A, row, ev)
        rhs = ev.lam * ev.value(iid)
        diff = lhs - rhs
        if ev.exact:
            if diff != 0:
                worst = max(worst, abs(float(diff)) / max(float(rhs), 1e-300))
        else:
            worst = max(worst, abs(float(diff)) / max(abs(float(rhs)), 1e-300))
    return worst, len(rows)


def _numeric_row_value(A, row, ev) -> float:
    acc = [float(a) * float(ev.value(iid)) for iid, a in row.explicit.items()]
    for p in row.patterns:
        sh = A.shapes[p.fam]
        m = max(p.start, sh.n0)
        while True:
            subs = range(sh.count(m)) if p.sub is None else (p.sub,)
            t = math.fsum(p.at(m) * float(ev.value(Tail(p.fam, m, k))) for k in subs)
            acc.append(t)
            if (m > p.start + 60 and abs(t) < 1e-18) or m > p.start + 5000:
                break
            m += 1
    return math.fsum(acc)


def numeric_eigenvector(A: StructuredMatrix, lam: float, depth: int = 24, tol: float = 1e-9,
                        x0: np.ndarray | None = None) -> Eigenvector:
    """Power iteration on the depth truncation, geometric tails fitted per
    family and sub-interval, normalized so the total (with tails) is 1."""
    T = A.truncation(A.capped_depth(depth))
    S = _Sparse(T)
    x = _power(S, np.ones(T.size) if x0 is None else x0)
    values = {iid: float(x[i]) for i, iid in enumerate(T.ids)}
    tails = {}
    total = math.fsum(values.values())
    for f, sh in enumerate(A.shapes):
        subs = range(sh.count(T.depth)) if sh.rule.constant else [None]
        for k in subs:
            kk = 0 if k is None else k
            a, b = values.get(Tail(f, T.depth - 1, kk)), values.get(Tail(f, T.depth, kk))
            if not a or b is None:
                continue
            rho = b / a
            if not 0 <= rho < 1:
                raise ResidualTooLarge(f"family {f}: tail ratio {rho:.3g} is not summable")
            coef = b / rho ** T.depth if rho else 0.0
            if k is None:
                for s in range(sh.count(T.depth)):
                    tails[(f, s)] = (coef, rho, T.depth)
                extra = math.fsum(sh.count(m) * coef * rho**m for m in range(T.depth + 1, T.depth + 2000))
            else:
                tails[(f, k)] = (coef, rho, T.depth)
                extra = coef * rho ** (T.depth + 1) / (1 - rho) if rho else 0.0
            total += extra
    values = {k: v / total for k, v in values.items()}
    tails = {k: (c / total, r, last) for k, (c, r, last) in tails.items()}
    ev = Eigenvector(lam, None, [], 1.0, False, method=f"power iteration (depth {T.depth})",
                     numeric=values, tails=tails)
    # residual on rows well inside the truncation
    worst = 0.0
    inner = [iid for iid in T.ids if not isinstance(iid, Tail) or iid.n <= T.depth - 2]
    for iid in inner:
        row = A.row(iid)
        if not row.exact:
            continue
        lhs = _numeric_row_value(A, row, ev)
        rhs = lam * ev.value(iid)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    ev.residual, ev.checked_rows = worst, len(inner)
    return ev


# -- stochastic chain ---------------------------------------------------------------------------------------


@dataclass
class ReturnStats:
    start: object
    steps: int
    trials: int
    returned: int
    left: int  # trials that left through missing row mass (escape or far jump)
    seed: int

    @property
    def fraction(self) -> float:
        return self.returned / self.trials if self.trials else math.nan

    def to_json(self):
        return {
            "start": str(self.start),
            "steps": self.steps,
            "trials": self.trials,
            "returned": self.returned,
            "return_fraction": self.fraction,
            "left_through_deficit": self.left,
            "seed": self.seed,
        }


class StochasticChain:
    """p_IJ = A_IJ h_J / (lam h_I) for a positive h with A h <= lam h.
    Row deficits (h strictly excessive, or mass beyond ``m_cap``) end a walk."""

    def __init__(self, A: StructuredMatrix, lam, h, m_cap: int = 4096, seed: int = 0):
        self.A = A
        self.lam = lam
        self.h = h
        self.m_cap = m_cap
        self.seed = seed
        self._rows: dict = {}

    def _prob(self, a, hJ, hI) -> float:
        if is_exact(hJ) and is_exact(hI) and is_exact(self.lam):
            return float(a * hJ / (self.lam * hI))
        return float(a) * float(hJ) / (float(self.lam) * float(hI))

    def row(self, I):
        got = self._rows.get(I)
        if got is not None:
            return got
        hI = self.h(I)
        targets, probs = [], []
        row = self.A.row(I)
        if row.exact:
            entries = list(row.explicit.items())
            for iid, a in entries:
                if a:
                    targets.append(iid)
                    probs.append(self._prob(a, self.h(iid), hI))
            for p in row.patterns:
                sh = self.A.shapes[p.fam]
                m = max(p.start, sh.n0)
                while m <= self.m_cap:
                    subs = range(sh.count(m)) if p.sub is None else (p.sub,)
                    cell = 0.0
                    for k in subs:
                        J = Tail(p.fam, m, k)
                        q = self._prob(p.at(m), self.h(J), hI)
                        targets.append(J)
                        probs.append(q)
                        cell += q
                    if m > p.start + 40 and cell < 1e-18:
                        break
                    m += 1
        else:
            for iid, a in self.A.truncated_row(I, self.m_cap).items():
                if a:
                    targets.append(iid)
                    probs.append(self._prob(a, self.h(iid), hI))
        cum = list(np.cumsum(probs)) if probs else []
        got = (targets, cum)
        self._rows[I] = got
        return got

    def row_sum(self, I) -> float:
        _, cum = self.row(I)
        return float(cum[-1]) if cum else 0.0

    def sample_return(self, start, steps: int, trials: int, seed: int | None = None) -> ReturnStats:
        """Fraction of walks from ``start`` that come back within ``steps``.
        Trial t uses the generator seeded by (seed, t)."""
        seed = self.seed if seed is None else seed
        returned = left = 0
        for t in range(trials):
            rng = np.random.default_rng([seed, t])
            s = start
            for _ in range(steps):
                targets, cum = self.row(s)
                i = bisect.bisect_right(cum, rng.random())
                if i >= len(targets):
                    left += 1
                    break
                s = targets[i]
                if s == start:
                    returned += 1
                    break
        return ReturnStats(start, steps, trials, returned, left, seed)

    def n_step_check(self, I, depth: int, n: int = 4) -> object:
        """max_J |p^(n)_IJ - A^n_IJ h_J / (lam^n h_I)| on the depth truncation,
        in exact arithmetic when h and lam are exact."""
        T = self.A.truncation(depth)
        i = T.index[I]
        hs = [self.h(iid) for iid in T.ids]
        exact = all(is_exact(v) for v in hs) and is_exact(self.lam)
        lam = self.lam if exact else float(self.lam)
        P = [{j: (a * hs[j] / (lam * hs[r]) if exact else float(a) * float(hs[j]) / (lam * float(hs[r])))
              for j, a in row.items() if a} for r, row in enumerate(T.rows)]
        vec = {i: 1}
        cnt = {i: 1}
        for _ in range(n):
            nv, nc = {}, {}
            for u, pu in vec.items():
                for w, q in P[u].items():
                    nv[w] = nv.get(w, 0) + pu * q
            for u, c in cnt.items():
                for w, a in T.rows[u].items():
                    nc[w] = nc.get(w, 0) + c * a
            vec, cnt = nv, nc
        worst = 0
        for j, c in cnt.items():
            want = c * hs[j] / (lam ** n * hs[i]) if exact else c * float(hs[j]) / (lam ** n * float(hs[i]))
            d = abs(vec.get(j, 0) - want)
            worst = max(worst, d) if exact else max(worst, float(d))
        return worst


def chain_from_eigenvector(A: StructuredMatrix, ev: Eigenvector, seed: int = 0, tol: float = 1e-9) -> StochasticChain:
    if not (ev.residual <= tol):
        raise NotEigenvector(f"eigen-equation residual {ev.residual:.3g} exceeds {tol:g}")
    return StochasticChain(A, ev.lam, ev.value, seed=seed)


def excessive_chain(A: StructuredMatrix, cert: RomeCertificate, lam, seed: int = 0, m_cap: int = 4096) -> StochasticChain:
    """Chain from h = (first passage to the Rome) . x, x a positive Perron
    vector of the Rome quotient at lam.  Valid for every lam at or above the
    Perron value: return probabilities equal first-return weights at 1/lam."""
    exact = is_exact(lam)
    try:
        fp = FirstPassage(A, cert, lam, exact=exact)
    except NoClosedForm:
        fp = FirstPassage(A, cert, float(lam), exact=False)
    if len(fp.rome) == 1:
        x = [1]
    else:
        K = np.array([[float(c) for c in row] for row in fp.quotient_matrix()])
        w, V = np.linalg.eig(K)
        vec = np.abs(np.real(V[:, int(np.argmax(np.real(w)))]))
        if np.any(vec <= 0):
            raise NotEigenvector("Rome quotient has no positive Perron vector")
        x = [float(c) for c in vec]

    def h(iid):
        vec = fp.value(iid)
        return sum((a * b for a, b in zip(vec, x)), 0)

    return StochasticChain(A, fp.lam, h, m_cap=m_cap, seed=seed)


# -- report -------------------------------------------------------------------------------------------------


@dataclass
class SpectralReport:
    perron: PerronReport
    series: FirstReturnSeries | None
    classification: Classification
    lam: float
    lam_exact: object | None
    notes: list = field(default_factory=list)

    @property
    def entropy(self) -> float:
        return math.log(self.lam)

    def minimal_polynomial(self) -> str | None:
        if self.lam_exact is None:
            return None
        return alg.format_poly(alg.minimal_polynomial(self.lam_exact), "x")

    def to_json(self):
        return {
            "lambda": self.lam,
            "lambda_exact": None if self.lam_exact is None else format_exact(self.lam_exact),
            "minimal_polynomial": self.minimal_polynomial(),
            "entropy": self.entropy,
            "perron": self.perron.to_json(),
            "first_return": None if self.series is None else self.series.to_json(),
            "vere_jones": self.classification.to_json(),
            "notes": self.notes,
        }


def spectral_report(A: StructuredMatrix, cert: RomeCertificate | None, tol: float = 1e-9,
                    max_depth: int = 1024, N: int = 32, seed: int = 0) -> SpectralReport:
    perron = perron_value(A, max_depth=max_depth, seed=seed)
    notes = []
    series = None
    if cert is not None:
        series = first_return_series(A, None, N, cert)
    elif not A.shapes:
        series = first_return_series(A, Finite(0), N)
    cls = None
    if series is not None and series.closed_form is not None:
        cls = classify_vere_jones(series, None, tol)
        if cls.kind == INCONCLUSIVE:
            cls = None
    if cls is not None:
        lam_exact = cls.lam_exact
        lam = float(lam_exact)
        lam_max = max(perron.estimates)
        if lam_max > lam * (1 + 1e-9):
            raise InconsistencyAlarm(
                f"truncation estimate {lam_max!r} exceeds the closed-form Perron value {lam!r}",
                witness=perron.trace,
            )
        if perron.converged and abs(perron.value - lam) > 1e-8 * lam:
            raise InconsistencyAlarm(
                f"power iteration converged to {perron.value!r}, closed form gives {lam!r}",
                witness=perron.trace,
            )
        perron.exact = lam_exact
    else:
        if not perron.converged:
            notes.append("Perron value not converged and no closed form: classification is numeric")
        lam = perron.value
        lam_exact = None
        if series is not None:
            cls = classify_vere_jones(series, lam, tol)
        else:
            cls = Classification(INCONCLUSIVE, lam, None, None, math.nan, None, None,
                                 "no Rome certificate: first-return series unavailable")
    return SpectralReport(perron, series, cls, lam, lam_exact, notes)


def check_exclusion(cert: RomeCertificate | None, cls: Classification, ev: Eigenvector | None, path=None):
    """Raise InconsistencyAlarm when results contradict each other: a finite
    Rome together with a transient eigenvalue (an eigenvector certified at a
    transient lam), or a finite Rome together with a simple path to infinity."""
    if cert is not None and path is not None:
        raise InconsistencyAlarm("finite Rome and a simple path to infinity in the same graph",
                                 witness=(cert.describe(), path))
    if cert is not None and cls.kind == TRANSIENT and ev is not None and ev.residual <= 1e-9:
        raise InconsistencyAlarm(
            "finite Rome, transient classification and an eigenvector at the same lambda",
            witness=(cert.describe(), cls.lam),
        )
