"""Command line front end.

Exit codes: 0 success, 1 invalid input or failed validation, 2 mathematically
inconclusive result, 3 internal inconsistency alarm.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import gallery as gallery_mod
from . import io
from .config import RunConfig
from .errors import InconsistencyAlarm, SlopewrightError, SpecFormatError
from .graphs import find_finite_rome, find_simple_path_to_infinity
from .numbers import format_exact, parse_exact
from .partition import parse_interval_id
from .perturbation import as_slack, certify_finitely_generated, parse_perturbation, window_perturb
from .slopemodel import analyze as run_analysis
from .spectral import INCONCLUSIVE, excessive_chain, is_exact, rome_vertex, spectral_report
from .svg import analysis_svg, psi_polyline
from .symbolic import TransitionMatrix, itinerary as run_itinerary, realize_path, to_csv, to_dot

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_ALARM = 0, 1, 2, 3


class Spec:
    def __init__(self, cmap, partition, perturb, name):
        self.map = cmap
        self.partition = partition
        self.perturb = perturb
        self.name = name

    def need_partition(self):
        if self.partition is None:
            raise SpecFormatError("the input document has no partition")
        return self.partition


def load_spec(ref: str) -> Spec:
    """A path to a JSON spec, or gallery:NAME."""
    if ref.startswith("gallery:"):
        name = ref.split(":", 1)[1]
        try:
            inst = gallery_mod.get(name)
        except KeyError as e:
            raise SpecFormatError(str(e.args[0])) from None
        return Spec(inst.map, inst.partition, inst.perturb, inst.name)
    path = Path(ref)
    if not path.exists():
        raise SpecFormatError(f"no such input file: {ref}")
    cmap, P, perturb, name = io.parse(path.read_text())
    return Spec(cmap, P, perturb, name or path.stem)


def _json_default(o):
    if hasattr(o, "to_json"):
        return o.to_json()
    try:
        return format_exact(o)
    except (TypeError, ValueError):
        return str(o)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _emit(cfg: RunConfig, payload: dict, text: str):
    if cfg.output == "json":
        click.echo(_dump({"config": cfg.to_json(), **payload}), nl=False)
    else:
        header = "# config: " + " ".join(f"{k}={v}" for k, v in cfg.to_json().items())
        click.echo(text if text.startswith("# config") else header + "\n" + text, nl=False)


def run_options(f):
    opts = [
        click.option("--depth", type=int, default=16, show_default=True, envvar="SLOPEWRIGHT_DEPTH",
                     help="Truncation depth for matrices and graphs."),
        click.option("--horizon", type=int, default=64, show_default=True, envvar="SLOPEWRIGHT_HORIZON",
                     help="Path length horizon for the leo check."),
        click.option("--tol", type=float, default=1e-9, show_default=True, envvar="SLOPEWRIGHT_TOL"),
        click.option("--max-depth", type=int, default=1024, show_default=True, envvar="SLOPEWRIGHT_MAX_DEPTH",
                     help="Largest truncation used by power iteration."),
        click.option("--seed", type=int, default=0, show_default=True, envvar="SLOPEWRIGHT_SEED"),
        click.option("--format", "output", type=click.Choice(["text", "json"]), default="text",
                     show_default=True, envvar="SLOPEWRIGHT_FORMAT"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _config(kw) -> RunConfig:
    keys = ("depth", "horizon", "tol", "max_depth", "seed", "output")
    vals = {k: kw.pop(k) for k in keys}
    try:
        return RunConfig(**vals)
    except ValueError as e:
        raise SpecFormatError(str(e)) from None


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except InconsistencyAlarm as e:
            click.echo(f"inconsistency alarm: {e}", err=True)
            sys.exit(EXIT_ALARM)
        except (SlopewrightError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INVALID)
        sys.exit(code or EXIT_OK)

    return wrapper


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Analyze countably piecewise affine Markov interval maps."""


@main.command()
@click.argument("spec")
@run_options
@guarded
def validate(spec, **kw):
    """Check that the partition is a Markov partition for the map."""
    cfg = _config(kw)
    s = load_spec(spec)
    rep = s.need_partition().validate(s.map)
    lines = [f"partition kind: {rep.kind}"]
    for c in rep.checks:
        lines.append(f"[{'ok' if c.ok else 'FAIL'}] {c.name}" + (f"  witness: {c.witness}" if c.witness else ""))
    lines.append(f"result: {'pass' if rep.ok else 'fail'}")
    _emit(cfg, {"validation": rep.to_json()}, "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_INVALID


def _matrix(s: Spec):
    return TransitionMatrix(s.map, s.need_partition())


@main.command()
@click.argument("spec")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), help="Write the truncation as CSV.")
@run_options
@guarded
def matrix(spec, csv_out, **kw):
    """Print the truncated transition matrix and its row patterns."""
    cfg = _config(kw)
    s = load_spec(spec)
    A = _matrix(s)
    T = A.truncation(A.capped_depth(cfg.depth))
    rows = {}
    lines = [f"truncation depth {T.depth}: {T.size} intervals"]
    for i, iid in enumerate(T.ids):
        row = {str(T.ids[j]): v for j, v in sorted(T.rows[i].items()) if v}
        rows[str(iid)] = row
        lines.append(f"{iid} -> " + " ".join(f"{k}:{v}" for k, v in row.items()))
    templates = A.templates()
    tdesc = [] if templates is None else [t.describe() for _, t in sorted(templates.items(), key=lambda kv: str(kv[0]))]
    if tdesc:
        lines.append("tail row patterns:")
        lines += ["  " + d for d in tdesc]
    if csv_out:
        Path(csv_out).write_text(to_csv(T))
        lines.append(f"csv written to {csv_out}")
    _emit(cfg, {"depth": T.depth, "ids": [str(i) for i in T.ids], "rows": rows, "templates": tdesc},
          "\n".join(lines) + "\n")


@main.command()
@click.argument("spec")
@click.option("--dot", "dot_out", type=click.Path(dir_okay=False), help="Write DOT here instead of stdout.")
@run_options
@guarded
def graph(spec, dot_out, **kw):
    """Export the truncated transition graph as DOT, Rome highlighted."""
    cfg = _config(kw)
    s = load_spec(spec)
    A = _matrix(s)
    cert = find_finite_rome(A, cfg.depth)
    T = A.truncation(A.capped_depth(cfg.depth))
    dot = to_dot(T, cert.rome if cert else ())
    if dot_out:
        Path(dot_out).write_text(dot)
        click.echo(f"graph with {T.size} vertices written to {dot_out}")
    else:
        click.echo(dot, nl=False)


@main.command()
@click.argument("spec")
@run_options
@guarded
def rome(spec, **kw):
    """Search for a finite Rome of the transition graph."""
    cfg = _config(kw)
    s = load_spec(spec)
    A = _matrix(s)
    cert = find_finite_rome(A, cfg.depth)
    if cert is None:
        path = find_simple_path_to_infinity(A)
        text = "rome: not found\n" + (f"simple path to infinity: {path}\n" if path else "")
        _emit(cfg, {"rome": None, "path_to_infinity": None if path is None else path.to_json()}, text)
        return EXIT_INCONCLUSIVE
    text = f"rome: {', '.join(cert.describe())}\nlevels: {len(set(cert.levels.values()))} ranks\n"
    _emit(cfg, {"rome": cert.to_json()}, text)


@main.command()
@click.argument("spec")
@run_options
@guarded
def classify(spec, **kw):
    """Perron value and Vere-Jones class."""
    cfg = _config(kw)
    s = load_spec(spec)
    A = _matrix(s)
    cert = find_finite_rome(A, cfg.depth)
    rep = spectral_report(A, cert, cfg.tol, cfg.max_depth, 32, cfg.seed)
    cls = rep.classification
    lam = rep.lam_exact if rep.lam_exact is not None else rep.lam
    lines = [f"lambda = {format_exact(lam) if is_exact(lam) else repr(lam)}",
             f"entropy = {rep.entropy!r}",
             f"class = {cls.kind}"]
    if rep.minimal_polynomial():
        lines.append(f"minimal polynomial = {rep.minimal_polynomial()}")
    if cls.value is not None:
        lines.append(f"F(1/lambda) = {format_exact(cls.value) if is_exact(cls.value) else cls.value}")
    lines.append(f"partial sum = {cls.partial_sum!r}")
    if cls.upper_bound is not None:
        lines.append(f"upper bound F(1/lambda) <= {float(cls.upper_bound)!r}")
    lines.append(f"method = {cls.method}")
    for d, lam_n, _ in rep.perron.trace:
        lines.append(f"  lambda_{d} = {float(lam_n)!r}")
    _emit(cfg, {"spectral": rep.to_json(), "rome": None if cert is None else cert.describe()}, "\n".join(lines) + "\n")
    return EXIT_INCONCLUSIVE if cls.kind == INCONCLUSIVE else EXIT_OK


@main.command()
@click.argument("spec")
@click.option("--svg", "svg_out", type=click.Path(dir_okay=False), help="Plot map, conjugacy and model.")
@click.option("--model", "model_out", type=click.Path(dir_okay=False), help="Write the model as a map spec.")
@run_options
@guarded
def analyze(spec, svg_out, model_out, **kw):
    """Full pipeline: matrix, Rome, spectrum, eigenvector, constant slope model."""
    cfg = _config(kw)
    s = load_spec(spec)
    rep = run_analysis(s.map, s.need_partition(), cfg, s.name)
    extra = []
    if model_out:
        if rep.model is None:
            extra.append(f"no model written: {rep.absent_reason}")
        else:
            m = rep.model
            Path(model_out).write_text(io.serialize(m.model, m.conjugacy.image_partition(), None,
                                                    None if s.name is None else s.name + "-model"))
            extra.append(f"model written to {model_out}")
    if svg_out:
        psi = psi_polyline(rep.model) if rep.model is not None else None
        Path(svg_out).write_text(analysis_svg(s.map, psi, rep.model.model if rep.model else None, cfg.depth))
        extra.append(f"svg written to {svg_out}")
    text = rep.to_text() + "".join(e + "\n" for e in extra)
    _emit(cfg, {"analysis": rep.to_json()}, text)
    return EXIT_INCONCLUSIVE if rep.kind == INCONCLUSIVE else EXIT_OK


def _load_perturbation(arg: str | None, s: Spec) -> dict:
    if arg is None:
        if not s.perturb:
            raise SpecFormatError("no --with given and the input document carries no perturbation")
        return parse_perturbation(s.perturb)
    p = Path(arg)
    text = p.read_text() if p.exists() else arg
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"perturbation spec is neither a file nor JSON: {e}") from None
    if isinstance(obj, dict) and "perturb" in obj:
        obj = obj["perturb"]
    return parse_perturbation(obj)


@main.command()
@click.argument("spec")
@click.option("--with", "with_", help="Perturbation JSON (file or inline); defaults to the one in the input document.")
@click.option("-o", "--output-file", "out", type=click.Path(dir_okay=False), help="Write the perturbed spec here.")
@run_options
@guarded
def perturb(spec, with_, out, **kw):
    """Apply a global window perturbation and certify the result."""
    cfg = _config(kw)
    s = load_spec(spec)
    P = s.need_partition()
    wspec = _load_perturbation(with_, s)
    g = window_perturb(s.map, P, wspec)
    cert = certify_finitely_generated(s.map, P, g, cfg.depth, cfg.horizon)
    doc = io.serialize(g, as_slack(P), None, None if s.name is None else s.name + "-perturbed")
    if out:
        Path(out).write_text(doc)
        _emit(cfg, {"written": out, "certificate": cert.to_json()}, cert.summary() + f"\nspec written to {out}\n")
    else:
        click.echo(doc, nl=False)
        click.echo(cert.summary(), err=True)
    return EXIT_OK if cert.ok else EXIT_INCONCLUSIVE


@main.command()
@click.argument("spec")
@click.option("--point", required=True, help="Exact starting point, e.g. 1/7.")
@click.option("--steps", type=int, default=16, show_default=True)
@run_options
@guarded
def itinerary(spec, point, steps, **kw):
    """Itinerary of a point through the partition intervals."""
    cfg = _config(kw)
    s = load_spec(spec)
    path = run_itinerary(s.map, s.need_partition(), parse_exact(point), steps)
    _emit(cfg, {"point": point, "itinerary": [str(i) for i in path]}, " -> ".join(str(i) for i in path) + "\n")


@main.command()
@click.argument("spec")
@click.option("--path", "path_", required=True, help="Comma separated interval ids, e.g. F0,F1,F0.")
@run_options
@guarded
def realize(spec, path_, **kw):
    """A point whose orbit follows the given path of intervals."""
    cfg = _config(kw)
    s = load_spec(spec)
    ids = [parse_interval_id(t) for t in path_.split(",") if t.strip()]
    y = realize_path(s.map, s.need_partition(), ids)
    _emit(cfg, {"path": [str(i) for i in ids], "point": format_exact(y)}, f"point = {format_exact(y)}\n")


@main.command()
@click.argument("spec")
@click.option("--lambda", "lam_arg", help="Eigenvalue parameter (exact, e.g. 4); defaults to the Perron value.")
@click.option("--trials", type=int, default=10_000, show_default=True)
@click.option("--steps", type=int, default=10_000, show_default=True)
@click.option("--start", help="Starting interval id; defaults to the Rome vertex.")
@run_options
@guarded
def chain(spec, lam_arg, trials, steps, start, **kw):
    """Monte-Carlo return statistics of the stochastic chain built on the Rome."""
    cfg = _config(kw)
    s = load_spec(spec)
    A = _matrix(s)
    cert = find_finite_rome(A, cfg.depth)
    if cert is None:
        click.echo("no finite Rome: the chain is not available", err=True)
        return EXIT_INCONCLUSIVE
    rep = None
    if lam_arg is None:
        rep = spectral_report(A, cert, cfg.tol, cfg.max_depth, 32, cfg.seed)
        lam = rep.lam_exact if rep.lam_exact is not None else rep.lam
    else:
        lam = parse_exact(lam_arg)
    ch = excessive_chain(A, cert, lam, cfg.seed)
    r0 = parse_interval_id(start) if start else rome_vertex(cert)
    stats = ch.sample_return(r0, steps, trials, cfg.seed)
    lines = [f"lambda = {format_exact(lam) if is_exact(lam) else repr(lam)}",
             f"start = {r0}", f"returned = {stats.returned} / {trials} = {stats.fraction!r}",
             f"escaped (row deficit) = {stats.left}"]
    payload = {"lambda": format_exact(lam) if is_exact(lam) else lam, "stats": stats.to_json()}
    if rep is not None and rep.classification.value is not None:
        v = rep.classification.value
        lines.append(f"closed-form return probability F(1/lambda) = {format_exact(v) if is_exact(v) else v}")
        payload["closed_form_return_probability"] = format_exact(v) if is_exact(v) else v
    _emit(cfg, payload, "\n".join(lines) + "\n")


@main.command()
@click.argument("name", required=False)
def gallery(name):
    """List builtin instances, or print one as a spec document."""
    try:
        if name is None:
            for key, inst in gallery_mod.gallery().items():
                click.echo(f"{key:20s} {inst.description}")
            return
        inst = gallery_mod.get(name)
    except KeyError as e:
        click.echo(f"error: {e.args[0]}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(io.serialize(inst.map, inst.partition, inst.perturb, inst.name), nl=False)


if __name__ == "__main__":
    main()
