"""Command-line drivers.

Each subcommand reads one JSON configuration document, validates every
numeric field before any solve starts and writes CSV or JSON to ``--out``
(standard output by default).  Exit codes: 0 success, 1 a check failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import closedform as cf
from .exceptions import DomainError, MeshError, SeriesTruncationError, StepFailure
from .field import reconstruct
from .mesh import build_graded, build_spatial, default_half_width
from .ndim import BandData, TransverseProblem, solve_transverse
from .verify import LAPLACE_POINTS, VerifySettings, run_all
from .volterra1d import LinearSource, ProblemSpec1D, TableSource, solve_average_linear, solve_flux

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    """The configuration document is missing, malformed or out of range."""


# {{{ configuration


@dataclass
class RunConfig:
    h0: float | None = 1.0
    initial: object = 1.0
    strip: float | None = None
    source: object = field(default_factory=lambda: LinearSource(1.0))
    horizon: float = 1.0
    count: int = 256
    grading: float = 2.0
    x_count: int = 256
    half_width: float | None = None
    y_count: int = 128
    order: int = 8
    terms: int = 18
    tol: float = 1e-10
    rtol: float = cf.SERIES_RTOL
    tolerance: float = 1e-3
    times: list[float] | None = None
    s_values: tuple[float, ...] = LAPLACE_POINTS

    @property
    def lam(self) -> float | None:
        return self.source.lam if isinstance(self.source, LinearSource) else None


def _number(raw: dict, key: str, default, *, positive=False, minimum=None):
    val = raw.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number")
    val = float(val)
    if not math.isfinite(val):
        raise ConfigError(f"{key} must be finite")
    if positive and not val > 0:
        raise ConfigError(f"{key} must be positive")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{key} must be >= {minimum}")
    return val


def _integer(raw: dict, key: str, default, minimum: int) -> int:
    val = raw.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}")
    return val


def _source(raw: dict):
    if "source" not in raw:
        return LinearSource(_number(raw, "lambda", 1.0))
    desc = raw["source"]
    if not isinstance(desc, dict):
        raise ConfigError("source must be an object")
    kind = desc.get("kind")
    if kind == "linear":
        return LinearSource(_number(desc, "lambda", None))
    if kind == "table":
        try:
            return TableSource(desc.get("points"))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad source table: {exc}") from exc
    raise ConfigError(f"unknown source kind {kind!r}")


def _initial(raw: dict) -> tuple[float | None, object, float | None]:
    """Return ``(h0 or None, initial data, strip half width or None)``."""
    desc = raw.get("initial", raw.get("h0", 1.0))
    if not isinstance(desc, dict):
        h0 = _number({"h0": desc}, "h0", None)
        return h0, h0, None
    kind = desc.get("kind")
    if kind == "constant":
        h0 = _number(desc, "value", None)
        return h0, h0, None
    if kind == "table":
        try:
            return None, TableSource(desc.get("points")), None
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad initial table: {exc}") from exc
    if kind == "strip":
        h0 = _number(desc, "value", None)
        return h0, h0, _number(desc, "half_width", None, positive=True)
    raise ConfigError(f"unknown initial kind {kind!r}")


def parse_config(raw) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    h0, initial, strip = _initial(raw)
    cfg = RunConfig(
        h0=h0,
        initial=initial,
        strip=strip,
        source=_source(raw),
        horizon=_number(raw, "T", 1.0, positive=True),
        count=_integer(raw, "N", 256, 2),
        grading=_number(raw, "r", 2.0, minimum=1.0),
        x_count=_integer(raw, "M", 256, 3),
        y_count=_integer(raw, "M_y", 128, 3),
        order=_integer(raw, "order", 8, 0),
        terms=_integer(raw, "terms", 18, 1),
        tol=_number(raw, "tol", 1e-10, positive=True),
        rtol=_number(raw, "rtol", cf.SERIES_RTOL, positive=True),
        tolerance=_number(raw, "tolerance", 1e-3, positive=True),
    )
    if "L" in raw:
        cfg.half_width = _number(raw, "L", None, positive=True)
    for key, attr in (("times", "times"), ("s", "s_values")):
        if key in raw:
            vals = raw[key]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{key} must be a non-empty list")
            vals = [_number({key: v}, key, None, positive=True) for v in vals]
            setattr(cfg, attr, vals if attr == "times" else tuple(vals))
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


# }}}


# {{{ output helpers


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _csv(header: list[str], columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(_fmt(float(v)) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _flux_output(sol, fmt: str) -> str:
    t = sol.times
    cols = [t, sol.v, sol.w, sol.regularized_v, sol.regularized_w]
    names = ["t", "V", "W", "sqrt_t_V", "sqrt_t_W"]
    if fmt == "json":
        return _json({n: [float(x) for x in c] for n, c in zip(names, cols)})
    return _csv(names, cols)


def _series_dict(series: cf.HalfPowerSeries) -> list[dict]:
    return [
        {"exponent": f"{p2}/2", "coefficient": str(c.q), "sqrt_pi_flag": int(c.over_sqrt_pi)}
        for p2, c in series.terms.items()
    ]


def _spec(cfg: RunConfig) -> ProblemSpec1D:
    if cfg.strip is not None:
        raise ConfigError("strip initial data only applies to solve-2d")
    init = cfg.initial if cfg.h0 is None else cfg.h0
    return ProblemSpec1D(init, cfg.source, cfg.horizon)


def _require_linear(cfg: RunConfig, what: str) -> tuple[float, float]:
    if cfg.lam is None or cfg.h0 is None or cfg.strip is not None:
        raise ConfigError(f"{what} needs constant initial data and a linear source")
    return cfg.h0, cfg.lam


# }}}


# {{{ subcommands


def cmd_solve_1d(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    mesh = build_graded(cfg.horizon, cfg.count, cfg.grading)
    return EXIT_OK, _flux_output(solve_flux(_spec(cfg), mesh, cfg.tol), fmt)


def cmd_solve_avg(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    h0, lam = _require_linear(cfg, "solve-avg")
    mesh = build_graded(cfg.horizon, cfg.count, cfg.grading)
    return EXIT_OK, _flux_output(solve_average_linear(h0, lam, mesh), fmt)


def cmd_series(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    h0, lam = _require_linear(cfg, "series")
    W = cf.series_W(h0, lam, cfg.order)
    flux = cf.flux_series(h0, lam, cfg.order)
    note = cf.flux_discrepancy_note(h0, lam) if lam != 0 else "flux expansion: single term"
    values = []
    if cfg.times:
        for t in cfg.times:
            try:
                sv = cf.evaluate_series(W, t, cfg.rtol)
            except SeriesTruncationError as exc:
                return EXIT_CHECK, f"{exc}\n"
            values.append((t, sv.value, sv.truncation))
    if fmt == "json":
        return EXIT_OK, _json({
            "order": cfg.order,
            "W": _series_dict(W),
            "flux": _series_dict(flux),
            "note": note,
            "values": [{"t": t, "W": v, "truncation": e} for t, v, e in values],
        })
    out = [f"# W series, order {cfg.order}", cf.to_table(W).rstrip("\n"),
           f"# flux series, order {cfg.order}", cf.to_table(flux).rstrip("\n"), f"# {note}"]
    if values:
        out.append(_csv(["t", "W", "truncation"], zip(*values)).rstrip("\n"))
    return EXIT_OK, "\n".join(out) + "\n"


def cmd_adomian(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    h0, lam = _require_linear(cfg, "adomian")
    terms = cf.adomian_terms(h0, lam, cfg.terms)
    closed = [cf.adomian_closed_form(h0, lam, n) for n in range(cfg.terms)]
    agree = all(a.terms == b.terms for a, b in zip(terms, closed))
    # count = 2k + 2 terms fill the order-k truncation
    order = (cfg.terms - 2) // 2
    matches = None
    if cfg.terms % 2 == 0:
        matches = cf.sum_series(terms).terms == cf.series_W(h0, lam, order).terms
    rows = []
    for n, term in enumerate(terms):
        for d in _series_dict(term):
            rows.append({"n": n, **d})
    code = EXIT_OK if agree and matches is not False else EXIT_CHECK
    if fmt == "json":
        return code, _json({"terms": rows, "closed_form_agrees": agree,
                            "matches_series_order": order if matches is not None else None,
                            "matches_series": matches})
    lines = ["n,exponent,coefficient,sqrt_pi_flag"]
    lines += [f"{r['n']},{r['exponent']},{r['coefficient']},{r['sqrt_pi_flag']}" for r in rows]
    lines.append(f"# closed forms agree: {agree}")
    if matches is not None:
        lines.append(f"# sum equals series order {order}: {matches}")
    return code, "\n".join(lines) + "\n"


def cmd_laplace_check(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    h0, lam = _require_linear(cfg, "laplace-check")
    form = cf.LaplaceClosedForm(h0, lam)
    series = cf.series_W(h0, lam, 20)
    rows = []
    ok = True
    for s in cfg.s_values:
        q = form.Q(s)
        ode = abs(cf.ode_residual(form, s)) / max(abs(h0), 1e-300) * s**1.5
        tr = cf.laplace_of_series(series, s)
        err = abs(tr - q) / abs(q) if q != 0 else abs(tr)
        ok &= ode <= 1e-12 and err <= 1e-10
        rows.append((s, q, ode, tr, err))
    names = ["s", "Q", "ode_residual_rel", "series_Q", "series_rel_err"]
    code = EXIT_OK if ok else EXIT_CHECK
    if fmt == "json":
        return code, _json({"rows": [dict(zip(names, r)) for r in rows], "passed": bool(ok)})
    return code, _csv(names, zip(*rows))


def cmd_reconstruct(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    spec = _spec(cfg)
    mesh = build_graded(cfg.horizon, cfg.count, cfg.grading)
    grid = build_spatial(cfg.half_width or default_half_width(cfg.horizon), cfg.x_count)
    idx = None
    if cfg.times:
        idx = [max(1, int(np.argmin(np.abs(mesh.nodes - t)))) for t in cfg.times]
    fld = reconstruct(spec, solve_flux(spec, mesh, cfg.tol), grid, idx)
    if fmt == "json":
        return EXIT_OK, _json({"t": [float(t) for t in fld.times], "x": [float(x) for x in grid.nodes],
                               "u": fld.values.tolist()})
    return EXIT_OK, fld.to_csv()


def cmd_solve_2d(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    if cfg.h0 is None:
        raise ConfigError("solve-2d takes constant or strip initial data")
    mesh = build_graded(cfg.horizon, cfg.count, cfg.grading)
    grid = build_spatial(cfg.half_width or default_half_width(cfg.horizon), cfg.y_count, symmetric=True)
    init = cfg.h0 if cfg.strip is None else BandData.strip(cfg.h0, cfg.strip)
    sol = solve_transverse(TransverseProblem(grid, mesh, init, cfg.source), cfg.tol)
    if fmt == "json":
        return EXIT_OK, _json({"t": [float(t) for t in mesh.times], "y": [float(y) for y in grid.nodes],
                               "V": sol.values.tolist(), "W": sol.averages.tolist()})
    return EXIT_OK, sol.to_csv()


def cmd_verify(cfg: RunConfig, fmt: str) -> tuple[int, str]:
    h0, lam = _require_linear(cfg, "verify")
    settings = VerifySettings(
        h0=h0, lam=lam, horizon=cfg.horizon, count=cfg.count, grading=cfg.grading,
        x_count=cfg.x_count, y_count=min(cfg.y_count, 32), y_steps=min(cfg.count, 128),
        tolerance=cfg.tolerance,
    )
    checks = run_all(settings)
    failed = [c.name for c in checks if not c.passed]
    report = {"passed": not failed, "failed": failed, "checks": [c.to_dict() for c in checks]}
    return (EXIT_CHECK if failed else EXIT_OK), _json(report)


COMMANDS = {
    "solve-1d": cmd_solve_1d,
    "solve-avg": cmd_solve_avg,
    "series": cmd_series,
    "adomian": cmd_adomian,
    "laplace-check": cmd_laplace_check,
    "reconstruct": cmd_reconstruct,
    "solve-2d": cmd_solve_2d,
    "verify": cmd_verify,
}

# verify always emits its JSON report
_DEFAULT_COUNT = {"verify": 1024}


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avgflux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output path (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.command in _DEFAULT_COUNT and not _config_sets(args.config, "N"):
            cfg.count = _DEFAULT_COUNT[args.command]
        code, text = COMMANDS[args.command](cfg, args.format)
    except (ConfigError, MeshError, DomainError) as exc:
        print(f"avgflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StepFailure as exc:
        print(f"avgflux: solver failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    if args.command == "verify" and code != EXIT_OK:
        failed = json.loads(text)["failed"]
        print(f"avgflux: failed checks: {', '.join(failed)}", file=sys.stderr)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"avgflux: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


def _config_sets(path: str | None, key: str) -> bool:
    if path is None:
        return False
    return key in json.loads(Path(path).read_text())


if __name__ == "__main__":
    raise SystemExit(main())
