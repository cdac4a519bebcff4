"""Command-line front end.

Every subcommand reads one JSON config file::

    rgflow beta-eval config.json
    rgflow scan neumann-sign config.json

Results go to ``output_path`` from the config (stdout when absent).  When a
file is written, run metadata goes to ``<output_path>.meta.json`` so that data
files stay byte-identical across runs.  Exit codes: 0 ok, 2 config error,
3 domain error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import platform
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional
from xml.sax.saxutils import escape

from . import __version__
from .beta import beta
from .errors import ConfigError, DomainError, NumericalError
from .fixedpoint import (
    FixedPointReport,
    SeedGrid,
    XiBranch,
    find_fixed_points,
    scan_critical_xi,
    scan_neumann_sign_change,
)
from .flow import FieldTable, FlowProblem, GridSpec, Trajectory, integrate, sample_vector_field
from .kernels import KERNELS, KernelPoint, evaluate
from .models import BoundaryCondition, CouplingState, Geometry, ModelSpec, Scheme

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3, 4

_MODEL_KEYS = {"geometry", "boundary_condition", "scheme", "z_tilde", "xi", "large_deflation", "kl"}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _require(cfg: dict, key: str, where: str = "") -> Any:
    if key not in cfg:
        raise ConfigError(where + key, "missing")
    return cfg[key]


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {value}")
    return value


def _pair(value: Any, name: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(name, f"expected a two-element list, got {value!r}")
    return _number(value[0], name), _number(value[1], name)


def _integer(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return value


def _check_keys(cfg: dict, allowed: set, where: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(where.rstrip("."), f"expected an object, got {type(cfg).__name__}")
    extra = sorted(set(cfg) - allowed)
    if extra:
        raise ConfigError(where + extra[0], "unknown key")


def parse_model(cfg: Any) -> ModelSpec:
    _check_keys(cfg, _MODEL_KEYS, "model.")
    kw = dict(cfg)
    _require(kw, "geometry", "model.")
    for key in ("z_tilde", "xi", "kl"):
        if key in kw:
            kw[key] = _number(kw[key], f"model.{key}")
    if "large_deflation" in kw and not isinstance(kw["large_deflation"], bool):
        raise ConfigError("model.large_deflation", "expected true or false")
    for key, enum_cls in (("geometry", Geometry), ("boundary_condition", BoundaryCondition), ("scheme", Scheme)):
        if key in kw:
            allowed = [e.value for e in enum_cls]
            if kw[key] not in allowed:
                raise ConfigError(f"model.{key}", f"expected one of {allowed}, got {kw[key]!r}")
    try:
        return ModelSpec(**kw)
    except ConfigError as exc:
        raise ConfigError(f"model.{exc.field}", str(exc).split(": ", 1)[-1]) from None


def parse_state(cfg: Any, where: str = "state") -> CouplingState:
    _check_keys(cfg, {"m2_tilde", "lambda_tilde"}, where + ".")
    return CouplingState(
        _number(_require(cfg, "m2_tilde", where + "."), f"{where}.m2_tilde"),
        _number(_require(cfg, "lambda_tilde", where + "."), f"{where}.lambda_tilde"),
    )


def _threads() -> int:
    raw = os.environ.get("RGFLOW_THREADS", "")
    cap = 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            raise ConfigError("RGFLOW_THREADS", f"expected an integer, got {raw!r}") from None
    return cap


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def fmt(x: float) -> str:
    """Shortest round-trip representation; NaN becomes an empty cell."""
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def trajectory_csv(tr: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "k_over_Lambda", "m2_tilde", "lambda_tilde"])
    for t, m, lam in zip(tr.t, tr.m2_tilde, tr.lambda_tilde):
        w.writerow([fmt(t), fmt(math.exp(-t)), fmt(m), fmt(lam)])
    buf.write(f"# termination={tr.termination.value}\n")
    return buf.getvalue()


def field_csv(table: FieldTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FieldTable.COLUMNS)
    for i in range(len(table)):
        masked = bool(table.mask[i])
        row = [fmt(table.x[i]), fmt(table.y[i]), fmt(table.m2_tilde[i]), fmt(table.lambda_tilde[i])]
        row += ["", "", "", ""] if masked else [fmt(table.dm2[i]), fmt(table.dlambda[i]), fmt(table.vx[i]), fmt(table.vy[i])]
        row.append("1" if masked else "0")
        w.writerow(row)
    return buf.getvalue()


def field_records(table: FieldTable) -> list[dict]:
    out = []
    for i in range(len(table)):
        rec = {c: float(getattr(table, c)[i]) for c in FieldTable.COLUMNS[:-1]}
        rec["mask"] = int(table.mask[i])
        if rec["mask"]:
            for c in ("dm2", "dlambda", "vx", "vy"):
                rec[c] = None
        out.append(rec)
    return out


def field_svg(table: FieldTable, size: int = 600, margin: int = 50) -> str:
    """Arrow plot of the IR-pointing field, one arrow per unmasked node."""
    xs, ys = table.x, table.y
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = size - 2 * margin
    n = max(2, int(round(math.sqrt(len(table)))))
    cell = span / (n - 1)

    def px(x, y):
        return margin + (x - x0) / (x1 - x0) * span, size - margin - (y - y0) / (y1 - y0) * span

    xlabel = "arctan m2_tilde" if table.compactified else "m2_tilde"
    ylabel = "arctan lambda_tilde" if table.compactified else "lambda_tilde"
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto">',
        '<path d="M0,0 L10,5 L0,10 z" fill="black"/>',
        "</marker>",
        "</defs>",
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="gray"/>',
        f'<text x="{size / 2:.1f}" y="{size - 10}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>',
        f'<text x="15" y="{size / 2:.1f}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {size / 2:.1f})">{escape(ylabel)}</text>',
        f'<text x="{margin}" y="{size - margin + 18}" font-size="11">{x0:.4g}</text>',
        f'<text x="{size - margin}" y="{size - margin + 18}" font-size="11" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{margin - 5}" y="{size - margin}" font-size="11" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{margin - 5}" y="{margin + 4}" font-size="11" text-anchor="end">{y1:.4g}</text>',
    ]
    sx, sy = span / (x1 - x0), span / (y1 - y0)
    for i in range(len(table)):
        if table.mask[i]:
            continue
        ax, ay = px(float(xs[i]), float(ys[i]))
        dx, dy = float(table.vx[i]) * sx, -float(table.vy[i]) * sy
        norm = math.hypot(dx, dy)
        if norm > 0.0:
            dx, dy = 0.4 * cell * dx / norm, 0.4 * cell * dy / norm
        else:
            dx, dy = 0.0, 0.0
        parts.append(
            f'<line x1="{ax:.3f}" y1="{ay:.3f}" x2="{ax + dx:.3f}" y2="{ay + dy:.3f}" '
            'stroke="black" stroke-width="1" marker-end="url(#arrow)"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def fixed_point_records(report: FixedPointReport) -> dict:
    return {
        "points": [
            {
                "state": {"m2_tilde": p.state.m2_tilde, "lambda_tilde": p.state.lambda_tilde},
                "eigenvalues": [{"re": e.real, "im": e.imag} for e in p.eigenvalues],
                "jacobian": [[float(v) for v in row] for row in p.jacobian],
                "classification": p.classification.value,
                "residual": p.residual,
            }
            for p in report.points
        ],
        "lines": [
            {"kind": "line", "lambda_tilde": ln.lambda_tilde, "m2_min": ln.m2_min, "degenerate": ln.degenerate}
            for ln in report.lines
        ],
        "failed_seeds": len(report.failed_seeds),
    }


# ---------------------------------------------------------------------------
# Commands: each returns (payload text, suffix) for the main output
# ---------------------------------------------------------------------------

_COMMON = {"output_path", "output_format"}


def _format(cfg: dict, allowed: tuple[str, ...], default: str) -> str:
    value = cfg.get("output_format", default)
    if value not in allowed:
        raise ConfigError("output_format", f"expected one of {list(allowed)}, got {value!r}")
    return value


def cmd_beta_eval(cfg: dict) -> str:
    _check_keys(cfg, _COMMON | {"model", "state", "states"}, "")
    _format(cfg, ("json",), "json")
    model = parse_model(_require(cfg, "model"))
    if "states" in cfg:
        if not isinstance(cfg["states"], list):
            raise ConfigError("states", "expected a list")
        states = [parse_state(s, f"states[{i}]") for i, s in enumerate(cfg["states"])]
        values = [beta(s, model) for s in states]
        return dump_json([{"dm2": v.dm2, "dlambda": v.dlambda} for v in values])
    v = beta(parse_state(_require(cfg, "state")), model)
    return dump_json({"dm2": v.dm2, "dlambda": v.dlambda})


def cmd_kernel_eval(cfg: dict) -> str:
    _check_keys(cfg, _COMMON | {"z_tilde", "m_eff", "kernels"}, "")
    _format(cfg, ("json",), "json")
    point = KernelPoint(_number(_require(cfg, "z_tilde"), "z_tilde"), _number(_require(cfg, "m_eff"), "m_eff"))
    names = cfg.get("kernels")
    if names is not None:
        if not isinstance(names, list) or not all(n in KERNELS for n in names):
            raise ConfigError("kernels", f"expected a list drawn from {sorted(KERNELS)}")
    return dump_json(evaluate(point, names))


def _flow_problem(cfg: dict) -> FlowProblem:
    model = parse_model(_require(cfg, "model"))
    initial = parse_state(_require(cfg, "initial"), "initial")
    direction = cfg.get("direction", "ir")
    if direction not in ("ir", "uv"):
        raise ConfigError("direction", f"expected 'ir' or 'uv', got {direction!r}")
    kw = {}
    for key in ("atol", "rtol", "step"):
        if key in cfg:
            kw[key] = _number(cfg[key], key)
    if "max_steps" in cfg:
        kw["max_steps"] = _integer(cfg["max_steps"], "max_steps")
    k_start = _number(cfg.get("k_start", 1.0), "k_start")
    if "t_span" in cfg:
        if "k_end" in cfg:
            raise ConfigError("t_span", "give either t_span or k_end, not both")
        return FlowProblem.over_span(model, initial, _number(cfg["t_span"], "t_span"), direction, k_start, **kw)
    default_end = 0.0 if direction == "ir" else None
    k_end = cfg.get("k_end", default_end)
    if k_end is None:
        raise ConfigError("k_end", "UV flow needs k_end or t_span")
    return FlowProblem(model, initial, k_start, _number(k_end, "k_end"), direction, **kw)


def cmd_flow(cfg: dict) -> str:
    _check_keys(
        cfg,
        _COMMON | {"model", "initial", "k_start", "k_end", "t_span", "direction", "atol", "rtol", "max_steps", "step", "samples"},
        "",
    )
    _format(cfg, ("csv",), "csv")
    problem = _flow_problem(cfg)
    tr = integrate(problem)
    if "samples" in cfg:
        tr = tr.resample(_integer(cfg["samples"], "samples"))
    return trajectory_csv(tr)


def _grid(cfg: Any) -> GridSpec:
    _check_keys(cfg, {"m2_range", "lambda_range", "n", "compactified"}, "grid.")
    compact = cfg.get("compactified", False)
    if not isinstance(compact, bool):
        raise ConfigError("grid.compactified", "expected true or false")
    try:
        return GridSpec(
            _pair(_require(cfg, "m2_range", "grid."), "grid.m2_range"),
            _pair(_require(cfg, "lambda_range", "grid."), "grid.lambda_range"),
            _integer(cfg.get("n", 21), "grid.n"),
            compact,
        )
    except ConfigError as exc:
        if exc.field.startswith("grid."):
            raise
        raise ConfigError(f"grid.{exc.field}", str(exc).split(": ", 1)[-1]) from None


def cmd_stream(cfg: dict, extra_files: Optional[dict] = None) -> str:
    _check_keys(cfg, _COMMON | {"model", "grid", "svg_path"}, "")
    fmt_ = _format(cfg, ("csv", "json", "svg"), "csv")
    model = parse_model(_require(cfg, "model"))
    grid = _grid(_require(cfg, "grid"))
    table = sample_vector_field(model, grid, workers=_threads())
    if "svg_path" in cfg:
        if not isinstance(cfg["svg_path"], str):
            raise ConfigError("svg_path", "expected a path string")
        if extra_files is not None:
            extra_files[cfg["svg_path"]] = field_svg(table)
    if fmt_ == "svg":
        return field_svg(table)
    if fmt_ == "json":
        return dump_json(field_records(table))
    return field_csv(table)


def cmd_fixed_points(cfg: dict) -> str:
    _check_keys(cfg, _COMMON | {"model", "seeds", "newton_tol", "max_iter"}, "")
    _format(cfg, ("json",), "json")
    model = parse_model(_require(cfg, "model"))
    seeds_cfg = cfg.get("seeds", {"m2_range": [-0.2, 2.0], "lambda_range": [0.0, 2.0], "n": 8})
    if isinstance(seeds_cfg, list):
        seeds = [parse_state(s, f"seeds[{i}]") for i, s in enumerate(seeds_cfg)]
    else:
        _check_keys(seeds_cfg, {"m2_range", "lambda_range", "n"}, "seeds.")
        seeds = SeedGrid(
            _pair(_require(seeds_cfg, "m2_range", "seeds."), "seeds.m2_range"),
            _pair(_require(seeds_cfg, "lambda_range", "seeds."), "seeds.lambda_range"),
            _integer(seeds_cfg.get("n", 8), "seeds.n"),
        )
    tol = _number(cfg.get("newton_tol", 1e-10), "newton_tol")
    max_iter = _integer(cfg.get("max_iter", 50), "max_iter")
    report = find_fixed_points(model, seeds, tol, max_iter, workers=_threads())
    return dump_json(fixed_point_records(report))


def cmd_scan_neumann(cfg: dict) -> str:
    _check_keys(cfg, _COMMON | {"scheme", "bracket", "tol"}, "")
    _format(cfg, ("json",), "json")
    scheme = cfg.get("scheme", "minimal")
    if scheme not in ("full", "minimal"):
        raise ConfigError("scheme", f"expected 'full' or 'minimal', got {scheme!r}")
    bracket = _pair(cfg.get("bracket", [0.5, 1.5]), "bracket")
    tol = _number(cfg.get("tol", 1e-6), "tol")
    z = scan_neumann_sign_change(Scheme(scheme), bracket, tol)
    return dump_json({"z_star": z, "scheme": scheme, "bracket": list(bracket), "tol": tol})


def cmd_scan_xi(cfg: dict) -> str:
    _check_keys(cfg, _COMMON | {"bracket", "tol", "step"}, "")
    _format(cfg, ("json",), "json")
    bracket = _pair(cfg.get("bracket", [0.05, 0.17]), "bracket")
    tol = _number(cfg.get("tol", 1e-5), "tol")
    step = _number(cfg.get("step", 0.005), "step")
    branch = XiBranch(step=step)
    xi_bar = scan_critical_xi(bracket, tol, step, branch)
    star = branch.at(xi_bar)
    return dump_json(
        {
            "xi_bar": xi_bar,
            "m2_star_at_xi_bar": star.m2_tilde,
            "lambda_star_at_xi_bar": star.lambda_tilde,
            "bracket": list(bracket),
            "tol": tol,
        }
    )


_SWEEPABLE = {"flow": cmd_flow, "stream": cmd_stream, "fixed-points": cmd_fixed_points, "beta-eval": cmd_beta_eval}
_SUFFIX = {"flow": "csv", "stream": "csv", "fixed-points": "json", "beta-eval": "json"}


def cmd_sweep(cfg: dict, extra_files: Optional[dict] = None) -> str:
    """Cartesian product over model.z_tilde and/or model.xi values.

    Each cell runs ``command`` on ``base`` with the swept model fields
    replaced and writes ``<output_dir>/cell_<index>.<ext>``.  The returned
    index lists every cell with its parameters and file name.
    """
    _check_keys(cfg, _COMMON | {"command", "base", "z_tilde", "xi", "output_dir"}, "")
    _format(cfg, ("json",), "json")
    command = _require(cfg, "command")
    if command not in _SWEEPABLE:
        raise ConfigError("command", f"expected one of {sorted(_SWEEPABLE)}, got {command!r}")
    base = _require(cfg, "base")
    if not isinstance(base, dict) or "model" not in base:
        raise ConfigError("base", "expected a config object with a model block")
    out_dir = _require(cfg, "output_dir")
    if not isinstance(out_dir, str):
        raise ConfigError("output_dir", "expected a path string")
    axes = []
    for key in ("z_tilde", "xi"):
        if key in cfg:
            values = cfg[key]
            if not isinstance(values, list) or not values:
                raise ConfigError(key, "expected a non-empty list")
            axes.append((key, [_number(v, key) for v in values]))
    if not axes:
        raise ConfigError("z_tilde", "sweep needs z_tilde and/or xi values")
    suffix = base.get("output_format", _SUFFIX[command])
    index = []
    for i, combo in enumerate(itertools.product(*(vals for _, vals in axes))):
        cell = json.loads(json.dumps(base))
        cell.pop("output_path", None)
        cell.pop("svg_path", None)
        params = dict(zip((k for k, _ in axes), combo))
        cell["model"].update(params)
        name = f"cell_{i:04d}.{suffix}"
        text = _SWEEPABLE[command](cell)
        if extra_files is not None:
            extra_files[str(Path(out_dir) / name)] = text
        index.append({"index": i, **params, "file": name})
    return dump_json({"command": command, "cells": index})


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _write(path: str, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgflow", description="LPA flow systems near timelike boundaries.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("beta-eval", "kernel-eval", "flow", "stream", "fixed-points", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("config", help="path to a JSON config file ('-' reads stdin)")
    scan = sub.add_parser("scan")
    scan_sub = scan.add_subparsers(dest="scan", required=True)
    for name in ("neumann-sign", "critical-xi"):
        sp = scan_sub.add_parser(name)
        sp.add_argument("config", help="path to a JSON config file ('-' reads stdin)")
    return parser


def _load_config(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return cfg


def run(argv: Optional[list[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    command = args.command if args.command != "scan" else f"scan {args.scan}"
    handlers: dict[str, Callable[..., str]] = {
        "beta-eval": cmd_beta_eval,
        "kernel-eval": cmd_kernel_eval,
        "flow": cmd_flow,
        "stream": cmd_stream,
        "fixed-points": cmd_fixed_points,
        "scan neumann-sign": cmd_scan_neumann,
        "scan critical-xi": cmd_scan_xi,
        "sweep": cmd_sweep,
    }
    started = time.time()
    try:
        cfg = _load_config(args.config)
        out_path = cfg.get("output_path")
        if out_path is not None and not isinstance(out_path, str):
            raise ConfigError("output_path", "expected a path string")
        extra: dict[str, str] = {}
        handler = handlers[command]
        text = handler(cfg, extra) if command in ("stream", "sweep") else handler(cfg)
    except ConfigError as exc:
        print(f"rgflow: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"rgflow: domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"rgflow: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL

    for path, body in extra.items():
        _write(path, body)
    if out_path is None:
        stdout.write(text)
        return EXIT_OK
    _write(out_path, text)
    meta = {
        "command": command,
        "config": cfg,
        "version": __version__,
        "python": platform.python_version(),
        "started_unix": started,
        "elapsed_s": time.time() - started,
        "extra_files": sorted(extra),
    }
    _write(out_path + ".meta.json", dump_json(meta))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
