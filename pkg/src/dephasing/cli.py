"""Command-line front end.

Subcommands: ``capacity``, ``converge``, ``simulate``, ``spectrum``, ``figure``.
Exit status is 0 on success, 2 for invalid arguments or configuration and 3
for numerical failures; on failure one JSON line is written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .capacity import (
    DEFAULT_ALPHAS,
    DEFAULT_D_GRID,
    CapacityReport,
    capacity_von_mises,
    capacity_wrapped_cauchy,
    capacity_wrapped_normal,
    closed_form_capacity,
    convergence_report,
)
from .channelsim import (
    DensityMatrix,
    apply_dephasing,
    apply_tele_sim,
    entrywise_bound,
    maximally_mixed,
    plus_state,
    random_state,
    tele_sim_matrix,
    trace_distance,
    trace_distance_bound,
)
from .circular import (
    CircularDensity,
    Product,
    Uniform,
    VonMises,
    WrappedCauchy,
    WrappedNormal,
    kl_to_uniform,
    load_tabulated_csv,
    renyi_to_uniform,
)
from .errors import (
    CapExceededError,
    DimensionMismatchError,
    DomainError,
)
from .toeplitz import build_truncation

EXIT_USAGE = 2
EXIT_NUMERIC = 3

SINGLE_PARAM = {
    "wrapped-normal": WrappedNormal,
    "von-mises": VonMises,
    "wrapped-cauchy": WrappedCauchy,
}
FAMILIES = (*SINGLE_PARAM, "uniform", "tabulated", "product")
FIGURE_CURVES = {
    "wrapped-normal": (capacity_wrapped_normal, "geometric"),
    "von-mises": (capacity_von_mises, "linear"),
    "wrapped-cauchy": (capacity_wrapped_cauchy, "geometric"),
}
DEFAULT_FIGURE_GRID = "0.1:5:50"
SIM_TOL = 1e-12


class UsageError(Exception):
    """Invalid command line or configuration (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    params: list = field(default_factory=list)
    d_grid: list = field(default_factory=list)
    alpha_grid: list = field(default_factory=list)
    format: str = "json"
    out_path: str | None = None
    seed: int | None = None
    grid: str | None = None
    input: str | None = None
    tab_file: str | None = None


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _round(obj):
    # 12 significant digits everywhere in JSON output
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round(obj), allow_nan=False) + "\n"


def parse_d_grid(text: str) -> list[int]:
    """Comma list of positive integers; ``a,b,...,c`` expands geometrically if ``c``
    is reachable with ratio ``b/a``, else arithmetically with step ``b - a``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError("empty --d-grid")
    if "..." in parts:
        if len(parts) != 4 or parts[2] != "...":
            raise UsageError(f"ellipsis grid must look like a,b,...,c: {text!r}")
        a, b, c = (_pos_int(parts[i]) for i in (0, 1, 3))
        if b <= a or c < b:
            raise UsageError(f"ellipsis grid must increase: {text!r}")
        if b % a == 0:
            r, vals = b // a, [a]
            while vals[-1] < c:
                vals.append(vals[-1] * r)
            if vals[-1] == c:
                return vals
        step = b - a
        if (c - a) % step:
            raise UsageError(f"{c} is not reachable from {a},{b}: {text!r}")
        return list(range(a, c + 1, step))
    vals = [_pos_int(p) for p in parts]
    return sorted(set(vals))


def _pos_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise UsageError(f"not an integer: {s!r}") from None
    if v < 1:
        raise UsageError(f"dimensions must be positive: {s!r}")
    return v


def parse_alpha_grid(text: str) -> list[float]:
    try:
        vals = sorted({float(p) for p in text.split(",") if p.strip()})
    except ValueError:
        raise UsageError(f"bad --alpha-grid {text!r}") from None
    if not vals or any(not (math.isfinite(a) and a > 1) for a in vals):
        raise UsageError(f"--alpha-grid needs finite values > 1, got {text!r}")
    return vals


def parse_grid(text: str, spacing: str) -> list[float]:
    """``start:stop:count`` as a geometric or linear grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be start:stop:count, got {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)) or start <= 0 or stop <= start or count < 2:
        raise UsageError(f"grid needs 0 < start < stop and count >= 2, got {text!r}")
    pts = np.geomspace(start, stop, count) if spacing == "geometric" else np.linspace(start, stop, count)
    pts[0], pts[-1] = start, stop
    return [float(p) for p in pts]


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"not a number: {s!r}") from None


def build_density(cfg: RunConfig) -> CircularDensity:
    fam = cfg.family
    if fam is None:
        raise UsageError("--family is required")
    if fam in SINGLE_PARAM:
        if len(cfg.params) != 1:
            raise UsageError(f"{fam} takes exactly one --param, got {len(cfg.params)}")
        return SINGLE_PARAM[fam](_float(cfg.params[0]))
    if fam == "uniform":
        if cfg.params:
            raise UsageError("uniform takes no --param")
        return Uniform()
    if fam == "tabulated":
        if cfg.params or not cfg.tab_file:
            raise UsageError("tabulated needs --tab-file and no --param")
        return load_tabulated_csv(cfg.tab_file)
    if fam == "product":
        if not cfg.params:
            raise UsageError("product needs one --param family:value per mode")
        factors = []
        for item in cfg.params:
            name, sep, value = item.partition(":")
            if name == "uniform" and not sep:
                factors.append(Uniform())
            elif name in SINGLE_PARAM and sep:
                factors.append(SINGLE_PARAM[name](_float(value)))
            else:
                raise UsageError(f"product factor must be family:value or uniform, got {item!r}")
        return Product(tuple(factors))
    raise UsageError(f"unknown family {fam!r}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def cmd_capacity(cfg: RunConfig) -> str:
    density = build_density(cfg)
    alphas = cfg.alpha_grid or list(DEFAULT_ALPHAS)
    if cfg.d_grid:
        report = convergence_report(density, cfg.d_grid, alphas)
    else:
        div = kl_to_uniform(density)
        closed, tag = closed_form_capacity(density)
        report = CapacityReport(
            exact=div.value,
            exact_method=div.method,
            closed_form=closed,
            closed_form_family=tag,
            density_descriptor=density.describe(),
            renyi_limits={a: renyi_to_uniform(density, a).value for a in alphas},
        )
        report.validate()
    if cfg.format == "json":
        return dump_json(report.to_dict())
    rows = [("exact", None, None, report.exact), ("closed_form", None, None, report.closed_form)]
    rows += [("lower", d, None, v) for d, v in report.lower_seq]
    rows += [("renyi", d, a, v) for a, d, v in report.renyi_seq]
    rows += [("renyi_limit", None, a, v) for a, v in sorted(report.renyi_limits.items())]
    return _csv_text(["quantity", "d", "alpha", "bits"], [[q] + [_cell(x) for x in r] for q, *r in rows])


def cmd_converge(cfg: RunConfig) -> str:
    density = build_density(cfg)
    report = convergence_report(density, cfg.d_grid or list(DEFAULT_D_GRID), cfg.alpha_grid or list(DEFAULT_ALPHAS))
    if cfg.format == "json":
        return dump_json(report.to_dict())
    lower = dict(report.lower_seq)
    rows = []
    for a, d, v in sorted(report.renyi_seq, key=lambda t: (t[1], t[0])):
        gap = report.exact - lower[d]
        if gap < -1e-6:
            raise ArithmeticError(f"lower rate exceeds capacity at d={d} (gap {gap:.3g})")
        rows.append([_cell(d), _cell(lower[d]), _cell(a), _cell(v), _cell(report.exact), _cell(gap)])
    return _csv_text(["d", "lower_bits", "alpha", "renyi_bits", "exact_bits", "gap"], rows)


def _sim_input(cfg: RunConfig, d: int | None) -> DensityMatrix:
    kind = cfg.input or "plus"
    if kind == "plus":
        return plus_state(d)
    if kind == "maxmixed":
        return maximally_mixed(d)
    if kind == "random":
        return random_state(d, cfg.seed if cfg.seed is not None else 0)
    rho = DensityMatrix.from_csv(kind)
    if d is not None and rho.dim != d:
        raise UsageError(f"input state has dimension {rho.dim} but --d-grid asks for {d}")
    return rho


def cmd_simulate(cfg: RunConfig) -> str:
    density = build_density(cfg)
    if density.modes != 1:
        raise UsageError("simulate supports single-mode families only")
    from_file = cfg.input not in (None, "plus", "maxmixed", "random")
    grid = cfg.d_grid or ([None] if from_file else [16])
    records = []
    for d in grid:
        rho = _sim_input(cfg, d)
        d = rho.dim
        t = build_truncation(density, (d,)).entries
        violation = float(np.max(np.abs(t - tele_sim_matrix(density, d)) - entrywise_bound(d)))
        if violation > SIM_TOL:
            raise ArithmeticError(f"entrywise simulation bound violated by {violation:.3g} at d={d}")
        exact = apply_dephasing(rho, density)
        sim = apply_tele_sim(rho, density)
        rec = {
            "d": d,
            "entrywise_max_violation": violation,
            "bound_max": trace_distance_bound(rho),
            "trace_distance": trace_distance(exact, sim),
        }
        if cfg.input == "random":
            rec["seed"] = cfg.seed if cfg.seed is not None else 0
        records.append(rec)
    if cfg.format == "json":
        return dump_json(records[0] if len(records) == 1 else records)
    keys = list(records[0])
    return _csv_text(keys, [[_cell(r[k]) for k in keys] for r in records])


def cmd_spectrum(cfg: RunConfig) -> str:
    density = build_density(cfg)
    grid = cfg.d_grid or [8]
    if len(grid) != 1:
        raise UsageError("spectrum takes a single dimension in --d-grid")
    d = grid[0]
    trunc = build_truncation(density, (d,) * density.modes)
    ev = trunc.spectrum.eigenvalues
    summary = {"min": float(ev[0]), "max": float(ev[-1]), "trace": math.fsum(ev)}
    if cfg.format == "json":
        return dump_json({"d": d, "dims": list(trunc.dims), "eigenvalues": ev.tolist(), **summary})
    rows = [[str(i), fmt(v)] for i, v in enumerate(ev)]
    rows += [[k, fmt(v)] for k, v in summary.items()]
    return _csv_text(["index", "eigenvalue"], rows)


def cmd_figure(cfg: RunConfig) -> str:
    fam = cfg.family or "all"
    if fam == "all":
        names = list(FIGURE_CURVES)
    elif fam in FIGURE_CURVES:
        names = [fam]
    else:
        raise UsageError(f"figure needs a one-parameter family or 'all', got {fam!r}")
    rows = []
    for name in names:
        func, spacing = FIGURE_CURVES[name]
        for p in parse_grid(cfg.grid or DEFAULT_FIGURE_GRID, spacing):
            rows.append([name, fmt(p), fmt(func(p))])
    if cfg.format == "json":
        return dump_json([{"family": r[0], "param": float(r[1]), "capacity_bits": float(r[2])} for r in rows])
    return _csv_text(["family", "param", "capacity_bits"], rows)


COMMANDS = {
    "capacity": cmd_capacity,
    "converge": cmd_converge,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "figure": cmd_figure,
}
DEFAULT_FORMAT = {"capacity": "json", "converge": "csv", "simulate": "json", "spectrum": "csv", "figure": "csv"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dephasing", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", choices=[*FAMILIES, "all"] if name == "figure" else FAMILIES)
        p.add_argument("--param", action="append", default=[], help="repeat for product: family:value")
        p.add_argument("--d-grid", help="e.g. 2,4,8 or 2,4,...,256")
        p.add_argument("--alpha-grid", help="comma list of Renyi orders > 1")
        p.add_argument("--grid", help="figure grid start:stop:count")
        p.add_argument("--input", help="simulate input: plus, maxmixed, random or a matrix CSV path")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int)
        p.add_argument("--tab-file", help="CSV of angle,value samples for --family tabulated")
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        family=ns.family,
        params=ns.param,
        d_grid=parse_d_grid(ns.d_grid) if ns.d_grid else [],
        alpha_grid=parse_alpha_grid(ns.alpha_grid) if ns.alpha_grid else [],
        format=ns.format or DEFAULT_FORMAT[ns.command],
        out_path=ns.out,
        seed=ns.seed,
        grid=ns.grid,
        input=ns.input,
        tab_file=ns.tab_file,
    )


def _fail(code: int, exc: BaseException) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        text = COMMANDS[cfg.command](cfg)
    except (UsageError, DomainError, DimensionMismatchError, CapExceededError, FileNotFoundError) as exc:
        return _fail(EXIT_USAGE, exc)
    except (ArithmeticError, AssertionError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
