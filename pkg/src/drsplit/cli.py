"""Problem-file parsing, experiment sweeps, and CSV/trace emission.

A problem file is a JSON document pairing two set descriptors (or a list of
sets to lift) with methods, a start (single point or square grid), stopping
parameters, and output paths.  Sweeps run every declared method from every
start and emit one CSV row per (start, method), with deterministic float
formatting (17 significant digits) and fixed row order: row-major grid,
method order as declared.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .epigraph import WitnessFamily, luque_witness
from .functions import function_from_name
from .lifting import lift
from .methods import MethodKind, dra_step, map_step, mrp_step, run
from .sets import (
    Affine,
    Ball,
    Box,
    ConvexSet,
    Diagonal,
    Epigraph1D,
    Halfspace,
    Hyperplane,
    Orthant,
    Polygon2D,
    Product,
)
from .trace import (
    ExactFixedPoint,
    Feasibility,
    IterationTrace,
    MaxIter,
    Monitor,
    Reason,
)

FIRST_N_TOLS = (1e-2, 1e-4)
NOT_REACHED = -1


class ParseError(ValueError):
    """Problem file is not well-formed (syntax or missing/bad field)."""

    def __init__(self, message, line=None, fieldname=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if fieldname is not None:
            where.append(f"field {fieldname!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")
        self.line = line
        self.fieldname = fieldname


class ValidationError(ValueError):
    """Problem file is well-formed but semantically invalid."""


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


# ---------------------------------------------------------------------------
# set descriptor <-> config dict


def set_from_config(cfg: dict, ambient_dim: Optional[int] = None) -> ConvexSet:
    """Build a descriptor from its tagged dict form."""
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise ParseError("set descriptor must be an object with a 'type' tag")
    kind = cfg["type"]
    try:
        if kind == "affine":
            return Affine(cfg["L"], cfg["a"])
        if kind == "hyperplane":
            return Hyperplane(cfg["normal"], cfg["offset"])
        if kind == "halfspace":
            return Halfspace(cfg["normal"], cfg["offset"])
        if kind == "box":
            return Box(cfg["lo"], cfg["hi"])
        if kind == "orthant":
            dim = cfg.get("dim", ambient_dim)
            if dim is None:
                raise ParseError("orthant needs a 'dim'", fieldname="dim")
            return Orthant(dim)
        if kind == "ball":
            return Ball(cfg["center"], cfg["radius"])
        if kind == "polygon":
            return Polygon2D(cfg["vertices"])
        if kind == "epigraph":
            return Epigraph1D(function_from_name(cfg["f"]))
        if kind == "diagonal":
            return Diagonal(cfg["copies"], cfg["base_dim"])
        if kind == "product":
            # block dims differ from the ambient dim, so components must
            # spell out their own dimensions
            return Product([set_from_config(c, None) for c in cfg["components"]])
    except KeyError as e:
        raise ParseError(f"missing key for {kind!r} descriptor", fieldname=str(e))
    raise ValidationError(f"unknown set type {kind!r}")


def set_to_config(s: ConvexSet) -> dict:
    if isinstance(s, Affine):
        return {"type": "affine", "L": s.L.tolist(), "a": s.a.tolist()}
    if isinstance(s, Hyperplane):
        return {"type": "hyperplane", "normal": s.normal.tolist(), "offset": s.offset}
    if isinstance(s, Halfspace):
        return {"type": "halfspace", "normal": s.normal.tolist(), "offset": s.offset}
    if isinstance(s, Box):
        return {"type": "box", "lo": s.lo.tolist(), "hi": s.hi.tolist()}
    if isinstance(s, Orthant):
        return {"type": "orthant", "dim": s.dim}
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Polygon2D):
        return {"type": "polygon", "vertices": s.vertices.tolist()}
    if isinstance(s, Epigraph1D):
        return {"type": "epigraph", "f": s.f.spec_name()}
    if isinstance(s, Diagonal):
        return {"type": "diagonal", "copies": s.copies, "base_dim": s.base_dim}
    if isinstance(s, Product):
        return {
            "type": "product",
            "components": [set_to_config(c) for c in s.components],
        }
    raise ValidationError(f"{type(s).__name__} has no problem-file form")


# ---------------------------------------------------------------------------
# problem specs


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    steps: int


@dataclass(eq=False)
class ProblemSpec:
    """Validated, runnable description of one experiment."""

    dim: int
    methods: list
    set_a: Optional[ConvexSet] = None
    set_b: Optional[ConvexSet] = None
    lift_sets: Optional[list] = None
    start_point: Optional[np.ndarray] = None
    grid: Optional[GridSpec] = None
    eta: float = 1e-14
    tol: float = 1e-4
    monitor: Monitor = Monitor.ITERATE
    max_iter: int = 100_000
    csv_path: Optional[str] = None
    trace_path: Optional[str] = None
    record_at: list = field(default_factory=lambda: [5, 10])

    def to_dict(self) -> dict:
        if self.lift_sets is not None:
            sets = {
                "sets": [set_to_config(s) for s in self.lift_sets],
                "lift": True,
            }
        else:
            sets = {
                "set_a": set_to_config(self.set_a),
                "set_b": set_to_config(self.set_b),
            }
        if self.grid is not None:
            start = {"grid": {"lo": self.grid.lo, "hi": self.grid.hi,
                              "steps": self.grid.steps}}
        else:
            start = {"point": self.start_point.tolist()}
        outputs = {"record_at": list(self.record_at)}
        if self.csv_path is not None:
            outputs["csv_path"] = self.csv_path
        if self.trace_path is not None:
            outputs["trace_path"] = self.trace_path
        return {
            "dim": self.dim,
            **sets,
            "methods": [m.value for m in self.methods],
            "start": start,
            "stopping": {
                "eta": self.eta,
                "tol": self.tol,
                "monitor": self.monitor.value,
                "max_iter": self.max_iter,
            },
            "outputs": outputs,
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, ProblemSpec) and self.to_dict() == other.to_dict()


def serialize_problem(spec: ProblemSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n"


def _method_from_name(name: str) -> MethodKind:
    try:
        return MethodKind(str(name).upper())
    except ValueError:
        raise ValidationError(f"unknown method {name!r}")


def parse_problem(text: str) -> ProblemSpec:
    """Parse and validate a problem file.

    Raises ParseError for malformed documents (with line/field context) and
    ValidationError for semantic problems: rank-deficient affine matrices,
    grids in dimensions other than 2, unknown methods, and the like.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from e
    if not isinstance(doc, dict):
        raise ParseError("problem file must be a JSON object")

    def need(key, obj=doc):
        if key not in obj:
            raise ParseError("missing required field", fieldname=key)
        return obj[key]

    dim = need("dim")
    if not isinstance(dim, int) or dim < 1:
        raise ValidationError("'dim' must be a positive integer")

    set_a = set_b = lift_sets = None
    if "sets" in doc:
        if "set_a" in doc or "set_b" in doc:
            raise ValidationError("give either 'sets' or 'set_a'/'set_b', not both")
        if not doc.get("lift", False):
            raise ValidationError("'sets' requires \"lift\": true")
        raw_sets = doc["sets"]
        if not isinstance(raw_sets, list) or not raw_sets:
            raise ParseError("'sets' must be a nonempty list", fieldname="sets")
        try:
            lift_sets = [set_from_config(c, dim) for c in raw_sets]
        except (ValueError, TypeError) as e:
            if isinstance(e, ParseError):
                raise
            raise ValidationError(str(e)) from e
        for s in lift_sets:
            if s.dim != dim:
                raise ValidationError(
                    f"lifted set has dimension {s.dim}, expected {dim}"
                )
    else:
        try:
            set_a = set_from_config(need("set_a"), dim)
            set_b = set_from_config(need("set_b"), dim)
        except (ValueError, TypeError) as e:
            if isinstance(e, (ParseError, ValidationError)):
                raise
            raise ValidationError(str(e)) from e
        for name, s in (("set_a", set_a), ("set_b", set_b)):
            if s.dim != dim:
                raise ValidationError(
                    f"{name} has dimension {s.dim}, expected {dim}"
                )

    methods = [_method_from_name(m) for m in need("methods")]
    if not methods:
        raise ValidationError("'methods' must name at least one method")

    start = need("start")
    start_point = None
    grid = None
    if "grid" in start:
        if dim != 2:
            raise ValidationError("grid starts are only valid for dim = 2")
        g = start["grid"]
        try:
            grid = GridSpec(lo=float(g["lo"]), hi=float(g["hi"]),
                            steps=int(g["steps"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("grid needs numeric lo, hi and integer steps",
                             fieldname="start.grid") from e
        if grid.steps < 1 or grid.lo > grid.hi:
            raise ValidationError("grid needs lo <= hi and steps >= 1")
    elif "point" in start:
        try:
            start_point = np.asarray(start["point"], dtype=float)
        except (TypeError, ValueError) as e:
            raise ParseError("start point must be a numeric list",
                             fieldname="start.point") from e
        if start_point.shape != (dim,) or not np.all(np.isfinite(start_point)):
            raise ValidationError(f"start point must be a finite vector of length {dim}")
    else:
        raise ParseError("start must contain 'point' or 'grid'", fieldname="start")

    stopping = doc.get("stopping", {})
    eta = float(stopping.get("eta", 1e-14))
    tol = float(stopping.get("tol", 1e-4))
    max_iter = int(stopping.get("max_iter", 100_000))
    try:
        monitor = Monitor(stopping.get("monitor", "iterate"))
    except ValueError:
        raise ValidationError(f"unknown monitor {stopping.get('monitor')!r}")
    if eta <= 0 or tol <= 0 or max_iter < 1:
        raise ValidationError("stopping parameters must be positive")

    outputs = doc.get("outputs", {})
    record_at = list(outputs.get("record_at", [5, 10]))
    if any((not isinstance(n, int)) or n < 0 for n in record_at):
        raise ValidationError("record_at must contain nonnegative integers")
    if record_at != sorted(record_at):
        raise ValidationError("record_at must be sorted ascending")
    trace_path = outputs.get("trace_path")
    if trace_path is not None and grid is not None:
        raise ValidationError("trace output requires a point start")

    return ProblemSpec(
        dim=dim,
        methods=methods,
        set_a=set_a,
        set_b=set_b,
        lift_sets=lift_sets,
        start_point=start_point,
        grid=grid,
        eta=eta,
        tol=tol,
        monitor=monitor,
        max_iter=max_iter,
        csv_path=outputs.get("csv_path"),
        trace_path=trace_path,
        record_at=record_at,
    )


def load_problem(path) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


def builtin_problem_path(name: str):
    """Path of a problem file shipped with the package."""
    return resources.files(__package__) / "problems" / name


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    """One (start, method) result of a sweep."""

    z0: np.ndarray
    method: MethodKind
    iterations: int
    exact: bool
    final: np.ndarray
    d_b_at: tuple
    first_n: tuple
    reason: Reason


def _shadow_monitored(method: MethodKind) -> bool:
    return method in (MethodKind.DRA, MethodKind.SPINGARN)


def _advance(set_a, set_b, method, z):
    if method in (MethodKind.DRA, MethodKind.SPINGARN):
        # Spingarn's pair iteration generates the same governing sequence
        return dra_step(set_a, set_b, z)[0]
    if method is MethodKind.MAP:
        return map_step(set_a, set_b, z)
    return mrp_step(set_a, set_b, z)


class _MonitoredRun:
    """Lazily extends a finished run so distances can be read at iteration
    indices past its termination."""

    def __init__(self, set_a, set_b, method, trace: IterationTrace):
        if trace.steps != tuple(range(len(trace))):
            raise ValueError("monitored runs need unthinned traces")
        self.set_a = set_a
        self.set_b = set_b
        self.method = method
        self.shadow = _shadow_monitored(method)
        self._d = []
        for k in range(len(trace)):
            point = trace.a[k] if self.shadow else trace.z[k]
            d = self.set_b.distance(point) if self.shadow else trace.d_b[k]
            self._d.append(d)
        self._z = trace.z[-1]

    def distance_at(self, n: int, cap: int) -> float:
        if n > cap:
            return float("nan")
        while n >= len(self._d):
            self._z = _advance(self.set_a, self.set_b, self.method, self._z)
            point = self.set_a.project(self._z) if self.shadow else self._z
            self._d.append(self.set_b.distance(point))
        return self._d[n]

    def first_below(self, tol: float, cap: int) -> int:
        for n in range(cap + 1):
            if self.distance_at(n, cap) < tol:
                return n
        return NOT_REACHED


def _resolve_sets(spec: ProblemSpec):
    if spec.lift_sets is not None:
        lp = lift(spec.lift_sets)
        return lp.set_a, lp.set_b, lp
    return spec.set_a, spec.set_b, None


def _starts(spec: ProblemSpec):
    if spec.grid is None:
        return [np.asarray(spec.start_point, dtype=float)]
    axis = np.linspace(spec.grid.lo, spec.grid.hi, spec.grid.steps)
    return [np.array([x, y]) for x in axis for y in axis]


def _rules_for(method: MethodKind, spec: ProblemSpec):
    if _shadow_monitored(method):
        return [ExactFixedPoint(spec.eta), MaxIter(spec.max_iter)]
    return [Feasibility(spec.tol, spec.monitor), MaxIter(spec.max_iter)]


def sweep(spec: ProblemSpec, keep_traces: bool = False):
    """Run every method from every start point.

    Returns the rows, plus a {(start index, method): trace} dict when
    ``keep_traces`` is set.  Rows that hit the iteration cap are flagged
    by their termination reason, never dropped.
    """
    set_a, set_b, lp = _resolve_sets(spec)
    embed = lp.embed if lp is not None else (lambda x: x)
    restrict = lp.restrict if lp is not None else (lambda x: x)
    rows = []
    traces = {}
    for i, z0 in enumerate(_starts(spec)):
        for method in spec.methods:
            trace = run(set_a, set_b, method, embed(z0), _rules_for(method, spec))
            mon = _MonitoredRun(set_a, set_b, method, trace)
            d_b_at = tuple(
                mon.distance_at(n, spec.max_iter) for n in spec.record_at
            )
            first_n = tuple(
                mon.first_below(tol, spec.max_iter) for tol in FIRST_N_TOLS
            )
            rows.append(
                SweepRow(
                    z0=z0,
                    method=method,
                    iterations=trace.iterations,
                    exact=trace.termination.exact,
                    final=restrict(trace.final_point),
                    d_b_at=d_b_at,
                    first_n=first_n,
                    reason=trace.termination.reason,
                )
            )
            if keep_traces:
                traces[(i, method)] = trace
    return (rows, traces) if keep_traces else rows


# ---------------------------------------------------------------------------
# emission


def _coord_names(prefix: str, dim: int):
    if dim == 2:
        return [f"{prefix}_x", f"{prefix}_y"]
    return [f"{prefix}_{i}" for i in range(dim)]


def csv_header(dim: int, record_at: Sequence[int]) -> str:
    cols = _coord_names("z0", dim)
    cols += ["method", "iterations", "exact"]
    cols += _coord_names("final", dim)
    cols += [f"dB_at_{n}" for n in record_at]
    cols += ["first_n_tol_1e2", "first_n_tol_1e4", "reason"]
    return ",".join(cols)


def emit_csv(rows: Sequence[SweepRow], path, record_at: Sequence[int]) -> None:
    """Write one line per row under the fixed header; floats carry 17
    significant digits so identical specs yield byte-identical files."""
    if not rows:
        raise ValueError("no rows to write")
    dim = len(rows[0].z0)
    lines = [csv_header(dim, record_at)]
    for row in rows:
        cells = [_fmt(c) for c in row.z0]
        cells += [row.method.value, str(row.iterations),
                  "true" if row.exact else "false"]
        cells += [_fmt(c) for c in row.final]
        cells += [_fmt(d) for d in row.d_b_at]
        cells += [str(n) for n in row.first_n]
        cells.append(row.reason.value)
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_trace(traces: dict, spec: ProblemSpec, path) -> None:
    """Write per-iterate data (z, a, r, P_B r, distances) for point runs."""
    dim = next(iter(traces.values())).z[0].shape[0]
    cols = ["n", "method"]
    for prefix in ("z", "a", "r", "pbr"):
        cols += _coord_names(prefix, dim)
    cols += ["d_A", "d_B"]
    lines = [",".join(cols)]
    for method in spec.methods:
        for key, trace in traces.items():
            if key[1] is not method:
                continue
            for k, n in enumerate(trace.steps):
                cells = [str(n), method.value]
                for seq in (trace.z, trace.a, trace.r, trace.pbr):
                    cells += [_fmt(c) for c in seq[k]]
                cells += [_fmt(trace.d_a[k]), _fmt(trace.d_b[k])]
                lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# command line


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="drsplit",
        description="Convex-feasibility sweeps with DRA, MAP, MRP and "
        "Spingarn's method.",
    )
    p.add_argument("--problem", help="problem file (JSON)")
    p.add_argument("--method", help="comma-separated methods, overrides the file")
    p.add_argument("--out", help="CSV output path, overrides the file")
    p.add_argument("--trace", help="per-iterate trace output path (point starts)")
    p.add_argument("--tol", type=float, help="feasibility tolerance override")
    p.add_argument("--max-iter", type=int, help="iteration cap override")
    p.add_argument("--grid", help="lo,hi,steps grid override (dim 2)")
    p.add_argument("--record-at", help="comma-separated iteration indices")
    p.add_argument(
        "--witness",
        choices=[f.value for f in WitnessFamily],
        help="evaluate the small-step witness family instead of a problem",
    )
    p.add_argument("--eps", help="comma-separated eps values for --witness")
    return p


def _apply_overrides(spec: ProblemSpec, args) -> ProblemSpec:
    if args.method:
        spec.methods = [_method_from_name(m) for m in args.method.split(",")]
    if args.tol is not None:
        if args.tol <= 0:
            raise ValidationError("--tol must be positive")
        spec.tol = args.tol
    if args.max_iter is not None:
        if args.max_iter < 1:
            raise ValidationError("--max-iter must be at least 1")
        spec.max_iter = args.max_iter
    if args.grid:
        try:
            lo, hi, steps = args.grid.split(",")
            grid = GridSpec(lo=float(lo), hi=float(hi), steps=int(steps))
        except ValueError as e:
            raise ValidationError("--grid expects lo,hi,steps") from e
        if spec.dim != 2:
            raise ValidationError("grid starts are only valid for dim = 2")
        if grid.steps < 1 or grid.lo > grid.hi:
            raise ValidationError("grid needs lo <= hi and steps >= 1")
        spec.grid = grid
        spec.start_point = None
    if args.record_at:
        try:
            record_at = [int(n) for n in args.record_at.split(",")]
        except ValueError as e:
            raise ValidationError("--record-at expects integers") from e
        if record_at != sorted(record_at) or any(n < 0 for n in record_at):
            raise ValidationError("record_at must be sorted, nonnegative")
        spec.record_at = record_at
    if args.out:
        spec.csv_path = args.out
    if args.trace:
        if spec.grid is not None:
            raise ValidationError("trace output requires a point start")
        spec.trace_path = args.trace
    return spec


def _run_witness(args) -> int:
    family = WitnessFamily(args.witness)
    eps_list = [float(e) for e in (args.eps or "0.1,0.01,0.001").split(",")]
    lines = ["family,eps,step_residual,fix_distance"]
    for eps in eps_list:
        step_residual, fix_distance = luque_witness(family, eps)
        lines.append(
            f"{family.value},{_fmt(eps)},{_fmt(step_residual)},{_fmt(fix_distance)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.witness:
            return _run_witness(args)
        if not args.problem:
            print("error: --problem or --witness is required", file=sys.stderr)
            return 2
        spec = _apply_overrides(load_problem(args.problem), args)
        if spec.csv_path is None:
            raise ValidationError("no CSV output path (use --out or outputs.csv_path)")
        keep = spec.trace_path is not None
        result = sweep(spec, keep_traces=keep)
        rows, traces = result if keep else (result, None)
        emit_csv(rows, spec.csv_path, spec.record_at)
        if traces:
            emit_trace(traces, spec, spec.trace_path)
        print(f"wrote {len(rows)} rows to {spec.csv_path}")
        return 0
    except (ParseError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
