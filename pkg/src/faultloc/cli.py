"""Command-line front end: single locate runs, scenario sweeps, reports.

A run simulates the requested fault(s) on a case, feeds the synthetic
measurements to the selected estimators, and emits one report row per
(scenario, method).  Reports are deterministic: rows are sorted by
(line, type, m, rf, method) and identical inputs produce byte-identical
files; timing is printed to stderr, never into the report.

Exit codes: 0 success, 1 parse/validation failure, 2 infeasible placement.
"""
from __future__ import annotations

from dataclasses import dataclass

import argparse
import json
import math
import os
import sys
import tempfile
import time

from .faultsim import Distortion, FaultScenario, FaultStudy, FaultType, MeasurementTaps, apply_distortion
from .locator import (
    CurrentPlacement,
    DegenerateChannelError,
    HybridPlacement,
    LinearDependenceError,
    Method,
    Placement,
    VoltagePlacement,
    estimate_for_placement,
    feasibility_check,
    percent_error,
)
from .netmodel import CaseError, Network, load_case

__all__ = ["main", "SweepSpec", "run_locate", "run_sweep"]

CSV_COLUMNS = "line,type,m_true,rf_ohm,method,m_est,residual,pct_error,feasible"


class PlacementError(Exception):
    """Raised when a placement cannot observe the requested fault."""


@dataclass(frozen=True)
class SweepSpec:
    """Cross-product scenario sweep: lines x types x m values x rf values.

    ``buses``/``branches`` feed the same placement rules as the single-run
    flags: the voltage method uses the first two buses, the current method
    the first two branches, and the hybrid methods pair the first branch
    with the last bus.
    """

    case: str
    lines: tuple[str, ...]
    types: tuple[FaultType, ...]
    m_values: tuple[float, ...]
    rf_ohm: tuple[float, ...]
    methods: tuple[Method, ...]
    buses: tuple[int, ...] = ()
    branches: tuple[str, ...] = ()
    distort: tuple[str, ...] = ()
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        for name in ("lines", "types", "m_values", "rf_ohm", "methods"):
            if not getattr(self, name):
                raise ValueError(f"sweep spec field {name!r} must be a non-empty list")
        for m in self.m_values:
            if not 0.0 <= m <= 1.0:
                raise ValueError(f"sweep m value {m} outside [0, 1]")
        for rf in self.rf_ohm:
            if rf < 0:
                raise ValueError(f"negative sweep fault resistance {rf}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown report format {self.format!r}")


def load_sweep_spec(path: str, default_case: str | None = None) -> SweepSpec:
    """Read a sweep spec; ``case`` may be omitted when a default is given."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        spec = SweepSpec(
            case=raw.get("case", default_case) or "",
            lines=tuple(raw["lines"]),
            types=tuple(FaultType(t) for t in raw["types"]),
            m_values=tuple(float(m) for m in raw["m_values"]),
            rf_ohm=tuple(float(r) for r in raw["rf_ohm"]),
            methods=tuple(Method(m) for m in raw["methods"]),
            buses=tuple(int(b) for b in raw.get("buses", [])),
            branches=tuple(str(b) for b in raw.get("branches", [])),
            distort=tuple(raw.get("distort", [])),
            out=raw.get("out"),
            format=raw.get("format", "csv"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"bad sweep spec {path!r}: {exc}") from None
    if not spec.case:
        raise ValueError(f"sweep spec {path!r} names no case file")
    spec.validate()
    return spec


def parse_distortion(token: str) -> Distortion:
    """Parse ``kind:channel:gain:MAG[:PHASE_DEG]`` or ``kind:channel:clamp:PU``."""
    parts = token.split(":")
    if len(parts) < 4:
        raise ValueError(f"bad distortion spec {token!r}")
    kind, channel, op = parts[0], parts[1], parts[2]
    if kind not in ("busV", "branchI"):
        raise ValueError(f"bad distortion channel kind {kind!r}")
    if op == "gain":
        gain = float(parts[3])
        phase = float(parts[4]) if len(parts) > 4 else 0.0
        return Distortion(kind=kind, channel=channel, gain=gain, phase_deg=phase)
    if op == "clamp":
        return Distortion(kind=kind, channel=channel, clamp_pu=float(parts[3]))
    raise ValueError(f"bad distortion op {op!r} (expected gain or clamp)")


def _resolve_branch(net: Network, token: str) -> str:
    """Map a branch flag token to a measurement channel id.

    Accepts a line id, an ``a-b`` endpoint pair, and an optional ``@from`` /
    ``@to`` suffix selecting a terminal current of that line.
    """
    base, sep, suffix = token.partition("@")
    if suffix not in ("", "from", "to"):
        raise ValueError(f"bad branch terminal suffix in {token!r}")
    try:
        line_id = net.line(base).id
    except CaseError:
        a_s, dash, b_s = base.partition("-")
        if not dash:
            raise ValueError(f"unknown branch {token!r}") from None
        try:
            line_id = net.line_between(int(a_s), int(b_s)).id
        except (ValueError, CaseError):
            raise ValueError(f"unknown branch {token!r}") from None
    return line_id + sep + suffix


def _placement_for(
    method: Method, buses: tuple[int, ...], branches: tuple[str, ...]
) -> Placement:
    if method is Method.SSVM:
        if len(buses) < 2:
            raise ValueError("voltage method needs two buses (--buses a,b)")
        return VoltagePlacement(buses[0], buses[1])
    if method is Method.SSCM:
        if len(branches) < 2:
            raise ValueError("current method needs two branches (--branches a,b)")
        return CurrentPlacement(branches[0], branches[1])
    if not branches or not buses:
        raise ValueError("hybrid methods need a branch and a bus")
    return HybridPlacement(branches[0], buses[-1])


@dataclass
class ReportRow:
    line: str
    type: str
    m_true: float
    rf_ohm: float
    method: str
    m_est: float
    residual: float
    pct_error: float
    feasible: bool

    def sort_key(self):
        return (self.line, self.type, self.m_true, self.rf_ohm, self.method)


def _evaluate(
    net: Network,
    study: FaultStudy,
    scenario: FaultScenario,
    methods: tuple[Method, ...],
    placements: dict[Method, Placement],
    distort: tuple[str, ...],
) -> list[ReportRow]:
    taps = MeasurementTaps(faulted_segments=True)
    ms = study.measurements(scenario, taps)
    if distort:
        ms = apply_distortion(ms, [parse_distortion(t) for t in distort])
    line = net.line(scenario.line_id)
    rows = []
    for method in methods:
        placement = placements[method]
        ok, reason = feasibility_check(net, scenario.line_id, placement, study.zbus(1))
        if not ok:
            raise PlacementError(
                f"{method.value} placement infeasible for line {scenario.line_id}: {reason}"
            )
        try:
            est = estimate_for_placement(
                net, study.zbus(1), scenario.line_id, placement, ms, method
            )
        except (DegenerateChannelError, LinearDependenceError) as exc:
            raise PlacementError(f"{method.value}: {exc}") from None
        length = line.length_km
        rows.append(
            ReportRow(
                line=scenario.line_id,
                type=scenario.fault_type.value,
                m_true=scenario.m,
                rf_ohm=scenario.rf_ohm,
                method=method.value,
                m_est=est.m,
                residual=est.residual,
                pct_error=percent_error(scenario.m * length, est.m * length, length),
                feasible=ok,
            )
        )
    return rows


def run_locate(
    net: Network,
    scenario: FaultScenario,
    methods: tuple[Method, ...],
    buses: tuple[int, ...],
    branches: tuple[str, ...],
    distort: tuple[str, ...] = (),
) -> list[ReportRow]:
    """Evaluate one scenario with the selected methods."""
    placements = {m: _placement_for(m, buses, branches) for m in methods}
    study = FaultStudy(net)
    rows = _evaluate(net, study, scenario, methods, placements, distort)
    rows.sort(key=ReportRow.sort_key)
    return rows


def run_sweep(spec: SweepSpec) -> list[ReportRow]:
    """Evaluate the sweep's full scenario cross-product, deterministically."""
    spec.validate()
    net = load_case(spec.case)
    branches = tuple(_resolve_branch(net, b) for b in spec.branches)
    placements = {m: _placement_for(m, spec.buses, branches) for m in spec.methods}
    study = FaultStudy(net)
    rows: list[ReportRow] = []
    for line_id in spec.lines:
        for ftype in spec.types:
            for m in spec.m_values:
                for rf in spec.rf_ohm:
                    scenario = FaultScenario(line_id, m, ftype, rf)
                    rows.extend(
                        _evaluate(net, study, scenario, spec.methods, placements, spec.distort)
                    )
    rows.sort(key=ReportRow.sort_key)
    return rows


def aggregates_by_method(rows: list[ReportRow]) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for method in sorted({r.method for r in rows}):
        errs = [r.pct_error for r in rows if r.method == method]
        out[method] = {
            "max_pct_error": max(errs),
            "mean_pct_error": sum(errs) / len(errs),
        }
    return out


def _num(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def render_csv(rows: list[ReportRow]) -> str:
    lines = [CSV_COLUMNS]
    for r in rows:
        lines.append(
            f"{r.line},{r.type},{_num(r.m_true)},{_num(r.rf_ohm)},{r.method},"
            f"{_num(r.m_est)},{_num(r.residual)},{_num(r.pct_error)},"
            f"{'true' if r.feasible else 'false'}"
        )
    for method, agg in aggregates_by_method(rows).items():
        lines.append(
            f"# aggregate,{method},max_pct_error={_num(agg['max_pct_error'])},"
            f"mean_pct_error={_num(agg['mean_pct_error'])}"
        )
    return "\n".join(lines) + "\n"


def render_json(rows: list[ReportRow]) -> str:
    doc = {
        "schema": 1,
        "rows": [
            {
                "line": r.line,
                "type": r.type,
                "m_true": r.m_true,
                "rf_ohm": r.rf_ohm,
                "method": r.method,
                "m_est": r.m_est,
                "residual": r.residual,
                "pct_error": r.pct_error,
                "feasible": r.feasible,
            }
            for r in rows
        ],
        "aggregates": aggregates_by_method(rows),
    }
    return json.dumps(doc, indent=2) + "\n"


def write_report(text: str, out: str | None) -> None:
    """Write atomically: a failed run must not leave a partial file."""
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".faultloc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(
        prog="faultloc",
        description=(
            "Locate faults on a meshed network from sparse synchronized"
            " phasor measurements (simulated analytically from the case)."
        ),
        epilog=(
            "Fault resistance is given in ohms and converted internally on the"
            " case impedance base (kV^2/MVA).  Placements: --buses a,b feeds"
            " the voltage method, --branches a,b the current method, and the"
            " hybrid methods pair the first branch with the last bus."
            "  Branches may be line ids, from-to pairs (1-5), or terminal"
            " channels (T2@from)."
        ),
    )
    p.add_argument("--case", required=True, help="case file path")
    p.add_argument("--sweep", help="JSON sweep spec file (overrides scenario flags)")
    p.add_argument("--line", help="faulted line id")
    p.add_argument("--type", choices=[t.value for t in FaultType], help="fault type")
    p.add_argument("--m", type=float, help="normalized fault position in [0,1]")
    p.add_argument("--rf-ohm", type=float, default=0.0, help="fault resistance in ohms")
    p.add_argument(
        "--method",
        default="all",
        choices=[m.value for m in Method] + ["all"],
        help="estimator to run (default: all)",
    )
    p.add_argument("--buses", default="", help="comma-separated bus labels")
    p.add_argument("--branches", default="", help="comma-separated branch channels")
    p.add_argument(
        "--distort",
        action="append",
        default=[],
        metavar="SPEC",
        help="channel distortion kind:channel:gain:MAG[:PHASE_DEG] or"
        " kind:channel:clamp:PU (repeatable)",
    )
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.sweep:
            spec = load_sweep_spec(args.sweep, default_case=args.case)
            rows = run_sweep(spec)
            fmt = spec.format
            out = args.out if args.out is not None else spec.out
        else:
            net = load_case(args.case)
            if not args.line or not args.type or args.m is None:
                raise ValueError("single runs need --line, --type and --m")
            methods = (
                tuple(Method) if args.method == "all" else (Method(args.method),)
            )
            buses = tuple(int(b) for b in args.buses.split(",") if b)
            branches = tuple(
                _resolve_branch(net, b) for b in args.branches.split(",") if b
            )
            scenario = FaultScenario(args.line, args.m, FaultType(args.type), args.rf_ohm)
            rows = run_locate(net, scenario, methods, buses, branches, tuple(args.distort))
            fmt = args.format
            out = args.out
        text = render_csv(rows) if fmt == "csv" else render_json(rows)
        write_report(text, out)
    except PlacementError as exc:
        print(f"faultloc: infeasible placement: {exc}", file=sys.stderr)
        return 2
    except (CaseError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"faultloc: error: {exc}", file=sys.stderr)
        return 1
    print(
        f"faultloc: {len(rows)} rows in {time.perf_counter() - started:.3f}s",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
