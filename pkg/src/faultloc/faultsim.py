"""Analytic short-circuit simulator producing synthetic phasor measurements.

Given a fault scenario the simulator returns exact pre-fault and during-fault
sequence voltages and branch currents, the same quantities a set of
synchronized phasor measurement units would report.  The fault is resolved by
interconnecting the three sequence networks at the fault point according to
the fault type; bus and branch quantities then follow from the
fault-position coefficient laws.

Sign conventions: branch currents flow from-bus -> to-bus; fault current
flows out of the network at the fault point.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import cmath
import math

import numpy as np

from .netmodel import Network
from .seqmatrix import (
    SequenceZbus,
    branch_coefficients,
    build_ybus,
    build_zbus,
    fault_point_coefficients,
    transfer_coefficients,
)

__all__ = [
    "FaultType",
    "FaultScenario",
    "SequenceFaultCurrents",
    "MeasurementTaps",
    "PhasorMeasurementSet",
    "Distortion",
    "FaultStudy",
    "prefault_solve",
    "fault_sequence_currents",
    "simulate_measurements",
    "apply_distortion",
    "sequence_transform",
    "inverse_sequence_transform",
    "measurements_to_csv",
    "measurements_from_csv",
]

_ALPHA = cmath.exp(2j * math.pi / 3.0)

SequenceTriple = tuple[complex, complex, complex]


class FaultType(str, Enum):
    LG = "LG"
    LL = "LL"
    LLG = "LLG"
    LLL = "LLL"


@dataclass(frozen=True)
class FaultScenario:
    """A shunt fault on a line at normalized distance m from its from-bus."""

    line_id: str
    m: float
    fault_type: FaultType
    rf_ohm: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"fault position m={self.m} outside [0, 1]")
        if self.rf_ohm < 0.0:
            raise ValueError(f"negative fault resistance {self.rf_ohm}")
        if not isinstance(self.fault_type, FaultType):
            object.__setattr__(self, "fault_type", FaultType(self.fault_type))


@dataclass(frozen=True)
class SequenceFaultCurrents:
    """Zero/positive/negative sequence currents at the fault point."""

    i0: complex
    i1: complex
    i2: complex

    def triple(self) -> SequenceTriple:
        return (self.i0, self.i1, self.i2)


@dataclass(frozen=True)
class MeasurementTaps:
    """Which channels a measurement set should report.

    ``None`` for buses or branches means "all" (branches: all except the
    faulted line).  ``faulted_segments`` adds the two terminal currents of
    the faulted line itself, channel ids ``<line>@from`` and ``<line>@to``,
    defined as the current each terminal feeds toward the fault point; that
    is what a current transformer at the terminal reads.
    """

    buses: tuple[int, ...] | None = None
    branches: tuple[str, ...] | None = None
    faulted_segments: bool = False


@dataclass(frozen=True)
class PhasorMeasurementSet:
    """Synchronized pre-fault and during-fault phasors at selected channels.

    Pre-fault values are positive-sequence; during-fault values are
    (zero, positive, negative) triples.  All phasors share one reference
    angle, recorded by ``token``.
    """

    prefault_bus_v: dict[int, complex]
    fault_bus_v: dict[int, SequenceTriple]
    prefault_branch_i: dict[str, complex]
    fault_branch_i: dict[str, SequenceTriple]
    token: str = ""

    def delta_v(self, bus: int) -> complex:
        """Positive-sequence voltage change at a bus."""
        return self.fault_bus_v[bus][1] - self.prefault_bus_v[bus]

    def delta_i(self, branch_id: str) -> complex:
        """Positive-sequence current change on a branch channel."""
        return self.fault_branch_i[branch_id][1] - self.prefault_branch_i[branch_id]


def prefault_solve(net: Network) -> tuple[dict[int, complex], dict[str, complex]]:
    """Positive-sequence steady state before the fault.

    Sources are EMFs behind their internal impedance (solved as Norton
    injections); branch currents follow from terminal voltage differences.
    With all EMFs equal the profile is flat and every branch current is zero.
    """
    y = build_ybus(net, 1)
    j = np.zeros(net.n, dtype=complex)
    for src in net.sources:
        j[net.bus_index(src.bus)] += src.emf / src.z(1)
    try:
        e = np.linalg.solve(y, j)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular pre-fault system: {exc}") from None
    bus_v = {b: complex(e[net.bus_index(b)]) for b in net.buses}
    branch_i = {
        rec.id: (bus_v[rec.from_bus] - bus_v[rec.to_bus]) / rec.z1
        for rec in net.lines
    }
    return bus_v, branch_i


def fault_sequence_currents(
    fault_type: FaultType,
    z_rr: SequenceTriple,
    e_prefault_r: complex,
    rf_pu: float,
) -> SequenceFaultCurrents:
    """Interconnect the sequence networks at the fault point.

    ``z_rr`` holds the (zero, positive, negative) driving-point impedances at
    the fault point and ``rf_pu`` the fault resistance already converted to
    per-unit.  Connections used:

    * LLL: positive network through rf alone.
    * LG:  all three networks in series with 3*rf.
    * LL:  positive and negative networks in series through rf.
    * LLG: positive network in series with the negative network paralleled
      by (zero network + 3*rf); rf sits in the grounded leg only.

    An infinite rf means no fault: all currents are zero.
    """
    fault_type = FaultType(fault_type)
    z0, z1, z2 = z_rr
    zero = 0.0 + 0.0j
    if math.isinf(rf_pu):
        return SequenceFaultCurrents(zero, zero, zero)
    rf = complex(rf_pu)

    if fault_type is FaultType.LLL:
        loop = z1 + rf
        _check_loop(loop)
        return SequenceFaultCurrents(zero, e_prefault_r / loop, zero)

    if fault_type is FaultType.LG:
        loop = z0 + z1 + z2 + 3.0 * rf
        _check_loop(loop)
        i = e_prefault_r / loop
        return SequenceFaultCurrents(i, i, i)

    if fault_type is FaultType.LL:
        loop = z1 + z2 + rf
        _check_loop(loop)
        i1 = e_prefault_r / loop
        return SequenceFaultCurrents(zero, i1, -i1)

    # LLG
    zg = z0 + 3.0 * rf
    denom = z2 + zg
    _check_loop(denom)
    loop = z1 + z2 * zg / denom
    _check_loop(loop)
    i1 = e_prefault_r / loop
    i2 = -i1 * zg / denom
    i0 = -i1 * z2 / denom
    return SequenceFaultCurrents(i0, i1, i2)


def _check_loop(z: complex) -> None:
    if abs(z) == 0.0:
        raise ZeroDivisionError("zero total loop impedance at the fault point")


class FaultStudy:
    """Caches the per-sequence matrices and pre-fault state of one network.

    Building the three bus impedance matrices dominates the cost of a
    simulation, so sweeps over many scenarios on the same network should go
    through one study object.
    """

    def __init__(self, net: Network):
        self.net = net
        self._zbus: dict[int, SequenceZbus] = {}
        self._prefault: tuple[dict[int, complex], dict[str, complex]] | None = None

    def zbus(self, sequence: int) -> SequenceZbus:
        if sequence not in self._zbus:
            self._zbus[sequence] = build_zbus(self.net, sequence)
        return self._zbus[sequence]

    @property
    def prefault(self) -> tuple[dict[int, complex], dict[str, complex]]:
        if self._prefault is None:
            self._prefault = prefault_solve(self.net)
        return self._prefault

    def fault_currents(self, scenario: FaultScenario) -> SequenceFaultCurrents:
        line = self.net.line(scenario.line_id)
        bus_v, _ = self.prefault
        z_rr = tuple(
            fault_point_coefficients(self.zbus(s), line).z_at(scenario.m)
            for s in (0, 1, 2)
        )
        e_r = (1.0 - scenario.m) * bus_v[line.from_bus] + scenario.m * bus_v[line.to_bus]
        return fault_sequence_currents(
            scenario.fault_type, z_rr, e_r, scenario.rf_ohm / self.net.z_base_ohm
        )

    def measurements(
        self, scenario: FaultScenario, taps: MeasurementTaps | None = None
    ) -> PhasorMeasurementSet:
        taps = taps or MeasurementTaps()
        net = self.net
        line = net.line(scenario.line_id)
        m = scenario.m
        bus_v0, branch_i0 = self.prefault
        cur = self.fault_currents(scenario)

        buses = taps.buses if taps.buses is not None else net.buses
        if taps.branches is not None:
            branch_ids = taps.branches
        else:
            branch_ids = tuple(r.id for r in net.lines if r.id != line.id)

        prefault_bus_v: dict[int, complex] = {}
        fault_bus_v: dict[int, SequenceTriple] = {}
        for b in buses:
            if b not in bus_v0:
                raise KeyError(f"tap references unknown bus {b}")
            zkr = [
                transfer_coefficients(self.zbus(s), line, b).z_at(m) for s in (0, 1, 2)
            ]
            prefault_bus_v[b] = bus_v0[b]
            fault_bus_v[b] = (
                -zkr[0] * cur.i0,
                bus_v0[b] - zkr[1] * cur.i1,
                -zkr[2] * cur.i2,
            )

        prefault_branch_i: dict[str, complex] = {}
        fault_branch_i: dict[str, SequenceTriple] = {}
        for bid in branch_ids:
            if bid == line.id:
                raise KeyError(
                    f"branch {bid!r} is the faulted line; request its terminal"
                    " currents via faulted_segments instead"
                )
            rec = net.line(bid)
            beta = [
                branch_coefficients(self.zbus(s), line, rec).beta_at(m)
                for s in (0, 1, 2)
            ]
            prefault_branch_i[bid] = branch_i0[bid]
            fault_branch_i[bid] = (
                -beta[0] * cur.i0,
                branch_i0[bid] - beta[1] * cur.i1,
                -beta[2] * cur.i2,
            )

        if taps.faulted_segments:
            self._add_segments(
                scenario, line, cur, bus_v0, branch_i0,
                prefault_branch_i, fault_branch_i, fault_bus_v,
            )

        token = f"{scenario.line_id}:{scenario.fault_type.value}:m={m:g}:rf={scenario.rf_ohm:g}"
        return PhasorMeasurementSet(
            prefault_bus_v=prefault_bus_v,
            fault_bus_v=fault_bus_v,
            prefault_branch_i=prefault_branch_i,
            fault_branch_i=fault_branch_i,
            token=token,
        )

    def _add_segments(self, scenario, line, cur, bus_v0, branch_i0,
                      prefault_branch_i, fault_branch_i, fault_bus_v):
        """Terminal currents of the faulted line, fed toward the fault."""
        m = scenario.m
        e_r0 = (1.0 - m) * bus_v0[line.from_bus] + m * bus_v0[line.to_bus]
        z_rr = [
            fault_point_coefficients(self.zbus(s), line).z_at(m) for s in (0, 1, 2)
        ]
        e_r = (-z_rr[0] * cur.i0, e_r0 - z_rr[1] * cur.i1, -z_rr[2] * cur.i2)

        def bus_triple(b: int) -> SequenceTriple:
            if b in fault_bus_v:
                return fault_bus_v[b]
            zkr = [
                transfer_coefficients(self.zbus(s), line, b).z_at(m)
                for s in (0, 1, 2)
            ]
            return (-zkr[0] * cur.i0, bus_v0[b] - zkr[1] * cur.i1, -zkr[2] * cur.i2)

        e_p = bus_triple(line.from_bus)
        e_q = bus_triple(line.to_bus)
        i_fault = cur.triple()
        seg_from: list[complex] = []
        seg_to: list[complex] = []
        for s in (0, 1, 2):
            zl = line.z(s)
            if 0.0 < m < 1.0:
                i_from = (e_p[s] - e_r[s]) / (m * zl)
                i_to = (e_q[s] - e_r[s]) / ((1.0 - m) * zl)
            elif m == 0.0:
                # Fault sits at the from-bus; its segment has zero length, so
                # get its current from the balance at the fault point.
                i_to = (e_q[s] - e_r[s]) / zl
                i_from = i_fault[s] - i_to
            else:
                i_from = (e_p[s] - e_r[s]) / zl
                i_to = i_fault[s] - i_from
            seg_from.append(i_from)
            seg_to.append(i_to)

        i0_through = branch_i0[line.id]
        prefault_branch_i[f"{line.id}@from"] = i0_through
        prefault_branch_i[f"{line.id}@to"] = -i0_through
        fault_branch_i[f"{line.id}@from"] = tuple(seg_from)
        fault_branch_i[f"{line.id}@to"] = tuple(seg_to)


def simulate_measurements(
    net: Network, scenario: FaultScenario, taps: MeasurementTaps | None = None
) -> PhasorMeasurementSet:
    """One-shot convenience wrapper around :class:`FaultStudy`."""
    return FaultStudy(net).measurements(scenario, taps)


@dataclass(frozen=True)
class Distortion:
    """Alteration of a single measurement channel.

    ``gain``/``phase_deg`` model an instrument scale and angle error and
    apply to both the pre-fault and fault values.  ``clamp_pu`` models
    current-transformer saturation: if the fault-stage positive-sequence
    magnitude exceeds the clamp, the whole fault-stage triple is scaled down
    to it (pre-fault values untouched).
    """

    kind: str  # "busV" | "branchI"
    channel: str  # bus label (as text) or branch channel id
    gain: float = 1.0
    phase_deg: float = 0.0
    clamp_pu: float | None = None

    def factor(self) -> complex:
        return cmath.rect(self.gain, math.radians(self.phase_deg))


def apply_distortion(
    ms: PhasorMeasurementSet, spec: list[Distortion] | tuple[Distortion, ...]
) -> PhasorMeasurementSet:
    """Return a copy with only the named channels altered.

    Channels not named by any distortion are carried over bit-identical.
    Raises ``KeyError`` for unknown channels.
    """
    pre_v = dict(ms.prefault_bus_v)
    fault_v = dict(ms.fault_bus_v)
    pre_i = dict(ms.prefault_branch_i)
    fault_i = dict(ms.fault_branch_i)

    for d in spec:
        if d.kind == "busV":
            bus = int(d.channel)
            if bus not in fault_v:
                raise KeyError(f"unknown voltage channel {d.channel!r}")
            pre_v[bus], fault_v[bus] = _distort(d, pre_v[bus], fault_v[bus])
        elif d.kind == "branchI":
            if d.channel not in fault_i:
                raise KeyError(f"unknown current channel {d.channel!r}")
            pre_i[d.channel], fault_i[d.channel] = _distort(
                d, pre_i[d.channel], fault_i[d.channel]
            )
        else:
            raise KeyError(f"unknown channel kind {d.kind!r}")

    return replace(
        ms,
        prefault_bus_v=pre_v,
        fault_bus_v=fault_v,
        prefault_branch_i=pre_i,
        fault_branch_i=fault_i,
    )


def _distort(
    d: Distortion, pre: complex, fault: SequenceTriple
) -> tuple[complex, SequenceTriple]:
    g = d.factor()
    pre_out = pre * g
    out = tuple(v * g for v in fault)
    if d.clamp_pu is not None:
        mag = abs(out[1])
        if mag > d.clamp_pu:
            scale = d.clamp_pu / mag
            out = tuple(v * scale for v in out)
    return pre_out, out


def sequence_transform(a: complex, b: complex, c: complex) -> SequenceTriple:
    """Phase phasors (a, b, c) -> symmetrical components (zero, pos, neg)."""
    s0 = (a + b + c) / 3.0
    s1 = (a + _ALPHA * b + _ALPHA**2 * c) / 3.0
    s2 = (a + _ALPHA**2 * b + _ALPHA * c) / 3.0
    return (s0, s1, s2)


def inverse_sequence_transform(
    s0: complex, s1: complex, s2: complex
) -> tuple[complex, complex, complex]:
    """Symmetrical components (zero, pos, neg) -> phase phasors (a, b, c)."""
    a = s0 + s1 + s2
    b = s0 + _ALPHA**2 * s1 + _ALPHA * s2
    c = s0 + _ALPHA * s1 + _ALPHA**2 * s2
    return (a, b, c)


_CSV_HEADER = "kind,id,stage,seq,re,im"


def measurements_to_csv(ms: PhasorMeasurementSet) -> str:
    """Export as ``kind,id,stage,seq,re,im`` rows (pre-fault rows are seq 1)."""
    rows = [_CSV_HEADER]

    def add(kind: str, ident: str, stage: str, seq: int, v: complex) -> None:
        rows.append(f"{kind},{ident},{stage},{seq},{v.real!r},{v.imag!r}")

    for bus in sorted(ms.prefault_bus_v):
        add("busV", str(bus), "pre", 1, ms.prefault_bus_v[bus])
    for bus in sorted(ms.fault_bus_v):
        for seq, v in enumerate(ms.fault_bus_v[bus]):
            add("busV", str(bus), "fault", seq, v)
    for bid in sorted(ms.prefault_branch_i):
        add("branchI", bid, "pre", 1, ms.prefault_branch_i[bid])
    for bid in sorted(ms.fault_branch_i):
        for seq, v in enumerate(ms.fault_branch_i[bid]):
            add("branchI", bid, "fault", seq, v)
    return "\n".join(rows) + "\n"


def measurements_from_csv(text: str) -> PhasorMeasurementSet:
    pre_v: dict[int, complex] = {}
    fault_v: dict[int, list[complex]] = {}
    pre_i: dict[str, complex] = {}
    fault_i: dict[str, list[complex]] = {}

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _CSV_HEADER:
        raise ValueError("measurement CSV must start with the standard header")
    for ln in lines[1:]:
        kind, ident, stage, seq_s, re_s, im_s = (tok.strip() for tok in ln.split(","))
        v = complex(float(re_s), float(im_s))
        seq = int(seq_s)
        if kind == "busV":
            bus = int(ident)
            if stage == "pre":
                pre_v[bus] = v
            else:
                fault_v.setdefault(bus, [0j, 0j, 0j])[seq] = v
        elif kind == "branchI":
            if stage == "pre":
                pre_i[ident] = v
            else:
                fault_i.setdefault(ident, [0j, 0j, 0j])[seq] = v
        else:
            raise ValueError(f"unknown channel kind {kind!r}")

    return PhasorMeasurementSet(
        prefault_bus_v=pre_v,
        fault_bus_v={b: tuple(t) for b, t in fault_v.items()},
        prefault_branch_i=pre_i,
        fault_branch_i={k: tuple(t) for k, t in fault_i.items()},
    )
