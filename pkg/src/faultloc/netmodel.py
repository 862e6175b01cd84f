"""Network data model and case-file parser.

A network is a set of buses (positive integer labels), series lines with
per-kilometre sequence impedances, and sources modelled as an EMF behind an
internal impedance to the reference node.  Everything is in per-unit on the
case's own MVA/kV base; shunt elements (line charging, loads) are not
representable.

Case file format (UTF-8, one record per line, ``#`` starts a comment):

    base <mva> <kv> <hz>
    bus <label>
    line <id> <from> <to> <length_km> <r1_per_km> <x1_per_km> <r0_per_km> <x0_per_km>
    source <bus> <r1> <x1> [r0 x0 r2 x2] [emf_mag emf_deg]

Numbers are decimal with optional exponent; all impedances in pu.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import cmath
import math

__all__ = [
    "CaseError",
    "LineRecord",
    "SourceRecord",
    "Network",
    "parse_case",
    "load_case",
    "bundled_case",
    "serialize_case",
    "validate",
]


class CaseError(ValueError):
    """Raised on malformed case text or invalid record references."""


@dataclass(frozen=True)
class LineRecord:
    """A series transmission line between two buses.

    Total sequence impedances are the per-km values scaled by length; the
    negative-sequence impedance equals the positive-sequence one (transposed
    line assumption).
    """

    id: str
    from_bus: int
    to_bus: int
    length_km: float
    z1_per_km: complex
    z0_per_km: complex

    @property
    def z1(self) -> complex:
        return self.z1_per_km * self.length_km

    @property
    def z2(self) -> complex:
        return self.z1

    @property
    def z0(self) -> complex:
        return self.z0_per_km * self.length_km

    def z(self, sequence: int) -> complex:
        """Total impedance for sequence 0, 1 or 2."""
        return self.z0 if sequence == 0 else self.z1

    def endpoints(self) -> tuple[int, int]:
        return (self.from_bus, self.to_bus)


@dataclass(frozen=True)
class SourceRecord:
    """An EMF behind an internal impedance, grounding the network.

    Negative- and zero-sequence impedances default to the positive-sequence
    value when the case file omits them.
    """

    bus: int
    z1: complex
    z2: complex | None = None
    z0: complex | None = None
    emf: complex = 1.0 + 0.0j

    def z(self, sequence: int) -> complex:
        if sequence == 0:
            return self.z0 if self.z0 is not None else self.z1
        if sequence == 2:
            return self.z2 if self.z2 is not None else self.z1
        return self.z1


@dataclass(frozen=True)
class Network:
    """Immutable parsed case: buses, lines, sources and the pu base.

    Bus labels are external identifiers; matrix work uses the internal
    0-based index given by position in ``buses`` (declaration order).
    """

    buses: tuple[int, ...]
    lines: tuple[LineRecord, ...]
    sources: tuple[SourceRecord, ...]
    base_mva: float = 100.0
    base_kv: float = 230.0
    frequency_hz: float = 50.0
    _index: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {label: i for i, label in enumerate(self.buses)}
        )

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def z_base_ohm(self) -> float:
        """Impedance base used to convert ohmic fault resistance to pu."""
        return self.base_kv**2 / self.base_mva

    def bus_index(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise CaseError(f"unknown bus {label}") from None

    def line(self, line_id: str) -> LineRecord:
        for rec in self.lines:
            if rec.id == line_id:
                return rec
        raise CaseError(f"unknown line {line_id!r}")

    def line_between(self, a: int, b: int) -> LineRecord:
        """The unique line joining buses a and b, in either orientation."""
        hits = [
            rec for rec in self.lines if {rec.from_bus, rec.to_bus} == {a, b}
        ]
        if not hits:
            raise CaseError(f"no line between buses {a} and {b}")
        if len(hits) > 1:
            raise CaseError(
                f"buses {a} and {b} are joined by {len(hits)} parallel lines;"
                " refer to the line by id"
            )
        return hits[0]

    def adjacency(self) -> dict[int, list[tuple[int, str]]]:
        """Bus label -> list of (neighbour label, line id)."""
        adj: dict[int, list[tuple[int, str]]] = {b: [] for b in self.buses}
        for rec in self.lines:
            adj[rec.from_bus].append((rec.to_bus, rec.id))
            adj[rec.to_bus].append((rec.from_bus, rec.id))
        return adj


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise CaseError(f"line {lineno}: bad {what} {token!r}") from None


def parse_case(text: str) -> Network:
    """Parse case text into a validated :class:`Network`.

    Raises :class:`CaseError` naming the offending source line on syntax
    errors, unknown bus references, duplicate bus labels, non-positive line
    lengths or an empty source list.
    """
    base = (100.0, 230.0, 50.0)
    buses: list[int] = []
    lines: list[LineRecord] = []
    sources: list[SourceRecord] = []
    line_ids: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        tokens = body.split()
        kind, args = tokens[0], tokens[1:]

        if kind == "base":
            if len(args) != 3:
                raise CaseError(f"line {lineno}: base expects <mva> <kv> <hz>")
            base = tuple(_parse_float(a, lineno, "base value") for a in args)

        elif kind == "bus":
            if len(args) != 1:
                raise CaseError(f"line {lineno}: bus expects one label")
            try:
                label = int(args[0])
            except ValueError:
                raise CaseError(
                    f"line {lineno}: bus label must be an integer, got {args[0]!r}"
                ) from None
            if label in buses:
                raise CaseError(f"line {lineno}: duplicate bus label {label}")
            buses.append(label)

        elif kind == "line":
            if len(args) != 8:
                raise CaseError(
                    f"line {lineno}: line expects <id> <from> <to> <length_km>"
                    " <r1/km> <x1/km> <r0/km> <x0/km>"
                )
            lid = args[0]
            if lid in line_ids:
                raise CaseError(f"line {lineno}: duplicate line id {lid!r}")
            try:
                from_bus, to_bus = int(args[1]), int(args[2])
            except ValueError:
                raise CaseError(f"line {lineno}: bus labels must be integers") from None
            for b in (from_bus, to_bus):
                if b not in buses:
                    raise CaseError(f"line {lineno}: unknown bus {b}")
            if from_bus == to_bus:
                raise CaseError(f"line {lineno}: line {lid!r} joins a bus to itself")
            length = _parse_float(args[3], lineno, "length")
            if length <= 0:
                raise CaseError(f"line {lineno}: non-positive length {length}")
            nums = [_parse_float(a, lineno, "impedance") for a in args[4:8]]
            rec = LineRecord(
                id=lid,
                from_bus=from_bus,
                to_bus=to_bus,
                length_km=length,
                z1_per_km=complex(nums[0], nums[1]),
                z0_per_km=complex(nums[2], nums[3]),
            )
            if rec.z1_per_km.real < 0 or rec.z0_per_km.real < 0:
                raise CaseError(f"line {lineno}: negative resistance on {lid!r}")
            lines.append(rec)
            line_ids.add(lid)

        elif kind == "source":
            if len(args) not in (3, 5, 7, 9):
                raise CaseError(
                    f"line {lineno}: source expects <bus> <r1> <x1>"
                    " [r0 x0 r2 x2] [emf_mag emf_deg]"
                )
            try:
                bus = int(args[0])
            except ValueError:
                raise CaseError(f"line {lineno}: bus label must be an integer") from None
            if bus not in buses:
                raise CaseError(f"line {lineno}: unknown bus {bus}")
            nums = [_parse_float(a, lineno, "source value") for a in args[1:]]
            z1 = complex(nums[0], nums[1])
            if abs(z1) == 0.0:
                raise CaseError(f"line {lineno}: source at bus {bus} has zero impedance")
            z0 = z2 = None
            emf = 1.0 + 0.0j
            if len(nums) >= 6:
                z0 = complex(nums[2], nums[3])
                z2 = complex(nums[4], nums[5])
            if len(nums) in (4, 8):
                mag, deg = nums[-2], nums[-1]
                emf = cmath.rect(mag, math.radians(deg))
            sources.append(SourceRecord(bus=bus, z1=z1, z2=z2, z0=z0, emf=emf))

        else:
            raise CaseError(f"line {lineno}: unknown record kind {kind!r}")

    if not sources:
        raise CaseError("case has no sources; the network would be ungrounded")
    return Network(
        buses=tuple(buses),
        lines=tuple(lines),
        sources=tuple(sources),
        base_mva=base[0],
        base_kv=base[1],
        frequency_hz=base[2],
    )


def load_case(path: str | Path) -> Network:
    return parse_case(Path(path).read_text(encoding="utf-8"))


def bundled_case(name: str) -> Network:
    """Load one of the cases shipped with the package ("fourbus", "ieee14")."""
    ref = resources.files("faultloc").joinpath("cases", f"{name}.case")
    return parse_case(ref.read_text(encoding="utf-8"))


def _fmt(x: float) -> str:
    return format(x, ".12g")


def serialize_case(net: Network) -> str:
    """Render a network back to case text; re-parsing yields an equal Network."""
    out = [f"base {_fmt(net.base_mva)} {_fmt(net.base_kv)} {_fmt(net.frequency_hz)}"]
    out.extend(f"bus {b}" for b in net.buses)
    for rec in net.lines:
        out.append(
            f"line {rec.id} {rec.from_bus} {rec.to_bus} {_fmt(rec.length_km)}"
            f" {_fmt(rec.z1_per_km.real)} {_fmt(rec.z1_per_km.imag)}"
            f" {_fmt(rec.z0_per_km.real)} {_fmt(rec.z0_per_km.imag)}"
        )
    for src in net.sources:
        parts = [f"source {src.bus} {_fmt(src.z1.real)} {_fmt(src.z1.imag)}"]
        has_seq = src.z0 is not None or src.z2 is not None
        has_emf = src.emf != 1.0 + 0.0j
        if has_seq:
            z0 = src.z(0)
            z2 = src.z(2)
            parts.append(
                f"{_fmt(z0.real)} {_fmt(z0.imag)} {_fmt(z2.real)} {_fmt(z2.imag)}"
            )
        if has_emf:
            mag, rad = cmath.polar(src.emf)
            parts.append(f"{_fmt(mag)} {_fmt(math.degrees(rad))}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def validate(net: Network) -> list[str]:
    """Semantic diagnostics; empty list iff all network invariants hold.

    Each entry names the offending record.  Useful for networks built
    programmatically rather than parsed.
    """
    diags: list[str] = []
    seen: set[int] = set()
    for b in net.buses:
        if b in seen:
            diags.append(f"duplicate bus label {b}")
        seen.add(b)

    for rec in net.lines:
        if rec.from_bus == rec.to_bus:
            diags.append(f"line {rec.id}: endpoints coincide (bus {rec.from_bus})")
        if rec.length_km <= 0:
            diags.append(f"line {rec.id}: non-positive length {rec.length_km}")
        if rec.z1_per_km.real < 0 or rec.z0_per_km.real < 0:
            diags.append(f"line {rec.id}: negative per-km resistance")
        for b in (rec.from_bus, rec.to_bus):
            if b not in seen:
                diags.append(f"line {rec.id}: unknown bus {b}")

    if not net.sources:
        diags.append("ungrounded network: no sources")
    for src in net.sources:
        if src.bus not in seen:
            diags.append(f"source at unknown bus {src.bus}")
        if abs(src.z1) == 0.0:
            diags.append(f"source at bus {src.bus}: zero internal impedance")

    # Every bus must reach a source bus through lines, otherwise its
    # driving-point impedance is infinite.
    source_buses = {s.bus for s in net.sources if s.bus in seen}
    if source_buses:
        reach = set(source_buses)
        frontier = list(source_buses)
        adj = net.adjacency()
        while frontier:
            b = frontier.pop()
            for nb, _ in adj.get(b, []):
                if nb not in reach:
                    reach.add(nb)
                    frontier.append(nb)
        for b in net.buses:
            if b not in reach:
                diags.append(f"bus {b} has no path to any source (ungrounded island)")
    return diags


def with_tap(net: Network, line_id: str, m: float, tap_label: int | None = None) -> tuple[Network, int]:
    """Return a copy of the network with a new bus inserted on a line.

    The line is replaced by two segments of lengths ``m*L`` and ``(1-m)*L``
    with the original per-km impedances.  Used to place an explicit node at a
    fault point; requires 0 < m < 1.
    """
    if not 0.0 < m < 1.0:
        raise ValueError(f"tap position m={m} must lie strictly inside (0, 1)")
    target = net.line(line_id)
    label = tap_label if tap_label is not None else max(net.buses) + 1
    if label in net.buses:
        raise CaseError(f"tap label {label} already in use")
    seg_p = replace(target, id=f"{line_id}__p", to_bus=label, length_km=m * target.length_km)
    seg_q = replace(
        target, id=f"{line_id}__q", from_bus=label, length_km=(1.0 - m) * target.length_km
    )
    lines = tuple(r for r in net.lines if r.id != line_id) + (seg_p, seg_q)
    return (
        Network(
            buses=net.buses + (label,),
            lines=lines,
            sources=net.sources,
            base_mva=net.base_mva,
            base_kv=net.base_kv,
            frequency_hz=net.frequency_hz,
        ),
        label,
    )
