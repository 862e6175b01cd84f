"""Per-sequence bus impedance matrices and fault-position coefficients.

The bus impedance matrix is the inverse of the nodal admittance matrix built
from the series lines plus each source's internal impedance as a shunt to the
reference node.  For a prospective fault at normalized position ``m`` on a
line p-q, three families of coefficients describe how the network responds
without ever rebuilding the matrix:

* transfer impedance from any bus k to the fault point is linear in m,
* the current-division sensitivity of any healthy branch is linear in m,
* the driving-point impedance at the fault point is quadratic in m.
"""
from __future__ import annotations

from dataclasses import dataclass

import io

import numpy as np

from .netmodel import LineRecord, Network

__all__ = [
    "UngroundedNetworkError",
    "IllConditionedNetworkError",
    "SequenceZbus",
    "TransferCoefficients",
    "BranchCoefficients",
    "FaultPointCoefficients",
    "build_ybus",
    "build_zbus",
    "transfer_coefficients",
    "branch_coefficients",
    "fault_point_coefficients",
    "zbus_to_csv",
]

#: Networks whose admittance matrix condition number exceeds this are rejected.
CONDITION_LIMIT = 1e12


class UngroundedNetworkError(ValueError):
    """The network has no finite impedance path to the reference node."""


class IllConditionedNetworkError(ValueError):
    """The admittance matrix is too ill-conditioned to invert reliably."""


@dataclass(frozen=True)
class SequenceZbus:
    """Dense bus impedance matrix for one sequence network.

    ``z[j, k]`` is the voltage at bus ``bus_order[j]`` per unit current
    injected at bus ``bus_order[k]``, reference node implicit.
    """

    sequence: int
    z: np.ndarray
    bus_order: tuple[int, ...]

    def index(self, bus: int) -> int:
        return self.bus_order.index(bus)

    def at(self, bus_j: int, bus_k: int) -> complex:
        return complex(self.z[self.index(bus_j), self.index(bus_k)])


@dataclass(frozen=True)
class TransferCoefficients:
    """Linear law for the transfer impedance from a bus to the fault point.

    ``z_at(m) = b + c*m`` where m is the normalized fault position along the
    line, measured from its from-bus.
    """

    b: complex
    c: complex
    bus: int
    line_id: str
    sequence: int

    def z_at(self, m: float) -> complex:
        return self.b + self.c * m


@dataclass(frozen=True)
class BranchCoefficients:
    """Linear law for a branch's current change per unit fault current.

    ``beta_at(m) = b + c*m`` gives the share of the fault current that the
    branch (oriented from-bus -> to-bus) sheds; the during-fault branch
    current is the pre-fault current minus ``beta_at(m)`` times the fault
    current.  Valid for branches other than the faulted line itself.
    """

    b: complex
    c: complex
    branch: tuple[int, int]
    line_id: str
    sequence: int

    def beta_at(self, m: float) -> complex:
        return self.b + self.c * m


@dataclass(frozen=True)
class FaultPointCoefficients:
    """Quadratic law for the driving-point impedance at the fault point.

    ``z_at(m) = a0 + a1*m + a2*m**2``; at m=0 and m=1 it reduces to the
    diagonal entries of the two line terminals.
    """

    a0: complex
    a1: complex
    a2: complex
    line_id: str
    sequence: int

    def z_at(self, m: float) -> complex:
        return self.a0 + (self.a1 + self.a2 * m) * m


def build_ybus(net: Network, sequence: int) -> np.ndarray:
    """Assemble the nodal admittance matrix for one sequence network."""
    if sequence not in (0, 1, 2):
        raise ValueError(f"sequence must be 0, 1 or 2, got {sequence}")
    n = net.n
    y = np.zeros((n, n), dtype=complex)
    for rec in net.lines:
        j = net.bus_index(rec.from_bus)
        k = net.bus_index(rec.to_bus)
        ys = 1.0 / rec.z(sequence)
        y[j, j] += ys
        y[k, k] += ys
        y[j, k] -= ys
        y[k, j] -= ys
    for src in net.sources:
        j = net.bus_index(src.bus)
        y[j, j] += 1.0 / src.z(sequence)
    return y


def build_zbus(net: Network, sequence: int) -> SequenceZbus:
    """Invert the sequence admittance matrix into a bus impedance matrix.

    Raises :class:`UngroundedNetworkError` when the matrix is singular (some
    bus has no path to the reference) and :class:`IllConditionedNetworkError`
    when its condition number exceeds :data:`CONDITION_LIMIT`.
    """
    if not net.sources:
        raise UngroundedNetworkError("network has no sources")
    y = build_ybus(net, sequence)
    try:
        z = np.linalg.inv(y)
    except np.linalg.LinAlgError as exc:
        raise UngroundedNetworkError(
            f"sequence-{sequence} network is singular: {exc}"
        ) from None
    cond = np.linalg.cond(y)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedNetworkError(
            f"sequence-{sequence} admittance matrix condition {cond:.3e}"
            f" exceeds {CONDITION_LIMIT:.0e}"
        )
    # Enforce exact reciprocity; the inverse of a symmetric matrix can pick
    # up asymmetry at roundoff level.
    z = 0.5 * (z + z.T)
    return SequenceZbus(sequence=sequence, z=z, bus_order=net.buses)


def transfer_coefficients(
    zbus: SequenceZbus, line: LineRecord, bus: int
) -> TransferCoefficients:
    """Transfer impedance law from ``bus`` to a fault anywhere on ``line``."""
    zp = zbus.at(line.from_bus, bus)
    zq = zbus.at(line.to_bus, bus)
    return TransferCoefficients(
        b=zp, c=zq - zp, bus=bus, line_id=line.id, sequence=zbus.sequence
    )


def branch_coefficients(
    zbus: SequenceZbus, faulted_line: LineRecord, branch: LineRecord
) -> BranchCoefficients:
    """Current-change law for ``branch`` under a fault on ``faulted_line``.

    The law only models branches whose current is the voltage difference of
    their terminals over their impedance; it therefore does not describe the
    faulted line itself during the fault, though the coefficients remain
    computable for it (callers doing location must not use them that way).
    """
    zb = branch.z(zbus.sequence)
    if abs(zb) == 0.0:
        raise ValueError(f"branch {branch.id!r} has zero impedance")
    ck = transfer_coefficients(zbus, faulted_line, branch.from_bus)
    cl = transfer_coefficients(zbus, faulted_line, branch.to_bus)
    return BranchCoefficients(
        b=(ck.b - cl.b) / zb,
        c=(ck.c - cl.c) / zb,
        branch=(branch.from_bus, branch.to_bus),
        line_id=branch.id,
        sequence=zbus.sequence,
    )


def fault_point_coefficients(
    zbus: SequenceZbus, line: LineRecord
) -> FaultPointCoefficients:
    """Driving-point impedance law at a fault anywhere on ``line``.

    This is the unique quadratic that matches an explicit tap-bus rebuild of
    the matrix at every m: the two segments carry the fault current in a
    loop, so the m=0/m=1 diagonal entries pin the ends and the line's own
    impedance fixes the curvature.
    """
    zpp = zbus.at(line.from_bus, line.from_bus)
    zqq = zbus.at(line.to_bus, line.to_bus)
    zpq = zbus.at(line.from_bus, line.to_bus)
    zl = line.z(zbus.sequence)
    return FaultPointCoefficients(
        a0=zpp,
        a1=2.0 * (zpq - zpp) + zl,
        a2=zpp + zqq - 2.0 * zpq - zl,
        line_id=line.id,
        sequence=zbus.sequence,
    )


def zbus_to_csv(zbus: SequenceZbus) -> str:
    """Row-major CSV dump with ``re+imj`` cells, for external inspection."""
    buf = io.StringIO()
    buf.write("bus," + ",".join(str(b) for b in zbus.bus_order) + "\n")
    for j, label in enumerate(zbus.bus_order):
        cells = (
            format(zbus.z[j, k], ".15g") for k in range(len(zbus.bus_order))
        )
        buf.write(f"{label}," + ",".join(cells) + "\n")
    return buf.getvalue()
