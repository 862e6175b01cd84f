from __future__ import annotations

import numpy as np
import pytest

from faultloc import (
    IllConditionedNetworkError,
    UngroundedNetworkError,
    branch_coefficients,
    build_ybus,
    build_zbus,
    fault_point_coefficients,
    parse_case,
    transfer_coefficients,
    zbus_to_csv,
)
from faultloc.netmodel import LineRecord, Network, SourceRecord

from oracles import assemble_y, invert_y, tap_network

M_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def test_single_bus_single_source():
    net = parse_case("bus 1\nsource 1 0.0006 0.037343\n")
    zb = build_zbus(net, 1)
    assert zb.z.shape == (1, 1)
    assert zb.at(1, 1) == pytest.approx(complex(0.0006, 0.037343))


def test_two_bus_series_circuit(two_bus):
    zb = build_zbus(two_bus, 1)
    zs = complex(0.01, 0.1)
    zl = complex(0.02, 0.2)
    assert zb.at(1, 1) == pytest.approx(zs, abs=1e-12)
    assert zb.at(1, 2) == pytest.approx(zs, abs=1e-12)
    assert zb.at(2, 2) == pytest.approx(zs + zl, abs=1e-12)


@pytest.mark.parametrize("seq", [0, 1, 2])
def test_fourbus_matches_independent_inversion(fourbus, seq):
    zb = build_zbus(fourbus, seq)
    oracle = invert_y(fourbus, seq)
    assert np.max(np.abs(zb.z - oracle)) < 1e-9


@pytest.mark.parametrize("case", ["fourbus", "ieee14"])
@pytest.mark.parametrize("seq", [0, 1, 2])
def test_zbus_symmetry_and_duality(case, seq, fourbus, ieee14):
    net = fourbus if case == "fourbus" else ieee14
    zb = build_zbus(net, seq)
    asym = np.max(np.abs(zb.z - zb.z.T))
    assert asym <= 1e-12 * np.max(np.abs(zb.z))
    y = build_ybus(net, seq)
    eye = np.eye(net.n)
    assert np.max(np.abs(zb.z @ y - eye)) <= 1e-9


def test_sequence_two_equals_sequence_one(fourbus, ieee14):
    for net in (fourbus, ieee14):
        z1 = build_zbus(net, 1)
        z2 = build_zbus(net, 2)
        assert np.array_equal(z1.z, z2.z)


def test_transfer_coefficients_at_endpoint(fourbus):
    zb = build_zbus(fourbus, 1)
    line = fourbus.line("T2")
    tc = transfer_coefficients(zb, line, line.from_bus)
    assert tc.b == zb.at(line.from_bus, line.from_bus)
    assert tc.c == zb.at(line.to_bus, line.from_bus) - zb.at(line.from_bus, line.from_bus)


def test_transfer_coefficients_two_bus_hand_values(two_bus):
    zb = build_zbus(two_bus, 1)
    line = two_bus.line("L")
    tc = transfer_coefficients(zb, line, 2)
    assert tc.b == pytest.approx(complex(0.01, 0.1), abs=1e-12)
    assert tc.c == pytest.approx(complex(0.02, 0.2), abs=1e-12)


@pytest.mark.parametrize("seq", [0, 1])
def test_transfer_law_matches_tap_rebuild_everywhere(fourbus, seq):
    """B + C*m equals the rebuilt matrix column at the fault node, all pairs."""
    zb = build_zbus(fourbus, seq)
    for line in fourbus.lines:
        coeffs = {b: transfer_coefficients(zb, line, b) for b in fourbus.buses}
        for m in M_GRID:
            if 0.0 < m < 1.0:
                tnet, r = tap_network(fourbus, line.id, m)
                zt = np.linalg.inv(assemble_y(tnet, seq))
                idx = {b: i for i, b in enumerate(tnet.buses)}
                for b in fourbus.buses:
                    assert abs(coeffs[b].z_at(m) - zt[idx[b], idx[r]]) < 1e-9
            else:
                end = line.from_bus if m == 0.0 else line.to_bus
                for b in fourbus.buses:
                    assert abs(coeffs[b].z_at(m) - zb.at(end, b)) < 1e-9


def test_fault_point_law_endpoints_and_interior(fourbus):
    zb = build_zbus(fourbus, 1)
    for line in fourbus.lines:
        fp = fault_point_coefficients(zb, line)
        assert abs(fp.z_at(0.0) - zb.at(line.from_bus, line.from_bus)) < 1e-12
        assert abs(fp.z_at(1.0) - zb.at(line.to_bus, line.to_bus)) < 1e-12
        for m in (0.25, 0.5, 0.75):
            tnet, r = tap_network(fourbus, line.id, m)
            zt = np.linalg.inv(assemble_y(tnet, 1))
            ri = tnet.bus_index(r)
            assert abs(fp.z_at(m) - zt[ri, ri]) < 1e-9


def test_branch_coefficients_symmetric_placement_vanish(diamond):
    """A branch bridging two electrically mirrored buses never sees the fault."""
    zb = build_zbus(diamond, 1)
    fault_line = diamond.line("F")
    bc = branch_coefficients(zb, fault_line, diamond.line("W"))
    assert abs(bc.b) < 1e-12
    assert abs(bc.c) < 1e-12


def test_branch_law_matches_tap_rebuild_current_change(fourbus):
    """-beta(m) * injected current equals the branch current change."""
    m = 0.5
    zb = build_zbus(fourbus, 1)
    fault_line = fourbus.line("T2")
    tnet, r = tap_network(fourbus, "T2", m)
    zt = np.linalg.inv(assemble_y(tnet, 1))
    idx = {b: i for i, b in enumerate(tnet.buses)}
    # Unit fault current drawn at the tap node changes every bus voltage by
    # -Z[:, r]; healthy-branch current changes follow from Ohm's law.
    for rec in fourbus.lines:
        if rec.id == "T2":
            continue
        bc = branch_coefficients(zb, fault_line, rec)
        dv = -(zt[idx[rec.from_bus], idx[r]] - zt[idx[rec.to_bus], idx[r]])
        di_oracle = dv / rec.z1
        assert abs(-bc.beta_at(m) - di_oracle) < 1e-9


def test_parallel_healthy_branch_beta_varies_with_m(parallel_pair):
    """Fault on one of two parallel lines: the healthy twin's share moves."""
    zb = build_zbus(parallel_pair, 1)
    fault_line = parallel_pair.line("P1")
    bc = branch_coefficients(zb, fault_line, parallel_pair.line("P2"))
    assert abs(bc.beta_at(0.0) - bc.beta_at(1.0)) > 1e-3
    # and the tap oracle agrees at an interior point
    m = 0.4
    tnet, r = tap_network(parallel_pair, "P1", m)
    zt = np.linalg.inv(assemble_y(tnet, 1))
    idx = {b: i for i, b in enumerate(tnet.buses)}
    rec = parallel_pair.line("P2")
    dv = -(zt[idx[rec.from_bus], idx[r]] - zt[idx[rec.to_bus], idx[r]])
    assert abs(-bc.beta_at(m) - dv / rec.z1) < 1e-9


def test_branch_coefficients_zero_impedance_rejected(fourbus):
    zb = build_zbus(fourbus, 1)
    degenerate = LineRecord("Z", 1, 2, 1.0, 0j, 0j)
    with pytest.raises(ValueError, match="zero impedance"):
        branch_coefficients(zb, fourbus.line("T2"), degenerate)


def test_ungrounded_network_rejected():
    net = Network(buses=(1,), lines=(), sources=())
    with pytest.raises(UngroundedNetworkError):
        build_zbus(net, 1)


def test_ill_conditioned_network_rejected():
    net = Network(
        buses=(1, 2),
        lines=(LineRecord("L", 1, 2, 1.0, complex(1.0, 0.0), complex(1.0, 0.0)),),
        sources=(SourceRecord(bus=1, z1=complex(1e-13, 0.0)),),
    )
    with pytest.raises(IllConditionedNetworkError, match="condition"):
        build_zbus(net, 1)


def test_zbus_csv_dump_roundtrips(fourbus):
    zb = build_zbus(fourbus, 1)
    text = zbus_to_csv(zb)
    rows = text.strip().splitlines()
    assert rows[0] == "bus,1,2,3,4"
    assert len(rows) == 5
    cell = rows[1].split(",")[1]
    assert complex(cell) == pytest.approx(zb.at(1, 1), rel=1e-12)
