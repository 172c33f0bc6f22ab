import dataclasses
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxperm.aep import DomainError
from approxperm.circuits import build_piecewise_adder
from approxperm.costs import (
    CSV_FIELDS,
    AdderKind,
    CostParams,
    CostReport,
    baseline_costs,
    bound_within_budget,
    csv_row,
    estimate,
    lowest_volume,
    physical_costs,
    required_runway_length,
    runway_costs,
    runway_trace_bound,
    sweep,
    write_csv,
)
from approxperm.representations import LayoutParams

GOLDEN = Path(__file__).parent / "data" / "runway_4000_golden.json"


def test_adder_kind_parse():
    assert AdderKind.parse("runway:256") == AdderKind("runway", 256)
    assert AdderKind.parse("Runway512") == AdderKind("runway", 512)
    assert AdderKind.parse("temp-and") == AdderKind("temp-and")
    assert str(AdderKind("runway", 256)) == "runway:256"
    for bad in ("runway", "carry-save", "ripple:4"):
        with pytest.raises(DomainError):
            AdderKind.parse(bad)


def test_cost_params_defaults_and_validation():
    p = CostParams()
    assert (p.reaction_time_us, p.code_distance, p.routing_overhead_factor) == (10, 31, 1.5)
    assert p.qubits_per_logical == 2 * 32 ** 2
    assert p.additions(100) == 10_000
    with pytest.raises(DomainError):
        CostParams(trace_distance_budget=1.5)
    with pytest.raises(DomainError):
        CostParams(reaction_time_us=0)


# -- runway sizing -----------------------------------------------------------

def test_trace_bound_worked_example():
    bound = runway_trace_bound(10 ** 6, 3, 40)
    assert bound == pytest.approx(2 * math.sqrt(3e6 / 2 ** 40))
    assert bound <= 0.0034


def test_required_runway_length_examples():
    m = required_runway_length(10 ** 6, 3, 0.01)
    assert m == 37
    assert runway_trace_bound(10 ** 6, 3, 37) <= 0.01 < runway_trace_bound(10 ** 6, 3, 36)
    assert required_runway_length(0, 3, 0.01) == 0
    assert required_runway_length(10, 0, 0.01) == 0
    with pytest.raises(DomainError):
        required_runway_length(10, 3, 0)


@settings(max_examples=100, deadline=None)
@given(k=st.integers(1, 10 ** 9), r=st.integers(1, 64),
       eps=st.floats(1e-6, 0.999, allow_nan=False))
def test_required_runway_length_is_minimal(k, r, eps):
    m = required_runway_length(k, r, eps)
    assert bound_within_budget(k, r, m, eps)
    assert m == 0 or not bound_within_budget(k, r, m - 1, eps)


@settings(max_examples=50, deadline=None)
@given(k=st.integers(1, 10 ** 6), r=st.integers(1, 10), m=st.integers(0, 60))
def test_trace_bound_decreases_with_m(k, r, m):
    assert runway_trace_bound(k, r, m + 1) < runway_trace_bound(k, r, m)


# -- runway costs ------------------------------------------------------------

def test_runway_costs_worked_example():
    report = runway_costs(4000, 1000, 40, 10 ** 6)
    assert report.toffoli_count == 8_240_000_000
    assert report.depth_low == 2_080_000_000
    assert report.depth_high == 4_080_000_000
    assert report.r == 3
    assert report.trace_bound <= 0.0034


def test_runway_costs_without_runways_is_ripple():
    n, k = 100, 7
    report = runway_costs(n, n, 0, k)
    assert report.r == 0
    assert report.toffoli_count == 2 * n * k


def test_runway_costs_modular():
    plain = runway_costs(2048, 512, 30, 100)
    mod = runway_costs(2048, 512, 30, 100, modular=True)
    assert mod.toffoli_count - plain.toffoli_count == 2 * 30 * 100
    assert mod.trace_bound == pytest.approx(2 * math.sqrt(100 * 4 / 2 ** 30))
    literal = runway_costs(2048, 512, 30, 100, modular=True, literal_modular_toffoli=True)
    assert literal.toffoli_count == 2048 + 30 * 4
    assert runway_costs(64, 256, 10, 5, modular=True).depth_low == 2 * (64 + 10) * 5


def test_runway_costs_auto_sized_consistent():
    n = 2048
    k = n * n
    m = required_runway_length(k, 3, 0.01)
    report = runway_costs(n, 512, m, k)
    assert report.depth_low <= report.depth_high
    assert report.trace_bound <= 0.01
    assert all(math.isfinite(x) for x in (report.toffoli_count, report.depth_high, report.trace_bound))


def test_runway_costs_range():
    with pytest.raises(DomainError):
        runway_costs(100, 0, 3, 10)
    with pytest.raises(DomainError):
        runway_costs(100, 10, -1, 10)


@pytest.mark.parametrize("n,s,m", [(12, 4, 2), (20, 6, 3), (9, 4, 0)])
def test_toffoli_formula_matches_circuit(n, s, m):
    k = 5
    layout = LayoutParams.from_spacing(n, s, m)
    per_addition = build_piecewise_adder(layout, 1).toffoli_count
    assert runway_costs(n, s, m, k).toffoli_count == per_addition * k


# -- baselines ---------------------------------------------------------------

def test_baseline_ripple_example():
    assert baseline_costs(AdderKind("ripple"), 100, 1).toffoli_count == 200


@pytest.mark.parametrize("kind", ["ripple", "temp-and", "lookahead"])
def test_baseline_zero_additions(kind):
    report = physical_costs(baseline_costs(AdderKind(kind), 64, 0), CostParams())
    assert (report.toffoli_count, report.depth_high, report.duration_s, report.volume) == (0, 0, 0, 0)


def test_baseline_modular_overhead():
    plain = baseline_costs(AdderKind("ripple"), 64, 10)
    mod = baseline_costs(AdderKind("ripple"), 64, 10, modular=True)
    assert mod.toffoli_count == 5 * plain.toffoli_count
    assert mod.depth_high == 5 * plain.depth_high


def test_baseline_rejects_runway():
    with pytest.raises(DomainError):
        baseline_costs(AdderKind("runway", 8), 64, 1)


# -- physical model ----------------------------------------------------------

def test_physical_reaction_time_linearity():
    partial = runway_costs(1024, 256, 20, 1000)
    a = physical_costs(partial, CostParams())
    b = physical_costs(partial, CostParams(reaction_time_us=20))
    assert b.duration_s == pytest.approx(2 * a.duration_s)
    assert b.factory_count == pytest.approx(a.factory_count / 2)


def test_physical_formula():
    params = CostParams()
    report = physical_costs(runway_costs(1024, 256, 20, 1000), params)
    duration_us = report.depth_high * params.reaction_time_us
    factories = report.toffoli_count / duration_us * params.factory_period_us
    logical = report.data_qubits + report.ancilla_qubits + factories * params.factory_footprint_qubits
    space = logical * params.routing_overhead_factor * params.qubits_per_logical
    assert report.avg_space_qubits == pytest.approx(space)
    assert report.volume == pytest.approx(space * duration_us * 1e-6)


def test_physical_missing_fields():
    partial = dataclasses.replace(runway_costs(64, 16, 4, 2), depth_high=None)
    with pytest.raises(DomainError):
        physical_costs(partial, CostParams())


def test_golden_4000_bit_report():
    golden = json.loads(GOLDEN.read_text())
    report = estimate(4000, AdderKind("runway", 1000), m=40, k=10 ** 6)
    got = dataclasses.asdict(report)
    for key, want in golden.items():
        if isinstance(want, float):
            assert got[key] == pytest.approx(want, rel=1e-12), key
        else:
            assert got[key] == want, key


def test_amortized_fields_are_exact():
    report = estimate(1024, AdderKind("runway", 256))
    assert report.toffoli_per_addition == Fraction(report.toffoli_count, report.k)
    assert report.toffoli_per_bit_addition * report.n * report.k == report.toffoli_count
    assert report.depth_per_addition == Fraction(report.depth_high, report.k)


def test_report_depth_order():
    with pytest.raises(DomainError):
        CostReport(n=4, kind="ripple", modular=False, k=1, toffoli_count=8, depth_low=9,
                   depth_high=8, data_qubits=8, ancilla_qubits=1)


# -- estimate and sweep --------------------------------------------------------

def test_estimate_auto_sizes_m():
    params = CostParams(trace_distance_budget=0.01)
    report = estimate(2048, AdderKind("runway", 512), params)
    assert report.k == 2048 ** 2
    assert report.trace_bound <= 0.01
    assert runway_trace_bound(report.k, report.r, report.m - 1) > 0.01


def test_sweep_single_row_matches_direct_call():
    rows = sweep([256], [AdderKind("ripple")])
    assert len(rows) == 1
    assert rows[0] == estimate(256, AdderKind("ripple"))


def test_sweep_skips_runways_without_room():
    rows = sweep([128, 1024], [AdderKind("ripple"), AdderKind("runway", 256)])
    assert [(r.n, r.kind) for r in rows] == [(128, "ripple"), (1024, "ripple"), (1024, "runway")]
    with pytest.raises(DomainError):
        sweep([], [AdderKind("ripple")])


def test_sweep_runway_beats_ripple_at_large_n():
    kinds = [AdderKind("ripple"), AdderKind("runway", 256), AdderKind("runway", 512)]
    rows = sweep([512, 1024, 2048, 4096, 8192], kinds)
    for n in (2048, 4096, 8192):
        by_kind = {str(AdderKind(r.kind, r.spacing)): r.volume for r in rows if r.n == n}
        assert min(by_kind["runway:256"], by_kind["runway:512"]) < by_kind["ripple"]


def test_modular_sweep_runways_lowest():
    kinds = [AdderKind.parse(x) for x in ("ripple", "temp-and", "lookahead", "runway:256", "runway:512")]
    best = lowest_volume(sweep([64, 512, 4096], kinds, modular=True))
    assert all(report.kind == "runway" for report in best.values())


def test_csv_output():
    out = io.StringIO()
    rows = sweep([1024], [AdderKind("ripple"), AdderKind("runway", 256)])
    write_csv(rows, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert len(lines) == 3
    cells = dict(zip(CSV_FIELDS, lines[2].split(",")))
    assert cells["kind"] == "runway" and cells["spacing"] == "256" and cells["modular"] == "0"
    assert cells["volume_qubit_s"] == f"{rows[1].volume:.6g}"
    assert csv_row(rows[0])["spacing"] == ""
