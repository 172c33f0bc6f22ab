"""Cost model for sequences of additions with and without oblivious carry runways.

Runway adders run a Cuccaro ripple-carry adder on every piece in parallel:
one addition into a piece of length ``L`` costs at most ``2L`` Toffolis and
``2L`` measurement depth. Baselines are closed-form per-addition formulas.
Physical costs follow a simple surface-code model. Duration is measurement
depth times the reaction time. Factories are provisioned to match the average
Toffoli rate, and volume is average space times duration.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, TextIO

from .aep import DomainError
from .representations import runway_count

log = logging.getLogger(__name__)

BASELINES = ("ripple", "temp-and", "lookahead")


@dataclasses.dataclass(frozen=True)
class AdderKind:
    name: str
    spacing: Optional[int] = None

    def __post_init__(self):
        if self.name == "runway":
            if self.spacing is None or self.spacing < 1:
                raise DomainError("runway adders need a spacing >= 1")
        elif self.name in BASELINES:
            if self.spacing is not None:
                raise DomainError(f"{self.name} adders take no spacing")
        else:
            raise DomainError(f"unknown adder kind {self.name!r}")

    @classmethod
    def parse(cls, text: str) -> "AdderKind":
        """``ripple``, ``temp-and``, ``lookahead``, ``runway:256`` or ``runway256``."""
        text = text.strip().lower()
        if text.startswith("runway"):
            spacing = text[len("runway"):].lstrip(":")
            if not spacing.isdigit():
                raise DomainError(f"runway kind needs a spacing: {text!r}")
            return cls("runway", int(spacing))
        return cls(text)

    def __str__(self):
        return f"runway:{self.spacing}" if self.spacing else self.name


@dataclasses.dataclass(frozen=True)
class CostParams:
    """Physical assumptions.

    The factory defaults describe a CCZ factory occupying 12×6 logical tiles
    and emitting one state every 5.5·d surface-code cycles of 1 µs. They are
    external to the runway analysis and only shape absolute numbers.
    """

    reaction_time_us: float = 10.0
    code_distance: int = 31
    routing_overhead_factor: float = 1.5
    factory_footprint_qubits: float = 72.0  # in logical-qubit tiles
    factory_period_us: Optional[float] = None  # default 5.5·d cycles of 1 µs
    trace_distance_budget: float = 0.01
    additions_exponent: int = 2
    modular_overhead: int = 5

    def __post_init__(self):
        if self.factory_period_us is None:
            object.__setattr__(self, "factory_period_us", 5.5 * self.code_distance)
        if min(self.reaction_time_us, self.code_distance, self.routing_overhead_factor,
               self.factory_footprint_qubits, self.factory_period_us,
               self.additions_exponent, self.modular_overhead) <= 0:
            raise DomainError("cost parameters must be positive")
        if not 0 < self.trace_distance_budget < 1:
            raise DomainError("trace distance budget must lie in (0, 1)")

    @property
    def qubits_per_logical(self) -> int:
        return 2 * (self.code_distance + 1) ** 2

    def additions(self, n: int) -> int:
        return n ** self.additions_exponent


@dataclasses.dataclass(frozen=True)
class CostReport:
    n: int
    kind: str
    modular: bool
    k: int
    toffoli_count: Optional[int]
    depth_low: Optional[int]
    depth_high: Optional[int]
    data_qubits: int
    ancilla_qubits: int
    trace_bound: float = 0.0
    spacing: Optional[int] = None
    r: int = 0
    m: int = 0
    duration_s: Optional[float] = None
    factory_count: Optional[float] = None
    avg_space_qubits: Optional[float] = None
    volume: Optional[float] = None

    def __post_init__(self):
        if None not in (self.depth_low, self.depth_high) and self.depth_low > self.depth_high:
            raise DomainError("depth_low exceeds depth_high")

    @property
    def toffoli_per_addition(self) -> Fraction:
        return Fraction(self.toffoli_count, self.k) if self.k else Fraction(0)

    @property
    def toffoli_per_bit_addition(self) -> Fraction:
        return self.toffoli_per_addition / self.n

    @property
    def depth_per_addition(self) -> Fraction:
        return Fraction(self.depth_high, self.k) if self.k else Fraction(0)

    @property
    def volume_per_bit_addition(self) -> Optional[float]:
        if self.volume is None or not self.k:
            return None
        return self.volume / (self.n * self.k)


def runway_trace_bound(k: int, r: int, m: int) -> float:
    """``2 sqrt(k·r·2^-m)``."""
    return 2 * math.sqrt(k * r / 2 ** m)


def bound_within_budget(k: int, r: int, m: int, eps) -> bool:
    """Exact form of ``2 sqrt(k·r·2^-m) <= eps``."""
    return Fraction(4 * k * r, 2 ** m) <= Fraction(eps) ** 2


def required_runway_length(k: int, r: int, eps: float) -> int:
    """Smallest ``m`` with ``2 sqrt(k·r·2^-m) <= eps``, i.e. ``ceil(lg(4kr / eps^2))``."""
    if not 0 < eps < 1:
        raise DomainError(f"budget {eps} outside (0, 1)")
    if k < 0 or r < 0:
        raise DomainError("need k >= 0 and r >= 0")
    if k * r == 0:
        return 0
    target = Fraction(4 * k * r) / Fraction(eps) ** 2
    m = max(0, target.numerator.bit_length() - target.denominator.bit_length() - 1)
    while Fraction(2 ** m) < target:
        m += 1
    return m


def runway_costs(n: int, s: int, m: int, k: int, modular: bool = False, *,
                 literal_modular_toffoli: bool = False) -> CostReport:
    """Costs of ``k`` piecewise additions with runways every ``s`` bits.

    ``r = ceil(n/s - 1)`` runways. Depth lies in ``[2(s+m)k, 2(2s+m)k]``; Toffoli
    count is ``2(n + m·r)k`` (plain) or ``2(n + m(r+1))k`` (modular, the coset
    padding acting as one more runway). ``literal_modular_toffoli`` selects the
    unscaled ``n + m(r+1)`` reading of the modular count instead. A modular
    register with ``n <= s`` has no runways and a single piece (of ``n + m``
    bits when modular).
    """
    if s < 1 or n < 1:
        raise DomainError(f"need s >= 1 and n >= 1, got s = {s}, n = {n}")
    if m < 0 or k < 0:
        raise DomainError("need m >= 0 and k >= 0")
    r = runway_count(n, s)
    pads = r + 1 if modular else r
    # a register no longer than s is a single piece
    piece = min(s, n)
    top = 2 * s if n > s else n
    if modular and literal_modular_toffoli:
        toffoli = n + m * pads
    else:
        toffoli = 2 * (n + m * pads) * k
    return CostReport(
        n=n,
        kind="runway",
        modular=modular,
        k=k,
        toffoli_count=toffoli,
        depth_low=2 * (piece + m) * k,
        depth_high=2 * (top + m) * k,
        data_qubits=2 * n + m * pads,
        ancilla_qubits=r + 1,
        trace_bound=runway_trace_bound(k, pads, m),
        spacing=s,
        r=r,
        m=m,
    )


@dataclasses.dataclass(frozen=True)
class BaselineFormula:
    toffoli: Callable[[int], int]
    depth: Callable[[int], int]
    ancilla: Callable[[int], int]
    note: str


def _lg(n: int) -> int:
    return max(1, (n - 1).bit_length())


# Per-addition costs for an n-bit in-place addition. The lookahead and
# temporary-AND entries approximate the cited constructions.
BASELINE_FORMULAS = {
    "ripple": BaselineFormula(lambda n: 2 * n, lambda n: 2 * n, lambda n: 1,
                              "Cuccaro ripple-carry"),
    "temp-and": BaselineFormula(lambda n: n, lambda n: 2 * n, lambda n: n,
                                "ripple-carry with temporary logical-ANDs (approximate)"),
    "lookahead": BaselineFormula(lambda n: 10 * n, lambda n: 4 * _lg(n), lambda n: n,
                                 "in-place carry-lookahead (approximate)"),
}


def baseline_costs(kind: AdderKind, n: int, k: int, modular: bool = False, *,
                   modular_overhead: int = 5) -> CostReport:
    """Closed-form costs for ``k`` exact additions with a baseline adder.

    Modular variants repeat the non-modular adder ``modular_overhead`` times.
    """
    if kind.name not in BASELINE_FORMULAS:
        raise DomainError(f"{kind} is not a baseline adder")
    if n < 1 or k < 0:
        raise DomainError("need n >= 1 and k >= 0")
    formula = BASELINE_FORMULAS[kind.name]
    scale = modular_overhead if modular else 1
    depth = formula.depth(n) * k * scale
    return CostReport(
        n=n,
        kind=kind.name,
        modular=modular,
        k=k,
        toffoli_count=formula.toffoli(n) * k * scale,
        depth_low=depth,
        depth_high=depth,
        data_qubits=2 * n,
        ancilla_qubits=formula.ancilla(n),
    )


def physical_costs(partial: CostReport, params: CostParams) -> CostReport:
    """Fill in duration, factory count, average space and volume."""
    if partial.depth_high is None or partial.toffoli_count is None:
        raise DomainError("report lacks depth or Toffoli count")
    duration_us = partial.depth_high * params.reaction_time_us
    if duration_us:
        factories = partial.toffoli_count / duration_us * params.factory_period_us
    elif partial.toffoli_count:
        raise DomainError("non-zero Toffoli count with zero depth")
    else:
        factories = 0.0
    logical = (partial.data_qubits + partial.ancilla_qubits
               + factories * params.factory_footprint_qubits)
    space = logical * params.routing_overhead_factor * params.qubits_per_logical
    duration_s = duration_us * 1e-6
    return dataclasses.replace(
        partial,
        duration_s=duration_s,
        factory_count=factories,
        avg_space_qubits=space,
        volume=space * duration_s,
    )


def estimate(n: int, kind: AdderKind, params: CostParams = CostParams(), *,
             modular: bool = False, m: Optional[int] = None, k: Optional[int] = None,
             literal_modular_toffoli: bool = False) -> CostReport:
    """Full report for one configuration.

    ``k`` defaults to ``n ** params.additions_exponent``. For runway adders
    ``m`` defaults to the shortest runway keeping the whole sequence within
    ``params.trace_distance_budget``.
    """
    if k is None:
        k = params.additions(n)
    if kind.name == "runway":
        pads = runway_count(n, kind.spacing) + (1 if modular else 0)
        if m is None:
            m = required_runway_length(k, pads, params.trace_distance_budget)
        partial = runway_costs(n, kind.spacing, m, k, modular,
                               literal_modular_toffoli=literal_modular_toffoli)
    else:
        partial = baseline_costs(kind, n, k, modular,
                                 modular_overhead=params.modular_overhead)
    return physical_costs(partial, params)


def sweep(n_values: Sequence[int], kinds: Sequence[AdderKind],
          params: CostParams = CostParams(), *, modular: bool = False) -> list:
    """One report per valid ``(n, kind)``, ordered by ``n`` then by ``kinds``.

    Plain runway kinds whose spacing is not below ``n`` have no runway to
    place and are skipped.
    """
    if not n_values or not kinds:
        raise DomainError("sweep needs at least one size and one kind")
    rows = []
    for n in sorted(set(n_values)):
        for kind in kinds:
            if kind.name == "runway" and kind.spacing >= n and not modular:
                log.info("skipping %s at n=%d: spacing not below n", kind, n)
                continue
            rows.append(estimate(n, kind, params, modular=modular))
    return rows


def lowest_volume(rows: Iterable[CostReport]) -> dict:
    """``n -> report`` with the smallest volume at each size."""
    best = {}
    for row in rows:
        if row.n not in best or row.volume < best[row.n].volume:
            best[row.n] = row
    return best


CSV_FIELDS = ("n", "kind", "modular", "spacing", "r", "m", "k", "toffoli", "depth_low",
              "depth_high", "trace_bound", "duration_s", "space_qubits", "volume_qubit_s")


def _g6(x) -> str:
    return "" if x is None else f"{x:.6g}"


def csv_row(report: CostReport) -> dict:
    return {
        "n": report.n,
        "kind": report.kind,
        "modular": int(report.modular),
        "spacing": "" if report.spacing is None else report.spacing,
        "r": report.r,
        "m": report.m,
        "k": report.k,
        "toffoli": report.toffoli_count,
        "depth_low": report.depth_low,
        "depth_high": report.depth_high,
        "trace_bound": _g6(report.trace_bound),
        "duration_s": _g6(report.duration_s),
        "space_qubits": _g6(report.avg_space_qubits),
        "volume_qubit_s": _g6(report.volume),
    }


def write_csv(reports: Iterable[CostReport], out: TextIO) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerow(csv_row(report))
