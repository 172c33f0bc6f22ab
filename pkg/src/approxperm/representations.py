"""Concrete families of approximate encoded permutations.

The coset representation stores a residue mod ``N`` as ``g + cN``. Carry
runways split an ``n``-bit register into pieces that add independently; they
can also sit inside a coset register.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Literal, Optional, Sequence

import numpy as np

from .aep import (
    DomainError,
    EncodedPermutation,
    PermutationSpec,
    concatenate,
    first_piece_concat,
)

RepresentationKind = Literal["coset", "runway", "runways", "modular"]


def ceil_lg(N: int) -> int:
    """Bits needed to hold every value below ``N``."""
    return (N - 1).bit_length()


@dataclasses.dataclass(frozen=True)
class CosetParams:
    N: int
    m: int
    k: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise DomainError(f"modulus N = {self.N} must be at least 2")
        if self.m < 0:
            raise DomainError(f"padding m = {self.m} must be non-negative")
        if not 0 <= self.k < self.N:
            raise DomainError(f"offset k = {self.k} outside [0, {self.N})")

    @property
    def width(self) -> int:
        return self.m + ceil_lg(self.N)


@dataclasses.dataclass(frozen=True)
class RunwayParams:
    n: int
    p: int
    m: int
    k: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"register size n = {self.n} must be positive")
        if self.m < 0:
            raise DomainError(f"runway length m = {self.m} must be non-negative")
        if not 1 <= self.p <= self.n - self.m:
            raise DomainError(
                f"runway position p = {self.p} outside [1, {self.n - self.m}]")


@dataclasses.dataclass(frozen=True)
class LayoutParams:
    """Runways of common length ``m`` at ``positions`` in an ``n``-bit register.

    With ``modulus`` set, ``n`` is the width of the coset register
    (``ceil(lg N) + m``) and the runways sit inside the coset representation.
    """

    n: int
    positions: tuple
    m: int
    modulus: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if self.n < 1 or self.m < 0:
            raise DomainError("need n >= 1 and m >= 0")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise DomainError(f"positions {self.positions} must strictly increase")
        if any(not 0 < p < self.n for p in self.positions):
            raise DomainError(f"positions {self.positions} must lie in (0, {self.n})")
        if self.modulus is not None and self.n != ceil_lg(self.modulus) + self.m:
            raise DomainError("modular layouts span the coset register of width lg N + m")

    @classmethod
    def from_spacing(cls, n: int, s: int, m: int) -> "LayoutParams":
        """A runway at every multiple of ``s`` below ``n``: ``r = ceil(n/s - 1)`` runways."""
        if s < 1:
            raise DomainError("spacing must be positive")
        r = runway_count(n, s)
        return cls(n, tuple(s * j for j in range(1, r + 1)), m)

    @classmethod
    def modular(cls, N: int, m: int, positions: Sequence[int] = ()) -> "LayoutParams":
        return cls(ceil_lg(N) + m, tuple(positions), m, modulus=N)

    @property
    def r(self) -> int:
        return len(self.positions)

    @property
    def packed_width(self) -> int:
        return self.n + self.r * self.m

    def piece_layout(self) -> list:
        """``(offset, data_bits, runway_bits, data_start)`` for each piece, low to high.

        ``offset`` is the first bit of the piece in the packed register;
        ``data_start`` is its first bit in the unencoded register.
        """
        bounds = (0,) + self.positions + (self.n,)
        out, offset = [], 0
        for j in range(self.r + 1):
            data = bounds[j + 1] - bounds[j]
            runway = self.m if j < self.r else 0
            out.append((offset, data, runway, bounds[j]))
            offset += data + runway
        return out

    def constant_slices(self, k: int) -> list:
        """Slice of ``k`` added into each piece by a piecewise addition."""
        k %= 1 << self.n
        return [(k >> start) % (1 << data) for _, data, _, start in self.piece_layout()]


def runway_count(n: int, s: int) -> int:
    return max(0, -(-n // s) - 1)


def make_coset_aep(params: CosetParams) -> EncodedPermutation:
    """``COM_{k,N,m}``: encode ``g`` as ``g + cN`` and add ``k`` without reduction."""
    N, m, k = params.N, params.m, params.k
    size = 1 << params.width
    c_size = 1 << m
    top = N * c_size
    return EncodedPermutation(
        g_size=N,
        e_size=size,
        c_size=c_size,
        u=PermutationSpec(N, lambda g: (g + k) % N, lambda g: (g - k) % N),
        v=PermutationSpec(size, lambda e: (e + k) % size, lambda e: (e - k) % size),
        encode_fn=lambda g, c: g + c * N,
        decode_fn=lambda e: (e % N, e // N, e >= top),
        leak_rank_fn=lambda e: e - top,
        leak_unrank_fn=lambda i: i + top,
        pieces=(size,),
        componentwise=True,
        encoding_key=("coset", N, m),
        bound=Fraction(1, c_size),
        label=f"COM(N={N},m={m},k={k})",
    )


def make_runway_aep(params: RunwayParams) -> EncodedPermutation:
    """``RUN_{k,p,m,n}``: an ``m``-bit runway spliced in at bit ``p``.

    The encoded pair ``(e0, e1)`` is packed as ``e0 + 2^(p+m)·e1`` so the
    runway bits sit directly above the low piece.
    """
    n, p, m = params.n, params.p, params.m
    k = params.k % (1 << n)
    low = 1 << p
    low_mod = 1 << (p + m)
    high_mod = 1 << (n - p)
    g_mod = 1 << n
    k_low, k_high = k % low, k // low

    def encode(g, c):
        return (g % low + low * c) + low_mod * ((g // low - c) % high_mod)

    def decode(e):
        e0, e1 = e % low_mod, e // low_mod
        return (e0 + low * e1) % g_mod, e0 // low, np.zeros(np.shape(e), dtype=bool)

    def v_fwd(e):
        return (e % low_mod + k_low) % low_mod + low_mod * ((e // low_mod + k_high) % high_mod)

    def v_inv(e):
        return (e % low_mod - k_low) % low_mod + low_mod * ((e // low_mod - k_high) % high_mod)

    return EncodedPermutation(
        g_size=g_mod,
        e_size=g_mod << m,
        c_size=1 << m,
        u=PermutationSpec(g_mod, lambda g: (g + k) % g_mod, lambda g: (g - k) % g_mod),
        v=PermutationSpec(g_mod << m, v_fwd, v_inv),
        encode_fn=encode,
        decode_fn=decode,
        pieces=(low_mod, high_mod),
        componentwise=True,
        encoding_key=("runway", n, p, m),
        bound=Fraction(1, 1 << m),
        label=f"RUN(n={n},p={p},m={m},k={params.k})",
    )


def coset_aep(N: int, m: int, k: int = 0) -> EncodedPermutation:
    return make_coset_aep(CosetParams(N, m, k))


def runway_aep(n: int, p: int, m: int, k: int = 0) -> EncodedPermutation:
    return make_runway_aep(RunwayParams(n, p, m, k))


def _plain_adder_aep(n: int, k: int) -> EncodedPermutation:
    size = 1 << n
    k %= size
    add = PermutationSpec(size, lambda x: (x + k) % size, lambda x: (x - k) % size)
    return EncodedPermutation(
        g_size=size,
        e_size=size,
        c_size=1,
        u=add,
        v=add,
        encode_fn=lambda g, c: g,
        decode_fn=lambda e: (e, np.zeros(np.shape(e), dtype=np.int64),
                             np.zeros(np.shape(e), dtype=bool)),
        pieces=(size,),
        componentwise=True,
        encoding_key=("plain", n),
        bound=Fraction(0),
        label=f"ADD(n={n},k={k})",
    )


def _check_nestable(positions: tuple, n: int, m: int) -> None:
    if positions and positions[-1] > n - m:
        raise DomainError(
            f"highest runway position {positions[-1]} exceeds n - m = {n - m}")


def _wrap_runways(inner: EncodedPermutation, positions: tuple, m: int, k: int):
    """Attach runways ``positions[:-1]`` around ``inner`` from the top down."""
    aep = inner
    for j in range(len(positions) - 2, -1, -1):
        above = positions[j + 1]
        outer = runway_aep(above + m, positions[j], m, k % (1 << above))
        aep = first_piece_concat(outer, aep)
    return aep


def make_multi_runway_aep(layout: LayoutParams, k: int) -> EncodedPermutation:
    """Plain ``n``-bit addition of ``k`` with a runway at every layout position.

    Built as ``RUN_{p0} *' RUN_{p1} *' ... *' RUN_{p_last}``; piece ``i``
    receives the slice ``floor(k / 2^p_(i-1)) mod 2^(p_i - p_(i-1))``.
    """
    if layout.modulus is not None:
        raise DomainError("use make_modular_runway_aep for modular layouts")
    n, m, positions = layout.n, layout.m, layout.positions
    if not positions:
        return _plain_adder_aep(n, k)
    _check_nestable(positions, n, m)
    aep = _wrap_runways(runway_aep(n, positions[-1], m, k), positions, m, k)
    return dataclasses.replace(aep, bound=deviation_bound("runways", layout.r, m))


def make_modular_runway_aep(N: int, m: int, positions: Sequence[int],
                            k: int) -> EncodedPermutation:
    """Modular addition of ``k`` with runways nested inside the coset representation."""
    positions = tuple(positions)
    com = coset_aep(N, m, k)
    if not positions:
        return com
    layout = LayoutParams.modular(N, m, positions)
    _check_nestable(positions, layout.n, m)
    inner = concatenate(runway_aep(layout.n, positions[-1], m, k), com)
    aep = _wrap_runways(inner, positions, m, k)
    return dataclasses.replace(aep, bound=deviation_bound("modular", len(positions), m))


def deviation_bound(kind: RepresentationKind, r: int = 1, m: int = 0) -> Fraction:
    """Proven deviation bound for one addition.

    ``coset`` and ``runway``: ``2^-m``. ``runways`` (``r`` plain runways):
    ``r·2^-m``. ``modular`` (``r`` runways inside a coset register): ``(r+1)·2^-m``.
    """
    if m < 0 or r < 0:
        raise DomainError("need m >= 0 and r >= 0")
    unit = Fraction(1, 1 << m)
    if kind in ("coset", "runway"):
        return unit
    if kind == "runways":
        return r * unit
    if kind == "modular":
        return (r + 1) * unit
    raise DomainError(f"unknown representation kind {kind!r}")


def layout_aep(layout: LayoutParams, k: int) -> EncodedPermutation:
    """Dispatch on ``layout.modulus``."""
    if layout.modulus is None:
        return make_multi_runway_aep(layout, k)
    return make_modular_runway_aep(layout.modulus, layout.m, layout.positions,
                                   k % layout.modulus)


def runway_values(layout: LayoutParams, c: int) -> list:
    """Split a plain layout's packed coset index into runway values, lowest first.

    Concatenation packs the outer (lowest) runway most significantly.
    """
    mask = (1 << layout.m) - 1
    r = layout.r
    return [(c >> (layout.m * (r - 1 - j))) & mask for j in range(r)]
