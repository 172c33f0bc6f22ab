"""Approximate encoded permutations.

An approximate encoded permutation ``P = (G, u, E, v, C, L, f)`` performs a
desired permutation ``u`` of ``G`` through a cheaper permutation ``v`` of
``E``: each ``g`` is encoded together with a coset value ``c``, moved by ``v``
and decoded again.
All sets are integer ranges ``[0, size)``.

Every map stored on an :class:`EncodedPermutation` is *vectorized*: it accepts
numpy integer arrays (or 0-d arrays) and evaluates elementwise. Scalar
convenience wrappers convert back to Python ints. This lets the same formula
serve both per-point evaluation and exhaustive enumeration.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from fractions import Fraction
from typing import Callable, Hashable, NamedTuple, Optional, Sequence, Union

import numpy as np

DEFAULT_DENSE_LIMIT = 1 << 20
SAMPLE_CHECKS = 4096
_INT64_SAFE = 1 << 62

Func = Callable[[np.ndarray], np.ndarray]
EncodeFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]
DecodeFunc = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray, np.ndarray]"]


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ResourceError(RuntimeError):
    """An enumeration would exceed the configured size limit."""


class IncompatibleError(ValueError):
    """Two encoded permutations cannot be combined."""


class Value(NamedTuple):
    g: int
    c: int


class Leak(NamedTuple):
    leak_index: int


Decoded = Union[Value, Leak]


def as_index_array(x, size: int) -> np.ndarray:
    """Integer array view of ``x``; object dtype when ``size`` overflows int64."""
    if size > _INT64_SAFE:
        return np.asarray(x, dtype=object)
    arr = np.asarray(x)
    if arr.dtype == object:
        return arr
    if not np.issubdtype(arr.dtype, np.integer):
        raise DomainError(f"expected integers, got dtype {arr.dtype}")
    return arr.astype(np.int64, copy=False)


def _scalar(x) -> int:
    return int(np.asarray(x).item()) if np.ndim(x) == 0 else x


@dataclasses.dataclass(frozen=True, eq=False)
class PermutationSpec:
    """A bijection on ``[0, domain_size)`` with vectorized forward/inverse maps."""

    domain_size: int
    forward: Func
    inverse: Func
    key: Hashable = None

    def __post_init__(self):
        if self.domain_size < 1:
            raise DomainError("domain_size must be positive")

    def __call__(self, x):
        return _scalar(self.forward(as_index_array(x, self.domain_size)))

    def inv(self, x):
        return _scalar(self.inverse(as_index_array(x, self.domain_size)))

    def table(self) -> np.ndarray:
        return self.forward(np.arange(self.domain_size, dtype=np.int64))

    def compose(self, inner: "PermutationSpec") -> "PermutationSpec":
        """``self ∘ inner``: apply ``inner`` first."""
        if inner.domain_size != self.domain_size:
            raise IncompatibleError(
                f"domain_size differs: {self.domain_size} vs {inner.domain_size}")
        outer = self
        return PermutationSpec(
            self.domain_size,
            lambda x: outer.forward(inner.forward(x)),
            lambda x: inner.inverse(outer.inverse(x)),
        )

    def check_bijection(self, limit: int = DEFAULT_DENSE_LIMIT, seed: int = 0) -> None:
        """Raise DomainError unless forward and inverse are mutually inverse.

        Exhaustive when ``domain_size <= limit``; otherwise checks a seeded sample.
        """
        x = _points(self.domain_size, limit, seed)
        y = self.forward(x)
        if np.any(self.inverse(y) != x) or np.any(self.forward(self.inverse(x)) != x):
            raise DomainError("forward and inverse are not mutually inverse")
        if self.domain_size <= limit:
            if np.any((y < 0) | (y >= self.domain_size)):
                raise DomainError("forward leaves the domain")
            if len(np.unique(y)) != self.domain_size:
                raise DomainError("forward is not injective")

    @classmethod
    def identity(cls, size: int) -> "PermutationSpec":
        return cls(size, lambda x: x, lambda x: x, key=("identity", size))

    @classmethod
    def from_table(cls, table: Sequence[int]) -> "PermutationSpec":
        fwd = np.asarray(table, dtype=np.int64)
        inv = np.empty_like(fwd)
        inv[fwd] = np.arange(len(fwd), dtype=np.int64)
        return cls(len(fwd), lambda x: fwd[x], lambda x: inv[x])


def _points(size: int, limit: int, seed: int) -> np.ndarray:
    if size <= limit:
        return np.arange(size, dtype=np.int64)
    rng = np.random.default_rng(seed)
    if size <= _INT64_SAFE:
        return rng.integers(0, size, SAMPLE_CHECKS, dtype=np.int64)
    return np.array([int(rng.integers(0, 1 << 62)) * size >> 62 for _ in range(SAMPLE_CHECKS)],
                    dtype=object)


@dataclasses.dataclass(frozen=True, eq=False)
class EncodedPermutation:
    """The tuple ``(G, u, E, v, C, L, f)`` over integer ranges.

    ``encode_fn(g, c)`` maps pairs to encoded values. ``decode_fn(e)`` returns
    arrays ``(g, c, is_leak)``; ``g`` and ``c`` are meaningless where
    ``is_leak`` is set. Leaked encodings are indexed by their rank among all
    leaked encodings unless ``leak_rank_fn``/``leak_unrank_fn`` give a closed form.

    ``pieces`` describes ``E`` as a little-endian Cartesian product (the first
    factor varies fastest). ``componentwise`` declares that ``v`` acts on each
    factor independently.
    """

    g_size: int
    e_size: int
    c_size: int
    u: PermutationSpec
    v: PermutationSpec
    encode_fn: EncodeFunc
    decode_fn: DecodeFunc
    leak_rank_fn: Optional[Func] = None
    leak_unrank_fn: Optional[Func] = None
    pieces: Optional[tuple] = None
    componentwise: bool = False
    encoding_key: Hashable = None
    bound: Optional[Fraction] = None
    label: str = ""
    backend: str = "formula"
    dense_limit: int = DEFAULT_DENSE_LIMIT

    def __post_init__(self):
        if min(self.g_size, self.e_size, self.c_size) < 1:
            raise DomainError("set sizes must be positive")
        if self.g_size * self.c_size > self.e_size:
            raise DomainError("|G|·|C| exceeds |E|")
        if self.u.domain_size != self.g_size:
            raise DomainError("u must act on G")
        if self.v.domain_size != self.e_size:
            raise DomainError("v must act on E")
        if self.pieces is not None and math.prod(self.pieces) != self.e_size:
            raise DomainError("pieces must multiply to |E|")

    @property
    def l_size(self) -> int:
        return self.e_size - self.g_size * self.c_size

    def enumerable(self, limit: Optional[int] = None) -> bool:
        return self.e_size <= (self.dense_limit if limit is None else limit)

    def require_enumerable(self, limit: Optional[int] = None) -> None:
        limit = self.dense_limit if limit is None else limit
        if self.e_size > limit:
            raise ResourceError(f"|E| = {self.e_size} exceeds enumeration limit {limit}")

    # -- vectorized evaluation ------------------------------------------------

    def encode_arrays(self, g, c) -> np.ndarray:
        g = as_index_array(g, self.e_size)
        c = as_index_array(c, self.e_size)
        return self.encode_fn(g, c)

    def decode_arrays(self, e):
        """Decode ``e`` into arrays ``(g, c, leak_index)``, using -1 for absent fields."""
        e = as_index_array(e, self.e_size)
        g, c, leak = self.decode_fn(e)
        leak = np.asarray(leak, dtype=bool)
        g = np.where(leak, -1, g)
        c = np.where(leak, -1, c)
        idx = np.full(np.shape(leak), -1, dtype=np.int64 if e.dtype != object else object)
        if np.any(leak):
            idx = np.where(leak, self._leak_rank(np.where(leak, e, 0)), -1)
        return g, c, idx

    def _leak_rank(self, e):
        if self.leak_rank_fn is not None:
            return self.leak_rank_fn(e)
        return np.searchsorted(self._leak_table, e)

    @functools.cached_property
    def _leak_table(self) -> np.ndarray:
        self.require_enumerable()
        e = np.arange(self.e_size, dtype=np.int64)
        leaked = np.asarray(self.decode_fn(e)[2], dtype=bool)
        table = e[leaked]
        if len(table) != self.l_size:
            raise DomainError(
                f"decode leaks {len(table)} values, expected |L| = {self.l_size}")
        return table

    def leak_encodings(self, idx) -> np.ndarray:
        """``f`` restricted to ``L``: encoded value of each leak index."""
        idx = as_index_array(idx, self.e_size)
        if self.leak_unrank_fn is not None:
            return self.leak_unrank_fn(idx)
        return self._leak_table[idx]

    # -- scalar API -------------------------------------------------------------

    def encode(self, g: int, c: int) -> int:
        if not 0 <= g < self.g_size:
            raise DomainError(f"g = {g} outside [0, {self.g_size})")
        if not 0 <= c < self.c_size:
            raise DomainError(f"c = {c} outside [0, {self.c_size})")
        return _scalar(self.encode_arrays(g, c))

    def decode(self, e: int) -> Decoded:
        if not 0 <= e < self.e_size:
            raise DomainError(f"e = {e} outside [0, {self.e_size})")
        g, c, idx = self.decode_arrays(e)
        if _scalar(idx) >= 0:
            return Leak(_scalar(idx))
        return Value(_scalar(g), _scalar(c))

    def apply(self, e: int) -> int:
        """Apply ``v`` to a single encoded value."""
        return self.v(e)

    def check_roundtrip(self, limit: Optional[int] = None) -> None:
        """Raise DomainError unless ``decode(encode(g, c)) == (g, c)`` everywhere.

        Exhaustive under ``limit``; a seeded sample beyond it.
        """
        limit = self.dense_limit if limit is None else limit
        n_pairs = self.g_size * self.c_size
        flat = _points(n_pairs, limit, seed=1)
        g, c = flat // self.c_size, flat % self.c_size
        e = self.encode_arrays(g, c)
        if np.any((e < 0) | (e >= self.e_size)):
            raise DomainError("encode leaves E")
        dg, dc, idx = self.decode_arrays(e)
        if np.any(idx >= 0) or np.any(dg != g) or np.any(dc != c):
            raise DomainError("decode does not invert encode")
        if n_pairs <= limit and len(np.unique(e)) != n_pairs:
            raise DomainError("encode is not injective")

    def __repr__(self):
        label = self.label or "EncodedPermutation"
        return (f"<{label}: |G|={self.g_size} |E|={self.e_size} "
                f"|C|={self.c_size} |L|={self.l_size} ({self.backend})>")


@dataclasses.dataclass(frozen=True)
class DeviationReport:
    per_input_deviated: np.ndarray
    deviation: Fraction
    bound: Optional[Fraction] = None

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.deviation <= self.bound


def _check_g(P: EncodedPermutation, g: int) -> None:
    if not 0 <= g < P.g_size:
        raise DomainError(f"g = {g} outside [0, {P.g_size})")


def encodings_of(P: EncodedPermutation, g: int) -> set:
    """``Encodings_g(P) = {f((g, c)) | c in C}``."""
    _check_g(P, g)
    if P.c_size > P.dense_limit:
        raise ResourceError(f"|C| = {P.c_size} exceeds enumeration limit {P.dense_limit}")
    c = np.arange(P.c_size, dtype=np.int64)
    return {int(e) for e in P.encode_arrays(np.full_like(c, g), c)}


def _deviated_flags(P: EncodedPermutation, g: np.ndarray, c: np.ndarray) -> np.ndarray:
    e = P.v.forward(P.encode_arrays(g, c))
    dg, _, idx = P.decode_arrays(e)
    return (idx >= 0) | (dg != P.u.forward(g))


def deviated_coset(P: EncodedPermutation, g: int) -> set:
    """Coset values ``c`` whose encoding ``v`` sends outside ``Encodings_{u(g)}``."""
    _check_g(P, g)
    if P.c_size > P.dense_limit:
        raise ResourceError(f"|C| = {P.c_size} exceeds enumeration limit {P.dense_limit}")
    c = np.arange(P.c_size, dtype=np.int64)
    flags = _deviated_flags(P, np.full_like(c, g), c)
    return {int(x) for x in c[flags]}


def deviated_mask(P: EncodedPermutation, limit: Optional[int] = None) -> np.ndarray:
    """Boolean array of shape ``(|G|, |C|)``, true where ``c`` is deviated for ``g``."""
    P.require_enumerable(limit)
    g = np.repeat(np.arange(P.g_size, dtype=np.int64), P.c_size)
    c = np.tile(np.arange(P.c_size, dtype=np.int64), P.g_size)
    return _deviated_flags(P, g, c).reshape(P.g_size, P.c_size)


def deviation(P: EncodedPermutation, limit: Optional[int] = None) -> DeviationReport:
    """Exact deviation ``max_g |Deviated_g(P)| / |C|`` by enumeration."""
    counts = deviated_mask(P, limit).sum(axis=1)
    return DeviationReport(counts, Fraction(int(counts.max()), P.c_size), P.bound)


def _sum_bounds(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None or b is None:
        return None
    return a + b


def _same_maps(f0, f1, size: int, limit: int, seed: int) -> bool:
    x = _points(size, limit, seed)
    return bool(np.all(f0(x) == f1(x)))


def _require_same_encoding(p0, p1, limit, assume_compatible) -> None:
    for name in ("g_size", "e_size", "c_size"):
        if getattr(p0, name) != getattr(p1, name):
            raise IncompatibleError(
                f"{name} differs: {getattr(p0, name)} vs {getattr(p1, name)}")
    if assume_compatible or (p0.encoding_key is not None
                             and p0.encoding_key == p1.encoding_key):
        return
    n_pairs = p0.g_size * p0.c_size

    def enc(p):
        return lambda x: p.encode_arrays(x // p.c_size, x % p.c_size)

    if not _same_maps(enc(p0), enc(p1), n_pairs, limit, seed=2):
        raise IncompatibleError("encode differs")

    def dec(p):
        return lambda x: np.stack(p.decode_arrays(x))

    if not _same_maps(dec(p0), dec(p1), p0.e_size, limit, seed=3):
        raise IncompatibleError("decode differs")


def compose(P0: EncodedPermutation, P1: EncodedPermutation, *,
            limit: int = DEFAULT_DENSE_LIMIT,
            assume_compatible: bool = False) -> EncodedPermutation:
    """``P0 ∘ P1``: perform ``P1`` then ``P0`` over identical sets and encoder."""
    _require_same_encoding(P0, P1, limit, assume_compatible)
    return dataclasses.replace(
        P0,
        u=P0.u.compose(P1.u),
        v=P0.v.compose(P1.v),
        bound=_sum_bounds(P0.bound, P1.bound),
        label=f"({P0.label} o {P1.label})",
        backend="formula",
    )


def concatenate(P0: EncodedPermutation, P1: EncodedPermutation, *,
                limit: int = DEFAULT_DENSE_LIMIT,
                assume_compatible: bool = False) -> EncodedPermutation:
    """``P0 * P1``: nest ``P1`` inside ``P0``.

    ``P0``'s unencoded set must be ``P1``'s encoded set and ``P0.u`` must equal
    ``P1.v``. The combined coset index packs ``(c0, c1)`` as ``c0·|C1| + c1``.
    Every encoded value outside the image of the combined encoder is leakage.
    """
    if P0.g_size != P1.e_size:
        raise IncompatibleError(
            f"P0.g_size ({P0.g_size}) must equal P1.e_size ({P1.e_size})")
    if not assume_compatible and not _same_maps(P0.u.forward, P1.v.forward,
                                                P1.e_size, limit, seed=4):
        raise IncompatibleError("P0.u differs from P1.v")

    c1_size = P1.c_size

    def encode(g, c):
        return P0.encode_fn(P1.encode_fn(g, c % c1_size), c // c1_size)

    def decode(e):
        i, c0, leak0 = P0.decode_fn(e)
        leak0 = np.asarray(leak0, dtype=bool)
        g, c1, leak1 = P1.decode_fn(np.where(leak0, 0, i))
        leak = leak0 | np.asarray(leak1, dtype=bool)
        return g, c0 * c1_size + c1, leak

    key = None
    if P0.encoding_key is not None and P1.encoding_key is not None:
        key = ("concat", P0.encoding_key, P1.encoding_key)
    return EncodedPermutation(
        g_size=P1.g_size,
        e_size=P0.e_size,
        c_size=P0.c_size * c1_size,
        u=P1.u,
        v=P0.v,
        encode_fn=encode,
        decode_fn=decode,
        pieces=P0.pieces,
        componentwise=P0.componentwise,
        encoding_key=key,
        bound=_sum_bounds(P0.bound, P1.bound),
        label=f"{P0.label} * {P1.label}",
        dense_limit=min(P0.dense_limit, P1.dense_limit),
    )


def _split_components(v: PermutationSpec, head: int):
    """Split ``v`` on ``head × rest`` into its two factor maps (forward, inverse)."""

    def head_fwd(x):
        return v.forward(x) % head

    def head_inv(x):
        return v.inverse(x) % head

    def rest_fwd(y):
        return v.forward(y * head) // head

    def rest_inv(y):
        return v.inverse(y * head) // head

    return head_fwd, head_inv, rest_fwd, rest_inv


def _check_componentwise(v: PermutationSpec, head: int, limit: int) -> None:
    head_fwd, _, rest_fwd, _ = _split_components(v, head)
    x = _points(v.domain_size, limit, seed=5)
    expect = head_fwd(x % head) + head * rest_fwd(x // head)
    if np.any(v.forward(x) != expect):
        raise IncompatibleError("P1.v does not act separately on the first piece")


def first_piece_concat(P0: EncodedPermutation, P1: EncodedPermutation,
                       piece_sizes: Optional[Sequence[int]] = None, *,
                       limit: int = DEFAULT_DENSE_LIMIT,
                       assume_compatible: bool = False) -> EncodedPermutation:
    """``P0 *' P1``: wrap ``P0`` around the first factor of ``P1``'s encoded set.

    ``P1.v`` must factor as a map on the first piece times a map on the rest;
    the lifted ``P0`` applies ``P0.v`` to the first piece and ``P1.v``'s own
    action to the rest, so its deviation equals that of ``P0``.
    """
    sizes = tuple(piece_sizes if piece_sizes is not None else (P1.pieces or ()))
    if not sizes or any(s < 1 for s in sizes):
        raise IncompatibleError("piece_sizes must be a non-empty list of positive sizes")
    if math.prod(sizes) != P1.e_size:
        raise IncompatibleError(
            f"piece sizes multiply to {math.prod(sizes)}, P1.e_size is {P1.e_size}")
    head = sizes[0]
    if P0.g_size != head:
        raise IncompatibleError(f"P0.g_size ({P0.g_size}) must equal first piece ({head})")
    head_fwd, head_inv, rest_fwd, rest_inv = _split_components(P1.v, head)
    if not assume_compatible:
        if not P1.componentwise:
            _check_componentwise(P1.v, head, limit)
        if not _same_maps(P0.u.forward, head_fwd, head, limit, seed=6):
            raise IncompatibleError("P0.u differs from P1.v on the first piece")

    e0 = P0.e_size
    rest = P1.e_size // head
    v0 = P0.v

    lifted = EncodedPermutation(
        g_size=P1.e_size,
        e_size=e0 * rest,
        c_size=P0.c_size,
        u=P1.v,
        v=PermutationSpec(
            e0 * rest,
            lambda e: v0.forward(e % e0) + e0 * rest_fwd(e // e0),
            lambda e: v0.inverse(e % e0) + e0 * rest_inv(e // e0),
        ),
        encode_fn=lambda h, c: P0.encode_fn(h % head, c) + e0 * (h // head),
        decode_fn=lambda e: _lifted_decode(P0, head, e0, e),
        pieces=(P0.pieces or (e0,)) + sizes[1:],
        componentwise=P0.componentwise and P1.componentwise,
        bound=P0.bound,
        label=f"lift({P0.label})",
        dense_limit=P0.dense_limit,
    )
    out = concatenate(lifted, P1, assume_compatible=True)
    key = None
    if P0.encoding_key is not None and P1.encoding_key is not None:
        key = ("first_piece", P0.encoding_key, P1.encoding_key, sizes)
    return dataclasses.replace(out, encoding_key=key, label=f"{P0.label} *' {P1.label}")


def _lifted_decode(P0, head, e0, e):
    i, c0, leak = P0.decode_fn(e % e0)
    return i + head * (e // e0), c0, leak


def densify(P: EncodedPermutation, limit: int = DEFAULT_DENSE_LIMIT) -> EncodedPermutation:
    """Table-backed copy of ``P``, pointwise identical to it."""
    P.require_enumerable(limit)
    if P.backend == "dense":
        return P
    gc = np.arange(P.g_size * P.c_size, dtype=np.int64)
    enc = P.encode_arrays(gc // P.c_size, gc % P.c_size).astype(np.int64)
    e = np.arange(P.e_size, dtype=np.int64)
    dg, dc, didx = (a.astype(np.int64) for a in P.decode_arrays(e))
    leak_table = e[didx >= 0]
    c_size = P.c_size

    def table_spec(spec):
        fwd = spec.table().astype(np.int64)
        inv = spec.inverse(np.arange(spec.domain_size, dtype=np.int64)).astype(np.int64)
        return PermutationSpec(spec.domain_size, lambda x: fwd[x], lambda x: inv[x], spec.key)

    return dataclasses.replace(
        P,
        u=table_spec(P.u),
        v=table_spec(P.v),
        encode_fn=lambda g, c: enc[g * c_size + c],
        decode_fn=lambda x: (dg[x], dc[x], didx[x] >= 0),
        leak_rank_fn=lambda x: didx[x],
        leak_unrank_fn=lambda i: leak_table[i],
        backend="dense",
    )


def identity_aep(g_size: int, c_size: int = 1, l_size: int = 0) -> EncodedPermutation:
    """Encoding ``g + |G|·c`` with identity ``u`` and ``v``; values past ``|G||C|`` leak."""
    n_pairs = g_size * c_size
    ident_g = PermutationSpec.identity(g_size)
    ident_e = PermutationSpec.identity(n_pairs + l_size)
    return EncodedPermutation(
        g_size=g_size,
        e_size=n_pairs + l_size,
        c_size=c_size,
        u=ident_g,
        v=ident_e,
        encode_fn=lambda g, c: g + g_size * c,
        decode_fn=lambda e: (e % g_size, e // g_size, e >= n_pairs),
        leak_rank_fn=lambda e: e - n_pairs,
        leak_unrank_fn=lambda i: i + n_pairs,
        encoding_key=("identity", g_size, c_size, l_size),
        bound=Fraction(0),
        label="ID",
    )


def trivial_wrapper(perm: PermutationSpec, c_size: int) -> EncodedPermutation:
    """Exact wrapper with ``u = perm`` and ``v`` acting as ``perm`` on the low part.

    Useful as a deviation-free outer layer for :func:`concatenate`.
    """
    size = perm.domain_size
    return EncodedPermutation(
        g_size=size,
        e_size=size * c_size,
        c_size=c_size,
        u=perm,
        v=PermutationSpec(
            size * c_size,
            lambda e: perm.forward(e % size) + size * (e // size),
            lambda e: perm.inverse(e % size) + size * (e // size),
        ),
        encode_fn=lambda g, c: g + size * c,
        decode_fn=lambda e: (e % size, e // size, np.zeros(np.shape(e), dtype=bool)),
        pieces=(size, c_size),
        componentwise=True,
        encoding_key=("wrap", size, c_size),
        bound=Fraction(0),
        label="WRAP",
    )
