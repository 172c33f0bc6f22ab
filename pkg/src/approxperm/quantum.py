"""Pure-state check that deviation ``eps`` bounds the trace distance by ``2 sqrt(eps)``.

States live on ``H = (G x C) ∪ L`` with flat index ``g·|C| + c`` for pairs,
followed by the leak indices. Because leakage is the complement of the
encoder's image, ``|H| = |E|`` and every map below is a permutation of ``H``.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .aep import DomainError, EncodedPermutation, deviation

NORM_TOL = 1e-12
BOUND_TOL = 1e-9


def _unit(amplitudes, what: str) -> np.ndarray:
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.ndim != 1:
        raise DomainError(f"{what} must be a vector")
    if abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
        raise DomainError(f"{what} is not unit norm")
    return amps


@dataclasses.dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _unit(self.amplitudes, "state"))


@dataclasses.dataclass(frozen=True, eq=False)
class InputDistribution:
    amplitudes: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _unit(self.amplitudes, "input distribution"))

    @classmethod
    def uniform(cls, size: int) -> "InputDistribution":
        return cls(np.full(size, 1 / math.sqrt(size), dtype=complex))

    @classmethod
    def basis(cls, size: int, g: int) -> "InputDistribution":
        if not 0 <= g < size:
            raise DomainError(f"basis state {g} outside [0, {size})")
        amps = np.zeros(size, dtype=complex)
        amps[g] = 1
        return cls(amps)

    @classmethod
    def random(cls, size: int, seed: int) -> "InputDistribution":
        rng = np.random.default_rng(seed)
        amps = rng.normal(size=size) + 1j * rng.normal(size=size)
        return cls(amps / np.linalg.norm(amps), seed=seed)


def _index_maps(P: EncodedPermutation):
    """Index arrays over ``H``: ``f``, ``w`` (u on the G part) and ``f^-1 ∘ v ∘ f``."""
    P.require_enumerable()
    n_pairs = P.g_size * P.c_size
    h = np.arange(P.e_size, dtype=np.int64)
    g, c = h[:n_pairs] // P.c_size, h[:n_pairs] % P.c_size
    f = np.concatenate([P.encode_arrays(g, c),
                        P.leak_encodings(np.arange(P.l_size, dtype=np.int64))])
    w = h.copy()
    w[:n_pairs] = P.u.forward(g) * P.c_size + c

    def f_inverse(e):
        dg, dc, idx = P.decode_arrays(e)
        return np.where(idx >= 0, n_pairs + idx, dg * P.c_size + dc)

    actual = f_inverse(P.v.forward(f))
    return w, actual


def _lifted(P: EncodedPermutation, a: np.ndarray) -> np.ndarray:
    if a.shape[-1] != P.g_size:
        raise DomainError(f"input has {a.shape[-1]} amplitudes, |G| = {P.g_size}")
    P.require_enumerable()
    pairs = np.repeat(a, P.c_size, axis=-1) / math.sqrt(P.c_size)
    pad = np.zeros(a.shape[:-1] + (P.l_size,), dtype=complex)
    return np.concatenate([pairs, pad], axis=-1)


def _moved(b: np.ndarray, target: np.ndarray) -> np.ndarray:
    out = np.zeros_like(b)
    out[..., target] = b
    return out


def lifted_state(P: EncodedPermutation, a: InputDistribution) -> PureState:
    """``b``: ``a_g / sqrt(|C|)`` on each pair ``(g, c)``, zero on leakage."""
    return PureState(_lifted(P, a.amplitudes))


def desired_output_state(P: EncodedPermutation, a: InputDistribution) -> PureState:
    w, _ = _index_maps(P)
    return PureState(_moved(_lifted(P, a.amplitudes), w))


def actual_output_state(P: EncodedPermutation, a: InputDistribution) -> PureState:
    _, actual = _index_maps(P)
    return PureState(_moved(_lifted(P, a.amplitudes), actual))


def _overlaps(a: np.ndarray, b: np.ndarray):
    """Row-wise ``|<a|b>|`` and ``sqrt(1 - |<a|b>|^2)``.

    The second is evaluated as the norm of ``b``'s component orthogonal to
    ``a``, which stays accurate when the states nearly coincide.
    """
    inner = np.sum(np.conj(a) * b, axis=-1)
    residual = b - inner[..., None] * a
    return np.abs(inner), np.sqrt(np.sum(np.abs(residual) ** 2, axis=-1))


def fidelity_and_trace_distance(s1: PureState, s2: PureState) -> tuple:
    """``(d, T)`` with ``d = |<s1|s2>|`` and ``T = sqrt(1 - d^2)``."""
    a = _unit(getattr(s1, "amplitudes", s1), "first state")
    b = _unit(getattr(s2, "amplitudes", s2), "second state")
    if a.shape != b.shape:
        raise DomainError("states have different dimensions")
    d, t = _overlaps(a, b)
    return float(d), float(t)


def permuted_overlap(P: EncodedPermutation, a: InputDistribution) -> float:
    """``|sum_h conj(b_p(h)) b_h|`` with ``p = w^-1 ∘ f^-1 ∘ v ∘ f``."""
    w, actual = _index_maps(P)
    w_inv = np.empty_like(w)
    w_inv[w] = np.arange(len(w))
    b = _lifted(P, a.amplitudes)
    return abs(np.sum(np.conj(b[w_inv[actual]]) * b))


@dataclasses.dataclass(frozen=True)
class TheoremReport:
    trace_distance: float
    fidelity: float
    deviation: Fraction
    bound: float
    passed: bool
    fidelity_floor_ok: bool
    seed: Optional[int] = None

    @property
    def ratio(self) -> float:
        """Observed ``T / (2 sqrt(Dev))``; nan when the bound is zero."""
        return self.trace_distance / self.bound if self.bound else float("nan")


def verify_deviation_theorem(P: EncodedPermutation, a: InputDistribution, *,
                             dev: Optional[Fraction] = None) -> TheoremReport:
    """Check ``T <= 2 sqrt(Dev(P))`` (and ``d >= 1 - 2 Dev(P)``) for one input."""
    return verify_many(P, [a], dev=dev)[0]


def verify_many(P: EncodedPermutation, inputs: Sequence[InputDistribution], *,
                dev: Optional[Fraction] = None) -> list:
    """:func:`verify_deviation_theorem` for several inputs sharing one enumeration."""
    if dev is None:
        dev = deviation(P).deviation
    w, actual = _index_maps(P)
    amps = np.stack([a.amplitudes for a in inputs])
    b = _lifted(P, amps)
    desired, got = _moved(b, w), _moved(b, actual)
    fids, dists = _overlaps(desired, got)
    bound = 2 * math.sqrt(dev)
    floor = 1 - 2 * float(dev)
    reports = []
    for d, t, a in zip(fids, dists, inputs):
        reports.append(TheoremReport(
            trace_distance=float(t),
            fidelity=float(d),
            deviation=dev,
            bound=bound,
            passed=bool(t <= bound + BOUND_TOL),
            fidelity_floor_ok=bool(d >= floor - BOUND_TOL),
            seed=a.seed,
        ))
    return reports


def subvec(x: np.ndarray, S) -> np.ndarray:
    out = np.zeros_like(x)
    idx = list(S)
    out[idx] = x[idx]
    return out


def check_subvector_lemma(u_vec, v_vec, S) -> bool:
    """``|<u|v>| >= 2 |subvec(u, S)|^2 - 1`` for unit vectors agreeing on ``S``."""
    u = _unit(u_vec, "u")
    v = _unit(v_vec, "v")
    if u.shape != v.shape:
        raise DomainError("u and v have different dimensions")
    S = sorted(set(S))
    if any(not 0 <= s < len(u) for s in S):
        raise DomainError("basis subset outside the vector dimension")
    if np.max(np.abs(u[S] - v[S]), initial=0.0) > NORM_TOL:
        raise DomainError("u and v differ on the basis subset")
    shared = float(np.vdot(u[S], u[S]).real)
    return abs(np.vdot(u, v)) >= 2 * shared - 1 - NORM_TOL


def random_lemma_pair(dim: int, rng: np.random.Generator):
    """Unit vectors sharing a random subvector, with independent complements."""
    size = int(rng.integers(0, dim + 1))
    S = sorted(rng.choice(dim, size=size, replace=False).tolist())
    rest = [i for i in range(dim) if i not in set(S)]
    weight = float(rng.uniform()) if S and rest else (1.0 if S else 0.0)

    def random_part(k):
        x = rng.normal(size=k) + 1j * rng.normal(size=k)
        return x / np.linalg.norm(x) if k else x

    shared = random_part(len(S)) * math.sqrt(weight)
    u = np.zeros(dim, dtype=complex)
    v = np.zeros(dim, dtype=complex)
    u[S] = v[S] = shared
    u[rest] = random_part(len(rest)) * math.sqrt(1 - weight)
    v[rest] = random_part(len(rest)) * math.sqrt(1 - weight)
    return u, v, S
