"""Finite-order gradations of the classical Lie algebras from block data.

A gradation of gl/sl/so/sp_n(C) by residues mod M is recorded, up to
conjugation, by the combinatorial spec (family, type, M, n_1..n_p,
k_1..k_{p-1}) plus a half-integer phase offset.  The generating
automorphism is conjugation by a diagonal ``h`` (inner types) or the
outer twist ``x -> -h @ b_transpose(x, B) @ inv(h)``.

Five types are supported:

* ``gl_inner``     -- inner gradations of gl/sl;
* ``sosp_I``       -- so/sp gradations whose unit-circle phases can be
                      ordered without obstruction;
* ``sosp_II``      -- so/sp gradations whose h carries both +1 and -1
                      eigenvalues (even M, even p);
* ``gl_outer_II``  -- outer gl gradations with no +1 eigenvalue of h
                      (B = K, same data as a sosp_I gradation mod N = M/2);
* ``gl_outer_III`` -- outer gl gradations with +1 eigenvalues
                      (B = diag(J, K), same data as sosp_II mod N).

The A = id case (p = 1) is represented by the distinguished
:class:`TrivialSpec`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lie_core import (
    DEFAULT_TOL,
    ShapeMismatchError,
    as_complex,
    b_transpose,
    identity,
    max_abs,
    skew_identity,
    symplectic_identity,
)

TYPE_GL_INNER = "gl_inner"
TYPE_SOSP_I = "sosp_I"
TYPE_SOSP_II = "sosp_II"
TYPE_GL_OUTER_II = "gl_outer_II"
TYPE_GL_OUTER_III = "gl_outer_III"

GRADATION_TYPES = (TYPE_GL_INNER, TYPE_SOSP_I, TYPE_SOSP_II, TYPE_GL_OUTER_II, TYPE_GL_OUTER_III)

_GL_TYPES = (TYPE_GL_INNER, TYPE_GL_OUTER_II, TYPE_GL_OUTER_III)
_SOSP_TYPES = (TYPE_SOSP_I, TYPE_SOSP_II)
_OUTER_TYPES = (TYPE_GL_OUTER_II, TYPE_GL_OUTER_III)

DEFAULT_ENUM_CAP = 20000


class SpecError(ValueError):
    """A gradation spec violates its defining constraints."""


class EnumerationCapError(RuntimeError):
    """Enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class GradationSpec:
    """Combinatorial data of a nontrivial gradation (p >= 2)."""

    family: str
    n: int
    gradation_type: str
    M: int
    n_list: tuple[int, ...]
    k_list: tuple[int, ...]
    phase_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(v) for v in self.n_list))
        object.__setattr__(self, "k_list", tuple(int(v) for v in self.k_list))

    @property
    def p(self) -> int:
        return len(self.n_list)

    @property
    def N(self) -> int:
        """Half order, meaningful for the outer types (M = 2N)."""
        return self.M // 2

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "type": self.gradation_type,
            "M": self.M,
            "n_list": list(self.n_list),
            "k_list": list(self.k_list),
            "phase_offset": self.phase_offset,
        }


@dataclass(frozen=True)
class TrivialSpec:
    """The A = id gradation: everything sits in residue class zero."""

    family: str
    n: int
    M: int = 1

    @property
    def p(self) -> int:
        return 1

    @property
    def n_list(self) -> tuple[int, ...]:
        return (self.n,)

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "type": "trivial", "M": self.M}


def spec_from_json(data: dict) -> GradationSpec | TrivialSpec:
    if data.get("type") == "trivial":
        return TrivialSpec(family=data["family"], n=int(data["n"]), M=int(data.get("M", 1)))
    return GradationSpec(
        family=data["family"],
        n=int(data["n"]),
        gradation_type=data["type"],
        M=int(data["M"]),
        n_list=tuple(data["n_list"]),
        k_list=tuple(data["k_list"]),
        phase_offset=float(data.get("phase_offset", 0.0)),
    )


def spec_to_json_str(spec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True)


def required_offset(gradation_type: str, M: int, k_list) -> float:
    """Phase offset forced by the type: 1/2 whenever M - sum(k) is odd
    (sosp_I over M, gl_outer_II over N = M/2), zero otherwise."""
    sk = sum(k_list)
    if gradation_type == TYPE_SOSP_I:
        return 0.0 if (M - sk) % 2 == 0 else 0.5
    if gradation_type == TYPE_GL_OUTER_II:
        return 0.0 if (M // 2 - sk) % 2 == 0 else 0.5
    return 0.0


def make_spec(family: str, gradation_type: str, M: int, n_list, k_list) -> GradationSpec:
    """Build a spec with the type-required phase offset filled in."""
    return GradationSpec(
        family=family,
        n=sum(n_list),
        gradation_type=gradation_type,
        M=M,
        n_list=tuple(n_list),
        k_list=tuple(k_list),
        phase_offset=required_offset(gradation_type, M, k_list),
    )


def validate_spec(spec) -> list[str]:
    """Return the list of violated constraints (empty means valid)."""
    if isinstance(spec, TrivialSpec):
        out = []
        if spec.family not in ("gl", "sl", "so", "sp"):
            out.append(f"family: unknown family {spec.family!r}")
        if spec.n < 1:
            out.append("n_positive: n must be positive")
        if spec.M < 1:
            out.append("M_positive: M must be positive")
        if spec.family == "sp" and spec.n % 2:
            out.append("sp_even_n: sp_n requires even n")
        return out

    v: list[str] = []
    t = spec.gradation_type
    p = spec.p
    nl, kl = spec.n_list, spec.k_list
    sk = sum(kl)

    if spec.family not in ("gl", "sl", "so", "sp"):
        v.append(f"family: unknown family {spec.family!r}")
        return v
    if t not in GRADATION_TYPES:
        v.append(f"type: unknown gradation type {t!r}")
        return v
    if t in _GL_TYPES and spec.family not in ("gl", "sl"):
        v.append(f"family_type: type {t} requires family gl or sl")
    if t in _SOSP_TYPES and spec.family not in ("so", "sp"):
        v.append(f"family_type: type {t} requires family so or sp")
    if spec.M < 1:
        v.append("M_positive: M must be positive")
    if p < 2:
        v.append("p_minimum: p >= 2 (p = 1 is the trivial gradation)")
    if len(kl) != p - 1:
        v.append("k_length: k_list must have p - 1 entries")
        return v
    if any(x < 1 for x in nl):
        v.append("n_positive_entries: every n_alpha must be positive")
    if any(x < 1 for x in kl):
        v.append("k_positive_entries: every k_alpha must be positive")
    if sum(nl) != spec.n:
        v.append("n_sum: block sizes must sum to n")
    if spec.family == "sp" and spec.n % 2:
        v.append("sp_even_n: sp_n requires even n")
    if v:
        return v

    if spec.phase_offset not in (0.0, 0.5):
        v.append("phase_offset_value: phase offset must be 0 or 1/2")
    elif spec.phase_offset != required_offset(t, spec.M, kl):
        v.append("phase_offset_mismatch: offset inconsistent with type parity rule")

    n_palindrome_full = all(nl[p - 1 - a] == nl[a] for a in range(p))
    k_palindrome_full = all(kl[p - 2 - a] == kl[a] for a in range(p - 1))
    # palindromes through the fixed first block: n_{p-a+2} = n_a, k_{p-a+1} = k_a
    n_palindrome_tail = all(nl[p - a] == nl[a] for a in range(1, p))
    k_palindrome_tail = all(kl[p - 1 - a] == kl[a] for a in range(1, p - 1))

    if t == TYPE_GL_INNER:
        if sk >= spec.M:
            v.append("k_sum_bound: sum(k) < M is required")

    elif t == TYPE_SOSP_I:
        if sk >= spec.M:
            v.append("k_sum_bound: sum(k) < M is required")
        if not n_palindrome_full:
            v.append("n_palindrome: n_{p-a+1} = n_a is required")
        if not k_palindrome_full:
            v.append("k_palindrome: k_{p-a} = k_a is required")
        if spec.family == "sp" and p % 2 == 1 and nl[(p - 1) // 2] % 2:
            v.append("sp_middle_even: odd p requires even middle block for sp")

    elif t == TYPE_SOSP_II:
        if spec.M % 2:
            v.append("M_even: type sosp_II requires even M")
        if p % 2:
            v.append("p_even: type sosp_II requires even p")
        if sk + kl[0] != spec.M:
            v.append("k_sum_exact: sum(k) + k_1 = M is required")
        if not n_palindrome_tail:
            v.append("n_palindrome_tail: n_{p-a+2} = n_a (a >= 2) is required")
        if not k_palindrome_tail:
            v.append("k_palindrome_tail: k_{p-a+1} = k_a (2 <= a <= p-1) is required")
        if spec.family == "sp" and p % 2 == 0:
            s_mid = p // 2  # 0-based index of the -1 block
            if nl[0] % 2 or nl[s_mid] % 2:
                v.append("sp_fixed_even: blocks carrying the K form must be even for sp")

    elif t == TYPE_GL_OUTER_II:
        if spec.M % 2:
            v.append("M_even: outer gradations require even M")
            return v
        if sk >= spec.N:
            v.append("k_sum_bound: sum(k) < N = M/2 is required")
        if not n_palindrome_full:
            v.append("n_palindrome: n_{p-a+1} = n_a is required")
        if not k_palindrome_full:
            v.append("k_palindrome: k_{p-a} = k_a is required")
        if spec.n % 2:
            v.append("n_even: B = K_n requires even n")

    elif t == TYPE_GL_OUTER_III:
        if spec.M % 2:
            v.append("M_even: outer gradations require even M")
            return v
        if sk + kl[0] != spec.N:
            v.append("k_sum_exact: sum(k) + k_1 = N = M/2 is required")
        if not n_palindrome_tail:
            v.append("n_palindrome_tail: n_{p-a+2} = n_a (a >= 2) is required")
        if not k_palindrome_tail:
            v.append("k_palindrome_tail: k_{p-a+1} = k_a (2 <= a <= p-1) is required")
        if (spec.n - nl[0]) % 2:
            v.append("k_block_even: n - n_1 must be even for B = diag(J, K)")
        if p % 2 == 0 and nl[p // 2] % 2:
            v.append("middle_even: even p requires an even self-paired block")

    return v


def check_valid(spec) -> None:
    violations = validate_spec(spec)
    if violations:
        raise SpecError("; ".join(violations))


def compute_m(spec: GradationSpec) -> tuple[int, ...]:
    """The decreasing exponent sequence m_1 > ... > m_p.

    m_alpha = sum(k_alpha..k_{p-1}) + m_p with the base m_p fixed per type;
    for gl_inner any base gives the same automorphism, so 1 is used.
    """
    check_valid(spec)
    t = spec.gradation_type
    kl = spec.k_list
    sk = sum(kl)
    if t == TYPE_GL_INNER:
        mp = 1
    elif t == TYPE_SOSP_I:
        base = spec.M - sk
        mp = base // 2 if base % 2 == 0 else (base + 1) // 2
    elif t == TYPE_SOSP_II:
        mp = kl[0]
    elif t == TYPE_GL_OUTER_II:
        base = spec.N - sk
        mp = base // 2 if base % 2 == 0 else (base + 1) // 2
    else:  # TYPE_GL_OUTER_III
        mp = kl[0]
    tails = [sum(kl[a:]) + mp for a in range(len(kl))]
    return tuple(tails + [mp])


def outer_structure(spec: GradationSpec) -> np.ndarray:
    """The B matrix of an outer type: K_n, or diag(J_{n_1}, K_{n-n_1})."""
    if spec.gradation_type == TYPE_GL_OUTER_II:
        return symplectic_identity(spec.n)
    if spec.gradation_type == TYPE_GL_OUTER_III:
        n1 = spec.n_list[0]
        b = np.zeros((spec.n, spec.n), dtype=complex)
        b[:n1, :n1] = skew_identity(n1)
        b[n1:, n1:] = symplectic_identity(spec.n - n1)
        return b
    raise SpecError(f"{spec.gradation_type} is not an outer type")


def structure_for_spec(spec: GradationSpec) -> np.ndarray | None:
    """The global structure matrix tied to the spec's type (None for gl_inner)."""
    t = spec.gradation_type
    if t == TYPE_GL_INNER:
        return None
    if t in _OUTER_TYPES:
        return outer_structure(spec)
    kind = "J" if spec.family == "so" else "K"
    if t == TYPE_SOSP_I:
        return skew_identity(spec.n) if kind == "J" else symplectic_identity(spec.n)
    # sosp_II: block diagonal with the fixed first block split off
    n1 = spec.n_list[0]
    b = np.zeros((spec.n, spec.n), dtype=complex)
    if kind == "J":
        b[:n1, :n1] = skew_identity(n1)
        b[n1:, n1:] = skew_identity(spec.n - n1)
    else:
        b[:n1, :n1] = symplectic_identity(n1)
        b[n1:, n1:] = symplectic_identity(spec.n - n1)
    return b


def build_h(spec: GradationSpec) -> np.ndarray:
    """Diagonal generator h with mu_alpha = exp(2 pi i (m_alpha + offset)/M).

    For the so/sp and outer types h is rescaled by a unit-modulus constant so
    that b_transpose(h, B) @ h = I exactly; the rescaling does not change the
    generated automorphism since conjugation and the outer twist are both
    insensitive to scaling h.
    """
    check_valid(spec)
    m = compute_m(spec)
    phases = [(mv + spec.phase_offset) / spec.M for mv in m]
    diag = np.concatenate(
        [np.full(na, np.exp(2j * np.pi * ph)) for na, ph in zip(spec.n_list, phases)]
    )
    h = np.diag(diag)
    b = structure_for_spec(spec)
    if b is not None:
        scale = (b_transpose(h, b) @ h)[0, 0]
        h = h / np.sqrt(scale)
    return h


@dataclass(frozen=True)
class Automorphism:
    """Finite-order automorphism generating a gradation.

    Inner: x -> h x h^-1.  Outer: x -> -h (^B x) h^-1.
    """

    kind: str  # "inner" | "outer"
    h: np.ndarray
    order: int
    B: np.ndarray | None = None

    @property
    def h_diag(self) -> np.ndarray:
        return np.diagonal(self.h)


def build_automorphism(spec) -> Automorphism:
    if isinstance(spec, TrivialSpec):
        return Automorphism(kind="inner", h=identity(spec.n), order=spec.M)
    check_valid(spec)
    h = build_h(spec)
    if spec.gradation_type in _OUTER_TYPES:
        return Automorphism(kind="outer", h=h, order=spec.M, B=outer_structure(spec))
    return Automorphism(kind="inner", h=h, order=spec.M)


def apply_automorphism(aut: Automorphism, x) -> np.ndarray:
    x = as_complex(x)
    n = aut.h.shape[0]
    if x.shape[-2:] != (n, n):
        raise ShapeMismatchError(f"expected trailing shape {(n, n)}, got {x.shape}")
    d = aut.h_diag
    ratio = d[:, None] / d[None, :]
    if aut.kind == "inner":
        return ratio * x
    return -ratio * b_transpose(x, aut.B)


def grading_component(x, k: int, aut: Automorphism) -> np.ndarray:
    """Projection onto the residue-k subspace by the discrete Fourier sum
    P_k(x) = (1/M) sum_j exp(-2 pi i j k / M) A^j(x)."""
    x = as_complex(x)
    M = aut.order
    acc = np.zeros_like(x)
    power = x
    for j in range(M):
        acc = acc + np.exp(-2j * np.pi * j * k / M) * power
        power = apply_automorphism(aut, power)
    return acc / M


def grading_support(x, aut: Automorphism, tol: float = DEFAULT_TOL) -> list[int]:
    """Residues k with a nonzero component of x, by projector sweep."""
    return [k for k in range(aut.order) if max_abs(grading_component(x, k, aut)) > tol]


@dataclass(frozen=True)
class GradingIndexTable:
    """Block grading indices.

    Inner types carry a single residue per block; outer types carry the
    pair (low, high) with low in [0, N) and high = low + N in [N, 2N), the
    two being distinguished by the symmetry of the block under ^B: for
    alpha <= beta the condition x = -(^B x) selects the low index and
    x = +(^B x) the high one, with the roles swapped for alpha > beta.
    """

    M: int
    outer: bool
    entries: tuple  # [p][p] ints (inner) or (low, high) pairs (outer)
    N: int | None = None

    def residue(self, a: int, b: int) -> int:
        if self.outer:
            raise ValueError("outer tables carry index pairs; use pair()/selected()")
        return self.entries[a][b]

    def pair(self, a: int, b: int) -> tuple[int, int]:
        if not self.outer:
            raise ValueError("inner tables carry single residues; use residue()")
        return self.entries[a][b]

    def selected(self, a: int, b: int, sign: int) -> int:
        """Index selected by the block symmetry x = sign * (^B x)."""
        low, high = self.pair(a, b)
        if a <= b:
            return low if sign == -1 else high
        return high if sign == -1 else low


def block_index_table(spec: GradationSpec) -> GradingIndexTable:
    check_valid(spec)
    p = spec.p
    kl = spec.k_list
    outer = spec.gradation_type in _OUTER_TYPES
    modulus = spec.M

    def base_index(a: int, b: int) -> int:
        if a == b:
            return 0
        if a < b:
            return sum(kl[a:b]) % modulus
        return (-sum(kl[b:a])) % modulus

    if not outer:
        entries = tuple(tuple(base_index(a, b) for b in range(p)) for a in range(p))
        return GradingIndexTable(M=modulus, outer=False, entries=entries)

    N = spec.N
    rows = []
    for a in range(p):
        row = []
        for b in range(p):
            base = base_index(a, b)
            member = base if base < N else (base + N) % modulus
            row.append((member, member + N))
        rows.append(tuple(row))
    return GradingIndexTable(M=modulus, outer=True, entries=tuple(rows), N=N)


def _compositions(total: int, parts: int):
    """Ordered compositions of `total` into `parts` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _k_candidates(parts: int, bound: int):
    """Positive integer tuples of given length with sum <= bound."""
    if parts == 0:
        if bound >= 0:
            yield ()
        return
    for first in range(1, bound - parts + 2):
        for rest in _k_candidates(parts - 1, bound - first):
            yield (first,) + rest


def enumerate_specs(family: str, n: int, M: int, cap: int = DEFAULT_ENUM_CAP) -> list:
    """All valid specs for the family at size n and order M, deduplicated.

    The trivial gradation is included whenever it is itself valid.  Inner
    gl specs appear once per (n_list, k_list) since the exponent base is
    canonical.  Output is sorted by (type, p, n_list, k_list).
    """
    if family not in ("gl", "sl", "so", "sp"):
        raise ValueError(f"unknown family {family!r}")
    types = _GL_TYPES if family in ("gl", "sl") else _SOSP_TYPES
    found: list[GradationSpec] = []
    candidates = 0
    for t in types:
        if t in _OUTER_TYPES and M % 2:
            continue
        if t in _OUTER_TYPES:
            bound = M // 2
        elif t == TYPE_SOSP_II:
            bound = M
        else:
            bound = M - 1
        for p in range(2, n + 1):
            for nl in _compositions(n, p):
                for klc in _k_candidates(p - 1, bound):
                    candidates += 1
                    if candidates > 200 * cap:
                        raise EnumerationCapError(
                            f"enumeration candidate space exceeds cap of {cap} specs"
                        )
                    cand = make_spec(family, t, M, nl, klc)
                    if not validate_spec(cand):
                        found.append(cand)
                        if len(found) > cap:
                            raise EnumerationCapError(
                                f"enumeration exceeded cap of {cap} specs"
                            )
    type_rank = {t: i for i, t in enumerate(GRADATION_TYPES)}
    found.sort(key=lambda s: (type_rank[s.gradation_type], s.p, s.n_list, s.k_list))
    out: list = []
    trivial = TrivialSpec(family=family, n=n, M=M)
    if not validate_spec(trivial):
        out.append(trivial)
    out.extend(found)
    return out


def minimal_grade(spec) -> int:
    """Smallest positive grading index carried by any block; this is the
    largest admissible L for Toda data on the gradation."""
    if isinstance(spec, TrivialSpec):
        return spec.M
    table = block_index_table(spec)
    values = []
    for a in range(spec.p):
        for b in range(spec.p):
            if table.outer:
                values.extend(table.pair(a, b))
            else:
                values.append(table.residue(a, b))
    positive = [v % spec.M for v in values if v % spec.M > 0]
    return min(positive) if positive else spec.M
