"""Circle diagrams and the folding reductions of the cyclic Toda chain.

A chain with p nodes is drawn as a circle with the blocks Gamma_1..Gamma_p
on small disks (anticlockwise) and the pair C_{+-a} on the arc entering
node a.  Folding the circle across a diameter identifies nodes and arcs in
mirror pairs; objects on the axis are identified with themselves and pick
up a structure-matrix decoration.  Exactly three axis shapes exist:

* through two arcs        (even p = 2s)      -> ``even_arc_fixed``;
* through two nodes       (even p = 2s - 2)  -> ``even_node_fixed``;
* through a node and an arc (odd p = 2s - 1) -> ``odd_mixed`` (two
  equivalent placements).

Folding an unrestricted chain produces the constrained equation classes;
conversely the constrained systems built directly from a gradation spec
coincide with folded chains, which this module verifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lie_core import anti_transpose, as_complex, k_transpose, kind_transpose, max_abs
from .gradation import (
    TYPE_GL_INNER,
    TYPE_GL_OUTER_II,
    TYPE_GL_OUTER_III,
    TYPE_SOSP_I,
    TYPE_SOSP_II,
    GradationSpec,
    make_spec,
    validate_spec,
)
from . import toda
from .toda import (
    EQ_GENERAL_LINEAR,
    VARIANT_ARC_FIRST,
    VARIANT_NODE_FIRST,
    FieldState,
    TodaSystem,
    rhs_odd_fold,
)

PATTERN_EVEN_ARC_FIXED = "even_arc_fixed"
PATTERN_EVEN_NODE_FIXED = "even_node_fixed"
PATTERN_ODD_MIXED = "odd_mixed"

PATTERNS = (PATTERN_EVEN_ARC_FIXED, PATTERN_EVEN_NODE_FIXED, PATTERN_ODD_MIXED)

FOLD_FAMILIES = ("so", "sp", "gl_outer_II", "gl_outer_III")

# decorations per family read off the fixed objects of each figure
_EVEN_ARC_EPS = {"so": (-1, -1), "sp": (1, 1), "gl_outer_II": (-1, 1)}
_ODD_DECOR = {"so": ("J", -1), "sp": ("K", 1), "gl_outer_II": ("K", -1), "gl_outer_III": ("J", 1)}
_EVEN_NODE_B = {"so": ("J", "J"), "sp": ("K", "K"), "gl_outer_III": ("J", "K")}


class FoldError(ValueError):
    """Fold request incompatible with the chain."""


@dataclass(frozen=True)
class CircleDiagram:
    """Plain description of the labeled circle, mainly for export."""

    p: int

    def node_labels(self):
        return [f"Gamma_{i + 1}" for i in range(self.p)]

    def arc_labels(self):
        return [f"C_{a}" for a in range(self.p)]


@dataclass(frozen=True)
class FoldingMap:
    """A fold: node involution plus the fixed-point decorations."""

    pattern: str
    family: str
    p: int
    s: int
    sigma: tuple[int, ...]
    fixed_nodes: tuple[tuple[int, str], ...]   # (node, B kind)
    fixed_arcs: tuple[tuple[int, int], ...]    # (arc, epsilon)
    variant: str = VARIANT_ARC_FIRST

    def mirror_arc(self, a: int) -> int:
        return self.sigma[(a - 1) % self.p]

    def node_pairs(self):
        return [(i, self.sigma[i]) for i in range(self.p) if i < self.sigma[i]]

    def arc_pairs(self):
        return [(a, self.mirror_arc(a)) for a in range(self.p) if a < self.mirror_arc(a)]


def make_fold(p: int, pattern: str, family: str, variant: str = VARIANT_ARC_FIRST) -> FoldingMap:
    """The folding map of the given axis pattern for a p-node circle.

    ``family`` selects the decorations: signs epsilon on fixed arcs and
    J/K on fixed nodes, as carried by the orthogonal, symplectic and the
    two outer general-linear reductions.
    """
    if family not in FOLD_FAMILIES:
        raise FoldError(f"unknown fold family {family!r}")
    if pattern == PATTERN_EVEN_ARC_FIXED:
        if p % 2 or p < 2:
            raise FoldError("even_arc_fixed requires even p >= 2")
        if family == "gl_outer_III":
            raise FoldError("gl_outer_III folds fix nodes, not two arcs")
        s = p // 2
        sigma = tuple((p - 1 - i) % p for i in range(p))
        e0, es = _EVEN_ARC_EPS[family]
        return FoldingMap(
            pattern=pattern, family=family, p=p, s=s, sigma=sigma,
            fixed_nodes=(), fixed_arcs=((0, e0), (s, es)),
        )
    if pattern == PATTERN_EVEN_NODE_FIXED:
        if p % 2 or p < 2:
            raise FoldError("even_node_fixed requires even p >= 2")
        if family == "gl_outer_II":
            raise FoldError("gl_outer_II folds fix arcs, not two nodes")
        s = p // 2 + 1
        sigma = tuple((p - i) % p for i in range(p))
        b1, bs = _EVEN_NODE_B[family]
        return FoldingMap(
            pattern=pattern, family=family, p=p, s=s, sigma=sigma,
            fixed_nodes=((0, b1), (s - 1, bs)), fixed_arcs=(),
        )
    if pattern == PATTERN_ODD_MIXED:
        if p % 2 == 0 or p < 3:
            raise FoldError("odd_mixed requires odd p >= 3")
        s = (p + 1) // 2
        b_kind, eps = _ODD_DECOR[family]
        if variant == VARIANT_NODE_FIRST:
            sigma = tuple((p - i) % p for i in range(p))
            return FoldingMap(
                pattern=pattern, family=family, p=p, s=s, sigma=sigma,
                fixed_nodes=((0, b_kind),), fixed_arcs=((s, eps),),
                variant=VARIANT_NODE_FIRST,
            )
        sigma = tuple((p - 1 - i) % p for i in range(p))
        return FoldingMap(
            pattern=pattern, family=family, p=p, s=s, sigma=sigma,
            fixed_nodes=((s - 1, b_kind),), fixed_arcs=((0, eps),),
        )
    raise FoldError(f"unknown pattern {pattern!r}")


def _folded_spec(fmap: FoldingMap, spec: GradationSpec) -> GradationSpec:
    """Reinterpret the chain data (n, k, M) under the fold family."""
    nl, kl = spec.n_list, spec.k_list
    if fmap.family in ("so", "sp"):
        t = TYPE_SOSP_I if fmap.pattern in (PATTERN_EVEN_ARC_FIXED, PATTERN_ODD_MIXED) else TYPE_SOSP_II
        folded = make_spec(fmap.family, t, spec.M, nl, kl)
    elif fmap.family == "gl_outer_II":
        folded = make_spec("gl", TYPE_GL_OUTER_II, 2 * spec.M, nl, kl)
    else:
        folded = make_spec("gl", TYPE_GL_OUTER_III, 2 * spec.M, nl, kl)
    violations = validate_spec(folded)
    if violations:
        raise FoldError(
            "chain data does not close under the fold: " + "; ".join(violations)
        )
    return folded


def fold_constraints(fmap: FoldingMap, system: TodaSystem, tol: float = 1e-9) -> TodaSystem:
    """Restrict an unrestricted chain to the folded class of the map.

    The chain must carry the uniform grading (every k_alpha equal to L);
    its C blocks must already satisfy the fold symmetries, otherwise the
    fold is rejected.  The natural variant is used for each family: the
    odd gl_outer_III fold fixes a node first, all others fix the wrap arc.
    """
    if system.equation_class != EQ_GENERAL_LINEAR:
        raise FoldError("only general linear chains can be folded")
    spec = system.spec
    if not isinstance(spec, GradationSpec) or spec.gradation_type != TYPE_GL_INNER:
        raise FoldError("the chain must come from an inner gl gradation")
    if fmap.p != system.p:
        raise FoldError(f"fold is for p = {fmap.p}, system has p = {system.p}")
    if any(k != system.L for k in spec.k_list):
        raise FoldError("folding requires the uniform chain k_alpha = L")
    folded_spec = _folded_spec(fmap, spec)
    try:
        folded = toda.build_system(folded_spec, system.L, system.c_plus, system.c_minus, tol=tol)
    except toda.ConstraintViolationError as exc:
        raise FoldError(f"incompatible C blocks: {exc}") from exc
    expect_variant = fmap.variant if fmap.pattern == PATTERN_ODD_MIXED else ""
    if fmap.pattern == PATTERN_ODD_MIXED and folded.variant != expect_variant:
        raise FoldError(
            f"the {fmap.family} odd fold is natural in variant {folded.variant!r}; "
            f"relabel through the substitution to use {expect_variant!r}"
        )
    return folded


def verify_fold_invariance(fmap: FoldingMap, system: TodaSystem, state: FieldState,
                           steps: int = 10, step: float = 1e-3) -> float:
    """Evolve the unfolded chain from a fold-constrained state and return
    the maximal constraint violation over the grid.

    The continuum flow preserves the constraint set exactly, so the
    violation is pure scheme error and must shrink at second order in the
    step.
    """
    from . import solver

    folded = fold_constraints(fmap, system)
    full = toda.full_state(folded, state)
    engine = folded.engine
    grid = solver.Grid(0.0, steps * step, 0.0, steps * step, steps, steps)
    data = solver.constant_data(FieldState(gammas=full))
    history = solver.integrate(system, data, grid, solver.SolverConfig())
    worst = 0.0
    for j in range(history.completed_rows):
        for i in range(grid.n_minus + 1):
            blocks = [history.gammas[b][j, i] for b in range(system.p)]
            worst = max(worst, engine.gamma_residual(blocks))
    return worst


def odd_fold_equivalence(gammas, c_plus, c_minus, b_kind: str = "J") -> float:
    """Check the substitution relating the two odd-fold variants.

    Given data of the arc-first system (independent blocks Gamma_1..Gamma_s
    and arcs 0..s-1), the substitution Gamma_i -> ^B inv(Gamma_{s+1-i}),
    C_{+-a} -> ^B C_{+-(s-a)} produces node-first data whose equations are
    the B-transposed negatives of the original ones in reversed order.
    Returns the maximal deviation from that identity.
    """
    gammas = [as_complex(g) for g in gammas]
    c_plus = [as_complex(c) for c in c_plus]
    c_minus = [as_complex(c) for c in c_minus]
    s = len(gammas)
    if len(c_plus) != s or len(c_minus) != s:
        raise FoldError("arc-first data carries arcs 0..s-1")

    def t_node(x):
        return kind_transpose(x, b_kind)

    def t_arc(x):
        return anti_transpose(x) if b_kind == "J" else k_transpose(x)

    left = rhs_odd_fold(gammas, c_plus, c_minus, b_kind, VARIANT_ARC_FIRST)
    g2 = [t_node(np.linalg.inv(gammas[s - 1 - i])) for i in range(s)]
    cp2: list = [None] * (s + 1)
    cm2: list = [None] * (s + 1)
    for a in range(1, s + 1):
        cp2[a] = t_arc(c_plus[s - a])
        cm2[a] = t_arc(c_minus[s - a])
    right = rhs_odd_fold(g2, cp2, cm2, b_kind, VARIANT_NODE_FIRST)
    dev = 0.0
    for i in range(s):
        dev = max(dev, max_abs(right[i] + t_node(left[s - 1 - i])))
    return dev


def odd_fold_substitution(gammas, c_plus, c_minus, b_kind: str = "J"):
    """The substitution itself; applying it twice returns the input."""
    s = len(gammas)

    def t_node(x):
        return kind_transpose(x, b_kind)

    def t_arc(x):
        return anti_transpose(x) if b_kind == "J" else k_transpose(x)

    g2 = [t_node(np.linalg.inv(as_complex(gammas[s - 1 - i]))) for i in range(s)]
    cp2 = [t_arc(as_complex(c_plus[s - 1 - a])) for a in range(s)]
    cm2 = [t_arc(as_complex(c_minus[s - 1 - a])) for a in range(s)]
    return g2, cp2, cm2


def enumerate_axis_shapes(p: int) -> dict[tuple[int, int], int]:
    """Count reflection axes of the p-circle by (fixed nodes, fixed arcs).

    Nodes sit at integer positions, arc midpoints at half-integers; the
    axis through positions t and t + p/2 fixes whatever it passes through.
    """
    shapes: dict[tuple[int, int], int] = {}
    for j in range(p):
        t = j / 2.0
        nodes = 0
        arcs = 0
        for q in (t, t + p / 2.0):
            if abs(q - round(q)) < 1e-12:
                nodes += 1
            else:
                arcs += 1
        shapes[(nodes, arcs)] = shapes.get((nodes, arcs), 0) + 1
    return shapes


def shape_to_pattern(shape: tuple[int, int]) -> str:
    if shape == (0, 2):
        return PATTERN_EVEN_ARC_FIXED
    if shape == (2, 0):
        return PATTERN_EVEN_NODE_FIXED
    if shape == (1, 1):
        return PATTERN_ODD_MIXED
    raise FoldError(f"no fold pattern with fixed ({shape[0]} nodes, {shape[1]} arcs)")


def diagram_json(fmap: FoldingMap) -> dict:
    """Small JSON description of the folded circle for documentation."""
    diagram = CircleDiagram(p=fmap.p)
    return {
        "p": fmap.p,
        "pattern": fmap.pattern,
        "family": fmap.family,
        "nodes": diagram.node_labels(),
        "arcs": diagram.arc_labels(),
        "node_pairs": [list(pair) for pair in fmap.node_pairs()],
        "arc_pairs": [list(pair) for pair in fmap.arc_pairs()],
        "fixed_nodes": [[i, kind] for i, kind in fmap.fixed_nodes],
        "fixed_arcs": [[a, eps] for a, eps in fmap.fixed_arcs],
    }
