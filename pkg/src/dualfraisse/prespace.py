"""The reserved symbol 𝔯: pre-space checks, quotients, and two model systems.

The interval system approximates [0, 1] by dyadic intervals; its levels are
𝔯-paths and the limit relation glues the two threads converging to each
dyadic rational.  The Cantor system uses the middle-thirds cylinders, which
never touch, so its levels have no 𝔯-edges.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .core import RESERVED, FiniteStructure, SurjectiveMap
from .corpus import r_graph
from .epi import induced_structure, is_epimorphism
from .limits import InverseSystem
from .report import format_block

Interval = tuple[Fraction, Fraction]


class NotPrespace(ValueError):
    pass


@dataclass(frozen=True)
class RGraphView:
    structure: FiniteStructure

    def __post_init__(self):
        if not self.structure.sig.r_reserved:
            raise KeyError("structure has no reserved r")

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a, b in self.structure.r_edges() if a < b)

    @property
    def symmetric(self) -> bool:
        rel = self.structure.r_edges()
        return all((b, a) in rel for a, b in rel)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.structure.size))
        g.add_edges_from(self.edges)
        return g

    def related(self, a: int, b: int) -> bool:
        return a == b or (a, b) in self.structure.r_edges()


# ---------------------------------------------------------------------------
# pre-spaces


@dataclass(frozen=True)
class PrespaceReport:
    symmetric: bool
    transitive: bool
    classes: tuple[tuple[int, ...], ...] | None
    failure: tuple[int, int, int] | None = None

    @property
    def is_prespace(self) -> bool:
        return self.symmetric and self.transitive

    def __str__(self) -> str:
        out = {"symmetric": self.symmetric, "transitive": self.transitive,
               "prespace": self.is_prespace}
        if self.classes is not None:
            out["classes"] = " ".join("{" + ",".join(map(str, c)) + "}" for c in self.classes)
        if self.failure is not None:
            a, b, c = self.failure
            out["failure"] = f"{a}~{b} and {b}~{c} but not {a}~{c}"
        return format_block(out)


def check_prespace(s: FiniteStructure) -> PrespaceReport:
    view = RGraphView(s)
    for a in range(s.size):
        for b in range(s.size):
            if not view.related(a, b):
                continue
            for c in range(s.size):
                if view.related(b, c) and not view.related(a, c):
                    return PrespaceReport(view.symmetric, False, None, (a, b, c))
    classes = sorted(tuple(sorted(c)) for c in nx.connected_components(view.graph()))
    return PrespaceReport(view.symmetric, True, tuple(classes))


def quotient_by_r(s: FiniteStructure) -> tuple[FiniteStructure, SurjectiveMap]:
    """Collapse the 𝔯-classes; the result drops 𝔯 and keeps the induced rest."""
    rep = check_prespace(s)
    if not rep.is_prespace:
        raise NotPrespace("r is not transitive here; run check_prespace for the failing triple")
    table = [0] * s.size
    for i, cls in enumerate(rep.classes):
        for x in cls:
            table[x] = i
    q = SurjectiveMap(tuple(table), len(rep.classes))
    rest = FiniteStructure(s.sig.without(RESERVED), s.size,
                           tuple(r for sym, r in s.items() if sym.name != RESERVED))
    return induced_structure(rest, q), q


# ---------------------------------------------------------------------------
# regular closed subsets of [0, 1] that are finite unions of intervals


def rc_normalize(parts: Sequence[Interval]) -> tuple[Interval, ...]:
    """Closure of the interior: drop degenerate pieces, merge touching ones."""
    out: list[list[Fraction]] = []
    for lo, hi in sorted(p for p in parts if p[0] < p[1]):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def rc_join(*sets: Sequence[Interval]) -> tuple[Interval, ...]:
    return rc_normalize([p for s in sets for p in s])


def rc_meet(F1: Sequence[Interval], F2: Sequence[Interval]) -> tuple[Interval, ...]:
    """``cl(int(F1 ∩ F2))``."""
    return rc_normalize([(max(a, c), min(b, d)) for a, b in F1 for c, d in F2])


def rc_complement(F: Sequence[Interval], whole: Interval = (Fraction(0), Fraction(1))) -> tuple[Interval, ...]:
    gaps = []
    cur = whole[0]
    for lo, hi in rc_normalize(F):
        gaps.append((cur, lo))
        cur = hi
    gaps.append((cur, whole[1]))
    return rc_normalize(gaps)


def intersects(p: Interval, q: Interval) -> bool:
    return max(p[0], q[0]) <= min(p[1], q[1])


# ---------------------------------------------------------------------------
# levels


def _touching_pairs(atoms: Sequence[Interval]) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(atoms)) for j in range(i + 1, len(atoms))
            if intersects(atoms[i], atoms[j])]


@dataclass(frozen=True)
class DyadicLevel:
    n: int
    atoms: tuple[Interval, ...] = field(init=False)
    r_edges: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        step = Fraction(1, 2 ** self.n)
        atoms = tuple((k * step, (k + 1) * step) for k in range(2 ** self.n))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "r_edges", tuple(_touching_pairs(atoms)))

    @property
    def mesh(self) -> Fraction:
        return max(hi - lo for lo, hi in self.atoms)

    def structure(self) -> FiniteStructure:
        return r_graph(len(self.atoms), self.r_edges)


@dataclass(frozen=True)
class CantorLevel:
    """Middle-thirds cylinders ``C_w`` for bit strings ``w`` of length ``n``."""

    n: int
    atoms: tuple[Interval, ...] = field(init=False)
    r_edges: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        width = Fraction(1, 3 ** self.n)
        atoms = []
        for k in range(2 ** self.n):
            lo = sum((Fraction(2, 3 ** (i + 1)) for i in range(self.n)
                      if k >> (self.n - 1 - i) & 1), Fraction(0))
            atoms.append((lo, lo + width))
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "r_edges", tuple(_touching_pairs(atoms)))

    @property
    def mesh(self) -> Fraction:
        return max(hi - lo for lo, hi in self.atoms)

    def structure(self) -> FiniteStructure:
        return r_graph(len(self.atoms), self.r_edges)


def _halving_bond(n: int) -> SurjectiveMap:
    return SurjectiveMap(tuple(k // 2 for k in range(2 ** (n + 1))), 2 ** n)


def _algebra_log(prev: DyadicLevel | None, L: DyadicLevel, reflection: bool) -> list[str]:
    """Check the regular-closed identities the level relies on and describe them."""
    unit = ((Fraction(0), Fraction(1)),)
    atoms = [(a,) for a in L.atoms]
    if rc_join(*atoms) != unit:
        raise AssertionError(f"level {L.n}: atoms do not join to [0,1]")
    for k, a in enumerate(atoms):
        others = rc_join(*(b for j, b in enumerate(atoms) if j != k))
        if rc_complement(a) != others:
            raise AssertionError(f"level {L.n}: complement of atom {k} is not the join of the rest")
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            if rc_meet(atoms[i], atoms[j]):
                raise AssertionError(f"level {L.n}: atoms {i} and {j} overlap")
    lines = [f"level {L.n}: {len(atoms)} atoms of width {L.mesh}, join [0,1], "
             f"complements are joins of the other atoms, pairwise meets empty"]
    if L.r_edges:
        k, j = L.r_edges[0]
        lines.append(f"level {L.n}: adjacent atoms meet only in an endpoint "
                     f"(atoms {k},{j} share {L.atoms[k][1]}); r joins them, {len(L.r_edges)} edges")
    if prev is not None:
        for k, a in enumerate(prev.atoms):
            if rc_join((L.atoms[2 * k],), (L.atoms[2 * k + 1],)) != (a,):
                raise AssertionError(f"level {L.n}: atom {k} of level {prev.n} is not split in two")
        lines.append(f"level {L.n}: atom k of level {prev.n} is the join of atoms 2k, 2k+1")
    if reflection:
        flip = tuple(len(atoms) - 1 - k for k in range(len(atoms)))
        for k, (lo, hi) in enumerate(L.atoms):
            if L.atoms[flip[k]] != (1 - hi, 1 - lo):
                raise AssertionError(f"level {L.n}: reflection does not permute atoms")
        S = L.structure()
        if not is_epimorphism(SurjectiveMap(flip, len(flip)), S, S):
            raise AssertionError(f"level {L.n}: reflection is not an automorphism")
        lines.append(f"level {L.n}: x -> 1-x permutes the atoms and is an automorphism of the level")
    return lines


def build_interval_system(depth: int, reflection: bool = False) -> InverseSystem:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    levels, bonds, log = [], [], []
    prev = None
    for n in range(1, depth + 1):
        L = DyadicLevel(n)
        log.extend(_algebra_log(prev, L, reflection))
        levels.append(L.structure())
        if prev is not None:
            bond = _halving_bond(n - 1)
            if not is_epimorphism(bond, levels[-1], levels[-2]):
                raise AssertionError(f"bond {n - 1} is not an epimorphism")
            bonds.append(bond)
            log.append(f"bond {n - 1}: k -> k//2 from level {n} to level {n - 1}, epimorphism checked")
        prev = L
    return InverseSystem(levels, bonds, log)


def build_cantor_system(depth: int) -> InverseSystem:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    levels, bonds, log = [], [], []
    for n in range(1, depth + 1):
        L = CantorLevel(n)
        log.append(f"level {n}: {len(L.atoms)} cylinders of width {L.mesh}, {len(L.r_edges)} edges")
        levels.append(L.structure())
        if n > 1:
            bond = _halving_bond(n - 1)
            if not is_epimorphism(bond, levels[-1], levels[-2]):
                raise AssertionError(f"bond {n - 1} is not an epimorphism")
            bonds.append(bond)
            log.append(f"bond {n - 1}: drop the last bit, epimorphism checked")
    return InverseSystem(levels, bonds, log)


# ---------------------------------------------------------------------------
# limit diagnostics


@dataclass
class LimitQuotientReport:
    levels: list[dict]
    thread_pairs: int
    related_pairs: list[tuple[int, int]]
    classes: list[tuple[int, ...]]
    depth: int
    mesh: list[Fraction] | None = None
    symmetric: bool = True

    @property
    def max_class_size(self) -> int:
        return max((len(c) for c in self.classes), default=1)

    def fields(self) -> dict:
        top = self.levels[-1]
        out = {
            "depth": self.depth,
            "atoms": top["atoms"],
            "edges": top["edges"],
            "limit.thread_pairs": self.thread_pairs,
            "limit.related_pairs": len(self.related_pairs),
            "limit.classes": len(self.classes),
            "limit.max_class_size": self.max_class_size,
            "limit.symmetric": self.symmetric,
        }
        if self.mesh is not None:
            out["mesh"] = fraction_text(self.mesh[-1])
        for i, lv in enumerate(self.levels, start=1):
            for key, value in lv.items():
                out[f"level.{i:02d}.{key}"] = value
            if self.mesh is not None:
                out[f"level.{i:02d}.mesh"] = fraction_text(self.mesh[i - 1])
        w = self.depth
        for idx, (x, y) in enumerate(self.related_pairs, start=1):
            out[f"limit.pair.{idx:03d}"] = f"{x:0{w}b}|{y:0{w}b}"
        return out

    def __str__(self) -> str:
        return format_block(self.fields())


def fraction_text(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def limit_related(sys: InverseSystem, x: int, y: int, projections=None) -> bool:
    """Threads through top points ``x`` and ``y`` are 𝔯-or-equal at every level."""
    if projections is None:
        projections = [sys.projection(i, sys.depth - 1).table for i in range(sys.depth)]
    for i, p in enumerate(projections):
        a, b = p[x], p[y]
        if a != b and (a, b) not in sys.levels[i].r_edges():
            return False
    return True


def limit_quotient_report(sys: InverseSystem, mesh: Sequence[Fraction] | None = None) -> LimitQuotientReport:
    levels = []
    for L in sys.levels:
        g = RGraphView(L).graph()
        levels.append({
            "atoms": L.size,
            "edges": g.number_of_edges(),
            "components": nx.number_connected_components(g),
            "max_degree": max((d for _, d in g.degree()), default=0),
        })
    n = sys.top.size
    proj = [sys.projection(i, sys.depth - 1).table for i in range(sys.depth)]
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n) if limit_related(sys, x, y, proj)]
    symmetric = all(limit_related(sys, y, x, proj) for x, y in pairs)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(pairs)
    classes = sorted(tuple(sorted(c)) for c in nx.find_cliques(g))
    return LimitQuotientReport(levels, n * (n - 1) // 2, pairs, classes, sys.depth,
                               list(mesh) if mesh is not None else None, symmetric)


def interval_report(depth: int, reflection: bool = False) -> tuple[InverseSystem, LimitQuotientReport]:
    sys = build_interval_system(depth, reflection)
    mesh = [DyadicLevel(n).mesh for n in range(1, depth + 1)]
    return sys, limit_quotient_report(sys, mesh)


def cantor_report(depth: int) -> tuple[InverseSystem, LimitQuotientReport]:
    sys = build_cantor_system(depth)
    mesh = [CantorLevel(n).mesh for n in range(1, depth + 1)]
    return sys, limit_quotient_report(sys, mesh)
