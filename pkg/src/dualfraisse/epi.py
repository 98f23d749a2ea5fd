"""Epimorphisms between finite structures.

A surjection ``f: A -> B`` is an epimorphism when

* for a direct symbol ``r``: the injective tuples of ``B`` in ``r`` are exactly
  the injective images ``f∘α`` of tuples ``α`` in ``r^A``;
* for a dual symbol ``R``: a surjective labeling ``β`` of ``B`` is in ``R^B``
  exactly when its pullback ``β∘f`` is in ``R^A``.

:func:`is_epimorphism` checks this through image sets.  The literal
quantification over every ``β`` lives in :func:`is_epimorphism_naive` and is
kept separate on purpose; it is the oracle the search is tested against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import kernels
from .core import (
    FiniteStructure,
    SurjectiveMap,
    injective_tuples,
    is_injective,
    surjections,
    surjective_labelings,
)


class SignatureMismatch(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Epimorphism:
    map: SurjectiveMap
    source: FiniteStructure = field(repr=False)
    target: FiniteStructure = field(repr=False)

    @property
    def table(self) -> tuple[int, ...]:
        return self.map.table

    def then(self, g: Epimorphism) -> Epimorphism:
        """``g ∘ self``."""
        return Epimorphism(self.map.then(g.map), self.source, g.target)

    def __str__(self) -> str:
        return str(self.map)


def _as_map(f, target_size: int | None = None) -> SurjectiveMap:
    if isinstance(f, Epimorphism):
        return f.map
    if isinstance(f, SurjectiveMap):
        return f
    return SurjectiveMap.of(tuple(f), target_size)


def _check_pair(A: FiniteStructure, B: FiniteStructure) -> None:
    if A.sig != B.sig:
        raise SignatureMismatch("structures have different signatures")


def _check_map(f: SurjectiveMap, A: FiniteStructure, B: FiniteStructure) -> None:
    _check_pair(A, B)
    if f.source_size != A.size or f.target_size != B.size:
        raise SizeMismatch(
            f"map {f.source_size}->{f.target_size} does not fit structures {A.size}->{B.size}")


def pushforward(e: Sequence[int], table: Sequence[int], m: int) -> tuple[int, ...] | None:
    """The labeling ``β`` of the target with ``β∘f = e``, or None if ``e`` does not factor."""
    out = [-1] * m
    for x, lab in enumerate(e):
        b = table[x]
        if out[b] < 0:
            out[b] = lab
        elif out[b] != lab:
            return None
    return tuple(out)


def _direct_image(tuples: Iterable[tuple], table: Sequence[int]) -> set:
    image = set()
    for t in tuples:
        img = tuple(table[a] for a in t)
        if is_injective(img):
            image.add(img)
    return image


def _dual_image(labelings: Iterable[tuple], table: Sequence[int], m: int) -> set:
    image = set()
    for e in labelings:
        beta = pushforward(e, table, m)
        if beta is not None:
            image.add(beta)
    return image


def is_epimorphism(f, A: FiniteStructure, B: FiniteStructure) -> bool:
    f = _as_map(f, B.size)
    _check_map(f, A, B)
    for sym, tuples in A.items():
        if sym.is_dual:
            if _dual_image(tuples, f.table, B.size) != B[sym.name]:
                return False
        elif _direct_image(tuples, f.table) != B[sym.name]:
            return False
    return True


def is_epimorphism_naive(f, A: FiniteStructure, B: FiniteStructure) -> bool:
    """Literal reading of the definition; slow, used only as an oracle."""
    f = _as_map(f, B.size)
    _check_map(f, A, B)
    table = f.table
    for sym, tuples in A.items():
        target = B[sym.name]
        if sym.is_dual:
            for beta in surjective_labelings(B.size, sym.arity):
                pulled = tuple(beta[table[x]] for x in range(A.size))
                if (beta in target) != (pulled in tuples):
                    return False
            if any(not _is_labeling(b, B.size, sym.arity) for b in target):
                return False
        else:
            for beta in injective_tuples(B.size, sym.arity):
                witnessed = any(tuple(table[a] for a in alpha) == beta for alpha in tuples)
                if (beta in target) != witnessed:
                    return False
            if any(len(b) != sym.arity or not is_injective(b) for b in target):
                return False
    return True


def _is_labeling(b, size, arity) -> bool:
    return len(b) == size and set(b) == set(range(arity))


def induced_structure(K: FiniteStructure, f) -> FiniteStructure:
    """The unique structure on the target of ``f`` that makes ``f`` an epimorphism."""
    f = _as_map(f)
    if f.source_size != K.size:
        raise SizeMismatch(f"map has {f.source_size} points, structure has {K.size}")
    rels = []
    for sym, tuples in K.items():
        if sym.is_dual:
            rels.append(frozenset(_dual_image(tuples, f.table, f.target_size)))
        else:
            rels.append(frozenset(_direct_image(tuples, f.table)))
    return FiniteStructure(K.sig, f.target_size, tuple(rels))


# ---------------------------------------------------------------------------
# search


def map_problem(A: FiniteStructure, B: FiniteStructure, allowed=None,
                injective: bool = False) -> kernels.MapProblem:
    _check_pair(A, B)
    direct, dual = [], []
    for sym, tuples in A.items():
        entry = (sym.arity, tuples, B[sym.name])
        (dual if sym.is_dual else direct).append(entry)
    return kernels.MapProblem(A.size, B.size, direct, dual, allowed, injective)


def _search(A, B, allowed=None, injective=False, limit=0) -> list[Epimorphism]:
    tables = kernels.search_maps(map_problem(A, B, allowed, injective), limit)
    return [Epimorphism(SurjectiveMap(t, B.size), A, B) for t in tables]


def enumerate_epimorphisms(A: FiniteStructure, B: FiniteStructure) -> list[Epimorphism]:
    """Every epimorphism ``A -> B``, lexicographic in the map table."""
    return _search(A, B)


def first_epimorphism(A: FiniteStructure, B: FiniteStructure) -> Epimorphism | None:
    found = _search(A, B, limit=1)
    return found[0] if found else None


def enumerate_epimorphisms_naive(A: FiniteStructure, B: FiniteStructure) -> list[SurjectiveMap]:
    """Definitional filter over all surjections ``|A| -> |B|``."""
    _check_pair(A, B)
    if B.size > A.size:
        return []
    return [f for f in surjections(A.size, B.size) if is_epimorphism_naive(f, A, B)]


def lifts(source: FiniteStructure, B: FiniteStructure, f, g, limit: int = 0) -> list[Epimorphism]:
    """Epimorphisms ``h: source -> B`` with ``f∘h = g``.

    ``f: B -> A`` and ``g: source -> A`` are given as maps.
    """
    f = _as_map(f)
    g = _as_map(g)
    if f.source_size != B.size or g.source_size != source.size:
        raise SizeMismatch("lift data do not fit the structures")
    if f.target_size != g.target_size:
        return []
    fibers = f.fibers()
    allowed = [fibers[g.table[x]] for x in range(source.size)]
    return _search(source, B, allowed=allowed, limit=limit)


def first_lift(source, B, f, g) -> Epimorphism | None:
    found = lifts(source, B, f, g, limit=1)
    return found[0] if found else None


def find_isomorphism(A: FiniteStructure, B: FiniteStructure) -> Epimorphism | None:
    """The lexicographically least bijective epimorphism, if any."""
    _check_pair(A, B)
    if A.size != B.size:
        return None
    found = _search(A, B, injective=True, limit=1)
    return found[0] if found else None


def automorphism_group(A: FiniteStructure) -> list[Epimorphism]:
    return _search(A, A, injective=True)


def automorphism_tables(A: FiniteStructure) -> set[tuple[int, ...]]:
    return {a.table for a in automorphism_group(A)}


def is_group(tables: set[tuple[int, ...]], n: int) -> bool:
    """Closure under composition and inverse, and contains the identity."""
    if tuple(range(n)) not in tables:
        return False
    for p in tables:
        inv = [0] * n
        for x, y in enumerate(p):
            inv[y] = x
        if tuple(inv) not in tables:
            return False
        for q in tables:
            if tuple(q[p[x]] for x in range(n)) not in tables:
                return False
    return True


# ---------------------------------------------------------------------------
# common refinement


@dataclass(frozen=True)
class Refinement:
    refined: FiniteStructure
    h: Epimorphism
    factor_f: Epimorphism
    factor_g: Epimorphism
    blocks: tuple[tuple[int, int], ...]


def common_refinement(K: FiniteStructure, f, g, A: FiniteStructure | None = None,
                      B: FiniteStructure | None = None) -> Refinement:
    """Refine two epimorphisms ``f: K -> A`` and ``g: K -> B`` through their fibers.

    The new points are the nonempty sets ``f⁻¹(a) ∩ g⁻¹(b)``, ordered by ``(a, b)``.
    Both ``f`` and ``g`` then factor through the inclusion map ``h``.
    """
    if isinstance(f, Epimorphism):
        A = f.target
    if isinstance(g, Epimorphism):
        B = g.target
    f = _as_map(f)
    g = _as_map(g)
    if f.source_size != K.size or g.source_size != K.size:
        raise SizeMismatch("both maps must start at K")
    A = A if A is not None else induced_structure(K, f)
    B = B if B is not None else induced_structure(K, g)
    if not is_epimorphism(f, K, A) or not is_epimorphism(g, K, B):
        raise ValueError("common_refinement needs two epimorphisms out of K")
    blocks = tuple(sorted({(f.table[x], g.table[x]) for x in range(K.size)}))
    index = {ab: i for i, ab in enumerate(blocks)}
    h = SurjectiveMap(tuple(index[(f.table[x], g.table[x])] for x in range(K.size)), len(blocks))
    refined = induced_structure(K, h)
    factor_f = SurjectiveMap(tuple(a for a, _ in blocks), A.size)
    factor_g = SurjectiveMap(tuple(b for _, b in blocks), B.size)
    return Refinement(
        refined,
        Epimorphism(h, K, refined),
        Epimorphism(factor_f, refined, A),
        Epimorphism(factor_g, refined, B),
        blocks,
    )


def all_structures(sig, size: int) -> Iterable[FiniteStructure]:
    """Every structure of the signature on ``size`` points.  Tiny inputs only."""
    choices = []
    for sym in sig.symbols:
        pool = (list(surjective_labelings(size, sym.arity)) if sym.is_dual
                else list(injective_tuples(size, sym.arity)))
        if sig.r_reserved and sym.name == "r":
            pairs = sorted({tuple(sorted(p)) for p in pool})
            subsets = []
            for mask in range(1 << len(pairs)):
                chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
                subsets.append(frozenset(t for a, b in chosen for t in ((a, b), (b, a))))
        else:
            subsets = [frozenset(pool[i] for i in range(len(pool)) if mask >> i & 1)
                       for mask in range(1 << len(pool))]
        choices.append(subsets)
    for rels in itertools.product(*choices):
        yield FiniteStructure(sig, size, rels)
