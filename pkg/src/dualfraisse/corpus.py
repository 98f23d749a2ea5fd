"""Small named structures and classes used by the demos, fixtures and tests."""

from __future__ import annotations

from .core import FiniteStructure, Kind, Signature, SymbolDecl
from .epi import automorphism_tables
from .fraisse import StructureClass, hp_closure
from .transforms import PermutationGroup, orbit_structure

R_SIGNATURE = Signature((SymbolDecl("r", 2, Kind.DIRECT),), True)


def r_graph(size: int, edges) -> FiniteStructure:
    """𝔯-graph from undirected off-diagonal edges."""
    pairs = set()
    for a, b in edges:
        if a == b:
            raise ValueError("r is reflexive implicitly; loops are not listed")
        pairs.update({(a, b), (b, a)})
    return FiniteStructure.build(R_SIGNATURE, size, {"r": pairs})


def point() -> FiniteStructure:
    return r_graph(1, [])


def path(n: int) -> FiniteStructure:
    return r_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> FiniteStructure:
    if n < 3:
        raise ValueError("cycles need at least 3 points")
    return r_graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_class(max_n: int) -> StructureClass:
    """Plain 𝔯-paths with 1..max_n points (not closed under quotients)."""
    return StructureClass.from_structures([path(k) for k in range(1, max_n + 1)])


def decorated_path(n: int) -> FiniteStructure:
    """The ``n``-path carrying, besides 𝔯, the orbit relations of its own automorphism group.

    The orbit relations pin every epimorphism out of it down to the path's
    symmetry, so the structure is projectively ultra-homogeneous.
    """
    base = path(n)
    G = PermutationGroup(n, frozenset(automorphism_tables(base)))
    edges = [(a, b) for a, b in base.r_edges() if a < b]
    return orbit_structure(G, n, r_edges=edges)


def decorated_path_class(n: int) -> StructureClass:
    """All quotients of :func:`decorated_path`: an age with HP, JSP and PAP."""
    return hp_closure([decorated_path(n)])
