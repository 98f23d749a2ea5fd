"""Direct-to-dual encoding and orbit structures of finite permutation groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    FiniteStructure,
    Kind,
    ParseError,
    Signature,
    SymbolDecl,
    surjective_labelings,
)
from .epi import automorphism_tables, induced_structure
from .report import format_block

Perm = tuple[int, ...]


# ---------------------------------------------------------------------------
# dualization


@dataclass(frozen=True)
class DualizedSymbol:
    base: str
    f: tuple[int, ...]

    @property
    def k(self) -> int:
        return max(self.f) + 1

    @property
    def arity(self) -> int:
        return self.k + 1

    @property
    def name(self) -> str:
        return f"R_{self.base}_{self.k}_{''.join(map(str, self.f))}"


def dualized_symbols(base: str, n: int) -> list[DualizedSymbol]:
    """One symbol per surjection ``{0..n-1} -> {0..k-1}``, ``0 < k <= n``."""
    return [DualizedSymbol(base, f) for k in range(1, n + 1) for f in surjective_labelings(n, k)]


def dualize(M: FiniteStructure, s: str) -> FiniteStructure:
    """Replace the direct symbol ``s`` by dual symbols ``R_s^f``.

    A partition ``(Δ_0, ..., Δ_k)`` is in ``R_s^f`` when some tuple ``a`` of
    ``s`` has ``a_i`` in block ``Δ_f(i)`` for every ``i``.  The last block is
    slack and carries no witness.
    """
    if s not in M.sig:
        raise KeyError(f"no symbol {s!r}")
    decl = M.sig[s]
    if decl.kind is not Kind.DIRECT:
        raise ValueError(f"{s!r} is not a direct symbol")
    new_syms = dualized_symbols(s, decl.arity)
    sig = M.sig.without(s).extended(SymbolDecl(d.name, d.arity, Kind.DUAL) for d in new_syms)
    witnesses = M[s]
    interp = {sym.name: tuples for sym, tuples in M.items() if sym.name != s}
    for d in new_syms:
        holds = []
        for delta in surjective_labelings(M.size, d.arity):
            if any(all(delta[a[i]] == d.f[i] for i in range(decl.arity)) for a in witnesses):
                holds.append(delta)
        interp[d.name] = holds
    return FiniteStructure.build(sig, M.size, interp)


@dataclass(frozen=True)
class DualizationReport:
    symbol: str
    new_symbols: int
    aut_before: frozenset
    aut_after: frozenset

    @property
    def equal(self) -> bool:
        return self.aut_before == self.aut_after

    def __str__(self) -> str:
        return format_block({
            "symbol": self.symbol,
            "new_symbols": self.new_symbols,
            "aut_before": len(self.aut_before),
            "aut_after": len(self.aut_after),
            "equal": self.equal,
        })


def verify_dualization(M: FiniteStructure, s: str) -> DualizationReport:
    D = dualize(M, s)
    return DualizationReport(s, len(D.sig.symbols) - len(M.sig.symbols) + 1,
                             frozenset(automorphism_tables(M)), frozenset(automorphism_tables(D)))


# ---------------------------------------------------------------------------
# permutation groups


def compose_perm(p: Perm, q: Perm) -> Perm:
    """``p ∘ q``."""
    return tuple(p[x] for x in q)


def invert_perm(p: Perm) -> Perm:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def closure(degree: int, gens: Iterable[Sequence[int]]) -> frozenset:
    gens = [tuple(g) for g in gens]
    for g in gens:
        if sorted(g) != list(range(degree)):
            raise ValueError(f"{g} is not a permutation of {degree} points")
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = compose_perm(g, p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return frozenset(seen)


@dataclass(frozen=True)
class PermutationGroup:
    degree: int
    elements: frozenset

    def __post_init__(self):
        els = frozenset(tuple(p) for p in self.elements)
        object.__setattr__(self, "elements", els)
        if self.degree < 1:
            raise ValueError("degree must be positive")
        ident = tuple(range(self.degree))
        if ident not in els:
            raise ValueError("group must contain the identity")
        for p in els:
            if sorted(p) != list(ident):
                raise ValueError(f"{p} is not a permutation of {self.degree} points")
            if invert_perm(p) not in els:
                raise ValueError("group is not closed under inverses")
            for q in els:
                if compose_perm(p, q) not in els:
                    raise ValueError("group is not closed under composition")

    @classmethod
    def generated(cls, degree: int, gens: Iterable[Sequence[int]]) -> PermutationGroup:
        return cls(degree, closure(degree, gens))

    @classmethod
    def symmetric(cls, n: int) -> PermutationGroup:
        return cls(n, frozenset(itertools.permutations(range(n))))

    @classmethod
    def cyclic(cls, n: int) -> PermutationGroup:
        return cls.generated(n, [tuple((x + 1) % n for x in range(n))])

    @classmethod
    def trivial(cls, n: int) -> PermutationGroup:
        return cls(n, frozenset([tuple(range(n))]))

    @property
    def order(self) -> int:
        return len(self.elements)

    def sorted(self) -> list[Perm]:
        return sorted(self.elements)


def subgroups(n: int) -> list[PermutationGroup]:
    """Every subgroup of the symmetric group on ``n`` points.

    Joins of subgroups with cyclic subgroups, iterated to a fixed point.
    """
    cyclic = {closure(n, [p]) for p in itertools.permutations(range(n))}
    found = set(cyclic)
    frontier = list(cyclic)
    gens_of = {H: _generators(n, H) for H in found}
    while frontier:
        nxt = []
        for H in frontier:
            for C in cyclic:
                if C <= H:
                    continue
                g = min(C - {tuple(range(n))}, default=None)
                J = closure(n, gens_of[H] + [g])
                if J not in found:
                    found.add(J)
                    gens_of[J] = gens_of[H] + [g]
                    nxt.append(J)
        frontier = nxt
    groups = sorted(found, key=lambda H: (len(H), sorted(H)))
    return [PermutationGroup(n, H) for H in groups]


def _generators(n: int, H: frozenset) -> list[Perm]:
    gens: list[Perm] = []
    span = frozenset([tuple(range(n))])
    for p in sorted(H):
        if p not in span:
            gens.append(p)
            span = closure(n, gens)
    return gens


# ---------------------------------------------------------------------------
# orbit structures


def act(g: Perm, e: Sequence[int]) -> tuple[int, ...]:
    """``g·e = e∘g⁻¹``: the point ``g(x)`` receives the label of ``x``."""
    out = [0] * len(e)
    for x, lab in enumerate(e):
        out[g[x]] = lab
    return tuple(out)


def labeling_orbits(G: PermutationGroup, arity: int) -> list[list[tuple[int, ...]]]:
    """Orbits of ``G`` on surjective labelings, sorted by least member."""
    seen = set()
    orbits = []
    for e in surjective_labelings(G.degree, arity):
        if e in seen:
            continue
        orbit = sorted({act(g, e) for g in G.elements})
        seen.update(orbit)
        orbits.append(orbit)
    orbits.sort(key=lambda o: o[0])
    return orbits


def orbit_symbol(arity: int, index: int) -> str:
    return f"O_{arity}_{index}"


def orbit_structure(G: PermutationGroup, max_arity: int | None = None,
                    r_edges: Iterable[tuple[int, int]] | None = None) -> FiniteStructure:
    """Purely dual structure on ``G``'s points: one symbol per orbit per arity.

    With ``r_edges`` the reserved ``r`` is added, which is how a graph is
    decorated by the orbits of one of its automorphism groups.
    """
    if G.degree < 2:
        raise ValueError("orbit structures need degree >= 2")
    if max_arity is None:
        max_arity = G.degree
    if not 2 <= max_arity <= G.degree:
        raise ValueError(f"max_arity must lie in 2..{G.degree}")
    decls = []
    interp = {}
    if r_edges is not None:
        decls.append(SymbolDecl("r", 2, Kind.DIRECT))
        interp["r"] = {e for a, b in r_edges for e in ((a, b), (b, a))}
    for n in range(2, max_arity + 1):
        for i, orbit in enumerate(labeling_orbits(G, n)):
            name = orbit_symbol(n, i)
            decls.append(SymbolDecl(name, n, Kind.DUAL))
            interp[name] = orbit
    return FiniteStructure.build(Signature(tuple(decls), r_edges is not None), G.degree, interp)


@dataclass(frozen=True)
class OrbitReport:
    degree: int
    max_arity: int
    group_order: int
    aut_order: int
    equal: bool

    @property
    def exact_by_construction(self) -> bool:
        return self.max_arity == self.degree

    def __str__(self) -> str:
        return format_block({
            "degree": self.degree,
            "max_arity": self.max_arity,
            "group_order": self.group_order,
            "aut_order": self.aut_order,
            "equal": self.equal,
            "construction": "exact" if self.exact_by_construction else "inexact by construction",
        })


def verify_orbit_structure(G: PermutationGroup, max_arity: int | None = None) -> OrbitReport:
    max_arity = G.degree if max_arity is None else max_arity
    aut = automorphism_tables(orbit_structure(G, max_arity))
    return OrbitReport(G.degree, max_arity, G.order, len(aut), aut == set(G.elements))


@dataclass(frozen=True)
class HomogeneityReport:
    holds: bool
    surjections: int
    classes: int
    pairs: int
    failure: tuple | None = None

    def __str__(self) -> str:
        fields = {"holds": self.holds, "surjections": self.surjections,
                  "classes": self.classes, "pairs": self.pairs}
        if self.failure:
            f1, f2 = self.failure
            fields["failure"] = f"[{' '.join(map(str, f1))}] vs [{' '.join(map(str, f2))}]"
        return format_block(fields)


def verify_orbit_homogeneity(G: PermutationGroup, structure: FiniteStructure | None = None) -> HomogeneityReport:
    """Any two surjections inducing the same quotient differ by an automorphism.

    Surjections are grouped by the structure they induce; each group must be a
    single orbit under ``f -> f∘g`` for ``g`` in the automorphism group.
    """
    K = orbit_structure(G) if structure is None else structure
    aut = sorted(automorphism_tables(K))
    groups: dict = {}
    count = 0
    for m in range(1, K.size + 1):
        for f in surjective_labelings(K.size, m):
            count += 1
            groups.setdefault(induced_structure(K, _map(f, m)), []).append(f)
    pairs = 0
    for members in groups.values():
        pairs += len(members) * len(members)
        f1 = members[0]
        orbit = {tuple(f1[g[x]] for x in range(K.size)) for g in aut}
        for f2 in members:
            if f2 not in orbit:
                return HomogeneityReport(False, count, len(groups), pairs, (f1, f2))
    return HomogeneityReport(True, count, len(groups), pairs)


def _map(table, m):
    from .core import SurjectiveMap
    return SurjectiveMap(tuple(table), m)


# ---------------------------------------------------------------------------
# group files


def parse_group(text: str, source: str = "<group>") -> PermutationGroup:
    """``degree <n>`` then an ``elements`` or ``generators`` section, one image list per line."""
    degree = None
    mode = None
    perms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "degree":
            if degree is not None or len(toks) != 2 or not toks[1].isdigit():
                raise ParseError("expected a single 'degree <n>'", lineno, 1, source)
            degree = int(toks[1])
        elif toks[0] in ("elements", "generators") and len(toks) == 1:
            if degree is None or mode is not None:
                raise ParseError(f"misplaced section {toks[0]!r}", lineno, 1, source)
            mode = toks[0]
        else:
            if mode is None or not all(t.isdigit() for t in toks):
                raise ParseError(f"unexpected line {raw.strip()!r}", lineno, 1, source)
            p = tuple(int(t) for t in toks)
            if len(p) != degree or sorted(p) != list(range(degree)):
                raise ParseError(f"not a permutation of {degree} points", lineno, 1, source)
            perms.append(p)
    if degree is None or mode is None:
        raise ParseError("missing degree or section", 0, 0, source)
    if mode == "generators":
        return PermutationGroup.generated(degree, perms)
    try:
        return PermutationGroup(degree, frozenset(perms))
    except ValueError as exc:
        raise ParseError(str(exc), 0, 0, source) from None


def serialize_group(G: PermutationGroup) -> str:
    lines = [f"degree {G.degree}", "elements"]
    lines += [" ".join(map(str, p)) for p in G.sorted()]
    return "\n".join(lines) + "\n"


def read_group(path) -> PermutationGroup:
    with open(path, encoding="ascii") as fh:
        return parse_group(fh.read(), str(path))
