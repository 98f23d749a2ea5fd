"""Signatures, finite structures with direct and dual relations, and their text format.

A structure lives on the domain ``{0, ..., size-1}``.  A direct relation of
arity ``n`` is a set of injective ``n``-tuples of points.  A dual relation of
arity ``n`` is a set of surjective labelings ``point -> {0..n-1}``, stored as a
tuple of length ``size`` giving the label of every point.

The reserved binary symbol ``r`` is stored off-diagonal only; its diagonal is
implicit and every routine that reasons about ``r`` treats it as present.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from . import kernels

RESERVED = "r"
DEFAULT_CANON_BOUND = 10

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class Kind(enum.Enum):
    DIRECT = "direct"
    DUAL = "dual"


class SignatureError(ValueError):
    pass


class ParseError(ValueError):
    """Malformed structure text.  ``line`` and ``col`` are 1-based."""

    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<text>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: {message}")


class ValidationError(ValueError):
    def __init__(self, violations: list[Violation], source: str = "<text>"):
        self.violations = violations
        self.source = source
        body = "; ".join(str(v) for v in violations)
        super().__init__(f"{source}: invalid structure: {body}")


class CanonicalizationError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    arity: int
    kind: Kind

    @property
    def is_dual(self) -> bool:
        return self.kind is Kind.DUAL


@dataclass(frozen=True)
class Signature:
    symbols: tuple[SymbolDecl, ...] = ()
    r_reserved: bool = False

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        seen = set()
        for sym in self.symbols:
            if not isinstance(sym.name, str) or not sym.name:
                raise SignatureError("symbol names must be nonempty strings")
            if sym.name in seen:
                raise SignatureError(f"duplicate symbol name {sym.name!r}")
            seen.add(sym.name)
            if not isinstance(sym.arity, int) or isinstance(sym.arity, bool) or sym.arity < 1:
                raise SignatureError(f"symbol {sym.name!r}: arity must be an integer >= 1")
        if self.r_reserved:
            r = [s for s in self.symbols if s.name == RESERVED]
            if len(r) != 1 or r[0].kind is not Kind.DIRECT or r[0].arity != 2:
                raise SignatureError("reserved r must be declared once as a direct binary symbol")

    @classmethod
    def of(cls, *decls: tuple[str, str, int], reserved: bool = False) -> Signature:
        """``Signature.of(("direct", "r", 2), ("dual", "R", 2), reserved=True)``."""
        return cls(tuple(SymbolDecl(name, arity, Kind(kind)) for kind, name, arity in decls), reserved)

    def __getitem__(self, name: str) -> SymbolDecl:
        for sym in self.symbols:
            if sym.name == name:
                return sym
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(s.name == name for s in self.symbols)

    def index(self, name: str) -> int:
        for i, sym in enumerate(self.symbols):
            if sym.name == name:
                return i
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.symbols)

    def direct(self) -> list[SymbolDecl]:
        return [s for s in self.symbols if s.kind is Kind.DIRECT]

    def dual(self) -> list[SymbolDecl]:
        return [s for s in self.symbols if s.kind is Kind.DUAL]

    def without(self, name: str) -> Signature:
        keep = tuple(s for s in self.symbols if s.name != name)
        return Signature(keep, self.r_reserved and name != RESERVED)

    def extended(self, decls: Iterable[SymbolDecl]) -> Signature:
        return Signature(self.symbols + tuple(decls), self.r_reserved)


EMPTY_SIGNATURE = Signature()


@dataclass(frozen=True)
class SurjectiveMap:
    """A total surjection ``{0..len(table)-1} -> {0..target_size-1}``."""

    table: tuple[int, ...]
    target_size: int

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if not self.table:
            raise ValueError("maps need a nonempty source")
        if self.target_size < 1:
            raise ValueError("target size must be positive")
        if any(v < 0 or v >= self.target_size for v in self.table):
            raise ValueError(f"map value out of range 0..{self.target_size - 1}: {self.table}")
        if len(set(self.table)) != self.target_size:
            raise ValueError(f"map {self.table} is not onto {self.target_size} points")

    @classmethod
    def of(cls, table: Sequence[int], target_size: int | None = None) -> SurjectiveMap:
        table = tuple(table)
        if target_size is None:
            target_size = max(table) + 1 if table else 0
        return cls(table, target_size)

    @classmethod
    def identity(cls, n: int) -> SurjectiveMap:
        return cls(tuple(range(n)), n)

    @property
    def source_size(self) -> int:
        return len(self.table)

    def __call__(self, x: int) -> int:
        return self.table[x]

    def __len__(self) -> int:
        return len(self.table)

    def then(self, g: SurjectiveMap) -> SurjectiveMap:
        """``g ∘ self``: apply ``self`` first."""
        if g.source_size != self.target_size:
            raise ValueError("maps do not compose")
        return SurjectiveMap(tuple(g.table[v] for v in self.table), g.target_size)

    def is_bijective(self) -> bool:
        return self.source_size == self.target_size

    def inverse(self) -> SurjectiveMap:
        if not self.is_bijective():
            raise ValueError("only bijections have inverses")
        inv = [0] * self.source_size
        for x, y in enumerate(self.table):
            inv[y] = x
        return SurjectiveMap(tuple(inv), self.source_size)

    def fibers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.target_size)]
        for x, y in enumerate(self.table):
            out[y].append(x)
        return out

    def __str__(self) -> str:
        return " ".join(map(str, self.table))


def compose(*maps: SurjectiveMap) -> SurjectiveMap:
    """``compose(g, f)`` is ``g ∘ f``."""
    out = maps[-1]
    for g in reversed(maps[:-1]):
        out = out.then(g)
    return out


@dataclass(frozen=True)
class FiniteStructure:
    sig: Signature
    size: int
    relations: tuple[frozenset, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise ValueError("structure size must be a positive integer")
        rels = tuple(frozenset(tuple(int(v) for v in t) for t in r) for r in self.relations)
        if not rels:
            rels = tuple(frozenset() for _ in self.sig.symbols)
        if len(rels) != len(self.sig.symbols):
            raise ValueError("one interpretation per symbol is required")
        object.__setattr__(self, "relations", rels)

    @classmethod
    def build(cls, sig: Signature, size: int, interp: Mapping[str, Iterable[Sequence[int]]] | None = None) -> FiniteStructure:
        interp = dict(interp or {})
        unknown = set(interp) - set(sig.names)
        if unknown:
            raise KeyError(f"unknown symbols {sorted(unknown)}")
        rels = tuple(frozenset(tuple(t) for t in interp.get(s.name, ())) for s in sig.symbols)
        return cls(sig, size, rels)

    def __getitem__(self, name: str) -> frozenset:
        return self.relations[self.sig.index(name)]

    def items(self) -> Iterator[tuple[SymbolDecl, frozenset]]:
        return zip(self.sig.symbols, self.relations)

    def replace(self, **interp: Iterable[Sequence[int]]) -> FiniteStructure:
        rels = list(self.relations)
        for name, tuples in interp.items():
            rels[self.sig.index(name)] = frozenset(tuple(t) for t in tuples)
        return FiniteStructure(self.sig, self.size, tuple(rels))

    def relabel(self, perm: Sequence[int]) -> FiniteStructure:
        """Image under the bijection ``x -> perm[x]``."""
        rels = []
        for sym, tuples in self.items():
            if sym.is_dual:
                rels.append(frozenset(_relabel_labeling(e, perm) for e in tuples))
            else:
                rels.append(frozenset(tuple(perm[a] for a in t) for t in tuples))
        return FiniteStructure(self.sig, self.size, tuple(rels))

    def r_edges(self) -> frozenset:
        if not self.sig.r_reserved:
            raise KeyError("signature has no reserved r")
        return self[RESERVED]

    def __str__(self) -> str:
        return serialize_structure(self)


def _relabel_labeling(e: Sequence[int], perm: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(e)
    for x, lab in enumerate(e):
        out[perm[x]] = lab
    return tuple(out)


# ---------------------------------------------------------------------------
# tuples


def is_injective(t: Sequence[int]) -> bool:
    return len(set(t)) == len(t)


def is_surjective_labeling(e: Sequence[int], arity: int) -> bool:
    return set(e) == set(range(arity))


def injective_tuples(size: int, arity: int) -> Iterator[tuple[int, ...]]:
    """The direct tuples ``K^[n]`` of a ``size``-point domain."""
    return itertools.permutations(range(size), arity)


def surjective_labelings(size: int, arity: int) -> Iterator[tuple[int, ...]]:
    """The dual tuples ``[n]^K``, in lexicographic order."""
    for e in itertools.product(range(arity), repeat=size):
        if len(set(e)) == arity:
            yield e


def surjections(n: int, m: int) -> Iterator[SurjectiveMap]:
    for t in surjective_labelings(n, m):
        yield SurjectiveMap(t, m)


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings: one surjection per partition of ``{0..n-1}``."""
    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 2):
            prefix.append(v)
            yield from grow(prefix, max(top, v))
            prefix.pop()

    if n == 0:
        return
    yield from grow([0], 0)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    symbol: str
    tuple: tuple[int, ...] | None
    message: str

    def __str__(self) -> str:
        where = "" if self.tuple is None else " " + " ".join(map(str, self.tuple))
        return f"{self.symbol}{where}: {self.message}"


def validate_structure(s: FiniteStructure) -> list[Violation]:
    out: list[Violation] = []
    for sym, tuples in s.items():
        for t in sorted(tuples):
            if sym.is_dual:
                if len(t) != s.size:
                    out.append(Violation(sym.name, t, f"labeling has length {len(t)}, domain has {s.size} points"))
                elif any(v < 0 or v >= sym.arity for v in t):
                    out.append(Violation(sym.name, t, f"label outside 0..{sym.arity - 1}"))
                elif not is_surjective_labeling(t, sym.arity):
                    out.append(Violation(sym.name, t, "not surjective"))
            else:
                if len(t) != sym.arity:
                    out.append(Violation(sym.name, t, f"wrong arity {len(t)}, expected {sym.arity}"))
                elif any(v < 0 or v >= s.size for v in t):
                    out.append(Violation(sym.name, t, "index out of range"))
                elif not is_injective(t):
                    out.append(Violation(sym.name, t, "not injective"))
    if s.sig.r_reserved:
        edges = s[RESERVED]
        for a, b in sorted(e for e in edges if len(e) == 2):
            if (b, a) not in edges:
                out.append(Violation(RESERVED, (a, b), "r not symmetric"))
    return out


def check_valid(s: FiniteStructure, source: str = "<structure>") -> FiniteStructure:
    violations = validate_structure(s)
    if violations:
        raise ValidationError(violations, source)
    return s


# ---------------------------------------------------------------------------
# canonical form


def canonical_permutation(s: FiniteStructure, bound: int = DEFAULT_CANON_BOUND) -> tuple[int, ...]:
    if s.size > bound:
        raise CanonicalizationError(
            f"domain size {s.size} exceeds the canonicalization bound {bound}")
    rels = [(sym.is_dual, sym.arity, sorted(tuples)) for sym, tuples in s.items()]
    return kernels.canonical_permutation(s.size, rels)


def canonical_form(s: FiniteStructure, bound: int = DEFAULT_CANON_BOUND) -> FiniteStructure:
    """The relabeling of ``s`` whose sorted encoding is lexicographically least.

    Brute force over all bijections, so two structures get the same output
    exactly when they are isomorphic.
    """
    return s.relabel(canonical_permutation(s, bound))


def encoding_key(s: FiniteStructure) -> tuple:
    """Total order on structures of one signature: size, then sorted tuples."""
    return (s.size, tuple(tuple(sorted(t)) for t in s.relations))


# ---------------------------------------------------------------------------
# text format


def serialize_structure(s: FiniteStructure) -> str:
    lines = ["signature"]
    for sym in s.sig.symbols:
        lines.append(f"{sym.kind.value} {sym.name} {sym.arity}")
    if s.sig.r_reserved:
        lines.append(f"reserved {RESERVED}")
    lines.append(f"domain {s.size}")
    for sym, tuples in s.items():
        lines.append(f"relation {sym.name}")
        for t in sorted(tuples):
            lines.append(" ".join(map(str, t)))
    return "\n".join(lines) + "\n"


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_structure(text: str, source: str = "<text>", validate: bool = True) -> FiniteStructure:
    """Parse the structure format written by :func:`serialize_structure`.

    Layout::

        # comment
        signature
        direct r 2
        dual R 2
        reserved r
        domain 3            # optionally: points a b c
        relation r
        0 1
        1 0
        relation R
        0 1 1               # label of point 0, 1, 2

    Tuples may name points when a ``points`` line is present.
    """
    decls: list[SymbolDecl] = []
    reserved = False
    sig: Signature | None = None
    size: int | None = None
    names: dict[str, int] = {}
    interp: dict[str, set] = {}
    section = None
    current: SymbolDecl | None = None

    def err(msg, lineno, col=1):
        raise ParseError(msg, lineno, col, source)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        word, col = toks[0]
        if word == "signature" and len(toks) == 1:
            if section is not None:
                err("signature must come first and only once", lineno, col)
            section = "signature"
            continue
        if word == "domain":
            if section != "signature":
                err("domain must follow the signature section", lineno, col)
            if len(toks) != 2 or not toks[1][0].isdigit() or int(toks[1][0]) < 1:
                err("expected 'domain <positive size>'", lineno, col)
            try:
                sig = Signature(tuple(decls), reserved)
            except SignatureError as exc:
                err(str(exc), lineno, col)
            size = int(toks[1][0])
            section = "domain"
            continue
        if word == "points":
            if section != "domain" or names:
                err("points must directly follow domain", lineno, col)
            if len(toks) - 1 != size:
                err(f"points lists {len(toks) - 1} names for {size} points", lineno, col)
            for i, (name, c) in enumerate(toks[1:]):
                if name in names or name.isdigit():
                    err(f"bad point name {name!r}", lineno, c)
                names[name] = i
            continue
        if word == "relation":
            if sig is None:
                err("relation before domain", lineno, col)
            if len(toks) != 2:
                err("expected 'relation <name>'", lineno, col)
            name = toks[1][0]
            if name not in sig:
                err(f"relation for undeclared symbol {name!r}", lineno, toks[1][1])
            if name in interp:
                err(f"second section for symbol {name!r}", lineno, toks[1][1])
            current = sig[name]
            interp[name] = set()
            section = "relation"
            continue
        if section == "signature":
            if word in ("direct", "dual"):
                if len(toks) != 3:
                    err(f"expected '{word} <name> <arity>'", lineno, col)
                name, ncol = toks[1]
                if not _NAME_RE.match(name):
                    err(f"bad symbol name {name!r}", lineno, ncol)
                if any(d.name == name for d in decls):
                    err(f"duplicate symbol name {name!r}", lineno, ncol)
                arity, acol = toks[2]
                if not arity.isdigit() or int(arity) < 1:
                    err(f"arity must be a positive integer, got {arity!r}", lineno, acol)
                decls.append(SymbolDecl(name, int(arity), Kind(word)))
            elif word == "reserved":
                if len(toks) != 2 or toks[1][0] != RESERVED:
                    err(f"only 'reserved {RESERVED}' is allowed", lineno, col)
                reserved = True
            else:
                err(f"unexpected {word!r} in signature", lineno, col)
            continue
        if section == "relation":
            values = []
            for tok, c in toks:
                if tok.isdigit():
                    values.append(int(tok))
                elif tok in names and not current.is_dual:
                    values.append(names[tok])
                else:
                    err(f"bad entry {tok!r}", lineno, c)
            if current.is_dual:
                if len(values) != size:
                    err(f"{current.name}: labeling needs {size} labels, got {len(values)}", lineno, col)
                bad = [i for i, v in enumerate(values) if v >= current.arity]
                if bad:
                    err(f"{current.name}: label {values[bad[0]]} exceeds arity {current.arity}",
                        lineno, toks[bad[0]][1])
            else:
                if len(values) != current.arity:
                    err(f"{current.name}: arity mismatch, expected {current.arity} entries, got {len(values)}",
                        lineno, col)
                bad = [i for i, v in enumerate(values) if v >= size]
                if bad:
                    err(f"{current.name}: point {values[bad[0]]} outside domain of size {size}",
                        lineno, toks[bad[0]][1])
            interp[current.name].add(tuple(values))
            continue
        err(f"unexpected {word!r}", lineno, col)

    if sig is None or size is None:
        raise ParseError("missing signature or domain", 0, 0, source)
    s = FiniteStructure.build(sig, size, interp)
    if validate:
        check_valid(s, source)
    return s


def read_structure(path) -> FiniteStructure:
    with open(path, encoding="ascii") as fh:
        return parse_structure(fh.read(), source=str(path))


def write_structure(s: FiniteStructure, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(serialize_structure(s))
