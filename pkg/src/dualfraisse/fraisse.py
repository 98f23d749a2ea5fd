"""Class axioms HP, JSP and PAP for explicit finite classes of structures.

A class is a finite list of pairwise non-isomorphic members plus a size bound
for witness searches.  HP is decided exactly.  JSP and PAP search witnesses
among the members no larger than ``max_size``, so a failure there only says
that no witness exists inside the bound and is reported as ``bounded``.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    DEFAULT_CANON_BOUND,
    FiniteStructure,
    ParseError,
    SurjectiveMap,
    canonical_form,
    read_structure,
    serialize_structure,
    set_partitions,
)
from .epi import (
    Epimorphism,
    enumerate_epimorphisms,
    find_isomorphism,
    first_epimorphism,
    first_lift,
    induced_structure,
    is_epimorphism,
)
from .report import format_block, pmap


@dataclass(frozen=True)
class StructureClass:
    members: tuple[FiniteStructure, ...]
    max_size: int
    canon_bound: int = DEFAULT_CANON_BOUND

    def __post_init__(self):
        if not self.members:
            raise ValueError("a class needs at least one member")
        sig = self.members[0].sig
        if any(m.sig != sig for m in self.members):
            raise ValueError("class members must share one signature")
        keys = [serialize_structure(canonical_form(m, self.canon_bound)) for m in self.members]
        if len(set(keys)) != len(keys):
            raise ValueError("class members must be pairwise non-isomorphic")
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(keys)})

    @classmethod
    def from_structures(cls, structures: Iterable[FiniteStructure], max_size: int | None = None,
                        canon_bound: int = DEFAULT_CANON_BOUND) -> StructureClass:
        """Deduplicate up to isomorphism and order members canonically."""
        seen = {}
        for s in structures:
            c = canonical_form(s, canon_bound)
            seen.setdefault(serialize_structure(c), c)
        members = sorted(seen.values(), key=lambda c: (c.size, serialize_structure(c)))
        if max_size is None:
            max_size = max(m.size for m in members)
        return cls(tuple(members), max_size, canon_bound)

    @property
    def sig(self):
        return self.members[0].sig

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def index_of(self, s: FiniteStructure) -> int | None:
        """Member index of the isomorphism type of ``s``."""
        if s.sig != self.sig or s.size > self.canon_bound:
            return None
        return self._index.get(serialize_structure(canonical_form(s, self.canon_bound)))

    def witnesses_up_to(self, size: int | None = None) -> list[int]:
        bound = self.max_size if size is None else size
        return [i for i, m in enumerate(self.members) if m.size <= bound]

    def bounded(self, task_bound: int) -> list[int]:
        return [i for i, m in enumerate(self.members) if m.size <= task_bound]


@dataclass
class AxiomReport:
    axiom: str
    holds: bool
    bounded: bool
    instances: int
    witnesses: list = field(default_factory=list)
    counterexample: object = None

    def fields(self) -> dict:
        out = {
            "axiom": self.axiom,
            "holds": self.holds,
            "bounded": self.bounded,
            "instances": self.instances,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.describe()
        return out

    def __str__(self) -> str:
        return format_block(self.fields())


@dataclass(frozen=True)
class HPInstance:
    member: int
    map: SurjectiveMap
    induced: FiniteStructure
    match: int | None = None
    iso: SurjectiveMap | None = None

    def describe(self) -> str:
        return f"member {self.member} map [{self.map}] has quotient outside the class"


@dataclass(frozen=True)
class JSPInstance:
    a: int
    b: int
    c: int | None = None
    epi_a: SurjectiveMap | None = None
    epi_b: SurjectiveMap | None = None

    def describe(self) -> str:
        return f"members {self.a} and {self.b} have no common preimage within bound"


@dataclass(frozen=True)
class PAPInstance:
    a: int
    b: int
    c: int
    f_a: SurjectiveMap
    f_b: SurjectiveMap
    d: int | None = None
    g_a: SurjectiveMap | None = None
    g_b: SurjectiveMap | None = None

    def describe(self) -> str:
        return (f"no amalgam within bound for f_A=[{self.f_a}] (member {self.a} -> {self.c}) "
                f"and f_B=[{self.f_b}] (member {self.b} -> {self.c})")


# ---------------------------------------------------------------------------
# HP


def _hp_instance(cls: StructureClass, job) -> HPInstance:
    i, table = job
    A = cls.members[i]
    f = SurjectiveMap.of(table)
    quotient = induced_structure(A, f)
    j = cls.index_of(quotient)
    if j is None:
        return HPInstance(i, f, quotient)
    iso = find_isomorphism(quotient, cls.members[j])
    return HPInstance(i, f, quotient, j, iso.map)


def check_HP(cls: StructureClass, jobs: int = 1) -> AxiomReport:
    """Every quotient of every member is isomorphic to a member.

    One surjection per partition of each domain is enough: relabeling the
    target does not change the quotient's isomorphism type.
    """
    work = [(i, p) for i, A in enumerate(cls.members) for p in set_partitions(A.size)]
    results = pmap(functools.partial(_hp_instance, cls), work, jobs)
    for r in results:
        if r.match is None:
            return AxiomReport("HP", False, False, len(results), [], r)
    return AxiomReport("HP", True, False, len(results), results)


# ---------------------------------------------------------------------------
# JSP


def joint_preimage(cls: StructureClass, A: FiniteStructure, B: FiniteStructure,
                   max_size: int | None = None):
    for k in cls.witnesses_up_to(max_size):
        C = cls.members[k]
        ea = first_epimorphism(C, A)
        if ea is None:
            continue
        eb = first_epimorphism(C, B)
        if eb is not None:
            return k, ea, eb
    return None


def _jsp_instance(cls: StructureClass, pair) -> JSPInstance:
    a, b = pair
    found = joint_preimage(cls, cls.members[a], cls.members[b])
    if found is None:
        return JSPInstance(a, b)
    k, ea, eb = found
    return JSPInstance(a, b, k, ea.map, eb.map)


def check_JSP(cls: StructureClass, jobs: int = 1) -> AxiomReport:
    n = len(cls)
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    results = pmap(functools.partial(_jsp_instance, cls), pairs, jobs)
    for r in results:
        if r.c is None:
            return AxiomReport("JSP", False, True, len(results), [], r)
    return AxiomReport("JSP", True, False, len(results), results)


# ---------------------------------------------------------------------------
# PAP


def amalgamate(cls: StructureClass, A: FiniteStructure, B: FiniteStructure,
               f_a: SurjectiveMap, f_b: SurjectiveMap, max_size: int | None = None):
    """First ``(d, g_A, g_B)`` with ``f_A∘g_A = f_B∘g_B``, members in class order."""
    for k in cls.witnesses_up_to(max_size):
        D = cls.members[k]
        for g_a in enumerate_epimorphisms(D, A):
            g_b = first_lift(D, B, f_b, g_a.map.then(f_a))
            if g_b is not None:
                return k, g_a, g_b
    return None


def _pap_instances(cls: StructureClass, triple) -> list[PAPInstance]:
    a, b, c = triple
    A, B, C = cls.members[a], cls.members[b], cls.members[c]
    out = []
    eas = enumerate_epimorphisms(A, C)
    ebs = enumerate_epimorphisms(B, C) if eas else []
    for fa in eas:
        for fb in ebs:
            found = amalgamate(cls, A, B, fa.map, fb.map)
            if found is None:
                out.append(PAPInstance(a, b, c, fa.map, fb.map))
                return out
            k, ga, gb = found
            out.append(PAPInstance(a, b, c, fa.map, fb.map, k, ga.map, gb.map))
    return out


def check_PAP(cls: StructureClass, jobs: int = 1) -> AxiomReport:
    n = len(cls)
    triples = [(a, b, c) for a in range(n) for b in range(n) for c in range(n)
               if cls.members[c].size <= min(cls.members[a].size, cls.members[b].size)]
    results = [inst for group in pmap(functools.partial(_pap_instances, cls), triples, jobs)
               for inst in group]
    for r in results:
        if r.d is None:
            return AxiomReport("PAP", False, True, len(results), [], r)
    return AxiomReport("PAP", True, False, len(results), results)


def check_class(cls: StructureClass, axioms: Sequence[str] = ("HP", "JSP", "PAP"),
                jobs: int = 1) -> list[AxiomReport]:
    checks = {"HP": check_HP, "JSP": check_JSP, "PAP": check_PAP}
    return [checks[a](cls, jobs) for a in axioms]


# ---------------------------------------------------------------------------
# re-validation of positive reports


def recheck(report: AxiomReport, cls: StructureClass) -> bool:
    """Re-verify every witness of a report against the raw definitions."""
    M = cls.members
    for w in report.witnesses:
        if isinstance(w, HPInstance):
            if not is_epimorphism(w.map, M[w.member], w.induced):
                return False
            if not (w.iso.is_bijective() and is_epimorphism(w.iso, w.induced, M[w.match])):
                return False
        elif isinstance(w, JSPInstance):
            if not (is_epimorphism(w.epi_a, M[w.c], M[w.a]) and is_epimorphism(w.epi_b, M[w.c], M[w.b])):
                return False
        elif isinstance(w, PAPInstance):
            if not (is_epimorphism(w.f_a, M[w.a], M[w.c]) and is_epimorphism(w.f_b, M[w.b], M[w.c])):
                return False
            if not (is_epimorphism(w.g_a, M[w.d], M[w.a]) and is_epimorphism(w.g_b, M[w.d], M[w.b])):
                return False
            if w.g_a.then(w.f_a) != w.g_b.then(w.f_b):
                return False
    return True


# ---------------------------------------------------------------------------
# helpers


def quotients(s: FiniteStructure) -> list[FiniteStructure]:
    return [induced_structure(s, SurjectiveMap.of(p)) for p in set_partitions(s.size)]


def hp_closure(structures: Iterable[FiniteStructure], max_size: int | None = None,
               canon_bound: int = DEFAULT_CANON_BOUND) -> StructureClass:
    """The class of all quotients of the given structures."""
    structures = list(structures)
    return StructureClass.from_structures(
        (q for s in structures for q in quotients(s)), max_size, canon_bound)


def parse_class_manifest(text: str, base_dir: str = ".", source: str = "<manifest>",
                         canon_bound: int = DEFAULT_CANON_BOUND) -> StructureClass:
    """Manifest lines: ``max_size <n>``, ``structure <path>`` (relative to the manifest)
    and optionally ``closure quotients`` to close the listed structures under quotients.
    """
    max_size = None
    closed = False
    structures = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] == "max_size" and len(line) == 2 and line[1].isdigit():
            max_size = int(line[1])
        elif line[0] == "structure" and len(line) == 2:
            structures.append(read_structure(os.path.join(base_dir, line[1])))
        elif line == ["closure", "quotients"]:
            closed = True
        else:
            raise ParseError(f"unexpected manifest line {raw.strip()!r}", lineno, 1, source)
    if not structures:
        raise ParseError("manifest lists no structures", 0, 0, source)
    if closed:
        return hp_closure(structures, max_size, canon_bound)
    return StructureClass.from_structures(structures, max_size, canon_bound)


def read_class(path, canon_bound: int = DEFAULT_CANON_BOUND) -> StructureClass:
    with open(path, encoding="ascii") as fh:
        return parse_class_manifest(fh.read(), os.path.dirname(os.path.abspath(path)),
                                    str(path), canon_bound)
