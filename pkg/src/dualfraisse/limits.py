"""Finite prefixes of inverse systems, generic sequences and back-and-forth.

Levels are stored 0-based; reports and files number them from 1.  A bond
``bonds[i]`` maps ``levels[i + 1]`` onto ``levels[i]``.
"""

from __future__ import annotations

import functools
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .core import FiniteStructure, ParseError, SurjectiveMap, read_structure, write_structure
from .epi import (
    common_refinement,
    enumerate_epimorphisms,
    first_lift,
    is_epimorphism,
)
from .fraisse import StructureClass, amalgamate, joint_preimage
from .report import format_block, pmap

MASK64 = (1 << 64) - 1


class BoundedSearchFailure(RuntimeError):
    """A witness search found nothing inside the class's size bound."""


def splitmix64(seed: int) -> Iterator[int]:
    """SplitMix64, the fixed generator behind seeded task orders."""
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def seeded_shuffle(items: list, rng: Iterator[int]) -> list:
    """Fisher-Yates from the back, ``j = next % (i + 1)``."""
    items = list(items)
    for i in range(len(items) - 1, 0, -1):
        j = next(rng) % (i + 1)
        items[i], items[j] = items[j], items[i]
    return items


def _table(m: SurjectiveMap | Sequence[int]) -> tuple[int, ...]:
    return m.table if isinstance(m, SurjectiveMap) else tuple(m)


def _digits(t: Sequence[int]) -> str:
    return " ".join(map(str, t))


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Thread:
    coordinates: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.coordinates)


@dataclass
class InverseSystem:
    levels: list[FiniteStructure]
    bonds: list[SurjectiveMap]
    provenance: list[str] = field(default_factory=list)
    discharges: list = field(default_factory=list)

    def __post_init__(self):
        if not self.levels:
            raise ValueError("an inverse system needs at least one level")
        if len(self.bonds) != len(self.levels) - 1:
            raise ValueError("need exactly one bond between consecutive levels")
        for i, b in enumerate(self.bonds):
            if b.source_size != self.levels[i + 1].size or b.target_size != self.levels[i].size:
                raise ValueError(f"bond {i + 1} does not fit levels {i + 1} and {i + 2}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def top(self) -> FiniteStructure:
        return self.levels[-1]

    def projection(self, i: int, j: int) -> SurjectiveMap:
        """Composite bond from level ``j`` down to level ``i`` (0-based, ``i <= j``)."""
        if not 0 <= i <= j < self.depth:
            raise IndexError(f"no projection from level {j + 1} to {i + 1}")
        m = SurjectiveMap.identity(self.levels[j].size)
        for k in range(j - 1, i - 1, -1):
            m = m.then(self.bonds[k])
        return m

    def validate(self) -> list[str]:
        return [f"bond {i + 1} (level {i + 2} -> {i + 1}) is not an epimorphism"
                for i, b in enumerate(self.bonds)
                if not is_epimorphism(b, self.levels[i + 1], self.levels[i])]

    def is_valid(self) -> bool:
        return not self.validate()

    def threads(self) -> list[Thread]:
        """Threads of the prefix, one per top point, coordinates from level 1 up."""
        out = []
        for x in range(self.top.size):
            coords = [x]
            for b in reversed(self.bonds):
                coords.append(b.table[coords[-1]])
            out.append(Thread(tuple(reversed(coords))))
        return out

    def check_thread(self, t: Thread) -> bool:
        if len(t) != self.depth:
            return False
        return all(self.bonds[i].table[t.coordinates[i + 1]] == t.coordinates[i]
                   for i in range(self.depth - 1))

    def prefix(self, depth: int) -> InverseSystem:
        return InverseSystem(self.levels[:depth], self.bonds[:depth - 1], list(self.provenance))


# ---------------------------------------------------------------------------
# tasks


@dataclass(frozen=True)
class Task:
    """Extension task: ``f: B -> A`` and ``g: level -> A``, with ``A``, ``B`` class members."""

    level: int
    a: int
    b: int
    f: tuple[int, ...]
    g: tuple[int, ...]

    @property
    def key(self) -> str:
        return (f"task.L{self.level + 1}.A{self.a}.B{self.b}"
                f".f{''.join(map(str, self.f))}.g{''.join(map(str, self.g))}")

    def describe(self) -> str:
        return (f"level {self.level + 1}, A=member {self.a}, B=member {self.b}, "
                f"f=[{_digits(self.f)}], g=[{_digits(self.g)}]")


def level_tasks(level: int, L: FiniteStructure, cls: StructureClass, task_bound: int) -> list[Task]:
    """All tasks at one level, ordered by ``(|A|, |B|)`` and then lexicographically."""
    small = cls.bounded(task_bound)
    out = []
    for a in small:
        A = cls.members[a]
        gs = [e.table for e in enumerate_epimorphisms(L, A)]
        if not gs:
            continue
        for b in small:
            fs = [e.table for e in enumerate_epimorphisms(cls.members[b], A)]
            out.extend(Task(level, a, b, f, g) for f in fs for g in gs)
    size = lambda i: cls.members[i].size
    out.sort(key=lambda t: (size(t.a), size(t.b), t.a, t.b, t.f, t.g))
    return out


def find_extension(sys: InverseSystem, cls: StructureClass, task: Task,
                   start: int | None = None) -> tuple[int, SurjectiveMap] | None:
    """First level ``j >= task.level`` with ``h: B_j -> B`` and ``f∘h = g∘π``."""
    B = cls.members[task.b]
    f = SurjectiveMap(task.f, cls.members[task.a].size)
    g = SurjectiveMap(task.g, f.target_size)
    for j in range(task.level if start is None else start, sys.depth):
        gj = sys.projection(task.level, j).then(g)
        h = first_lift(sys.levels[j], B, f, gj)
        if h is not None:
            return j, h.map
    return None


def task_holds(sys: InverseSystem, cls: StructureClass, task: Task, j: int, h) -> bool:
    """Exact re-check of ``f∘h = g∘π`` with ``h`` an epimorphism."""
    h = SurjectiveMap(_table(h), cls.members[task.b].size)
    f = SurjectiveMap(task.f, cls.members[task.a].size)
    g = SurjectiveMap(task.g, f.target_size)
    if not is_epimorphism(h, sys.levels[j], cls.members[task.b]):
        return False
    return h.then(f) == sys.projection(task.level, j).then(g)


@dataclass(frozen=True)
class Discharge:
    task: Task
    level: int
    h: tuple[int, ...]
    appended: bool


# ---------------------------------------------------------------------------
# construction


def build_age_chain(cls: StructureClass, depth: int) -> InverseSystem:
    """``B_1`` is the first member; ``B_{i+1}`` maps onto ``B_i`` and the next member."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    levels = [cls.members[0]]
    bonds = []
    log = ["level 1: member 0"]
    for i in range(1, depth):
        k = i % len(cls)
        found = joint_preimage(cls, levels[-1], cls.members[k])
        if found is None:
            raise BoundedSearchFailure(
                f"no joint preimage of level {i} and member {k} within size {cls.max_size}")
        c, to_level, to_member = found
        levels.append(cls.members[c])
        bonds.append(to_level.map)
        log.append(f"level {i + 1}: member {c} onto level {i} by [{to_level.map}] "
                   f"and onto member {k} by [{to_member.map}]")
    return InverseSystem(levels, bonds, log)


def _factors_through(g: Sequence[int], bond: SurjectiveMap) -> bool:
    seen: dict[int, int] = {}
    for x, y in enumerate(bond.table):
        if seen.setdefault(y, g[x]) != g[x]:
            return False
    return True


def build_generic_sequence(cls: StructureClass, depth: int = 6, task_bound: int = 3,
                           seed: int = 0) -> InverseSystem:
    """Dovetail extension tasks into a prefix of a generic sequence.

    Tasks wait in a FIFO ordered by ``(level, |A|, |B|)``; the seed shuffles
    each band.  A popped task already fulfilled by the prefix is only logged.
    Otherwise the first amalgam of the top level and ``B`` over ``A`` becomes
    the next level.  New tasks whose ``g`` factors through the fresh bond
    repeat older ones and are not queued.  If the queue empties first the
    shorter prefix is returned.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = splitmix64(seed)
    sys = InverseSystem([cls.members[0]], [], [f"level 1: member 0 (seed {seed})"])
    queue: deque[Task] = deque()

    def enqueue(level: int) -> None:
        tasks = level_tasks(level, sys.levels[level], cls, task_bound)
        if level > 0:
            bond = sys.bonds[level - 1]
            tasks = [t for t in tasks if not _factors_through(t.g, bond)]
        bands: dict = {}
        for t in tasks:
            bands.setdefault((cls.members[t.a].size, cls.members[t.b].size), []).append(t)
        for band in sorted(bands):
            queue.extend(seeded_shuffle(bands[band], rng))

    enqueue(0)
    while queue and sys.depth < depth:
        task = queue.popleft()
        done = find_extension(sys, cls, task)
        if done is not None:
            j, h = done
            sys.discharges.append(Discharge(task, j, h.table, False))
            sys.provenance.append(f"{task.key}: fulfilled at level {j + 1} by h=[{h}]")
            continue
        top = sys.depth - 1
        A = cls.members[task.a]
        g_top = sys.projection(task.level, top).then(SurjectiveMap(task.g, A.size))
        found = amalgamate(cls, sys.top, cls.members[task.b], g_top,
                           SurjectiveMap(task.f, A.size))
        if found is None:
            raise BoundedSearchFailure(f"no amalgam for {task.describe()} within size {cls.max_size}")
        d, bond, h = found
        sys.levels.append(cls.members[d])
        sys.bonds.append(bond.map)
        sys.discharges.append(Discharge(task, top + 1, h.table, True))
        sys.provenance.append(
            f"{task.key}: level {top + 2} = member {d}, bond [{bond.map}], h=[{h.map}]")
        enqueue(top + 1)
    if queue:
        sys.provenance.append(f"stopped at depth {sys.depth} with {len(queue)} tasks queued")
    else:
        sys.provenance.append(f"task queue exhausted at depth {sys.depth}")
    return sys


def recheck_discharges(sys: InverseSystem, cls: StructureClass) -> bool:
    return all(task_holds(sys, cls, d.task, d.level, d.h) for d in sys.discharges)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Verdict:
    task: Task
    level: int | None
    h: tuple[int, ...] | None

    @property
    def fulfilled(self) -> bool:
        return self.level is not None


@dataclass
class ExtensionCertificate:
    depth: int
    task_bound: int
    verdicts: list[Verdict]

    @property
    def complete(self) -> bool:
        return all(v.fulfilled for v in self.verdicts)

    @property
    def unfulfilled(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.fulfilled]

    def recheck(self, sys: InverseSystem, cls: StructureClass) -> bool:
        return all(task_holds(sys, cls, v.task, v.level, v.h)
                   for v in self.verdicts if v.fulfilled)

    def fields(self, detail: bool = True) -> dict:
        out = {
            "depth": self.depth,
            "task_bound": self.task_bound,
            "tasks": len(self.verdicts),
            "fulfilled": len(self.verdicts) - len(self.unfulfilled),
            "unfulfilled": len(self.unfulfilled),
            "complete": self.complete,
        }
        if detail:
            for v in self.verdicts:
                out[v.task.key] = (f"level {v.level + 1} h=[{_digits(v.h)}]" if v.fulfilled
                                   else "unfulfilled within depth")
        return out

    def __str__(self) -> str:
        return format_block(self.fields())


def _certify_task(sys: InverseSystem, cls: StructureClass, task: Task) -> Verdict:
    found = find_extension(sys, cls, task)
    if found is None:
        return Verdict(task, None, None)
    return Verdict(task, found[0], found[1].table)


def certify_extension(sys: InverseSystem, cls: StructureClass, task_bound: int = 3,
                      jobs: int = 1) -> ExtensionCertificate:
    """Search a lift for every task at every level of the prefix."""
    tasks = [t for i, L in enumerate(sys.levels) for t in level_tasks(i, L, cls, task_bound)]
    verdicts = pmap(functools.partial(_certify_task, sys, cls), tasks, jobs)
    return ExtensionCertificate(sys.depth, task_bound, verdicts)


# ---------------------------------------------------------------------------
# dual tuples on the prefix


@dataclass
class DualTupleReport:
    level: int
    labeling: tuple[int, ...]
    verdicts: dict[str, bool]
    pullbacks: dict[str, list[bool]]

    @property
    def stable(self) -> bool:
        return all(all(v == self.verdicts[name] for v in vals)
                   for name, vals in self.pullbacks.items())

    def limit_verdicts(self) -> dict[str, bool]:
        """Membership in the limit, read off at the defining level."""
        return dict(self.verdicts)

    def fields(self) -> dict:
        out = {"level": self.level + 1, "labeling": _digits(self.labeling), "stable": self.stable}
        for name, v in self.verdicts.items():
            out[f"symbol.{name}"] = v
            out[f"symbol.{name}.pullbacks"] = " ".join("1" if b else "0" for b in self.pullbacks[name])
        return out

    def __str__(self) -> str:
        return format_block(self.fields())


def evaluate_dual_tuple(sys: InverseSystem, level: int, e: Sequence[int]) -> DualTupleReport:
    """Membership of ``e`` (a labeling of level ``level``) and of its pullbacks further up."""
    L = sys.levels[level]
    e = tuple(e)
    if len(e) != L.size:
        raise ValueError(f"labeling has {len(e)} entries, level has {L.size} points")
    k = len(set(e))
    if set(e) != set(range(k)):
        raise ValueError("labeling is not surjective onto 0..k-1")
    names = [s.name for s in L.sig.dual() if s.arity == k]
    if not names:
        raise ValueError(f"no dual symbol of arity {k}")
    verdicts = {n: e in L[n] for n in names}
    pullbacks: dict[str, list[bool]] = {n: [] for n in names}
    for j in range(level + 1, sys.depth):
        p = sys.projection(level, j)
        pulled = tuple(e[p.table[x]] for x in range(sys.levels[j].size))
        for n in names:
            pullbacks[n].append(pulled in sys.levels[j][n])
    report = DualTupleReport(level, e, verdicts, pullbacks)
    if sys.is_valid() and not report.stable:
        raise AssertionError("valid system with unstable pullback")
    return report


# ---------------------------------------------------------------------------
# back and forth


@dataclass
class BackAndForth:
    """``levels[n]`` is ``A_n``; ``rhos[n]: A_{n+1} -> A_n``.

    ``fs[n] = (p, map)`` with ``map: sys1.levels[p] -> A_n``; ``gs`` likewise on sys2.
    """

    levels: list[FiniteStructure]
    rhos: list[SurjectiveMap]
    fs: list[tuple[int, SurjectiveMap]]
    gs: list[tuple[int, SurjectiveMap]]
    target_depth: int
    stuck: str | None = None

    @property
    def complete(self) -> bool:
        return self.stuck is None and len(self.levels) == self.target_depth + 1

    def recheck(self, sys1: InverseSystem, sys2: InverseSystem) -> bool:
        """Every stated equality and epimorphism, re-verified from scratch."""
        for n, A in enumerate(self.levels):
            for sys, (p, m) in ((sys1, self.fs[n]), (sys2, self.gs[n])):
                if not is_epimorphism(m, sys.levels[p], A):
                    return False
            if n == 0:
                continue
            rho = self.rhos[n - 1]
            if not is_epimorphism(rho, A, self.levels[n - 1]):
                return False
            for sys, pairs in ((sys1, self.fs), (sys2, self.gs)):
                (p0, m0), (p1, m1) = pairs[n - 1], pairs[n]
                if p1 < p0 or m1.then(rho) != sys.projection(p0, p1).then(m0):
                    return False
        return True

    def anchored(self, sys1: InverseSystem, sys2: InverseSystem) -> bool:
        """Composing down to ``A_0`` gives back the anchor maps."""
        for sys, pairs in ((sys1, self.fs), (sys2, self.gs)):
            p0, m0 = pairs[0]
            for n in range(1, len(self.levels)):
                p, m = pairs[n]
                for rho in reversed(self.rhos[:n]):
                    m = m.then(rho)
                if m != sys.projection(p0, p).then(m0):
                    return False
        return True

    def fields(self, cls: StructureClass | None = None) -> dict:
        out = {"depth": len(self.levels) - 1, "target_depth": self.target_depth,
               "complete": self.complete}
        if self.stuck:
            out["stuck"] = self.stuck
        for n, A in enumerate(self.levels):
            pre = f"step.{n:02d}"
            out[f"{pre}.size"] = A.size
            if cls is not None:
                idx = cls.index_of(A)
                out[f"{pre}.member"] = "none" if idx is None else idx
            out[f"{pre}.f"] = f"level {self.fs[n][0] + 1} [{self.fs[n][1]}]"
            out[f"{pre}.g"] = f"level {self.gs[n][0] + 1} [{self.gs[n][1]}]"
            if n:
                out[f"{pre}.rho"] = f"[{self.rhos[n - 1]}]"
        return out

    def __str__(self) -> str:
        return format_block(self.fields())


def _lift_in(sys: InverseSystem, start: int, prev: tuple[int, SurjectiveMap],
             A: FiniteStructure, rho: SurjectiveMap) -> tuple[int, SurjectiveMap] | None:
    p, m = prev
    for j in range(max(start, p), sys.depth):
        h = first_lift(sys.levels[j], A, rho, sys.projection(p, j).then(m))
        if h is not None:
            return j, h.map
    return None


def back_and_forth(sys1: InverseSystem, sys2: InverseSystem, cls: StructureClass | None,
                   depth: int, anchor: tuple[FiniteStructure, object, object]) -> BackAndForth:
    """Tower of common refinements intertwining two systems over an anchor.

    Odd steps refine ``f_{n-1}`` against the next level projection of
    ``sys1`` and lift through ``sys2``; even steps swap the roles.  Once a
    system runs out of levels its top level is used again.
    """
    A, f, g = anchor
    f = SurjectiveMap(_table(f), A.size)
    g = SurjectiveMap(_table(g), A.size)
    for sys, m, name in ((sys1, f, "f"), (sys2, g, "g")):
        if not is_epimorphism(m, sys.levels[0], A):
            raise ValueError(f"anchor {name} is not an epimorphism from level 1")
    out = BackAndForth([A], [], [(0, f)], [(0, g)], depth)
    for n in range(1, depth + 1):
        odd = n % 2 == 1
        here, there = (sys1, sys2) if odd else (sys2, sys1)
        mine, theirs = (out.fs, out.gs) if odd else (out.gs, out.fs)
        p, m = mine[-1]
        q = min(p + 1, here.depth - 1)
        K = here.levels[q]
        ref = common_refinement(K, here.projection(p, q).then(m), SurjectiveMap.identity(K.size),
                                out.levels[-1], K)
        A_n = ref.refined
        rho = ref.factor_f.map
        lifted = _lift_in(there, theirs[-1][0], theirs[-1], A_n, rho)
        if lifted is None:
            side = "sys2" if odd else "sys1"
            out.stuck = (f"step {n} ({'odd' if odd else 'even'}): no lift through {side} "
                         f"levels {theirs[-1][0] + 1}..{there.depth}")
            return out
        out.levels.append(A_n)
        out.rhos.append(rho)
        mine.append((q, ref.h.map))
        theirs.append(lifted)
    return out


# ---------------------------------------------------------------------------
# bundles


def write_bundle(sys: InverseSystem, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    for i, L in enumerate(sys.levels):
        write_structure(L, os.path.join(directory, f"level_{i + 1:02d}.struct"))
    with open(os.path.join(directory, "bonds.txt"), "w", encoding="ascii") as fh:
        for b in sys.bonds:
            fh.write(_digits(b.table) + "\n")
    with open(os.path.join(directory, "provenance.log"), "w", encoding="utf-8") as fh:
        for line in sys.provenance:
            fh.write(line + "\n")


def read_bundle(directory, check: bool = True) -> InverseSystem:
    names = sorted(n for n in os.listdir(directory)
                   if n.startswith("level_") and n.endswith(".struct"))
    if not names:
        raise ParseError("bundle has no level files", 0, 0, str(directory))
    levels = [read_structure(os.path.join(directory, n)) for n in names]
    bonds_path = os.path.join(directory, "bonds.txt")
    bonds = []
    with open(bonds_path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                table = tuple(int(t) for t in raw.split())
            except ValueError:
                raise ParseError("bond entries must be integers", lineno, 1, bonds_path) from None
            i = len(bonds)
            if i + 1 >= len(levels):
                raise ParseError("more bonds than level pairs", lineno, 1, bonds_path)
            try:
                bonds.append(SurjectiveMap(table, levels[i].size))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1, bonds_path) from None
    if len(bonds) != len(levels) - 1:
        raise ParseError(f"expected {len(levels) - 1} bonds, found {len(bonds)}", 0, 0, bonds_path)
    prov_path = os.path.join(directory, "provenance.log")
    provenance = []
    if os.path.exists(prov_path):
        with open(prov_path, encoding="utf-8") as fh:
            provenance = [line.rstrip("\n") for line in fh]
    sys = InverseSystem(levels, bonds, provenance)
    if check:
        problems = sys.validate()
        if problems:
            raise ParseError(problems[0], 0, 0, str(directory))
    return sys
