"""Backend selection for the two search kernels.

``search_maps`` walks partial maps ``h: {0..n-1} -> {0..m-1}`` point by point
and yields every total map that is an epimorphism between two structures,
optionally restricted per point and to bijections.  ``canonical_permutation``
minimizes the sorted tuple encoding over all relabelings.

The compiled module ``_kernels`` is used when it imports; otherwise the pure
Python ``_kernels_py`` runs the same algorithms.  Setting ``DUALFRAISSE_NO_EXT``
skips the compiled module entirely.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass, field
from typing import Sequence

from . import _kernels_py

_compiled = None
if not os.environ.get("DUALFRAISSE_NO_EXT"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        pass

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

_active = BACKENDS.get("cython", _kernels_py)


def backend_name() -> str:
    return "cython" if _active is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    _active = BACKENDS[name]


def _code(t: Sequence[int], base: int) -> int:
    c = 0
    for v in t:
        c = c * base + v
    return c


@dataclass
class MapProblem:
    """Epimorphism search from an ``n``-point structure onto an ``m``-point one.

    ``direct``: ``(arity, source tuples, target tuples)`` per direct symbol.
    ``dual``: ``(arity, source labelings, target labelings)`` per dual symbol.
    ``allowed[x]`` lists the targets point ``x`` may map to (``None``: all).
    """

    n: int
    m: int
    direct: list = field(default_factory=list)
    dual: list = field(default_factory=list)
    allowed: list | None = None
    injective: bool = False
    _arrays: dict | None = field(default=None, repr=False)

    def allowed_sets(self) -> list[frozenset]:
        if self.allowed is None:
            full = frozenset(range(self.m))
            return [full] * self.n
        return [frozenset(a) for a in self.allowed]

    def arrays(self) -> dict:
        """Flat ``array`` encoding consumed by the compiled kernel."""
        if self._arrays is not None:
            return self._arrays
        n, m = self.n, self.m
        allowed = array("b", bytes(n * m))
        for x, targets in enumerate(self.allowed_sets()):
            for b in targets:
                allowed[x * m + b] = 1

        d_arity = array("q")
        d_src = array("q")
        d_tgt = array("q")
        d_tgt_start = array("q", [0])
        records = [[] for _ in range(n)]
        for c, (k, src, tgt) in enumerate(self.direct):
            d_arity.append(k)
            for t in sorted(src):
                off = len(d_src)
                d_src.extend(t)
                records[max(t)].append((c, off))
            d_tgt.extend(sorted(_code(t, m) for t in tgt))
            d_tgt_start.append(len(d_tgt))
        rec_start = array("q", [0])
        rec_c = array("q")
        rec_off = array("q")
        for t in range(n):
            for c, off in records[t]:
                rec_c.append(c)
                rec_off.append(off)
            rec_start.append(len(rec_c))

        u_arity = array("q")
        u_src = array("q")
        u_src_start = array("q", [0])
        u_pref = array("q")
        u_pref_start = array("q", [0])
        u_tgt = array("q")
        u_tgt_start = array("q", [0])
        u_tgt_owner = array("q")
        u_tgtcode = array("q")
        u_tgtcode_start = array("q", [0])
        for c, (k, src, tgt) in enumerate(self.dual):
            u_arity.append(k)
            src = sorted(src)
            for e in src:
                u_src.extend(e)
            u_src_start.append(len(u_src) // n)
            for length in range(1, n + 1):
                u_pref.extend(sorted({_code(e[:length], k) for e in src}))
                u_pref_start.append(len(u_pref))
            for beta in sorted(tgt):
                u_tgt.extend(beta)
                u_tgt_owner.append(c)
            u_tgt_start.append(len(u_tgt) // m)
            u_tgtcode.extend(sorted(_code(beta, k) for beta in tgt))
            u_tgtcode_start.append(len(u_tgtcode))

        self._arrays = dict(
            n=n, m=m, injective=int(self.injective), allowed=allowed,
            d_arity=d_arity, d_src=d_src, d_tgt=d_tgt, d_tgt_start=d_tgt_start,
            rec_start=rec_start, rec_c=rec_c, rec_off=rec_off,
            u_arity=u_arity, u_src=u_src, u_src_start=u_src_start,
            u_pref=u_pref, u_pref_start=u_pref_start,
            u_tgt=u_tgt, u_tgt_start=u_tgt_start, u_tgt_owner=u_tgt_owner,
            u_tgtcode=u_tgtcode, u_tgtcode_start=u_tgtcode_start,
        )
        return self._arrays


def search_maps(problem: MapProblem, limit: int = 0) -> list[tuple[int, ...]]:
    """All solutions in lexicographic order of the map table (``limit`` 0: no cap)."""
    if problem.m > problem.n or (problem.injective and problem.n != problem.m):
        return []
    return _active.search_maps(problem, limit)


def canonical_permutation(n: int, rels: list) -> tuple[int, ...]:
    """``rels``: ``(is_dual, arity, tuples)`` per symbol, in signature order."""
    return tuple(_active.canonical_permutation(n, rels))

