"""Shared generators and fixture paths for the test modules."""

import os
import random

from dualfraisse.core import (
    FiniteStructure,
    Kind,
    Signature,
    SurjectiveMap,
    SymbolDecl,
    injective_tuples,
    read_structure,
    surjective_labelings,
)
from dualfraisse.epi import induced_structure

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")


def fixture_path(*parts):
    return os.path.join(FIXTURES, *parts)


def load(name):
    return read_structure(fixture_path("structures", name))


def all_fixture_structures():
    d = fixture_path("structures")
    out = {}
    for name in sorted(os.listdir(d)):
        if name in ("malformed.struct", "asymmetric_r.struct"):
            continue
        out[name] = read_structure(os.path.join(d, name))
    return out


def random_signature(rng: random.Random) -> Signature:
    decls = []
    reserved = rng.random() < 0.3
    if reserved:
        decls.append(SymbolDecl("r", 2, Kind.DIRECT))
    for i in range(rng.randint(0 if reserved else 1, 3)):
        kind = rng.choice([Kind.DIRECT, Kind.DUAL])
        decls.append(SymbolDecl(f"S{i}", rng.randint(1, 3), kind))
    return Signature(tuple(decls), reserved)


def random_structure(rng: random.Random, sig: Signature, size: int, density: float = 0.35) -> FiniteStructure:
    interp = {}
    for sym in sig.symbols:
        if sym.is_dual:
            pool = list(surjective_labelings(size, sym.arity))
        else:
            pool = list(injective_tuples(size, sym.arity))
        chosen = {t for t in pool if rng.random() < density}
        if sig.r_reserved and sym.name == "r":
            chosen |= {(b, a) for a, b in chosen}
        interp[sym.name] = chosen
    return FiniteStructure.build(sig, size, interp)


def random_map(rng: random.Random, n: int, m: int) -> SurjectiveMap:
    while True:
        t = tuple(rng.randrange(m) for _ in range(n))
        if len(set(t)) == m:
            return SurjectiveMap(t, m)


def random_pair(rng: random.Random, max_a: int = 4, max_b: int = 3):
    """A source and a target; often the target is induced so epimorphisms exist."""
    sig = random_signature(rng)
    A = random_structure(rng, sig, rng.randint(1, max_a))
    m = rng.randint(1, min(max_b, A.size))
    if rng.random() < 0.6:
        B = induced_structure(A, random_map(rng, A.size, m))
    else:
        B = random_structure(rng, sig, m)
    return A, B


# acceptance lines, printed by the terminal summary hook in conftest
ACCEPTANCE: list[str] = []


def record(label: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return line
