"""Time the compiled and pure-Python search kernels on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import random
import timeit

from dualfraisse import kernels
from dualfraisse.core import FiniteStructure, Kind, Signature, SymbolDecl, canonical_form, injective_tuples
from dualfraisse.corpus import cycle, path
from dualfraisse.epi import automorphism_group, enumerate_epimorphisms, induced_structure
from dualfraisse.transforms import PermutationGroup, orbit_structure


def _mixed(seed: int, n: int):
    rng = random.Random(seed)
    sig = Signature((SymbolDecl("e", 2, Kind.DIRECT), SymbolDecl("t", 3, Kind.DIRECT)))
    interp = {"e": {p for p in injective_tuples(n, 2) if rng.random() < 0.3},
              "t": {p for p in injective_tuples(n, 3) if rng.random() < 0.05}}
    return FiniteStructure.build(sig, n, interp)


def workloads():
    P7, C8 = path(7), cycle(8)
    M = _mixed(3, 7)
    Q = induced_structure(M, (0, 1, 2, 0, 1, 2, 3))
    K = orbit_structure(PermutationGroup.cyclic(5), 5)
    return {
        "epis path7 -> path4": lambda: enumerate_epimorphisms(P7, path(4)),
        "epis cycle8 -> cycle4": lambda: enumerate_epimorphisms(C8, cycle(4)),
        "epis mixed7 -> quotient4": lambda: enumerate_epimorphisms(M, Q),
        "aut orbit structure C5": lambda: automorphism_group(K),
        "canonical form mixed7": lambda: canonical_form(M),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = sorted(kernels.BACKENDS)
    if "cython" not in names:
        print("compiled kernels not built; timing the python backend only")
    before = kernels.backend_name()
    rows = []
    for label, fn in workloads().items():
        best = {}
        for name in names:
            kernels.set_backend(name)
            fn()
            best[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        rows.append((label, best))
    kernels.set_backend(before)

    print(f"{'workload':28s}" + "".join(f"{n:>12s}" for n in names) + (f"{'speedup':>10s}" if len(names) > 1 else ""))
    for label, best in rows:
        line = f"{label:28s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            line += f"{best['python'] / best['cython']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
