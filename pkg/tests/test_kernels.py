import os
import random
import subprocess
import sys
import time

import pytest

from dualfraisse import kernels
from dualfraisse.core import canonical_permutation
from dualfraisse.corpus import cycle, decorated_path, path
from dualfraisse.epi import enumerate_epimorphisms, lifts, map_problem

from helpers import random_map, random_pair, random_signature, random_structure

needs_compiled = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled kernel not built")


def with_backend(name, fn):
    before = kernels.backend_name()
    kernels.set_backend(name)
    try:
        return fn()
    finally:
        kernels.set_backend(before)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_default_prefers_compiled():
    assert kernels.backend_name() == ("cython" if "cython" in kernels.BACKENDS else "python")


def test_env_switch_forces_fallback():
    env = dict(os.environ, DUALFRAISSE_NO_EXT="1")
    out = subprocess.run([sys.executable, "-c", "from dualfraisse import kernels; print(kernels.backend_name())"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_search_parity_random():
    rng = random.Random(77)
    for _ in range(300):
        A, B = random_pair(rng, 5, 4)
        prob = map_problem(A, B)
        assert kernels.BACKENDS["python"].search_maps(prob, 0) == kernels.BACKENDS["cython"].search_maps(prob, 0)


@needs_compiled
def test_search_parity_with_restrictions():
    rng = random.Random(78)
    for _ in range(200):
        A, B = random_pair(rng, 5, 4)
        allowed = [[b for b in range(B.size) if rng.random() < 0.7] for _ in range(A.size)]
        for injective in (False, True):
            prob = kernels.MapProblem(A.size, B.size, map_problem(A, B).direct,
                                      map_problem(A, B).dual, allowed, injective)
            for limit in (0, 1, 2):
                py = kernels.BACKENDS["python"].search_maps(prob, limit)
                cy = kernels.BACKENDS["cython"].search_maps(prob, limit)
                assert py == cy


@needs_compiled
def test_canonical_parity():
    rng = random.Random(79)
    for _ in range(150):
        s = random_structure(rng, random_signature(rng), rng.randint(1, 6))
        perms = [with_backend(b, lambda: canonical_permutation(s)) for b in ("python", "cython")]
        assert perms[0] == perms[1]


def test_limit_truncates(backend):
    prob = map_problem(cycle(4), cycle(4), injective=True)
    assert len(kernels.search_maps(prob, 3)) == 3
    assert len(kernels.search_maps(prob, 0)) == 8


def test_injective_needs_equal_sizes(backend):
    assert kernels.search_maps(map_problem(path(3), path(2), injective=True)) == []


def test_decorated_path_epimorphism_counts(backend):
    # onto the decorated 4-path itself only its two symmetries survive
    D = decorated_path(4)
    assert [e.table for e in enumerate_epimorphisms(D, D)] == [(0, 1, 2, 3), (3, 2, 1, 0)]


@needs_compiled
def test_compiled_is_faster_on_larger_search():
    A = path(8)
    B = path(4)
    timings = {}
    for name in ("python", "cython"):
        t = time.perf_counter()
        n = with_backend(name, lambda: len(enumerate_epimorphisms(A, B)))
        timings[name] = time.perf_counter() - t
    assert n > 0
    assert timings["cython"] < timings["python"]
