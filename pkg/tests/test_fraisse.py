import dataclasses
import itertools

import pytest

from dualfraisse.core import FiniteStructure, ParseError, Signature, SurjectiveMap, set_partitions
from dualfraisse.corpus import cycle, decorated_path, decorated_path_class, path, path_class, point
from dualfraisse.epi import enumerate_epimorphisms, enumerate_epimorphisms_naive, induced_structure
from dualfraisse.fraisse import (
    HPInstance,
    amalgamate,
    StructureClass,
    check_HP,
    check_JSP,
    check_PAP,
    check_class,
    hp_closure,
    parse_class_manifest,
    read_class,
    recheck,
)

from helpers import fixture_path


def brute_iso(A, B):
    return A.size == B.size and any(A.relabel(p) == B for p in itertools.permutations(range(A.size)))


def brute_quotient_types(s):
    types = []
    for p in set_partitions(s.size):
        q = induced_structure(s, SurjectiveMap.of(p))
        if not any(brute_iso(q, t) for t in types):
            types.append(q)
    return types


def brute_amalgam_exists(members, A, B, fa, fb, max_size):
    for D in members:
        if D.size > max_size:
            continue
        for ga in enumerate_epimorphisms_naive(D, A):
            for gb in enumerate_epimorphisms_naive(D, B):
                if ga.then(fa) == gb.then(fb):
                    return True
    return False


class TestStructureClass:
    def test_rejects_isomorphic_members(self):
        with pytest.raises(ValueError):
            StructureClass((path(3), path(3).relabel((2, 1, 0))), 3)

    def test_rejects_mixed_signatures(self):
        with pytest.raises(ValueError):
            StructureClass((point(), FiniteStructure(Signature(), 1)), 1)

    def test_from_structures_deduplicates(self):
        cls = StructureClass.from_structures([path(3), path(3).relabel((1, 0, 2)), point()])
        assert len(cls) == 2
        assert [m.size for m in cls] == [1, 3]

    def test_index_of(self):
        cls = path_class(4)
        assert cls.index_of(path(4).relabel((3, 1, 0, 2))) == 3
        assert cls.index_of(cycle(3)) is None


class TestPoint:
    def test_all_axioms_hold(self):
        cls = StructureClass.from_structures([point()])
        for rep in check_class(cls):
            assert rep.holds and not rep.bounded
            assert recheck(rep, cls)


class TestPaths:
    cls = path_class(4)

    def test_hp_fails_exactly(self):
        rep = check_HP(self.cls)
        assert not rep.holds and not rep.bounded
        q = rep.counterexample.induced
        assert not any(brute_iso(q, m) for m in self.cls)
        # the culprit is the triangle: the two path ends glued together
        assert brute_iso(q, cycle(3))

    def test_jsp_holds_with_checked_witnesses(self):
        rep = check_JSP(self.cls)
        assert rep.holds and rep.instances == 10
        assert recheck(rep, self.cls)

    def test_pap_fails_within_bound(self):
        rep = check_PAP(self.cls)
        assert not rep.holds and rep.bounded
        ce = rep.counterexample
        M = self.cls.members
        assert not brute_amalgam_exists(M, M[ce.a], M[ce.b], ce.f_a, ce.f_b, 4)

    def test_pap_counterexample_resolves_with_five_points(self):
        ce = check_PAP(self.cls).counterexample
        M = self.cls.members
        bigger = path_class(6)
        A, B = M[ce.a], M[ce.b]
        assert brute_amalgam_exists(bigger.members, A, B, ce.f_a, ce.f_b, 5)
        assert not brute_amalgam_exists(bigger.members, A, B, ce.f_a, ce.f_b, 4)


class TestConstructedFailures:
    def test_missing_quotient(self):
        cls = StructureClass.from_structures([path(2)])
        rep = check_HP(cls)
        assert not rep.holds
        ce = rep.counterexample
        assert isinstance(ce, HPInstance) and ce.induced.size == 1
        assert ce.map.table == (0, 0)

    def test_jsp_needs_larger_preimage(self):
        sig = Signature.of(("dual", "R", 2))
        A = FiniteStructure.build(sig, 2, {"R": [(0, 1), (1, 0)]})
        B = FiniteStructure.build(sig, 2, {})
        rep = check_JSP(StructureClass((A, B), 2))
        assert not rep.holds and rep.bounded

    def test_recheck_catches_tampering(self):
        cls = decorated_path_class(3)
        rep = check_PAP(cls)
        assert recheck(rep, cls)
        M = cls.members
        for i, w in enumerate(rep.witnesses):
            wrong = [e.map for e in enumerate_epimorphisms(M[w.d], M[w.b])
                     if e.map.then(w.f_b) != w.g_a.then(w.f_a)]
            if wrong:
                break
        rep.witnesses[i] = dataclasses.replace(w, g_b=wrong[0])
        assert not recheck(rep, cls)


def pullback_size(fa, fb):
    return sum(len(x) * len(y) for x, y in zip(fa.fibers(), fb.fibers()))


class TestEmptySignature:
    cls = StructureClass.from_structures([FiniteStructure(Signature(), n) for n in range(1, 5)])

    def test_hp_and_jsp_hold(self):
        for rep in check_class(self.cls, ("HP", "JSP")):
            assert rep.holds
            assert recheck(rep, self.cls)

    def test_pap_fails_only_where_the_pullback_is_too_big(self):
        rep = check_PAP(self.cls)
        assert not rep.holds and rep.bounded
        ce = rep.counterexample
        assert pullback_size(ce.f_a, ce.f_b) > self.cls.max_size

    def test_pap_holds_when_pullbacks_fit(self):
        big = StructureClass.from_structures([FiniteStructure(Signature(), n) for n in range(1, 10)], 9)
        small = StructureClass.from_structures([FiniteStructure(Signature(), n) for n in range(1, 4)], 9)
        M = small.members
        for a, b, c in itertools.product(range(3), repeat=3):
            for fa in enumerate_epimorphisms_naive(M[a], M[c]):
                for fb in enumerate_epimorphisms_naive(M[b], M[c]):
                    found = amalgamate(big, M[a], M[b], fa, fb)
                    assert found is not None
                    assert big.members[found[0]].size <= pullback_size(fa, fb)

    def test_pap_amalgams_agree_with_brute_force(self):
        cls = StructureClass.from_structures([FiniteStructure(Signature(), n) for n in range(1, 4)])
        rep = check_PAP(cls)
        M = cls.members
        for w in rep.witnesses:
            assert brute_amalgam_exists(M, M[w.a], M[w.b], w.f_a, w.f_b, 3)


class TestDecoratedPaths:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_axioms_hold(self, n):
        cls = decorated_path_class(n)
        for rep in check_class(cls):
            assert rep.holds, str(rep)
            assert recheck(rep, cls)

    def test_member_count_matches_brute_quotients(self):
        cls = decorated_path_class(4)
        assert len(cls) == len(brute_quotient_types(decorated_path(4))) == 11

    def test_top_member_is_the_decorated_path(self):
        cls = decorated_path_class(4)
        assert cls.index_of(decorated_path(4)) == len(cls) - 1

    def test_parallel_matches_serial(self):
        cls = decorated_path_class(3)
        serial = [str(r) for r in check_class(cls, jobs=1)]
        parallel = [str(r) for r in check_class(cls, jobs=2)]
        assert serial == parallel


def test_hp_closure_of_path():
    cls = hp_closure([path(4)])
    assert len(cls) == len(brute_quotient_types(path(4))) == 5
    assert check_HP(cls).holds


class TestManifest:
    def test_read_paths(self):
        cls = read_class(fixture_path("classes", "paths.class"))
        assert len(cls) == 4 and cls.max_size == 4

    def test_closure_directive(self):
        cls = read_class(fixture_path("classes", "decorated_path.class"))
        assert len(cls) == 11

    def test_bad_line(self):
        with pytest.raises(ParseError) as e:
            parse_class_manifest("max_size 3\nfrobnicate\n")
        assert e.value.line == 2

    def test_empty_manifest(self):
        with pytest.raises(ParseError):
            parse_class_manifest("max_size 3\n")
