import os

import pytest

from dualfraisse.core import ParseError, SurjectiveMap, surjections, surjective_labelings
from dualfraisse.corpus import decorated_path, decorated_path_class, path_class, point
from dualfraisse.epi import enumerate_epimorphisms_naive, first_epimorphism, is_epimorphism
from dualfraisse.fraisse import StructureClass
from dualfraisse.limits import (
    BoundedSearchFailure,
    InverseSystem,
    Thread,
    back_and_forth,
    build_age_chain,
    build_generic_sequence,
    certify_extension,
    evaluate_dual_tuple,
    level_tasks,
    read_bundle,
    recheck_discharges,
    seeded_shuffle,
    splitmix64,
    task_holds,
    write_bundle,
)

POINT = StructureClass.from_structures([point()])
DECORATED = decorated_path_class(4)


@pytest.fixture(scope="module")
def generic_pair():
    return [build_generic_sequence(DECORATED, 6, 3, seed) for seed in (1, 2)]


def constant_chain(s, depth):
    ident = SurjectiveMap.identity(s.size)
    return InverseSystem([s] * depth, [ident] * (depth - 1))


class TestSeeds:
    def test_splitmix_reference_values(self):
        g = splitmix64(1234567)
        assert [next(g) for _ in range(3)] == [6457827717110365317, 3203168211198807973, 9817491932198370423]
        assert next(splitmix64(0)) == 0xE220A8397B1DCDAF

    def test_shuffle_is_deterministic_permutation(self):
        a = seeded_shuffle(range(20), splitmix64(9))
        b = seeded_shuffle(range(20), splitmix64(9))
        assert a == b and sorted(a) == list(range(20))
        assert a != seeded_shuffle(range(20), splitmix64(10))


class TestSystem:
    def test_bond_shapes_checked(self):
        with pytest.raises(ValueError):
            InverseSystem([point(), point()], [])

    def test_threads_follow_bonds(self, generic_pair):
        sys = generic_pair[0]
        threads = sys.threads()
        assert len(threads) == sys.top.size
        assert all(sys.check_thread(t) for t in threads)

    def test_broken_thread(self, generic_pair):
        sys = generic_pair[0]
        t = sys.threads()[0]
        bad = Thread(t.coordinates[:-2] + ((t.coordinates[-2] + 1) % sys.levels[-2].size,) + t.coordinates[-1:])
        assert not sys.check_thread(bad)

    def test_projection_composes(self, generic_pair):
        sys = generic_pair[0]
        d = sys.depth - 1
        assert sys.projection(0, d) == sys.projection(1, d).then(sys.bonds[0])


class TestAgeChain:
    def test_point(self):
        chain = build_age_chain(POINT, 4)
        assert chain.levels == [point()] * 4

    def test_depth_one(self):
        chain = build_age_chain(path_class(4), 1)
        assert chain.depth == 1 and chain.levels[0] == point()

    def test_paths_every_member_is_a_quotient(self):
        cls = path_class(4)
        chain = build_age_chain(cls, 4)
        assert chain.is_valid()
        for k, member in enumerate(cls):
            assert any(first_epimorphism(L, member) is not None for L in chain.levels), k

    def test_paths_certificate_matches_exhaustive_search(self):
        cls = path_class(4)
        chain = build_age_chain(cls, 4)
        cert = certify_extension(chain, cls, 3)
        assert (len(cert.verdicts), len(cert.unfulfilled)) == (212, 84)
        assert cert.recheck(chain, cls)
        for v in cert.verdicts:
            t = v.task
            B, A = cls.members[t.b], cls.members[t.a]
            f = SurjectiveMap(t.f, A.size)
            g = SurjectiveMap(t.g, A.size)
            found = None
            for j in range(t.level, chain.depth):
                gj = chain.projection(t.level, j).then(g)
                if any(h.then(f) == gj for h in enumerate_epimorphisms_naive(chain.levels[j], B)):
                    found = j
                    break
            assert found == v.level

    def test_jsp_failure_is_bounded(self):
        from dualfraisse.core import FiniteStructure, Signature
        sig = Signature.of(("dual", "R", 2))
        A = FiniteStructure.build(sig, 2, {"R": [(0, 1), (1, 0)]})
        B = FiniteStructure.build(sig, 2, {})
        with pytest.raises(BoundedSearchFailure):
            build_age_chain(StructureClass((A, B), 2), 3)


class TestGenericSequence:
    def test_point_discharges_trivially(self):
        sys = build_generic_sequence(POINT, 6, 3, 0)
        assert sys.depth == 1
        assert all(not d.appended for d in sys.discharges)
        assert "exhausted" in sys.provenance[-1]
        assert certify_extension(sys, POINT, 3).complete

    def test_valid_and_self_consistent(self, generic_pair):
        for sys in generic_pair:
            assert sys.is_valid()
            assert recheck_discharges(sys, DECORATED)
            assert sys.top == decorated_path(4) or DECORATED.index_of(sys.top) == len(DECORATED) - 1

    def test_logged_tasks_pass_certification(self, generic_pair):
        for sys in generic_pair:
            cert = certify_extension(sys, DECORATED, 3)
            assert cert.complete and cert.recheck(sys, DECORATED)
            for d in sys.discharges:
                assert task_holds(sys, DECORATED, d.task, d.level, d.h)

    def test_seeds_change_the_construction(self, generic_pair):
        a, b = generic_pair
        assert a.provenance != b.provenance

    def test_same_seed_reproduces(self):
        a = build_generic_sequence(DECORATED, 6, 3, 5)
        b = build_generic_sequence(DECORATED, 6, 3, 5)
        assert a.provenance == b.provenance and a.bonds == b.bonds

    def test_queue_exhaustion_returns_short_prefix(self, generic_pair):
        for sys in generic_pair:
            assert sys.depth < 6
            assert sys.provenance[-1].startswith("task queue exhausted")

    def test_depth_cap(self):
        sys = build_generic_sequence(DECORATED, 2, 3, 1)
        assert sys.depth == 2
        assert "tasks queued" in sys.provenance[-1]

    def test_plain_paths_get_stuck(self):
        with pytest.raises(BoundedSearchFailure, match="no amalgam"):
            build_generic_sequence(path_class(4), 6, 3, 0)

    def test_task_enumeration_counts(self):
        tasks = level_tasks(0, DECORATED.members[0], DECORATED, 3)
        # from a point only the point is a target; one f per member onto the point
        assert len(tasks) == len(DECORATED.bounded(3))


class TestDualTuples:
    def test_constant_chain(self):
        D = decorated_path(4)
        sys = constant_chain(D, 4)
        for e in surjective_labelings(4, 2):
            rep = evaluate_dual_tuple(sys, 0, e)
            assert rep.stable
            assert all(all(v == rep.verdicts[n] for v in rep.pullbacks[n]) for n in rep.verdicts)

    def test_generic_sequences_are_stable(self, generic_pair):
        for sys in generic_pair:
            for i, L in enumerate(sys.levels):
                for k in range(2, L.size + 1):
                    for e in surjective_labelings(L.size, k):
                        assert evaluate_dual_tuple(sys, i, e).stable

    def test_corrupted_bond_detected(self):
        D = decorated_path(4)
        sys = InverseSystem([D, D], [SurjectiveMap((1, 0, 2, 3), 4)])
        assert not sys.is_valid()
        reports = [evaluate_dual_tuple(sys, 0, e) for e in surjective_labelings(4, 2)]
        assert not all(r.stable for r in reports)

    def test_errors(self):
        sys = constant_chain(decorated_path(4), 2)
        with pytest.raises(ValueError):
            evaluate_dual_tuple(sys, 0, (0, 1, 1))
        with pytest.raises(ValueError):
            evaluate_dual_tuple(sys, 0, (0, 2, 2, 2))
        with pytest.raises(ValueError):
            evaluate_dual_tuple(constant_chain(point(), 2), 0, (0,))


class TestBackAndForth:
    def test_point_chains(self):
        sys = constant_chain(point(), 3)
        bf = back_and_forth(sys, sys, POINT, 4, (point(), (0,), (0,)))
        assert bf.complete and all(A.size == 1 for A in bf.levels)
        assert bf.recheck(sys, sys) and bf.anchored(sys, sys)

    def test_two_seeds(self, generic_pair):
        s1, s2 = generic_pair
        for anchor in range(len(DECORATED)):
            A = DECORATED.members[anchor]
            f = first_epimorphism(s1.levels[0], A)
            g = first_epimorphism(s2.levels[0], A)
            if f is None or g is None:
                continue
            bf = back_and_forth(s1, s2, DECORATED, 5, (A, f.map, g.map))
            assert bf.complete
            assert bf.recheck(s1, s2) and bf.anchored(s1, s2)

    def test_tower_reaches_the_top_member(self, generic_pair):
        s1, s2 = generic_pair
        P = DECORATED.members[0]
        bf = back_and_forth(s1, s2, DECORATED, 5, (P, (0,), (0,)))
        assert DECORATED.index_of(bf.levels[-1]) == len(DECORATED) - 1

    def test_stuck_even_step(self, generic_pair):
        s1 = generic_pair[0]
        two = next(m for m in DECORATED if m.size == 2)
        short = InverseSystem([two], [])
        bf = back_and_forth(short, s1, DECORATED, 5, (DECORATED.members[0], (0, 0), (0,)))
        assert not bf.complete
        assert bf.stuck.startswith("step 2 (even)")
        assert bf.recheck(short, s1)

    def test_anchor_must_be_epimorphism(self, generic_pair):
        s1, s2 = generic_pair
        with pytest.raises(ValueError):
            back_and_forth(s1, s2, DECORATED, 3, (DECORATED.members[1], (0,), (0,)))


class TestBundles:
    def test_round_trip(self, generic_pair, tmp_path):
        sys = generic_pair[0]
        write_bundle(sys, tmp_path / "b")
        back = read_bundle(tmp_path / "b")
        assert back.levels == sys.levels and back.bonds == sys.bonds
        assert back.provenance == sys.provenance
        assert sorted(os.listdir(tmp_path / "b"))[:2] == ["bonds.txt", "level_01.struct"]

    def test_corrupted_bond_rejected(self, generic_pair, tmp_path):
        sys = generic_pair[0]
        write_bundle(sys, tmp_path / "b")
        src, tgt = sys.levels[-1], sys.levels[-2]
        wrong = next(f for f in surjections(src.size, tgt.size) if not is_epimorphism(f, src, tgt))
        lines = (tmp_path / "b" / "bonds.txt").read_text().splitlines()
        lines[-1] = " ".join(map(str, wrong.table))
        (tmp_path / "b" / "bonds.txt").write_text("\n".join(lines) + "\n")
        assert not read_bundle(tmp_path / "b", check=False).is_valid()
        with pytest.raises(ParseError):
            read_bundle(tmp_path / "b")

    def test_missing_bond(self, generic_pair, tmp_path):
        write_bundle(generic_pair[0], tmp_path / "b")
        (tmp_path / "b" / "bonds.txt").write_text("0 0\n")
        with pytest.raises(ParseError):
            read_bundle(tmp_path / "b")
