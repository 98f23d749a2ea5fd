"""``dualfraisse`` command line.

Exit codes: 0 success or verdict true, 1 verdict false, 2 usage or parse
error, 3 bounded search inconclusive.  Reports are sorted ``key: value`` lines.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, Sequence

from . import __version__
from .core import (
    DEFAULT_CANON_BOUND,
    CanonicalizationError,
    ParseError,
    SurjectiveMap,
    ValidationError,
    parse_structure,
    read_structure,
    serialize_structure,
    validate_structure,
    write_structure,
)
from .epi import (
    automorphism_group,
    common_refinement,
    enumerate_epimorphisms,
    enumerate_epimorphisms_naive,
    find_isomorphism,
    first_epimorphism,
    induced_structure,
    is_epimorphism,
)
from .fraisse import check_class, read_class
from .limits import (
    BoundedSearchFailure,
    back_and_forth,
    build_age_chain,
    build_generic_sequence,
    certify_extension,
    read_bundle,
    write_bundle,
)
from .prespace import NotPrespace, cantor_report, check_prespace, interval_report, quotient_by_r
from .report import format_block, format_blocks
from .transforms import dualize, orbit_structure, read_group, verify_dualization, verify_orbit_homogeneity, verify_orbit_structure

OK, FALSE, USAGE, BOUNDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _out(text: str) -> None:
    sys.stdout.write(text)


def _load(path: str, validate: bool = True):
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    return parse_structure(text, path, validate)


def _map_arg(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"{what}: expected integers, got {text!r}") from None


def _surj(table, target_size: int, what: str) -> SurjectiveMap:
    try:
        return SurjectiveMap(table, target_size)
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from None


def _maps_block(prefix: str, tables) -> dict:
    return {f"{prefix}.{i:03d}": " ".join(map(str, t)) for i, t in enumerate(tables, start=1)}


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    blocks = []
    code = OK
    for path in args.files:
        s = _load(path, validate=False)
        problems = validate_structure(s)
        fields = {"file": path, "valid": not problems, "size": s.size, "symbols": len(s.sig.symbols)}
        for i, v in enumerate(problems, start=1):
            fields[f"violation.{i:03d}"] = str(v)
        if problems:
            code = FALSE
        blocks.append(fields)
    _out(format_blocks(blocks))
    return code


def cmd_epis(args) -> int:
    A, B = _load(args.source), _load(args.target)
    if args.naive:
        tables = [f.table for f in enumerate_epimorphisms_naive(A, B)]
    else:
        tables = [e.table for e in enumerate_epimorphisms(A, B)]
    _out(format_block({"count": len(tables), **_maps_block("map", tables)}))
    return OK


def cmd_induce(args) -> int:
    K = _load(args.structure)
    table = _map_arg(args.map, "--map")
    f = _surj(table, max(table, default=-1) + 1, "--map")
    if f.source_size != K.size:
        raise UsageError(f"--map has {f.source_size} entries, structure has {K.size} points")
    A = induced_structure(K, f)
    if args.out:
        write_structure(A, args.out)
    _out(serialize_structure(A))
    return OK


def cmd_refine(args) -> int:
    K = _load(args.structure)
    f = _map_arg(args.f, "--f")
    g = _map_arg(args.g, "--g")
    for name, t in (("--f", f), ("--g", g)):
        if len(t) != K.size:
            raise UsageError(f"{name} has {len(t)} entries, structure has {K.size} points")
    fm = _surj(f, max(f) + 1, "--f")
    gm = _surj(g, max(g) + 1, "--g")
    ref = common_refinement(K, fm, gm)
    fields = {
        "size": ref.refined.size,
        "h": str(ref.h.map),
        "factor_f": str(ref.factor_f.map),
        "factor_g": str(ref.factor_g.map),
        "blocks": " ".join(f"({a},{b})" for a, b in ref.blocks),
        "factor_f_commutes": ref.h.map.then(ref.factor_f.map) == fm,
        "factor_g_commutes": ref.h.map.then(ref.factor_g.map) == gm,
    }
    if args.out:
        write_structure(ref.refined, args.out)
    _out(format_block(fields))
    return OK


def cmd_iso(args) -> int:
    A, B = _load(args.first), _load(args.second)
    iso = find_isomorphism(A, B)
    fields = {"isomorphic": iso is not None}
    if iso is not None:
        fields["map"] = str(iso.map)
    _out(format_block(fields))
    return OK if iso is not None else FALSE


def cmd_aut(args) -> int:
    A = _load(args.structure)
    tables = [a.table for a in automorphism_group(A)]
    _out(format_block({"order": len(tables), **_maps_block("element", tables)}))
    return OK


def _class(args):
    return read_class(args.manifest, args.canon_bound)


def cmd_check_class(args) -> int:
    cls = _class(args)
    axioms = [a.strip().upper() for a in args.axioms.split(",") if a.strip()]
    bad = [a for a in axioms if a not in ("HP", "JSP", "PAP")]
    if bad:
        raise UsageError(f"unknown axiom(s) {', '.join(bad)}")
    reports = check_class(cls, axioms, args.jobs)
    blocks = []
    for r in reports:
        f = r.fields()
        f["members"] = len(cls)
        f["max_size"] = cls.max_size
        blocks.append(f)
    _out(format_blocks(blocks))
    if any(not r.holds and not r.bounded for r in reports):
        return FALSE
    if any(not r.holds for r in reports):
        return BOUNDED
    return OK


def cmd_build_limit(args) -> int:
    cls = _class(args)
    if args.mode == "age":
        system = build_age_chain(cls, args.depth)
    else:
        system = build_generic_sequence(cls, args.depth, args.task_bound, args.seed)
    if args.out:
        write_bundle(system, args.out)
    fields = {
        "mode": args.mode,
        "depth": system.depth,
        "requested_depth": args.depth,
        "seed": args.seed,
        "valid": system.is_valid(),
        "discharges": len(system.discharges),
    }
    for i, L in enumerate(system.levels, start=1):
        idx = cls.index_of(L)
        fields[f"level.{i:02d}.size"] = L.size
        fields[f"level.{i:02d}.member"] = "none" if idx is None else idx
    for i, b in enumerate(system.bonds, start=1):
        fields[f"bond.{i:02d}"] = str(b)
    _out(format_block(fields))
    return OK


def _bundle(path: str):
    if not os.path.isdir(path):
        raise UsageError(f"{path}: not a bundle directory")
    return read_bundle(path)


def cmd_certify(args) -> int:
    system = _bundle(args.bundle)
    cls = _class(args)
    cert = certify_extension(system, cls, args.task_bound, args.jobs)
    fields = cert.fields(detail=not args.summary)
    fields["recheck"] = cert.recheck(system, cls)
    _out(format_block(fields))
    return OK if cert.complete else BOUNDED


def cmd_back_and_forth(args) -> int:
    sys1, sys2 = _bundle(args.first), _bundle(args.second)
    cls = _class(args)
    if not 0 <= args.anchor < len(cls):
        raise UsageError(f"--anchor must name a member index in 0..{len(cls) - 1}")
    A = cls.members[args.anchor]
    maps = []
    for system, opt, name in ((sys1, args.f, "--f"), (sys2, args.g, "--g")):
        if opt is None:
            e = first_epimorphism(system.levels[0], A)
            if e is None:
                raise UsageError(f"level 1 of a bundle does not map onto member {args.anchor}")
            maps.append(e.map)
        else:
            m = _surj(_map_arg(opt, name), A.size, name)
            if m.source_size != system.levels[0].size or not is_epimorphism(m, system.levels[0], A):
                raise UsageError(f"{name} is not an epimorphism from level 1 onto member {args.anchor}")
            maps.append(m)
    result = back_and_forth(sys1, sys2, cls, args.depth, (A, maps[0], maps[1]))
    fields = result.fields(cls)
    fields["recheck"] = result.recheck(sys1, sys2)
    fields["anchored"] = result.anchored(sys1, sys2)
    _out(format_block(fields))
    return OK if result.complete else BOUNDED


def cmd_dualize(args) -> int:
    M = _load(args.structure)
    if args.symbol not in M.sig:
        raise UsageError(f"{args.structure}: no symbol {args.symbol!r}")
    if M.sig[args.symbol].is_dual:
        raise UsageError(f"{args.structure}: {args.symbol!r} is a dual symbol")
    D = dualize(M, args.symbol)
    if args.out:
        write_structure(D, args.out)
    if args.verify:
        rep = verify_dualization(M, args.symbol)
        _out(str(rep))
        return OK if rep.equal else FALSE
    _out(serialize_structure(D))
    return OK


def _group(args):
    G = read_group(args.group)
    arity = G.degree if args.max_arity is None else args.max_arity
    if G.degree < 2 or not 2 <= arity <= G.degree:
        raise UsageError(f"--max-arity must lie in 2..{G.degree}")
    return G, arity


def cmd_orbits(args) -> int:
    G, arity = _group(args)
    K = orbit_structure(G, arity)
    if args.out:
        write_structure(K, args.out)
    _out(serialize_structure(K))
    return OK


def cmd_verify_orbits(args) -> int:
    G, arity = _group(args)
    rep = verify_orbit_structure(G, arity)
    fields = {f"aut.{k}": v for k, v in _parse(str(rep)).items()}
    ok = rep.equal
    if arity == G.degree:
        hom = verify_orbit_homogeneity(G)
        fields.update({f"homogeneity.{k}": v for k, v in _parse(str(hom)).items()})
        ok = ok and hom.holds
    _out(format_block(fields))
    return OK if ok else FALSE


def _parse(text: str) -> dict:
    from .report import parse_block
    return parse_block(text)


def cmd_quotient(args) -> int:
    s = _load(args.structure)
    if not s.sig.r_reserved:
        raise UsageError(f"{args.structure}: signature does not reserve r")
    rep = check_prespace(s)
    if not rep.is_prespace:
        _out(str(rep))
        return FALSE
    Q, q = quotient_by_r(s)
    if args.out:
        write_structure(Q, args.out)
    _out(format_block({"classes": len(rep.classes), "map": str(q),
                       "epimorphism": is_epimorphism(q, _without_r(s), Q)}))
    _out(serialize_structure(Q))
    return OK


def _without_r(s):
    from .core import RESERVED, FiniteStructure
    return FiniteStructure(s.sig.without(RESERVED), s.size,
                           tuple(r for sym, r in s.items() if sym.name != RESERVED))


def _demo(args, builder: Callable) -> int:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    system, report = builder()
    text = str(report)
    if args.out:
        write_bundle(system, args.out)
        with open(os.path.join(args.out, "report.txt"), "w", encoding="ascii") as fh:
            fh.write(text)
    _out(text)
    return OK


def cmd_demo_interval(args) -> int:
    return _demo(args, lambda: interval_report(args.depth, args.reflection))


def cmd_demo_cantor(args) -> int:
    return _demo(args, lambda: cantor_report(args.depth))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualfraisse", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent checks")
    p.add_argument("--canon-bound", type=int, default=DEFAULT_CANON_BOUND,
                   help="largest domain canonicalized by brute force")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("validate", cmd_validate, "check structure files")
    sp.add_argument("files", nargs="+")

    sp = add("epis", cmd_epis, "list all epimorphisms A -> B")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--naive", action="store_true", help="use the definitional filter")

    sp = add("induce", cmd_induce, "structure induced by a surjection")
    sp.add_argument("structure")
    sp.add_argument("--map", required=True, help="image list, e.g. '0 0 1'")
    sp.add_argument("--out")

    sp = add("refine", cmd_refine, "common refinement of two maps out of K")
    sp.add_argument("structure")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--out")

    sp = add("iso", cmd_iso, "decide isomorphism")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = add("aut", cmd_aut, "automorphism group")
    sp.add_argument("structure")

    sp = add("check-class", cmd_check_class, "check HP, JSP and PAP for a class manifest")
    sp.add_argument("manifest")
    sp.add_argument("--axioms", default="HP,JSP,PAP")

    sp = add("build-limit", cmd_build_limit, "build a prefix of an inverse sequence")
    sp.add_argument("manifest")
    sp.add_argument("--mode", choices=("generic", "age"), default="generic")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--task-bound", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("certify", cmd_certify, "certify the extension property of a bundle")
    sp.add_argument("bundle")
    sp.add_argument("manifest")
    sp.add_argument("--task-bound", type=int, default=3)
    sp.add_argument("--summary", action="store_true", help="omit per-task lines")

    sp = add("back-and-forth", cmd_back_and_forth, "intertwine two bundles over an anchor")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("manifest")
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--anchor", type=int, default=0, help="member index of the anchor A")
    sp.add_argument("--f", help="map from the first bundle's level 1 onto A")
    sp.add_argument("--g", help="map from the second bundle's level 1 onto A")

    sp = add("dualize", cmd_dualize, "replace a direct symbol by its dual encoding")
    sp.add_argument("structure")
    sp.add_argument("symbol")
    sp.add_argument("--verify", action="store_true", help="compare automorphism groups instead")
    sp.add_argument("--out")

    sp = add("orbits", cmd_orbits, "orbit structure of a permutation group")
    sp.add_argument("group")
    sp.add_argument("--max-arity", type=int)
    sp.add_argument("--out")

    sp = add("verify-orbits", cmd_verify_orbits, "check Aut of the orbit structure and homogeneity")
    sp.add_argument("group")
    sp.add_argument("--max-arity", type=int)

    sp = add("quotient", cmd_quotient, "quotient of a pre-space by r")
    sp.add_argument("structure")
    sp.add_argument("--out")

    for name, fn, help_ in (("demo-interval", cmd_demo_interval, "dyadic interval system"),
                            ("demo-cantor", cmd_demo_cantor, "Cantor cylinder system")):
        sp = add(name, fn, help_)
        sp.add_argument("--depth", type=int, default=5)
        sp.add_argument("--out")
        if name == "demo-interval":
            sp.add_argument("--reflection", action="store_true", help="also check x -> 1-x")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    if args.canon_bound < 1:
        parser.error("--canon-bound must be positive")
    try:
        return args.func(args)
    except (ParseError, ValidationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except NotPrespace as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FALSE
    except (BoundedSearchFailure, CanonicalizationError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return BOUNDED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
