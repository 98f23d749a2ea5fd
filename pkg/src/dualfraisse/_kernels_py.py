"""Pure Python kernels.  Same results, same order as the compiled module."""

from __future__ import annotations

import itertools


def search_maps(problem, limit=0):
    n, m = problem.n, problem.m
    allowed = [sorted(a) for a in problem.allowed_sets()]

    # direct tuples grouped by the point that completes them
    completing = [[] for _ in range(n)]
    for c, (k, src, tgt) in enumerate(problem.direct):
        for t in src:
            completing[max(t)].append((c, t))
    direct_targets = [frozenset(tgt) for _, _, tgt in problem.direct]

    dual_prefixes = []
    dual_sources = []
    dual_targets = []
    for k, src, tgt in problem.dual:
        dual_prefixes.append([None] + [frozenset(e[:L] for e in src) for L in range(1, n + 1)])
        dual_sources.append(list(src))
        dual_targets.append((frozenset(tgt), list(tgt)))

    h = [0] * n
    used = [0] * m
    hits = [dict() for _ in problem.direct]
    out = []

    def leaf_ok():
        for c, targets in enumerate(direct_targets):
            if len(hits[c]) != len(targets):
                return False
        for c, src in enumerate(dual_sources):
            tgt_set = dual_targets[c][0]
            for e in src:
                pushed = [-1] * m
                factors = True
                for x in range(n):
                    b = h[x]
                    if pushed[b] < 0:
                        pushed[b] = e[x]
                    elif pushed[b] != e[x]:
                        factors = False
                        break
                if factors and tuple(pushed) not in tgt_set:
                    return False
        return True

    def descend(t, covered):
        if t == n:
            if leaf_ok():
                out.append(tuple(h))
                return limit and len(out) >= limit
            return False
        for b in allowed[t]:
            if problem.injective and used[b]:
                continue
            newly = used[b] == 0
            if m - covered - newly > n - t - 1:
                continue
            h[t] = b
            added = []
            ok = True
            for c, tup in completing[t]:
                img = tuple(h[a] for a in tup)
                if len(set(img)) < len(img):
                    continue
                if img not in direct_targets[c]:
                    ok = False
                    break
                hits[c][img] = hits[c].get(img, 0) + 1
                added.append((c, img))
            if ok:
                for c, (tgt_set, tgt_list) in enumerate(dual_targets):
                    prefixes = dual_prefixes[c][t + 1]
                    for beta in tgt_list:
                        if tuple(beta[h[x]] for x in range(t + 1)) not in prefixes:
                            ok = False
                            break
                    if not ok:
                        break
            stop = False
            if ok:
                used[b] += 1
                stop = descend(t + 1, covered + newly)
                used[b] -= 1
            for c, img in added:
                hits[c][img] -= 1
                if not hits[c][img]:
                    del hits[c][img]
            if stop:
                return True
        return False

    descend(0, 0)
    return out


def _encode(n, rels, perm):
    key = []
    for is_dual, arity, tuples in rels:
        if is_dual:
            enc = []
            for e in tuples:
                new = [0] * n
                for x, lab in enumerate(e):
                    new[perm[x]] = lab
                enc.append(tuple(new))
        else:
            enc = [tuple(perm[a] for a in t) for t in tuples]
        enc.sort()
        key.append(tuple(enc))
    return tuple(key)


def canonical_permutation(n, rels):
    best = None
    best_perm = None
    for perm in itertools.permutations(range(n)):
        key = _encode(n, rels, perm)
        if best is None or key < best:
            best, best_perm = key, perm
    return best_perm
