# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Inputs come from ``MapProblem.arrays()``; see kernels.py."""

from libc.stdlib cimport calloc, free, qsort


cdef inline Py_ssize_t _find(const long long[:] arr, Py_ssize_t lo, Py_ssize_t hi, long long v):
    """Index of ``v`` in ``arr[lo:hi]`` or -1."""
    cdef Py_ssize_t mid, end = hi
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    if lo < end and arr[lo] == v:
        return lo
    return -1


cdef class _Search:
    cdef int n, m, injective, nd, nu, limit
    cdef const signed char[:] allowed
    cdef const long long[:] d_arity, d_src, d_tgt, d_tgt_start
    cdef const long long[:] rec_start, rec_c, rec_off
    cdef const long long[:] u_arity, u_src, u_src_start, u_pref, u_pref_start
    cdef const long long[:] u_tgt, u_tgt_start, u_tgt_owner, u_tgtcode, u_tgtcode_start
    cdef long long *h
    cdef long long *used
    cdef long long *hits
    cdef long long *cur
    cdef long long *pushed
    cdef long long *added
    cdef Py_ssize_t n_tgt_labelings
    cdef list out

    def __cinit__(self, dict a, int limit):
        self.n = a["n"]
        self.m = a["m"]
        self.injective = a["injective"]
        self.limit = limit
        self.allowed = a["allowed"]
        self.d_arity = a["d_arity"]
        self.d_src = a["d_src"]
        self.d_tgt = a["d_tgt"]
        self.d_tgt_start = a["d_tgt_start"]
        self.rec_start = a["rec_start"]
        self.rec_c = a["rec_c"]
        self.rec_off = a["rec_off"]
        self.u_arity = a["u_arity"]
        self.u_src = a["u_src"]
        self.u_src_start = a["u_src_start"]
        self.u_pref = a["u_pref"]
        self.u_pref_start = a["u_pref_start"]
        self.u_tgt = a["u_tgt"]
        self.u_tgt_start = a["u_tgt_start"]
        self.u_tgt_owner = a["u_tgt_owner"]
        self.u_tgtcode = a["u_tgtcode"]
        self.u_tgtcode_start = a["u_tgtcode_start"]
        self.nd = len(a["d_arity"])
        self.nu = len(a["u_arity"])
        self.n_tgt_labelings = len(a["u_tgt_owner"])
        self.h = <long long *> calloc(self.n + 1, sizeof(long long))
        self.used = <long long *> calloc(self.m + 1, sizeof(long long))
        self.hits = <long long *> calloc(len(a["d_tgt"]) + 1, sizeof(long long))
        self.cur = <long long *> calloc((self.n_tgt_labelings + 1) * (self.n + 1), sizeof(long long))
        self.pushed = <long long *> calloc(self.m + 1, sizeof(long long))
        self.added = <long long *> calloc(len(a["rec_c"]) + 1, sizeof(long long))
        if (self.h == NULL or self.used == NULL or self.hits == NULL or self.cur == NULL
                or self.pushed == NULL or self.added == NULL):
            raise MemoryError()
        self.out = []

    def __dealloc__(self):
        free(self.h)
        free(self.used)
        free(self.hits)
        free(self.cur)
        free(self.pushed)
        free(self.added)

    cdef bint _leaf_ok(self):
        cdef Py_ssize_t c, i, x, L
        cdef long long b, lab, code, k
        cdef bint factors
        for i in range(self.d_tgt.shape[0]):
            if self.hits[i] == 0:
                return False
        for c in range(self.nu):
            k = self.u_arity[c]
            for L in range(self.u_src_start[c], self.u_src_start[c + 1]):
                for b in range(self.m):
                    self.pushed[b] = -1
                factors = True
                for x in range(self.n):
                    b = self.h[x]
                    lab = self.u_src[L * self.n + x]
                    if self.pushed[b] < 0:
                        self.pushed[b] = lab
                    elif self.pushed[b] != lab:
                        factors = False
                        break
                if not factors:
                    continue
                code = 0
                for b in range(self.m):
                    code = code * k + self.pushed[b]
                if _find(self.u_tgtcode, self.u_tgtcode_start[c], self.u_tgtcode_start[c + 1], code) < 0:
                    return False
        return True

    cdef bint _descend(self, int t, int covered, Py_ssize_t added_top):
        """Returns True when the solution limit is reached."""
        cdef int n = self.n, m = self.m
        cdef long long b, k, code, v
        cdef int newly, j, jj, c
        cdef Py_ssize_t r, q, off, pos, nadded, blk
        cdef bint ok, injective_img, stop
        if t == n:
            if self._leaf_ok():
                self.out.append(tuple([self.h[i] for i in range(n)]))
                return self.limit > 0 and len(self.out) >= self.limit
            return False
        for b in range(m):
            if not self.allowed[t * m + b]:
                continue
            if self.injective and self.used[b]:
                continue
            newly = 1 if self.used[b] == 0 else 0
            if m - covered - newly > n - t - 1:
                continue
            self.h[t] = b
            ok = True
            nadded = 0
            for r in range(self.rec_start[t], self.rec_start[t + 1]):
                c = <int> self.rec_c[r]
                off = self.rec_off[r]
                k = self.d_arity[c]
                injective_img = True
                code = 0
                for j in range(k):
                    v = self.h[self.d_src[off + j]]
                    for jj in range(j):
                        if self.h[self.d_src[off + jj]] == v:
                            injective_img = False
                            break
                    if not injective_img:
                        break
                    code = code * m + v
                if not injective_img:
                    continue
                pos = _find(self.d_tgt, self.d_tgt_start[c], self.d_tgt_start[c + 1], code)
                if pos < 0:
                    ok = False
                    break
                self.hits[pos] += 1
                self.added[added_top + nadded] = pos
                nadded += 1
            if ok:
                for q in range(self.n_tgt_labelings):
                    c = <int> self.u_tgt_owner[q]
                    k = self.u_arity[c]
                    code = self.cur[q * (n + 1) + t] * k + self.u_tgt[q * m + b]
                    self.cur[q * (n + 1) + t + 1] = code
                    blk = c * n + t
                    if _find(self.u_pref, self.u_pref_start[blk], self.u_pref_start[blk + 1], code) < 0:
                        ok = False
                        break
            stop = False
            if ok:
                self.used[b] += 1
                stop = self._descend(t + 1, covered + newly, added_top + nadded)
                self.used[b] -= 1
            for r in range(nadded):
                self.hits[self.added[added_top + r]] -= 1
            if stop:
                return True
        return False


def search_maps(problem, int limit=0):
    cdef _Search s = _Search(problem.arrays(), limit)
    s._descend(0, 0, 0)
    return s.out


cdef int _cmp_ll(const void *a, const void *b) noexcept nogil:
    cdef long long x = (<long long *> a)[0]
    cdef long long y = (<long long *> b)[0]
    return (x > y) - (x < y)


cdef bint _next_permutation(long long *p, int n):
    cdef int i = n - 2, j
    cdef long long tmp
    while i >= 0 and p[i] >= p[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while p[j] <= p[i]:
        j -= 1
    tmp = p[i]; p[i] = p[j]; p[j] = tmp
    i += 1
    j = n - 1
    while i < j:
        tmp = p[i]; p[i] = p[j]; p[j] = tmp
        i += 1
        j -= 1
    return True


def canonical_permutation(int n, list rels):
    cdef int nsym = len(rels)
    cdef Py_ssize_t total = 0, i, t, s, j, x
    cdef long long *perm
    cdef long long *best_perm
    cdef long long *best
    cdef long long *cur
    cdef long long *tuples
    cdef long long *sym_is_dual
    cdef long long *sym_arity
    cdef long long *sym_count
    cdef long long *sym_off
    cdef long long *tup_off
    cdef long long *relab
    cdef long long code, k
    cdef int state
    cdef bint first = True
    cdef Py_ssize_t total_entries = 0
    for is_dual, arity, tups in rels:
        total += len(tups)
        for tup in tups:
            total_entries += len(tup)
    perm = <long long *> calloc(n + 1, sizeof(long long))
    best_perm = <long long *> calloc(n + 1, sizeof(long long))
    best = <long long *> calloc(total + 1, sizeof(long long))
    cur = <long long *> calloc(total + 1, sizeof(long long))
    tuples = <long long *> calloc(total_entries + 1, sizeof(long long))
    tup_off = <long long *> calloc(total + 1, sizeof(long long))
    sym_is_dual = <long long *> calloc(nsym + 1, sizeof(long long))
    sym_arity = <long long *> calloc(nsym + 1, sizeof(long long))
    sym_count = <long long *> calloc(nsym + 1, sizeof(long long))
    sym_off = <long long *> calloc(nsym + 1, sizeof(long long))
    relab = <long long *> calloc(n + 1, sizeof(long long))
    try:
        if (perm == NULL or best_perm == NULL or best == NULL or cur == NULL or tuples == NULL
                or tup_off == NULL or sym_is_dual == NULL or sym_arity == NULL or sym_count == NULL
                or sym_off == NULL or relab == NULL):
            raise MemoryError()
        t = 0
        x = 0
        for s, (is_dual, arity, tups) in enumerate(rels):
            sym_is_dual[s] = 1 if is_dual else 0
            sym_arity[s] = arity
            sym_count[s] = len(tups)
            sym_off[s] = t
            for tup in tups:
                tup_off[t] = x
                for v in tup:
                    tuples[x] = v
                    x += 1
                t += 1
        for i in range(n):
            perm[i] = i
        while True:
            # state: 0 equal so far, -1 already smaller, +1 larger (abandon)
            state = -1 if first else 0
            for s in range(nsym):
                k = sym_arity[s]
                for t in range(sym_off[s], sym_off[s] + sym_count[s]):
                    code = 0
                    if sym_is_dual[s]:
                        for j in range(n):
                            relab[perm[j]] = tuples[tup_off[t] + j]
                        for j in range(n):
                            code = code * k + relab[j]
                    else:
                        for j in range(k):
                            code = code * n + perm[tuples[tup_off[t] + j]]
                    cur[t] = code
                if sym_count[s] > 1:
                    qsort(cur + sym_off[s], sym_count[s], sizeof(long long), _cmp_ll)
                if state == 0:
                    for t in range(sym_off[s], sym_off[s] + sym_count[s]):
                        if cur[t] < best[t]:
                            state = -1
                            break
                        if cur[t] > best[t]:
                            state = 1
                            break
                    if state == 1:
                        break
            if state == -1:
                for t in range(total):
                    best[t] = cur[t]
                for i in range(n):
                    best_perm[i] = perm[i]
            first = False
            if not _next_permutation(perm, n):
                break
        return tuple([best_perm[i] for i in range(n)])
    finally:
        free(perm); free(best_perm); free(best); free(cur); free(tuples); free(tup_off)
        free(sym_is_dual); free(sym_arity); free(sym_count); free(sym_off); free(relab)
