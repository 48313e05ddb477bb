# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernels.

Same contracts and tie-breaking as :mod:`moosolver._pykernels`; the
parity tests require bit-identical totals, values, and trees.  The
branch-and-bound recursions run as C loops over preallocated per-depth
workspaces; Python objects appear only for finished subtrees and for
the occasional symmetry-provider callback at shallow depths.

Two scan-level devices keep the hot loop short: class counts are
tracked through a touched-class list instead of full resets, and a
candidate's scan is abandoned as soon as a weak incremental bound
(single lower-bound row for the whole set's digit count) shows it
cannot come in under the caller's budget.  Beyond the set-verified
symmetry depth, history-equivalent guesses can optionally be eliminated
with a per-depth cached sweep; sibling nodes share one list because the
equivalence depends only on the guess prefix.
"""

from itertools import permutations as _permutations

import numpy as np

from .config import MAX_SEARCH_DEPTH, SolveConfig
from .errors import SearchDepthError

from libc.stdlib cimport free, malloc
from libc.string cimport memcmp, memcpy, memset
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t

NAME = "compiled"

cdef int64_t INF = <int64_t>1 << 60
cdef int64_t UBBIAS = <int64_t>1 << 35
cdef int MAXK = 16
cdef int MAXD = 128
cdef int MAXPREFIX = 12


cdef inline void _sift_down(int64_t *h, int start, int end) noexcept:
    cdef int root = start
    cdef int child
    cdef int64_t tmp
    while 2 * root + 1 <= end:
        child = 2 * root + 1
        if child + 1 <= end and h[child + 1] < h[child]:
            child += 1
        if h[child] < h[root]:
            tmp = h[child]
            h[child] = h[root]
            h[root] = tmp
            root = child
        else:
            return


cdef inline void heap_build(int64_t *h, int m) noexcept:
    cdef int s
    for s in range(m // 2 - 1, -1, -1):
        _sift_down(h, s, m - 1)


cdef inline int64_t heap_pop(int64_t *h, int *m) noexcept:
    cdef int64_t v = h[0]
    m[0] -= 1
    h[0] = h[m[0]]
    _sift_down(h, 0, m[0] - 1)
    return v


cdef struct Level:
    int32_t *childbuf
    int64_t *heap
    int32_t *cand
    uint8_t *clsbuf
    int32_t *dcand    # cached history-equivalence candidate list
    uint8_t *dseen
    int dcand_n
    int dvalid
    int32_t dprefix[12]
    # per-class scratch for one expansion
    int32_t coff[16]
    int32_t csize[16]
    int32_t corder[16]
    int64_t cbound[16]
    int64_t csuf[17]


cdef class Engine:
    cdef readonly object tables
    cdef readonly object params
    cdef readonly object config
    cdef public object provider

    cdef int S, K, p, p1
    cdef bint prune, use_bounds, symmetry, small_sets, cap_bound, deep_sym
    cdef int sym_depth, deep_sym_depth

    cdef object _refs
    cdef int32_t *packed
    cdef int32_t *himask
    cdef uint8_t *bull
    cdef uint8_t *cow
    cdef int8_t *clsfl
    cdef uint8_t *digit_rows
    cdef int32_t *val_to_idx
    cdef int8_t *perms
    cdef int nperms
    cdef int32_t *lb
    cdef int lb_stride
    cdef int32_t *lb_trivial
    cdef uint8_t *clsmat
    cdef int64_t *gamma
    cdef int glen
    cdef int64_t gamma_floor
    cdef int64_t *ubtab
    cdef int ub_stride_d, ub_stride_k

    cdef Level levels[128]
    cdef list _tree_slots
    cdef int32_t hist_g[128]
    cdef int32_t hist_c[128]
    cdef object _mn_memo
    cdef int64_t st_nodes, st_scanned, st_expanded, st_tie_expanded

    def __cinit__(self):
        cdef int i
        for i in range(MAXD):
            self.levels[i].childbuf = NULL
            self.levels[i].heap = NULL
            self.levels[i].cand = NULL
            self.levels[i].clsbuf = NULL
            self.levels[i].dcand = NULL
            self.levels[i].dseen = NULL
            self.levels[i].dvalid = 0

    def __dealloc__(self):
        cdef int i
        for i in range(MAXD):
            if self.levels[i].childbuf != NULL:
                free(self.levels[i].childbuf)
            if self.levels[i].heap != NULL:
                free(self.levels[i].heap)
            if self.levels[i].cand != NULL:
                free(self.levels[i].cand)
            if self.levels[i].clsbuf != NULL:
                free(self.levels[i].clsbuf)
            if self.levels[i].dcand != NULL:
                free(self.levels[i].dcand)
            if self.levels[i].dseen != NULL:
                free(self.levels[i].dseen)

    def __init__(self, tables, config, provider=None):
        self.tables = tables
        self.params = tables.params
        self.config = config
        self.provider = provider
        self.S = tables.space_size
        self.K = len(tables.classes)
        self.p = tables.params.position_count
        self.p1 = self.p + 1
        self.prune = config.prune
        self.use_bounds = config.use_bounds
        self.symmetry = config.symmetry
        self.sym_depth = config.sym_depth
        self.deep_sym = config.symmetry and config.deep_symmetry
        self.deep_sym_depth = config.deep_sym_depth
        self.small_sets = config.small_sets
        self.cap_bound = config.eval_bound == "capacity"

        packed = np.ascontiguousarray(tables.packed, dtype=np.int32)
        himask = np.ascontiguousarray(packed >> 16, dtype=np.int32)
        bull = np.ascontiguousarray(tables.bulltable, dtype=np.uint8)
        cow = np.ascontiguousarray(tables.cowtable, dtype=np.uint8)
        clsfl = np.ascontiguousarray(tables.class_of, dtype=np.int8)
        rows = np.ascontiguousarray(tables.digit_rows, dtype=np.uint8)
        v2i = np.full(1 << 16, -1, dtype=np.int32)
        v2i[packed & 0xFFFF] = np.arange(self.S, dtype=np.int32)
        perm_arr = np.array(
            list(_permutations(range(self.p))), dtype=np.int8
        )
        self.nperms = perm_arr.shape[0]
        trivial = np.arange(self.S + 1, dtype=np.int32)
        self._refs = [packed, himask, bull, cow, clsfl, rows, v2i, perm_arr, trivial]

        cdef int32_t[::1] mv_packed = packed
        cdef int32_t[::1] mv_himask = himask
        cdef uint8_t[::1] mv_bull = bull
        cdef uint8_t[::1] mv_cow = cow
        cdef int8_t[::1] mv_cls = clsfl
        cdef uint8_t[:, ::1] mv_rows = rows
        cdef int32_t[::1] mv_v2i = v2i
        cdef int8_t[:, ::1] mv_perm = perm_arr
        cdef int32_t[::1] mv_triv = trivial
        self.packed = &mv_packed[0]
        self.himask = &mv_himask[0]
        self.bull = &mv_bull[0]
        self.cow = &mv_cow[0]
        self.clsfl = &mv_cls[0]
        self.digit_rows = &mv_rows[0, 0]
        self.val_to_idx = &mv_v2i[0]
        self.perms = &mv_perm[0, 0]
        self.lb_trivial = &mv_triv[0]

        self.clsmat = NULL
        if config.product_cache:
            a = packed.astype(np.int64)[:, None]
            b = packed.astype(np.int64)[None, :]
            bl = bull.astype(np.int64)[(a ^ b) & 0xFFFF]
            cwv = cow.astype(np.int64)[(a & b) >> 16] - bl
            mat = np.ascontiguousarray(
                clsfl.astype(np.int64)[bl * self.p1 + cwv].astype(np.uint8)
            )
            self._refs.append(mat)
            self._set_clsmat(mat)

        self.lb = NULL
        self.gamma = NULL
        self.ubtab = NULL
        self._tree_slots = [None] * MAXD
        self._mn_memo = {}
        self.st_nodes = 0
        self.st_scanned = 0
        self.st_expanded = 0
        self.st_tie_expanded = 0

    @property
    def stats(self):
        return {
            "nodes": int(self.st_nodes),
            "scanned": int(self.st_scanned),
            "expanded": int(self.st_expanded),
            "tie_expanded": int(self.st_tie_expanded),
        }

    def reset_stats(self):
        self.st_nodes = 0
        self.st_scanned = 0
        self.st_expanded = 0
        self.st_tie_expanded = 0

    cdef void _set_clsmat(self, object mat):
        cdef uint8_t[:, ::1] mv = mat
        self.clsmat = &mv[0, 0]

    def set_lower_bounds(self, lb):
        lb = np.ascontiguousarray(lb, dtype=np.int32)
        self._refs.append(lb)
        cdef int32_t[:, ::1] mv = lb
        self.lb = &mv[0, 0]
        self.lb_stride = lb.shape[1]

    def set_eval(self, gamma, caps):
        gamma = np.ascontiguousarray(gamma, dtype=np.int64)
        caps = np.asarray(caps, dtype=np.int64)
        self.glen = gamma.shape[0]
        self.gamma_floor = gamma[-1]
        kmax = caps.shape[0] - 1
        jmax = caps.shape[1] - 1
        ns = np.arange(self.S + 1, dtype=np.int64)
        ub = np.zeros((self.glen, kmax + 1, self.S + 1), dtype=np.int64)
        for d in range(1, self.glen - 1):
            for k in range(kmax + 1):
                acc = np.zeros(self.S + 1, dtype=np.int64)
                prev = np.zeros(self.S + 1, dtype=np.int64)
                for j in range(1, jmax + 1):
                    g = gamma[min(d + j, self.glen - 1)]
                    cur = np.minimum(ns, caps[k][j])
                    acc += g * (cur - prev)
                    prev = cur
                g = gamma[min(d + jmax + 1, self.glen - 1)]
                acc += g * (ns - prev)
                ub[d, k] = acc
        ub = np.ascontiguousarray(ub)
        self._refs.append(gamma)
        self._refs.append(ub)
        cdef int64_t[::1] mv_g = gamma
        self.gamma = &mv_g[0]
        cdef int64_t[:, :, ::1] mv_u = ub
        self.ubtab = &mv_u[0, 0, 0]
        self.ub_stride_d = (kmax + 1) * (self.S + 1)
        self.ub_stride_k = self.S + 1

    # ------------------------------------------------------------------
    # shared helpers
    # ------------------------------------------------------------------
    cdef inline int _cls(self, int32_t ti, int32_t mi) noexcept:
        cdef int32_t tc, pc
        cdef int b, cw
        if self.clsmat != NULL:
            return self.clsmat[<size_t>ti * self.S + mi]
        tc = self.packed[ti]
        pc = self.packed[mi]
        b = self.bull[(tc ^ pc) & 0xFFFF]
        cw = self.cow[(tc & pc) >> 16] - b
        return self.clsfl[b * self.p1 + cw]

    cdef Level *_level(self, int depth) except NULL:
        if depth >= MAXD - 1:
            raise SearchDepthError("search exceeded depth cap")
        cdef Level *lvl = &self.levels[depth]
        if lvl.childbuf == NULL:
            lvl.childbuf = <int32_t *>malloc(self.S * sizeof(int32_t))
            lvl.heap = <int64_t *>malloc(self.S * sizeof(int64_t))
            lvl.cand = <int32_t *>malloc(self.S * sizeof(int32_t))
            lvl.clsbuf = <uint8_t *>malloc(self.S)
            if (
                lvl.childbuf == NULL
                or lvl.heap == NULL
                or lvl.cand == NULL
                or lvl.clsbuf == NULL
            ):
                raise MemoryError()
        return lvl

    cdef int _set_kinds(self, int32_t *mem, int n) noexcept:
        cdef int32_t u = 0
        cdef int j
        for j in range(n):
            u |= self.himask[mem[j]]
        return self.cow[u]

    cdef int32_t *_fill_candidates(
        self, int32_t *mem, int n, int depth, Level *lvl, int *ncand
    ) except? NULL:
        """Candidate guess list for this node.

        Returns NULL (with no exception) to signal "all codes 0..S-1".
        """
        cdef int i, m
        cdef int32_t[::1] mo
        if self.symmetry and self.provider is not None and depth < self.sym_depth:
            mem_arr = np.empty(n, dtype=np.int32)
            mo = mem_arr
            for i in range(n):
                mo[i] = mem[i]
            history = tuple(
                (int(self.hist_g[i]), int(self.hist_c[i])) for i in range(depth)
            )
            out = np.ascontiguousarray(
                self.provider(mem_arr, history), dtype=np.int32
            )
            mo = out
            m = out.shape[0]
            for i in range(m):
                lvl.cand[i] = mo[i]
            ncand[0] = m
            return lvl.cand
        if self.deep_sym and depth < self.deep_sym_depth and depth < MAXPREFIX:
            ncand[0] = self._deep_candidates(depth, lvl)
            return lvl.dcand
        ncand[0] = self.S
        return NULL

    # ------------------------------------------------------------------
    # history-only equivalence sweep (valid for history-induced sets)
    # ------------------------------------------------------------------
    cdef int _deep_candidates(self, int depth, Level *lvl) except? -1:
        cdef int i, j
        if lvl.dcand == NULL:
            lvl.dcand = <int32_t *>malloc(self.S * sizeof(int32_t))
            lvl.dseen = <uint8_t *>malloc(self.S)
            if lvl.dcand == NULL or lvl.dseen == NULL:
                raise MemoryError()
            lvl.dvalid = 0
        if lvl.dvalid and memcmp(
            lvl.dprefix, self.hist_g, depth * sizeof(int32_t)
        ) == 0:
            return lvl.dcand_n
        # groups: unguessed digits are interchangeable, guessed pinned
        cdef bint guessed[10]
        cdef int8_t free_list[10]
        cdef int8_t free_rank[10]
        cdef int nfree = 0
        for i in range(10):
            guessed[i] = False
            free_rank[i] = -1
        cdef uint8_t *grow
        for i in range(depth):
            grow = self.digit_rows + <size_t>self.hist_g[i] * self.p
            for j in range(self.p):
                guessed[grow[j]] = True
        for i in range(10):
            if not guessed[i]:
                free_list[nfree] = i
                free_rank[i] = nfree
                nfree += 1

        # automorphisms: position permutations with forced digit maps
        cdef int8_t autoD[24][10]
        cdef int8_t autoP[24][4]
        cdef int nautos = 0
        cdef int pi, pos, a, b
        cdef bint ok
        cdef bint taken[10]
        cdef int8_t dmap[10]
        cdef int8_t *P
        for pi in range(self.nperms):
            P = self.perms + pi * self.p
            for i in range(10):
                dmap[i] = -1
                taken[i] = False
            ok = True
            for i in range(depth):
                grow = self.digit_rows + <size_t>self.hist_g[i] * self.p
                for pos in range(self.p):
                    a = grow[pos]
                    b = grow[P[pos]]
                    if dmap[a] == -1:
                        if taken[b]:
                            ok = False
                            break
                        dmap[a] = b
                        taken[b] = True
                    elif dmap[a] != b:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            for i in range(10):
                autoD[nautos][i] = dmap[i] if dmap[i] != -1 else i
            for pos in range(self.p):
                autoP[nautos][pos] = P[pos]
            nautos += 1

        # sweep ascending; mark canonized automorphism images
        memset(lvl.dseen, 0, self.S)
        cdef int cnt = 0
        cdef const uint8_t *row
        cdef int8_t tmp[4]
        cdef int8_t img[4]
        cdef int8_t assigned[10]
        cdef int na, d, expect, ai, v16
        for i in range(self.S):
            if lvl.dseen[i]:
                continue
            row = self.digit_rows + <size_t>i * self.p
            # prefix rule: free digits must appear as free_list[0..] in order
            expect = 0
            ok = True
            for pos in range(self.p):
                d = row[pos]
                if free_rank[d] >= 0:
                    if free_rank[d] != expect:
                        ok = False
                        break
                    expect += 1
            if not ok:
                continue
            lvl.dcand[cnt] = i
            cnt += 1
            for ai in range(nautos):
                for pos in range(self.p):
                    img[autoP[ai][pos]] = autoD[ai][row[pos]]
                # canonize free digits by appearance
                for d in range(10):
                    assigned[d] = -1
                na = 0
                v16 = 0
                for pos in range(self.p):
                    d = img[pos]
                    if free_rank[d] >= 0:
                        if assigned[d] == -1:
                            assigned[d] = free_list[na]
                            na += 1
                        d = assigned[d]
                    tmp[pos] = d
                    v16 = (v16 << 4) | d
                lvl.dseen[self.val_to_idx[v16]] = 1
        lvl.dcand_n = cnt
        memcpy(lvl.dprefix, self.hist_g, depth * sizeof(int32_t))
        lvl.dvalid = 1
        return cnt

    cdef int _materialize(
        self, int32_t *mem, int n, int t, Level *lvl, int depth,
        bint eval_mode, int d1, bint *inset_out,
    ) noexcept:
        """Partition members by response to guess t.

        Fills per-class segments of lvl.childbuf plus child bounds
        (lower bounds, or value upper bounds in eval mode) and the
        solve order (size descending, class ascending).  Returns the
        number of nonempty non-all-bulls classes.
        """
        cdef int32_t cnt[16]
        cdef int32_t kmask[16]
        cdef int k, j, ki, nk, oi, bi
        cdef int32_t pos[16]
        for k in range(self.K):
            cnt[k] = 0
            kmask[k] = 0
        for j in range(n):
            k = self._cls(t, mem[j])
            cnt[k] += 1
            kmask[k] |= self.himask[mem[j]]
        inset_out[0] = cnt[0] == 1
        cdef int off = 0
        nk = 0
        for k in range(1, self.K):
            lvl.coff[k] = off
            pos[k] = off
            lvl.csize[k] = cnt[k]
            if cnt[k] > 0:
                off += cnt[k]
                nk += 1
        for j in range(n):
            k = self._cls(t, mem[j])
            if k != 0:
                lvl.childbuf[pos[k]] = mem[j]
                pos[k] += 1
        # child bounds
        cdef int kinds
        for k in range(1, self.K):
            if cnt[k] > 0:
                kinds = self.cow[kmask[k]]
                if eval_mode:
                    if self.cap_bound:
                        lvl.cbound[k] = self.ubtab[
                            d1 * self.ub_stride_d
                            + kinds * self.ub_stride_k
                            + cnt[k]
                        ]
                    else:
                        lvl.cbound[k] = (
                            cnt[k]
                            * self.gamma[
                                d1 + 1 if d1 + 1 < self.glen else self.glen - 1
                            ]
                        )
                elif self.use_bounds and self.lb != NULL:
                    lvl.cbound[k] = self.lb[kinds * self.lb_stride + cnt[k]]
                else:
                    lvl.cbound[k] = cnt[k]
        # solve order: size descending, class ascending
        oi = 0
        for k in range(1, self.K):
            if cnt[k] > 0:
                lvl.corder[oi] = k
                oi += 1
        for j in range(1, nk):
            ki = lvl.corder[j]
            bi = j - 1
            while bi >= 0 and (
                lvl.csize[lvl.corder[bi]] < lvl.csize[ki]
                or (
                    lvl.csize[lvl.corder[bi]] == lvl.csize[ki]
                    and lvl.corder[bi] > ki
                )
            ):
                lvl.corder[bi + 1] = lvl.corder[bi]
                bi -= 1
            lvl.corder[bi + 1] = ki
        # suffix sums of bounds in solve order
        lvl.csuf[nk] = 0
        for j in range(nk - 1, -1, -1):
            lvl.csuf[j] = lvl.csuf[j + 1] + lvl.cbound[lvl.corder[j]]
        return nk

    # ------------------------------------------------------------------
    # minimum-total search
    # ------------------------------------------------------------------
    def solve_min(self, mem, history=(), cutoff=None):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        if mem.ndim != 1 or mem.size == 0:
            raise ValueError("member set must be a nonempty 1-d array")
        if self.use_bounds and self.lb == NULL:
            raise RuntimeError("set_lower_bounds() must be called first")
        cdef int32_t[::1] mv = mem
        cdef int depth0 = len(history)
        cdef int i
        for i, (g, c) in enumerate(history):
            self.hist_g[i] = g
            self.hist_c[i] = c
        cdef int64_t cut = INF if cutoff is None else <int64_t>cutoff
        cdef int64_t total = self._solve_min(&mv[0], mem.size, depth0, cut)
        return int(total), self._tree_slots[depth0]

    cdef object _small_min_tree(self, int32_t *mem, int n, int64_t *total):
        cdef int a, b, c, k, k1, k2, kid
        if n == 1:
            total[0] = 1
            return (mem[0], ())
        if n == 2:
            a = mem[0]
            b = mem[1]
            k = self._cls(a, b)
            total[0] = 3
            return (a, ((k, (b, ())),))
        a = mem[0]
        b = mem[1]
        c = mem[2]
        cdef int e, o1, o2, i
        for i in range(3):
            e = mem[i]
            o1 = mem[1 if i == 0 else 0]
            o2 = mem[1 if i == 2 else 2]
            k1 = self._cls(e, o1)
            k2 = self._cls(e, o2)
            if k1 != k2:
                total[0] = 5
                kids = sorted([(k1, (o1, ())), (k2, (o2, ()))])
                return (e, tuple(kids))
        k = self._cls(a, b)
        kid = self._cls(b, c)
        total[0] = 6
        return (a, ((k, (b, ((kid, (c, ())),))),))

    cdef int64_t _solve_min(self, int32_t *mem, int n, int depth, int64_t cutoff) except? -1:
        cdef int64_t total
        if n == 1:
            self._tree_slots[depth] = (mem[0], ())
            return 1
        if self.small_sets and n <= 3:
            tree = self._small_min_tree(mem, n, &total)
            self._tree_slots[depth] = tree
            return total

        cdef Level *lvl = self._level(depth)
        cdef int ncand
        cdef int32_t *cand = self._fill_candidates(mem, n, depth, lvl, &ncand)
        self.st_nodes += 1

        cdef const int32_t *lbrow
        if self.use_bounds:
            lbrow = self.lb + <size_t>self._set_kinds(mem, n) * self.lb_stride
        else:
            lbrow = self.lb_trivial

        cdef int32_t cnt[16]
        cdef int32_t kmask[16]
        cdef int32_t touched[16]
        cdef int tn, ti
        cdef int ci, j, k, t, mi, c
        cdef int32_t tc, pc
        cdef int b, cw
        cdef int64_t B, Bw
        cdef bint aborted
        cdef int heapm = 0
        cdef int64_t *heap = lvl.heap
        cdef uint8_t *row
        cdef uint8_t *clsbuf = lvl.clsbuf
        for k in range(self.K):
            cnt[k] = 0
            kmask[k] = 0

        for ci in range(ncand):
            t = cand[ci] if cand != NULL else ci
            tn = 0
            Bw = 0
            aborted = False
            if self.clsmat != NULL:
                row = self.clsmat + <size_t>t * self.S
                for j in range(n):
                    mi = mem[j]
                    k = row[mi]
                    clsbuf[j] = k
                    c = cnt[k]
                    if c == 0:
                        touched[tn] = k
                        tn += 1
                    cnt[k] = c + 1
                    if k != 0:
                        Bw += lbrow[c + 1] - lbrow[c]
                        if self.prune and n + Bw >= cutoff:
                            aborted = True
                            self.st_scanned += j + 1
                            break
            else:
                tc = self.packed[t]
                for j in range(n):
                    mi = mem[j]
                    pc = self.packed[mi]
                    b = self.bull[(tc ^ pc) & 0xFFFF]
                    cw = self.cow[(tc & pc) >> 16] - b
                    k = self.clsfl[b * self.p1 + cw]
                    clsbuf[j] = k
                    c = cnt[k]
                    if c == 0:
                        touched[tn] = k
                        tn += 1
                    cnt[k] = c + 1
                    if k != 0:
                        Bw += lbrow[c + 1] - lbrow[c]
                        if self.prune and n + Bw >= cutoff:
                            aborted = True
                            self.st_scanned += j + 1
                            break
            if aborted or (tn == 1 and touched[0] != 0):
                for ti in range(tn):
                    cnt[touched[ti]] = 0
                continue
            self.st_scanned += n
            # exact bound with per-child digit counts
            for j in range(n):
                kmask[clsbuf[j]] |= self.himask[mem[j]]
            B = 0
            for ti in range(tn):
                k = touched[ti]
                if k != 0:
                    if self.use_bounds:
                        B += self.lb[
                            <size_t>self.cow[kmask[k]] * self.lb_stride + cnt[k]
                        ]
                    else:
                        B += cnt[k]
                cnt[k] = 0
                kmask[k] = 0
            if self.prune and n + B >= cutoff:
                continue
            heap[heapm] = (B << 13) | t
            heapm += 1
        heap_build(heap, heapm)

        cdef int64_t best_t = cutoff
        cdef int best_code = -1
        best_tree = None
        cdef int64_t key, opt, target, acc, ccut, ct
        cdef bint tie_ok, inset, ok
        cdef int nk, oi
        while heapm > 0:
            key = heap_pop(heap, &heapm)
            B = key >> 13
            t = <int>(key & 8191)
            opt = n + B
            tie_ok = best_code >= 0 and t < best_code
            if self.prune:
                if opt > best_t:
                    break
                if opt == best_t and not tie_ok:
                    continue
            target = INF if not self.prune else best_t + (1 if tie_ok else 0)
            self.st_expanded += 1
            if tie_ok:
                self.st_tie_expanded += 1

            nk = self._materialize(mem, n, t, lvl, depth, False, 0, &inset)
            acc = 0
            ok = True
            subkids = []
            self.hist_g[depth] = t
            for oi in range(nk):
                k = lvl.corder[oi]
                ccut = target - n - acc - lvl.csuf[oi + 1]
                if ccut <= lvl.cbound[k]:
                    ok = False
                    break
                self.hist_c[depth] = k
                ct = self._solve_min(
                    lvl.childbuf + lvl.coff[k], lvl.csize[k], depth + 1, ccut
                )
                if ct >= ccut:
                    ok = False
                    break
                acc += ct
                subkids.append((k, self._tree_slots[depth + 1]))
            if not ok:
                continue
            total = n + acc
            if total < best_t or (
                total == best_t and (best_code < 0 or t < best_code)
            ):
                best_t = total
                best_code = t
                subkids.sort()
                best_tree = (t, tuple(subkids))
        self._tree_slots[depth] = best_tree
        return best_t

    # ------------------------------------------------------------------
    # maximum-evaluation search
    # ------------------------------------------------------------------
    def solve_eval(self, mem, history=(), floor=None):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        if mem.ndim != 1 or mem.size == 0:
            raise ValueError("member set must be a nonempty 1-d array")
        if self.gamma == NULL:
            raise RuntimeError("set_eval() must be called first")
        cdef int32_t[::1] mv = mem
        cdef int depth0 = len(history)
        cdef int i
        for i, (g, c) in enumerate(history):
            self.hist_g[i] = g
            self.hist_c[i] = c
        cdef int64_t fl = -INF if floor is None else <int64_t>floor
        cdef int64_t value = self._solve_eval(&mv[0], mem.size, depth0, fl)
        return int(value), self._tree_slots[depth0]

    cdef object _chain_tree(self, int32_t *mem, int n, int depth):
        cdef Level *lvl = self._level(depth)
        cdef int t = mem[0]
        if n == 1:
            return (t, ())
        cdef bint inset
        cdef int nk = self._materialize(
            mem, n, t, lvl, depth, False, 0, &inset
        )
        kids = []
        cdef int k
        for k in range(1, self.K):
            if lvl.csize[k] > 0:
                kids.append(
                    (
                        k,
                        self._chain_tree(
                            lvl.childbuf + lvl.coff[k], lvl.csize[k], depth + 1
                        ),
                    )
                )
        return (t, tuple(kids))

    cdef int64_t _solve_eval(self, int32_t *mem, int n, int depth, int64_t floor) except? -1:
        cdef int d1 = depth + 1
        if d1 >= self.glen - 1:
            raise SearchDepthError("evaluation search exceeded gamma table")
        if self.gamma[d1] == self.gamma_floor:
            self._tree_slots[depth] = self._chain_tree(mem, n, depth)
            return self.gamma_floor * n
        if n == 1:
            self._tree_slots[depth] = (mem[0], ())
            return self.gamma[d1]
        cdef int a2, b2, k2
        if self.small_sets and n == 2:
            a2 = mem[0]
            b2 = mem[1]
            k2 = self._cls(a2, b2)
            self._tree_slots[depth] = (a2, ((k2, (b2, ())),))
            return self.gamma[d1] + self.gamma[d1 + 1]

        cdef Level *lvl = self._level(depth)
        cdef int ncand
        cdef int32_t *cand = self._fill_candidates(mem, n, depth, lvl, &ncand)
        self.st_nodes += 1

        cdef const int64_t *ubrow = (
            self.ubtab
            + <size_t>d1 * self.ub_stride_d
            + <size_t>self._set_kinds(mem, n) * self.ub_stride_k
        )
        cdef int64_t g1 = self.gamma[d1]
        cdef int64_t gnext = self.gamma[
            d1 + 1 if d1 + 1 < self.glen else self.glen - 1
        ]

        cdef int32_t cnt[16]
        cdef int32_t kmask[16]
        cdef int32_t touched[16]
        cdef int tn, ti
        cdef int ci, j, k, t, mi, c
        cdef int32_t tc, pc
        cdef int b, cw, kinds
        cdef int64_t U, Uw
        cdef bint aborted
        cdef int heapm = 0
        cdef int64_t *heap = lvl.heap
        cdef uint8_t *row
        cdef uint8_t *clsbuf = lvl.clsbuf
        for k in range(self.K):
            cnt[k] = 0
            kmask[k] = 0

        for ci in range(ncand):
            t = cand[ci] if cand != NULL else ci
            tn = 0
            Uw = 0
            aborted = False
            if self.clsmat != NULL:
                row = self.clsmat + <size_t>t * self.S
                for j in range(n):
                    mi = mem[j]
                    k = row[mi]
                    clsbuf[j] = k
                    c = cnt[k]
                    if c == 0:
                        touched[tn] = k
                        tn += 1
                    cnt[k] = c + 1
                    if k != 0:
                        if self.cap_bound:
                            Uw += ubrow[c + 1] - ubrow[c]
                        else:
                            Uw += gnext
                    else:
                        Uw += g1
                    if self.prune and Uw + <int64_t>(n - j - 1) * g1 <= floor:
                        aborted = True
                        self.st_scanned += j + 1
                        break
            else:
                tc = self.packed[t]
                for j in range(n):
                    mi = mem[j]
                    pc = self.packed[mi]
                    b = self.bull[(tc ^ pc) & 0xFFFF]
                    cw = self.cow[(tc & pc) >> 16] - b
                    k = self.clsfl[b * self.p1 + cw]
                    clsbuf[j] = k
                    c = cnt[k]
                    if c == 0:
                        touched[tn] = k
                        tn += 1
                    cnt[k] = c + 1
                    if k != 0:
                        if self.cap_bound:
                            Uw += ubrow[c + 1] - ubrow[c]
                        else:
                            Uw += gnext
                    else:
                        Uw += g1
                    if self.prune and Uw + <int64_t>(n - j - 1) * g1 <= floor:
                        aborted = True
                        self.st_scanned += j + 1
                        break
            if aborted or (tn == 1 and touched[0] != 0):
                for ti in range(tn):
                    cnt[touched[ti]] = 0
                continue
            self.st_scanned += n
            for j in range(n):
                kmask[clsbuf[j]] |= self.himask[mem[j]]
            U = g1 if cnt[0] == 1 else 0
            for ti in range(tn):
                k = touched[ti]
                if k != 0:
                    if self.cap_bound:
                        kinds = self.cow[kmask[k]]
                        U += self.ubtab[
                            d1 * self.ub_stride_d
                            + kinds * self.ub_stride_k
                            + cnt[k]
                        ]
                    else:
                        U += cnt[k] * gnext
                cnt[k] = 0
                kmask[k] = 0
            if self.prune and U <= floor:
                continue
            heap[heapm] = ((UBBIAS - U) << 13) | t
            heapm += 1
        heap_build(heap, heapm)

        cdef int64_t best_v = floor
        cdef int best_code = -1
        best_tree = None
        cdef int64_t key, u, vneed, g4, acc, need, cv, value
        cdef bint tie_ok, inset, ok
        cdef int nk, oi
        while heapm > 0:
            key = heap_pop(heap, &heapm)
            u = UBBIAS - (key >> 13)
            t = <int>(key & 8191)
            tie_ok = best_code >= 0 and t < best_code
            if self.prune:
                if u < best_v:
                    break
                if u == best_v and not tie_ok:
                    continue
            vneed = (-INF) if not self.prune else best_v + (0 if tie_ok else 1)
            self.st_expanded += 1
            if tie_ok:
                self.st_tie_expanded += 1

            nk = self._materialize(mem, n, t, lvl, depth, True, d1, &inset)
            g4 = g1 if inset else 0
            acc = 0
            ok = True
            subkids = []
            self.hist_g[depth] = t
            for oi in range(nk):
                k = lvl.corder[oi]
                need = vneed - g4 - acc - lvl.csuf[oi + 1]
                if lvl.cbound[k] < need:
                    ok = False
                    break
                self.hist_c[depth] = k
                cv = self._solve_eval(
                    lvl.childbuf + lvl.coff[k], lvl.csize[k], depth + 1,
                    need - 1,
                )
                if cv <= need - 1:
                    ok = False
                    break
                acc += cv
                subkids.append((k, self._tree_slots[depth + 1]))
            if not ok:
                continue
            value = g4 + acc
            if value > best_v or (
                value == best_v and (best_code < 0 or t < best_code)
            ):
                best_v = value
                best_code = t
                subkids.sort()
                best_tree = (t, tuple(subkids))
        self._tree_slots[depth] = best_tree
        return best_v

    # ------------------------------------------------------------------
    # max-nodes preprocessing search
    # ------------------------------------------------------------------
    def max_nodes(self, mem, int depth, mode="within"):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        cdef int32_t[::1] mv = mem
        self._mn_memo = {}
        if mode not in ("within", "at", "upto"):
            raise ValueError(f"unknown max-nodes mode {mode!r}")
        cdef int imode = 0 if mode == "within" else (1 if mode == "at" else 2)
        return int(self._max_nodes(&mv[0], mem.size, 0, depth, imode))

    cdef int64_t _max_nodes(
        self, int32_t *mem, int n, int depth, int m, int imode
    ) except? -1:
        # imode: 0 within, 1 at, 2 upto
        if imode == 0 and m == 0:
            return 1
        if m == 0:
            return 0
        if n == 1:
            if imode == 1:
                return 1 if m == 1 else 0
            return 1

        mem_bytes = bytes((<char *>mem)[: n * sizeof(int32_t)])
        key = (mem_bytes, m)
        hit = self._mn_memo.get(key)
        if hit is not None:
            return <int64_t>hit

        cdef Level *lvl = self._level(depth)
        cdef int ncand
        cdef int32_t *cand = self._fill_candidates(mem, n, depth, lvl, &ncand)

        cdef int32_t cnt[16]
        cdef int ci, j, k, t, nonempty
        cdef int32_t tc, pc
        cdef int b, cw
        cdef bint skip
        cdef int64_t best = 0, val
        cdef bint inset
        cdef int nk

        if m == 1 and imode != 2:
            # Best class count; an in-set guess trades its extra live
            # class for the immediate hit, so the modes coincide here.
            for ci in range(ncand):
                t = cand[ci] if cand != NULL else ci
                for k in range(self.K):
                    cnt[k] = 0
                tc = self.packed[t]
                for j in range(n):
                    pc = self.packed[mem[j]]
                    b = self.bull[(tc ^ pc) & 0xFFFF]
                    cw = self.cow[(tc & pc) >> 16] - b
                    cnt[self.clsfl[b * self.p1 + cw]] += 1
                skip = False
                nonempty = 0
                for k in range(self.K):
                    if cnt[k]:
                        nonempty += 1
                        if k != 0 and cnt[k] == n:
                            skip = True
                if not skip and nonempty > best:
                    best = nonempty
            if imode == 0 and best < 1:
                best = 1
            self._mn_memo[key] = int(best)
            return best

        cdef int64_t sub
        cdef int32_t csize_l[16]
        cdef int32_t coff_l[16]
        for ci in range(ncand):
            t = cand[ci] if cand != NULL else ci
            for k in range(self.K):
                cnt[k] = 0
            tc = self.packed[t]
            for j in range(n):
                pc = self.packed[mem[j]]
                b = self.bull[(tc ^ pc) & 0xFFFF]
                cw = self.cow[(tc & pc) >> 16] - b
                cnt[self.clsfl[b * self.p1 + cw]] += 1
            skip = False
            nonempty = 0
            for k in range(self.K):
                if cnt[k]:
                    nonempty += 1
                    if k != 0 and cnt[k] == n:
                        skip = True
            if skip:
                continue
            if imode == 2:
                val = nonempty
            elif imode == 1:
                val = 0
            else:
                val = 1 if cnt[0] == 1 else 0
            nk = self._materialize(mem, n, t, lvl, depth, False, 0, &inset)
            for k in range(1, self.K):
                csize_l[k] = lvl.csize[k]
                coff_l[k] = lvl.coff[k]
            self.hist_g[depth] = t
            for k in range(1, self.K):
                if csize_l[k] > 0:
                    self.hist_c[depth] = k
                    sub = self._max_nodes(
                        lvl.childbuf + coff_l[k],
                        csize_l[k],
                        depth + 1,
                        m - 1,
                        imode,
                    )
                    val += sub
            if val > best:
                best = val
        self._mn_memo[key] = int(best)
        return best

    # ------------------------------------------------------------------
    # partition and scoring services
    # ------------------------------------------------------------------
    def counts_matrix(self, mem):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        cdef int32_t[::1] mv = mem
        cdef int n = mem.size
        out = np.zeros((self.S, self.K), dtype=np.int64)
        cdef int64_t[:, ::1] mo = out
        cdef int t, j
        cdef int32_t tc, pc
        cdef int b, cw
        for t in range(self.S):
            tc = self.packed[t]
            for j in range(n):
                pc = self.packed[mv[j]]
                b = self.bull[(tc ^ pc) & 0xFFFF]
                cw = self.cow[(tc & pc) >> 16] - b
                mo[t, self.clsfl[b * self.p1 + cw]] += 1
        inset = out[:, 0] == 1
        return out, inset

    def partition_children(self, mem, t_idx):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        cdef int32_t[::1] mv = mem
        cdef int n = mem.size
        cdef int t = t_idx
        cls = np.empty(n, dtype=np.int64)
        cdef int64_t[::1] mc = cls
        cdef int j
        for j in range(n):
            mc[j] = self._cls(t, mv[j])
        out = []
        for k in range(1, self.K):
            sub = mem[cls == k]
            if sub.size:
                out.append((k, sub))
        return out

    def partition_sizes(self, mem, t_idx):
        mem = np.ascontiguousarray(mem, dtype=np.int32)
        cdef int32_t[::1] mv = mem
        cdef int n = mem.size
        out = np.zeros(self.K, dtype=np.int64)
        cdef int64_t[::1] mo = out
        cdef int j
        for j in range(n):
            mo[self._cls(t_idx, mv[j])] += 1
        return out

    def product_class(self, i, j):
        return int(self._cls(i, j))

    def deep_candidates(self, history):
        """History-equivalence canonical guess indices (for tests)."""
        cdef int depth = len(history)
        if depth > MAXPREFIX:
            raise ValueError("history too long for the equivalence cache")
        cdef int i
        for i, g in enumerate(history):
            self.hist_g[i] = g
        cdef Level *lvl = self._level(depth)
        lvl.dvalid = 0
        cdef int cnt = self._deep_candidates(depth, lvl)
        out = np.empty(cnt, dtype=np.int32)
        cdef int32_t[::1] mo = out
        for i in range(cnt):
            mo[i] = lvl.dcand[i]
        lvl.dvalid = 0
        return out
