"""Pure-Python search kernels.

Fallback for environments without the compiled extension, and the
reference the extension is tested against.  Candidate scoring is
vectorized with numpy; the branch-and-bound recursion itself is plain
Python, so full-game solves are only practical on the compiled backend.

Trees are returned as nested tuples ``(guess_index, children)`` with
``children`` a tuple of ``(class_index, subtree)`` sorted by class.
"""

from __future__ import annotations

import heapq
from typing import Optional

import numpy as np

from .config import MAX_SEARCH_DEPTH, SolveConfig
from .core import GameParams, LookupTables
from .errors import SearchDepthError

NAME = "python"

_INF = 1 << 60


class Engine:
    """Search state bound to one geometry and configuration."""

    def __init__(
        self,
        tables: LookupTables,
        config: SolveConfig,
        provider=None,
    ) -> None:
        self.tables = tables
        self.params: GameParams = tables.params
        self.config = config
        self.provider = provider
        p = self.params.position_count
        self.S = tables.space_size
        self.K = len(tables.classes)
        self.p = p
        self.packed = tables.packed.astype(np.int64)
        self.himask = (self.packed >> 16).astype(np.int64)
        self.bull = tables.bulltable.astype(np.int64)
        self.cow = tables.cowtable.astype(np.int64)
        self.clsfl = tables.class_of.astype(np.int64)
        self.all_idx = np.arange(self.S, dtype=np.int32)
        self.lb: Optional[np.ndarray] = None
        self.gamma: Optional[np.ndarray] = None
        self.gamma_floor = 0
        self.ubtab: Optional[np.ndarray] = None
        self.clsmat: Optional[np.ndarray] = None
        self._deep_cache: dict = {}
        if config.product_cache:
            self.clsmat = self._build_product_matrix()

    # ------------------------------------------------------------------
    # setup
    # ------------------------------------------------------------------
    def _build_product_matrix(self) -> np.ndarray:
        a = self.packed[:, None]
        b = self.packed[None, :]
        bl = self.bull[(a ^ b) & 0xFFFF]
        cw = self.cow[(a & b) >> 16] - bl
        return self.clsfl[bl * (self.p + 1) + cw].astype(np.uint8)

    def set_lower_bounds(self, lb: np.ndarray) -> None:
        """lb[kinds][n]: guess-count lower bound for a set of n codes."""
        self.lb = lb.astype(np.int64)

    def set_eval(self, gamma: np.ndarray, caps: np.ndarray) -> None:
        """Attach the win-rate objective.

        gamma[n] is the integer value of resolving a secret on guess n
        (index 0 unused); caps[k][j] is the cumulative number of secrets
        resolvable within j guesses of a subtree over k distinct digits
        (caps[k][0] = 0, caps[k][1] = 1, deeper entries from the
        max-nodes table).
        """
        self.gamma = gamma.astype(np.int64)
        self.gamma_floor = int(gamma[-1])
        glen = gamma.size
        kmax = caps.shape[0] - 1
        jmax = caps.shape[1] - 1
        ns = np.arange(self.S + 1, dtype=np.int64)
        ub = np.zeros((glen, kmax + 1, self.S + 1), dtype=np.int64)
        for d in range(1, glen - 1):
            for k in range(kmax + 1):
                acc = np.zeros(self.S + 1, dtype=np.int64)
                prev = np.zeros(self.S + 1, dtype=np.int64)
                for j in range(1, jmax + 1):
                    g = self.gamma[min(d + j, glen - 1)]
                    cur = np.minimum(ns, caps[k][j])
                    acc += g * (cur - prev)
                    prev = cur
                g = self.gamma[min(d + jmax + 1, glen - 1)]
                acc += g * (ns - prev)
                ub[d, k] = acc
        self.ubtab = ub

    # ------------------------------------------------------------------
    # scoring helpers
    # ------------------------------------------------------------------
    def _class_rows(self, cand: np.ndarray, mem: np.ndarray) -> np.ndarray:
        if self.clsmat is not None:
            return self.clsmat[np.ix_(cand, mem)].astype(np.int64)
        a = self.packed[cand][:, None]
        b = self.packed[mem][None, :]
        bl = self.bull[(a ^ b) & 0xFFFF]
        cw = self.cow[(a & b) >> 16] - bl
        return self.clsfl[bl * (self.p + 1) + cw]

    def _scan(self, cand: np.ndarray, mem: np.ndarray):
        """Per-candidate class counts, digit-union masks, and kinds."""
        n = mem.size
        C = cand.size
        cls = self._class_rows(cand, mem)
        key = np.arange(C, dtype=np.int64)[:, None] * self.K + cls
        counts = np.bincount(key.ravel(), minlength=C * self.K).reshape(
            C, self.K
        )
        memmask = self.himask[mem]
        kmask = np.zeros((C, self.K), dtype=np.int64)
        for k in range(self.K):
            kmask[:, k] = np.bitwise_or.reduce(
                np.where(cls == k, memmask[None, :], 0), axis=1
            )
        kinds = self.cow[kmask]
        return counts, kinds

    def counts_matrix(self, mem: np.ndarray, chunk: int = 512):
        """Class-count rows for every possible guess (for heuristics)."""
        out = np.zeros((self.S, self.K), dtype=np.int64)
        for lo in range(0, self.S, chunk):
            cand = self.all_idx[lo : lo + chunk]
            counts, _ = self._scan(cand, mem)
            out[lo : lo + cand.size] = counts
        inset = out[:, 0] == 1
        return out, inset

    def product_class(self, i: int, j: int) -> int:
        a, b = int(self.packed[i]), int(self.packed[j])
        bl = int(self.bull[(a ^ b) & 0xFFFF])
        cw = int(self.cow[(a & b) >> 16]) - bl
        return int(self.clsfl[bl * (self.p + 1) + cw])

    def _member_classes(self, mem: np.ndarray, t_idx: int) -> np.ndarray:
        if self.clsmat is not None:
            return self.clsmat[t_idx, mem].astype(np.int64)
        a = int(self.packed[t_idx])
        b = self.packed[mem]
        bl = self.bull[(a ^ b) & 0xFFFF]
        cw = self.cow[(a & b) >> 16] - bl
        return self.clsfl[bl * (self.p + 1) + cw]

    def partition_children(self, mem: np.ndarray, t_idx: int):
        """Nonempty non-all-bulls buckets as (class_index, members)."""
        cls = self._member_classes(mem, t_idx)
        out = []
        for k in range(1, self.K):
            sub = mem[cls == k]
            if sub.size:
                out.append((k, sub))
        return out

    def partition_sizes(self, mem: np.ndarray, t_idx: int) -> np.ndarray:
        cls = self._member_classes(mem, t_idx)
        return np.bincount(cls, minlength=self.K)

    def _child_lb(self, arr: np.ndarray) -> int:
        if not self.config.use_bounds:
            return int(arr.size)
        union = int(np.bitwise_or.reduce(self.himask[arr]))
        kinds = int(self.cow[union])
        return int(self.lb[kinds, arr.size])

    def _candidates(self, mem: np.ndarray, history) -> np.ndarray:
        cfg = self.config
        if (
            cfg.symmetry
            and self.provider is not None
            and len(history) < cfg.sym_depth
        ):
            return self.provider(mem, history)
        if (
            cfg.symmetry
            and cfg.deep_symmetry
            and len(history) < cfg.deep_sym_depth
        ):
            return self._deep_candidates(tuple(g for g, _ in history))
        return self.all_idx

    def _deep_candidates(self, prefix: tuple[int, ...]) -> np.ndarray:
        """History-equivalence canonical guesses, cached by guess prefix.

        Valid only for candidate sets induced by their histories.
        """
        hit = self._deep_cache.get(prefix)
        if hit is None:
            from .symmetry import SymmetryContext

            rows = self.tables.digit_rows
            guess_rows = [tuple(int(x) for x in rows[g]) for g in prefix]
            ctx = SymmetryContext(guess_rows, None, self.params)
            idxs = ctx.canonical_rows(rows, self.tables.index_of_packed)
            hit = np.array(idxs, dtype=np.int32)
            self._deep_cache[prefix] = hit
        return hit

    # ------------------------------------------------------------------
    # minimum-total search
    # ------------------------------------------------------------------
    def solve_min(self, mem: np.ndarray, history=(), cutoff: Optional[int] = None):
        """Exact minimum total guesses and an optimal tree.

        With a cutoff, returns ``(cutoff, None)`` when nothing strictly
        better exists.  Ties between equal-total guesses go to the
        numerically smallest guess, recursively.
        """
        mem = np.asarray(mem, dtype=np.int32)
        cut = _INF if cutoff is None else int(cutoff)
        total, tree = self._solve_min(mem, tuple(history), cut)
        return total, tree

    def _small_min(self, mem: np.ndarray):
        n = mem.size
        if n == 1:
            return 1, (int(mem[0]), ())
        if n == 2:
            a, b = int(mem[0]), int(mem[1])
            k = self.product_class(a, b)
            return 3, (a, ((k, (b, ())),))
        a, b, c = (int(x) for x in mem)
        for e, o1, o2 in ((a, b, c), (b, a, c), (c, a, b)):
            k1 = self.product_class(e, o1)
            k2 = self.product_class(e, o2)
            if k1 != k2:
                kids = tuple(
                    sorted(((k1, (o1, ())), (k2, (o2, ()))))
                )
                return 5, (e, kids)
        k = self.product_class(a, b)
        kid = self.product_class(b, c)
        return 6, (a, ((k, (b, ((kid, (c, ())),))),))

    def _solve_min(self, mem: np.ndarray, history, cutoff: int):
        n = mem.size
        cfg = self.config
        if n == 1:
            return 1, (int(mem[0]), ())
        if cfg.small_sets and n <= 3:
            return self._small_min(mem)
        depth = len(history)
        if depth >= MAX_SEARCH_DEPTH:
            raise SearchDepthError("minimum-total search exceeded depth cap")

        cand = self._candidates(mem, history)
        counts, kinds = self._scan(cand, mem)
        if cfg.use_bounds:
            lbv = self.lb[kinds, counts]
        else:
            lbv = np.where(counts > 0, counts, 0)
        bsum = lbv.sum(axis=1) - lbv[:, 0]
        progress = counts.max(axis=1) < n

        heap = [
            (int(bsum[i]), int(cand[i]))
            for i in np.flatnonzero(progress)
        ]
        heapq.heapify(heap)

        best_t = cutoff
        best_code = -1
        best_tree = None
        while heap:
            bi, t_idx = heapq.heappop(heap)
            opt = n + bi
            tie_ok = best_code >= 0 and t_idx < best_code
            if cfg.prune:
                if opt > best_t:
                    break
                if opt == best_t and not tie_ok:
                    continue
            target = _INF if not cfg.prune else best_t + (1 if tie_ok else 0)

            children = self.partition_children(mem, t_idx)
            children.sort(key=lambda kv: (-kv[1].size, kv[0]))
            lbs = [self._child_lb(arr) for _, arr in children]
            acc = 0
            sub = []
            failed = False
            for j, (clsj, arr) in enumerate(children):
                rem = sum(lbs[j + 1 :])
                ccut = target - n - acc - rem
                if ccut <= lbs[j]:
                    failed = True
                    break
                t_child, tree_child = self._solve_min(
                    arr, history + ((t_idx, clsj),), ccut
                )
                if t_child >= ccut:
                    failed = True
                    break
                acc += t_child
                sub.append((clsj, tree_child))
            if failed:
                continue
            total = n + acc
            if total < best_t or (
                total == best_t and (best_code < 0 or t_idx < best_code)
            ):
                best_t = total
                best_code = t_idx
                best_tree = (t_idx, tuple(sorted(sub)))
        return best_t, best_tree

    # ------------------------------------------------------------------
    # maximum-evaluation (win rate) search
    # ------------------------------------------------------------------
    def solve_eval(self, mem: np.ndarray, history=(), floor: Optional[int] = None):
        """Maximum achievable evaluation value and an optimal tree.

        ``depth`` is taken from the history length; members resolved on
        guess g contribute gamma[g].  With a floor, returns
        ``(floor, None)`` when nothing strictly better exists.
        """
        mem = np.asarray(mem, dtype=np.int32)
        fl = -_INF if floor is None else int(floor)
        return self._solve_eval(mem, tuple(history), fl)

    def _chain_tree(self, mem: np.ndarray):
        t = int(mem[0])
        if mem.size == 1:
            return (t, ())
        kids = [
            (k, self._chain_tree(arr))
            for k, arr in self.partition_children(mem, t)
        ]
        return (t, tuple(sorted(kids)))

    def _solve_eval(self, mem: np.ndarray, history, floor: int):
        n = mem.size
        depth = len(history)
        g = self.gamma
        d1 = depth + 1
        if d1 >= g.size - 1:
            raise SearchDepthError("evaluation search exceeded gamma table")
        if int(g[d1]) == self.gamma_floor:
            return self.gamma_floor * n, self._chain_tree(mem)
        if n == 1:
            return int(g[d1]), (int(mem[0]), ())
        cfg = self.config
        if cfg.small_sets and n == 2:
            a, b = int(mem[0]), int(mem[1])
            k = self.product_class(a, b)
            return int(g[d1] + g[d1 + 1]), (a, ((k, (b, ())),))

        cand = self._candidates(mem, history)
        counts, kinds = self._scan(cand, mem)
        if cfg.eval_bound == "capacity":
            ubv = self.ubtab[d1][kinds, counts]
        else:
            ubv = counts * int(g[min(d1 + 1, g.size - 1)])
        ub = ubv.sum(axis=1) - ubv[:, 0] + np.where(
            counts[:, 0] == 1, int(g[d1]), 0
        )
        progress = counts.max(axis=1) < n
        inset_row = counts[:, 0] == 1

        heap = [
            (-int(ub[i]), int(cand[i]), bool(inset_row[i]))
            for i in np.flatnonzero(progress)
        ]
        heapq.heapify(heap)

        best_v = floor
        best_code = -1
        best_tree = None
        while heap:
            negu, t_idx, inset = heapq.heappop(heap)
            u = -negu
            tie_ok = best_code >= 0 and t_idx < best_code
            if cfg.prune:
                if u < best_v:
                    break
                if u == best_v and not tie_ok:
                    continue
            vneed = -_INF if not cfg.prune else best_v + (0 if tie_ok else 1)

            g4 = int(g[d1]) if inset else 0
            children = self.partition_children(mem, t_idx)
            children.sort(key=lambda kv: (-kv[1].size, kv[0]))
            ubs = [self._child_ub(arr, d1) for _, arr in children]
            acc = 0
            sub = []
            failed = False
            for j, (clsj, arr) in enumerate(children):
                rem = sum(ubs[j + 1 :])
                need = vneed - g4 - acc - rem
                if ubs[j] < need:
                    failed = True
                    break
                v_child, tree_child = self._solve_eval(
                    arr, history + ((t_idx, clsj),), need - 1
                )
                if v_child <= need - 1:
                    failed = True
                    break
                acc += v_child
                sub.append((clsj, tree_child))
            if failed:
                continue
            value = g4 + acc
            if value > best_v or (
                value == best_v and (best_code < 0 or t_idx < best_code)
            ):
                best_v = value
                best_code = t_idx
                best_tree = (t_idx, tuple(sorted(sub)))
        return best_v, best_tree

    def _child_ub(self, arr: np.ndarray, d1: int) -> int:
        union = int(np.bitwise_or.reduce(self.himask[arr]))
        kinds = int(self.cow[union])
        if self.config.eval_bound == "capacity":
            return int(self.ubtab[d1][kinds, arr.size])
        g = self.gamma
        return int(arr.size) * int(g[min(d1 + 1, g.size - 1)])

    # ------------------------------------------------------------------
    # max-nodes preprocessing search
    # ------------------------------------------------------------------
    def max_nodes(self, mem: np.ndarray, depth: int, mode: str = "within") -> int:
        """Maximum resolution statistic over all strategies.

        The default "within" mode counts secrets resolvable within
        ``depth + 1`` guesses; it is the quantity the lower-bound
        segments need and the one that reproduces the shipped table.
        The alternatives exist to document the choice: "upto" counts
        nonempty nodes at every level down to ``depth`` (all-bulls
        nodes included), "at" only at the deepest level.
        """
        mem = np.asarray(mem, dtype=np.int32)
        self._mn_memo: dict = {}
        return self._max_nodes(mem, (), depth, mode)

    def _max_nodes(self, mem: np.ndarray, history, m: int, mode: str) -> int:
        if mode == "within" and m == 0:
            return 1
        if m == 0:
            return 0
        n = mem.size
        if n == 1:
            # A lone secret: resolve it now (one all-bulls node).
            if mode == "at":
                return 1 if m == 1 else 0
            return 1
        key = (mem.tobytes(), m)
        hit = self._mn_memo.get(key)
        if hit is not None:
            return hit

        cand = self._candidates(mem, history)
        counts, _ = self._scan(cand, mem)
        progress = counts.max(axis=1) < n
        nonempty = np.count_nonzero(counts, axis=1)
        if m == 1 and mode != "upto":
            # Both remaining modes collapse to the best class count:
            # an in-set guess trades its extra live class for the hit.
            live = np.where(progress, nonempty, 0)
            best = int(live.max(initial=0))
            if mode == "within":
                best = max(best, 1)  # resolving a member is always open
            self._mn_memo[key] = best
            return best
        best = 0
        for i in np.flatnonzero(progress):
            t_idx = int(cand[i])
            if mode == "upto":
                val = int(nonempty[i])
            elif mode == "at":
                val = 0
            else:
                val = 1 if counts[i, 0] == 1 else 0
            for clsj, arr in self.partition_children(mem, t_idx):
                val += self._max_nodes(
                    arr, history + ((t_idx, clsj),), m - 1, mode
                )
            best = max(best, val)
        self._mn_memo[key] = best
        return best
