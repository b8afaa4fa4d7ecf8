"""Adaptive variant: shared-memory prefix fingerprints and in-round binary search.

The adaptive cluster model adds a shared read-only store: values written in
round r are visible to every machine from round r+1 on, and a machine may
read any number of entries of the previous snapshot within one round (each
read metered). That removes the epsilon <= 0.5 restriction of the messaging
model: machines never need to receive one message from everybody at once.

The algorithm keeps the block decomposition and per-superblock analysis of
the messaging pipeline but answers LCP queries differently. A fan-out-s
prefix tree (s = block length) over the 2K leaf segments of the doubled
string builds phi(doubled[0..e]) for every position e; with constant-time
fingerprint splitting, any fragment fingerprint follows from two prefix
entries, so one machine can binary search an LCP value adaptively inside a
single round, center queries included. Every answer is spot-checked against
the stored mismatch letters; a contradiction aborts as a hash collision.

Round schedule for fixed epsilon: 1 (local phase + leaf scans) + (depth - 1)
combine rounds + 1 (path contexts + prefix entries) + 1 (all queries, merge,
per-machine best) + ceil(log_s M) best-reduction rounds. Depth and the
reduction height depend only on epsilon for the sizes under test, so the
total is a constant per epsilon.
"""

import numpy as np

from ._kernels import M61, manacher_tables, mulmod61, njit, prefix_fp_scan
from .engine import (
    ClusterConfig,
    RunStats,
    CollisionAbort,
    StepContext,
    cluster_init,
)
from .fingerprint import FingerprintScheme, scheme_init
from .strings import PalindromeTable, as_symbols, _prefix_pal_lengths_from_tables
from .structural import (
    CenterResult,
    _center_length,
    _center_query,
    _merge_b2,
    _periodic_resolve,
    _check_resolve_err,
    InconsistentMergeError,
)
from .mpc import FP_LAYERS, BlockPlan, MpcResult, _materialize_doubled, plan_decomposition


@njit
def _scale_offset_mod(vals, mul, add, out):
    """out[i] = (add + mul * vals[i]) mod (2**61 - 1), elementwise."""
    for i in range(vals.size):
        out[i] = (add + mulmod61(mul, vals[i])) % M61
    return vals.size


def leaf_bounds(n: int, block_len: int, block_count: int) -> list[tuple[int, int]]:
    """Doubled-string ranges of the 2K leaf segments, in position order.

    Leaves 0..K-1 are the text blocks; leaves K..2K-1 are the reversed block
    images, which appear in reverse block order past position n.
    """
    K = block_count
    bounds = []
    for k in range(K):
        bounds.append((k * block_len, min((k + 1) * block_len, n)))
    for k in range(K, 2 * K):
        j = 2 * K - 1 - k
        bounds.append((2 * n - min((j + 1) * block_len, n), 2 * n - j * block_len))
    return bounds


def _leaf_owner(plan: BlockPlan, leaf: int) -> int:
    K = plan.block_count
    block = leaf if leaf < K else 2 * K - 1 - leaf
    if K == 1 or block == 0:
        return 0
    if block >= plan.tail_block:
        return plan.machine_count - 1
    return block


def _tree_depth(count: int, fanout: int) -> int:
    """Levels above the leaves needed to reach a single node."""
    depth = 0
    while count > 1:
        count = -(-count // fanout)
        depth += 1
    return depth


class PrefixStore:
    """Read view over the shared prefix entries, for direct use and tests."""

    def __init__(self, snapshot_get, n: int, layers: int):
        self._get = snapshot_get
        self.n = n
        self.layers = layers
        self.reads = 0

    def entry(self, e: int):
        """(symbol, per-layer prefix values) at doubled position e."""
        self.reads += 1
        rec = self._get(e)
        if rec is None:
            raise KeyError(f"no prefix entry at position {e}")
        return rec

    def dump(self) -> dict:
        return {e: self._get(e) for e in range(2 * self.n)}


def ampc_lcp(store: PrefixStore, p1: int, p2: int, bases: tuple[int, ...]) -> int:
    """LCP of two doubled-string suffixes by adaptive binary search on prefixes.

    Maintains: prefixes of length lo are fingerprint-equal. Fragment
    fingerprints come from two prefix entries each; equality is tested
    cross-multiplied so no modular inverses are needed. The mismatch letters
    are checked literally at the end; their equality would prove a collision.
    """
    n2 = 2 * store.n
    if p1 == p2:
        return n2 - p1
    layers = len(bases)
    l_max = n2 - max(p1, p2)
    pow1 = tuple(pow(x, p1, M61) for x in bases)
    pow2 = tuple(pow(x, p2, M61) for x in bases)
    base1 = store.entry(p1 - 1)[1] if p1 > 0 else (0,) * layers
    base2 = store.entry(p2 - 1)[1] if p2 > 0 else (0,) * layers

    def equal_prefixes(length: int) -> bool:
        end1 = store.entry(p1 + length - 1)[1]
        end2 = store.entry(p2 + length - 1)[1]
        for l in range(layers):
            da = (end1[l] - base1[l]) % M61
            db = (end2[l] - base2[l]) % M61
            if (da * pow2[l]) % M61 != (db * pow1[l]) % M61:
                return False
        return True

    lo, hi = 0, l_max
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if equal_prefixes(mid):
            lo = mid
        else:
            hi = mid - 1
    if lo < l_max:
        s1 = store.entry(p1 + lo)[0]
        s2 = store.entry(p2 + lo)[0]
        if s1 == s2:
            raise CollisionAbort(
                f"binary search at ({p1}, {p2}) stopped where letters agree")
    return lo


class AmpcPalindromes:
    """One metered adaptive-mode run over a fixed text."""

    def __init__(self, text, epsilon: float, seed: int = 0, memory_constant: int = 64,
                 scheme: FingerprintScheme | None = None):
        self.sym = as_symbols(text)
        n = int(self.sym.size)
        if n < 1:
            raise ValueError("text must be nonempty")
        self.n = n
        self.plan = plan_decomposition(n, epsilon)
        self.config = ClusterConfig(n=n, epsilon=epsilon, mode="ampc",
                                    memory_constant=memory_constant, seed=seed)
        self.cluster = cluster_init(self.config)
        sigma = int(self.sym.max()) + 1 if n else 2
        self.scheme = scheme if scheme is not None else scheme_init(
            max(2 * n, 2), sigma, FP_LAYERS, seed)
        if self.scheme.modulus != M61:
            raise ValueError("the adaptive pipeline requires the 61-bit prime scheme")
        self.bases = self.scheme.bases
        self.fanout = max(2, self.plan.block_len)  # degenerate b=1 still needs a tree
        self.leaves = leaf_bounds(n, self.plan.block_len, self.plan.block_count)
        self.depth = _tree_depth(len(self.leaves), self.fanout)
        self.best_depth = _tree_depth(self.plan.machine_count, self.fanout)
        self._place()

    def _place(self) -> None:
        for m, role in enumerate(self.plan.roles):
            payload = self.cluster.machines[m].payload
            letters = self.sym[role.letters_lo : role.letters_hi].copy()
            letters.setflags(write=False)
            payload["letters"] = letters
            payload["letters_lo"] = role.letters_lo

    # -- round 1: local palindrome phase plus leaf prefix scans

    def _r1_leaves(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        role = self.plan.roles[m]
        n = self.n
        b = self.plan.block_len

        if role.kind in ("first", "last"):
            letters = ctx.payload["letters"]
            odd, even, ops = manacher_tables(letters)
            ctx.add_work(int(ops))
            base = 2 * ctx.payload["letters_lo"]
            lengths = np.empty(role.own_u_hi - role.own_u_lo, np.int64)
            for u in range(role.own_u_lo, role.own_u_hi):
                u_loc = u - base
                lengths[u - role.own_u_lo] = odd[u_loc // 2] if u_loc % 2 == 0 \
                    else even[(u_loc - 1) // 2]
            ctx.payload["own_lengths"] = lengths
        elif role.kind == "middle":
            letters = ctx.payload["letters"]
            odd, even, ops = manacher_tables(letters)
            ctx.add_work(int(ops))
            ctx.payload["f_odd"] = odd
            ctx.payload["f_even"] = even
            ctx.payload["prefix_lens"] = _prefix_pal_lengths_from_tables(
                odd, even, 2 * b, 4 * b)

        leafpfx = {}
        for leaf, (lo, hi) in enumerate(self.leaves):
            if _leaf_owner(self.plan, leaf) != m or lo >= hi:
                continue
            seg = _materialize_doubled(ctx.payload["letters"],
                                       ctx.payload["letters_lo"], n, lo, hi)
            vals = np.empty((self.scheme.layers, hi - lo), np.int64)
            for layer in range(self.scheme.layers):
                ops = prefix_fp_scan(seg, np.int64(self.bases[layer]), vals[layer])
                ctx.add_work(int(ops))
            leafpfx[leaf] = (seg, vals)
            total = tuple(int(v) for v in vals[:, -1])
            pows = self.scheme.pow_of(hi - lo)
            ctx.shared_write(("t", 0, leaf), (hi - lo, pows, total))
        ctx.payload["leafpfx"] = leafpfx

    # -- combine rounds: one tree level per round, root omitted (never needed)

    def _combine_level(self, level: int):
        fanout = self.fanout
        counts = [len(self.leaves)]
        while counts[-1] > 1:
            counts.append(-(-counts[-1] // fanout))
        node_count = counts[level]
        M = self.plan.machine_count
        q = M61

        def step(ctx: StepContext) -> None:
            for idx in range(ctx.machine_id, node_count, M):
                child_lo = idx * fanout
                child_hi = min(child_lo + fanout, counts[level - 1])
                length = 0
                vals = [0] * self.scheme.layers
                pows = [1] * self.scheme.layers
                for child in range(child_lo, child_hi):
                    rec = ctx.shared_read(("t", level - 1, child))
                    if rec is None:
                        raise InconsistentMergeError(
                            f"missing tree node ({level - 1}, {child})")
                    c_len, c_pows, c_vals = rec
                    for l in range(self.scheme.layers):
                        vals[l] = (vals[l] + pows[l] * c_vals[l]) % q
                        pows[l] = (pows[l] * c_pows[l]) % q
                    length += c_len
                    ctx.add_work(self.scheme.layers)
                ctx.shared_write(("t", level, idx), (length, tuple(pows), tuple(vals)))

        return step

    # -- context round: left-context of every owned leaf, then final entries

    def _r_context(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        q = M61
        fanout = self.fanout
        leafpfx = ctx.payload.get("leafpfx", {})
        for leaf, (seg, vals) in leafpfx.items():
            ctx_vals = [0] * self.scheme.layers
            ctx_pows = [1] * self.scheme.layers
            # accumulate left-sibling totals along the path, top level first
            for level in range(self.depth - 1, -1, -1):
                ancestor = leaf // fanout ** level
                group_lo = (ancestor // fanout) * fanout
                for idx in range(group_lo, ancestor):
                    rec = ctx.shared_read(("t", level, idx))
                    if rec is None:
                        raise InconsistentMergeError(f"missing tree node ({level}, {idx})")
                    c_len, c_pows, c_vals = rec
                    for l in range(self.scheme.layers):
                        ctx_vals[l] = (ctx_vals[l] + ctx_pows[l] * c_vals[l]) % q
                        ctx_pows[l] = (ctx_pows[l] * c_pows[l]) % q
                    ctx.add_work(self.scheme.layers)
            lo, hi = self.leaves[leaf]
            entries = np.empty((self.scheme.layers, hi - lo), np.int64)
            for l in range(self.scheme.layers):
                ops = _scale_offset_mod(vals[l], np.int64(ctx_pows[l]),
                                        np.int64(ctx_vals[l]), entries[l])
                ctx.add_work(int(ops))
            for off in range(hi - lo):
                ctx.shared_write(lo + off,
                                 (int(seg[off]), tuple(int(v) for v in entries[:, off])))
        ctx.payload.pop("leafpfx", None)

    # -- query round: every LCP answered adaptively, then merge and local best

    def _store_view(self, ctx: StepContext) -> PrefixStore:
        def snapshot_get(key):
            return ctx.shared_read(key)

        return PrefixStore(snapshot_get, self.n, self.scheme.layers)

    def _r_query(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        role = self.plan.roles[m]
        if role.kind == "middle":
            n = self.n
            store = self._store_view(ctx)
            lcp = lambda a, b: ampc_lcp(store, a, b, self.bases)
            i = role.sb_start
            prefix_lens = ctx.payload["prefix_lens"]
            results: list[CenterResult] = []
            if prefix_lens.size == 1:
                self.cluster.stats.bump("classified_single")
                self.cluster.stats.bump("lcp_queries")
                u = 2 * i + int(prefix_lens[0]) - 1
                p1, p2 = _center_query(u, n)
                results.append(CenterResult(u, int(_center_length(u, lcp(int(p1), int(p2)), n))))
            elif prefix_lens.size >= 2:
                self.cluster.stats.bump("classified_periodic")
                period = int(prefix_lens[-1] - prefix_lens[-2])
                left_ext = 0
                if i > 0:
                    self.cluster.stats.bump("lcp_queries")
                    left_ext = lcp(2 * n - i - period, 2 * n - i)
                self.cluster.stats.bump("lcp_queries")
                right_ext = min(period + lcp(i, i + period), n - i)
                centers, lengths, center_u, err = _periodic_resolve(
                    prefix_lens, i, left_ext, right_ext)
                _check_resolve_err(int(err))
                for u, length in zip(centers.tolist(), lengths.tolist()):
                    if length >= 0:
                        results.append(CenterResult(int(u), int(length)))
                if center_u >= 0:
                    self.cluster.stats.bump("lcp_queries")
                    self.cluster.stats.bump("simultaneous_centers")
                    p1, p2 = _center_query(int(center_u), n)
                    results.append(CenterResult(
                        int(center_u),
                        int(_center_length(int(center_u), lcp(int(p1), int(p2)), n))))
            else:
                self.cluster.stats.bump("classified_empty")
            res_u = np.asarray([r.center_u for r in results], np.int64)
            res_len = np.asarray([r.length for r in results], np.int64)
            lengths, missing = _merge_b2(ctx.payload["f_odd"], ctx.payload["f_even"],
                                         i, self.plan.block_len, res_u, res_len)
            ctx.add_work(lengths.size)
            if missing >= 0:
                raise InconsistentMergeError(
                    f"center u={int(missing)} reaches its fragment start unresolved")
            ctx.payload["own_lengths"] = lengths

        if role.own_u_hi > role.own_u_lo:
            lengths = ctx.payload["own_lengths"]
            us = np.arange(role.own_u_lo, role.own_u_hi, dtype=np.int64)
            starts = (us - lengths + 1) // 2
            best = int(np.argmax(lengths * (2 * self.n) - starts))
            ctx.add_work(lengths.size)
            if self.plan.machine_count == 1:
                ctx.payload["lps"] = (int(starts[best]), int(lengths[best]))
            else:
                ctx.shared_write(("b", 0, m), (int(lengths[best]), int(starts[best])))

    # -- best reduction: fan-in-s maximum over the shared store

    def _best_level(self, level: int):
        fanout = self.fanout
        counts = [self.plan.machine_count]
        while counts[-1] > 1:
            counts.append(-(-counts[-1] // fanout))
        node_count = counts[level] if level < len(counts) else 1
        M = self.plan.machine_count
        final = level == self.best_depth

        def step(ctx: StepContext) -> None:
            for idx in range(ctx.machine_id, node_count, M):
                best = None
                for child in range(idx * fanout, min((idx + 1) * fanout, counts[level - 1])):
                    rec = ctx.shared_read(("b", level - 1, child))
                    if rec is None:
                        continue
                    ctx.add_work(1)
                    if best is None or rec[0] > best[0] or \
                            (rec[0] == best[0] and rec[1] < best[1]):
                        best = rec
                if best is not None:
                    ctx.shared_write(("b", level, idx), best)
                    if final and idx == 0 and ctx.machine_id == 0:
                        ctx.payload["lps"] = (best[1], best[0])

        return step

    def run(self) -> None:
        self.cluster.run_round(self._r1_leaves)
        for level in range(1, self.depth):
            self.cluster.run_round(self._combine_level(level))
        self.cluster.run_round(self._r_context)
        self.cluster.run_round(self._r_query)
        for level in range(1, self.best_depth + 1):
            self.cluster.run_round(self._best_level(level))

    def export_table(self) -> PalindromeTable:
        self.cluster.stats.exported_outside_run = True
        n = self.n
        flat = np.full(2 * n - 1, -1, np.int64)
        for m, role in enumerate(self.plan.roles):
            if role.own_u_hi > role.own_u_lo:
                flat[role.own_u_lo : role.own_u_hi] = \
                    self.cluster.machines[m].payload["own_lengths"]
        if (flat < 0).any():
            raise InconsistentMergeError("gathered table has unowned centers")
        return PalindromeTable(odd=flat[0::2].copy(), even=flat[1::2].copy())

    @property
    def lps(self) -> tuple[int, int]:
        return self.cluster.machines[0].payload["lps"]


def solve_ampc(text, epsilon: float, seed: int = 0, memory_constant: int = 64,
               scheme: FingerprintScheme | None = None) -> MpcResult:
    """Adaptive-mode counterpart of solve_mpc; valid for any epsilon in (0, 1)."""
    run = AmpcPalindromes(text, epsilon, seed=seed, memory_constant=memory_constant,
                          scheme=scheme)
    run.run()
    start, length = run.lps
    return MpcResult(table=run.export_table(), lps_start=start, lps_length=length,
                     stats=run.cluster.stats, plan=run.plan)


def build_prefix_store(text, epsilon: float, seed: int = 0,
                       memory_constant: int = 64) -> tuple[PrefixStore, RunStats, int]:
    """Build the shared prefix fingerprints only; returns (store, stats, rounds)."""
    run = AmpcPalindromes(text, epsilon, seed=seed, memory_constant=memory_constant)
    run.cluster.run_round(run._r1_leaves)
    for level in range(1, run.depth):
        run.cluster.run_round(run._combine_level(level))
    run.cluster.run_round(run._r_context)
    # one empty round so the entries become snapshot-visible to readers
    run.cluster.run_round(lambda ctx: None)
    store = PrefixStore(run.cluster.shared.snapshot_get, run.n, run.scheme.layers)
    return store, run.cluster.stats, run.cluster.stats.rounds
