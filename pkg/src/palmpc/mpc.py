"""Distributed all-maximal-palindromes pipeline on the round-based cluster.

Decomposition
-------------
The text is cut into K = ceil(n / b) blocks of length b = ceil(n**(1-eps)).
Machine t (for the middle range of t) owns the palindrome centers of block t
and holds the superblock of blocks t-1 .. t+2 as its placement; consecutive
superblocks overlap by 3b. Centers within the first block or within 3b of the
right end can never outgrow the letters their machine already holds, so the
first and last machines finish those locally with a plain linear scan.

Fingerprint stores
------------------
Every start position p of the doubled string (text followed by its reverse,
length 2n) gets the fingerprint of the width-w window starting there, with
w = machine count. Two copies are distributed:

* class store: machine x keeps positions with p mod w == x. Consecutive
  positions land on distinct machines, so per-position lookups are balanced.
* stripe store: machine h keeps window rows r = p div w with r mod M == h.
  The fingerprint chain of any suffix -- one window every w positions -- is
  a single class restricted to rows >= p div w, so every machine serves an
  equal share of any chain, no matter how skewed the demand. This plays the
  role of data replication, applied once at build time instead of per request.

LCP protocol
------------
An LCP query (i, j) is answered in two fingerprint phases: compare the two
chains window by window to locate the first mismatching window t*, then fetch
the windows ending at each offset inside window t* (full-width windows, one
per class, balanced) and scan for the first unequal one. Windows below t*
agree, so two such shifted windows are equal exactly when the in-window
prefixes up to the shift are equal. A mismatch inside the very first window
is resolved against locally held letters instead (every query a superblock
issues points at letters within, or one window left of, its own fragment).

Round schedule (fixed; R0 = 10 rounds for every input and size)
---------------------------------------------------------------
 1 local scans, classification, window fingerprints routed to both stores,
   first-wave chain requests (period probes and lone-center queries)
 2 stores installed; chain requests served from the stripe store
 3 chains compared; first-window cases settled from local letters;
   in-window refinement requests to the class store
 4 refinement served
 5 exact first-wave answers; periodic case analysis; second-wave center
   queries for the one center per superblock that needs one
 6 second-wave chains served
 7 compared; refinement requested
 8 refinement served
 9 final lengths merged with local tables; per-machine best to machine 0
10 machine 0 reduces to the leftmost-longest palindromic substring

Fingerprint equality is trusted only where a contradiction would be
detectable: first-window resolutions are cross-checked against letters and
refinement scans must be prefix-monotone; any violation aborts the run as a
hash collision rather than returning a silently wrong table.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import M61, first_unequal_run, fragment_fp_scan, manacher_tables, njit
from .engine import (
    ClusterConfig,
    CollisionAbort,
    RunStats,
    StepContext,
    ceil_power,
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

FP_LAYERS = 2


# ---------------------------------------------------------------------------
# block plan


@dataclass(frozen=True)
class MachineRole:
    kind: str                      # "first" | "middle" | "last" | "store"
    letters_lo: int                # S positions [letters_lo, letters_hi) placed here
    letters_hi: int
    own_u_lo: int                  # owned center half-indices [own_u_lo, own_u_hi)
    own_u_hi: int
    sb_start: int                  # superblock start (middle machines, else -1)
    scan_spans: tuple[tuple[int, int], ...]  # doubled-string ranges this machine fingerprints
    tail_ship_to: int              # middle machine to send our block-tail letters to, or -1


@dataclass(frozen=True)
class BlockPlan:
    n: int
    epsilon: float
    block_len: int                 # b
    block_count: int               # K
    machine_count: int             # M == K
    window: int                    # w, modular window width == machine count
    tail_block: int                # first block owned by the last machine
    roles: tuple[MachineRole, ...]

    def holder_of_position(self, sprime_pos: int) -> int:
        """Machine whose placed letters cover the width-w window at a doubled position."""
        n = self.n
        pos = sprime_pos if sprime_pos < n else 2 * n - 1 - sprime_pos
        block = min(pos // self.block_len, self.block_count - 1)
        if block == 0:
            return 0
        if block >= self.tail_block:
            return self.machine_count - 1
        return block


def plan_decomposition(n: int, epsilon: float) -> BlockPlan:
    """Block/superblock decomposition and per-machine duties for (n, epsilon)."""
    if n < 1:
        raise ValueError("text must be nonempty")
    b = ceil_power(n, 1.0 - epsilon)
    K = math.ceil(n / b)
    M = K
    w = M

    def image(lo: int, hi: int) -> tuple[int, int]:
        # doubled-string range occupied by the reversed copy of S[lo, hi)
        return 2 * n - hi, 2 * n - lo

    roles: list[MachineRole] = []
    if K == 1:
        roles.append(MachineRole("first", 0, n, 0, max(2 * n - 1, 0), -1,
                                 ((0, n), (n, 2 * n)), -1))
        return BlockPlan(n=n, epsilon=epsilon, block_len=b, block_count=K,
                         machine_count=M, window=w, tail_block=K, roles=tuple(roles))

    # tail is the first block whose superblock would overrun the text; the
    # last machine owns every center from there on, using the final letters
    tail = 1
    while (tail + 3) * b <= n:
        tail += 1
    for m in range(M):
        # a machine ships the w letters preceding its right neighbor's
        # superblock so that neighbor can settle first-window mismatches of
        # its leftward probes locally
        ship = m + 1 if 2 <= m + 1 <= tail - 1 else -1
        if m == 0:
            hi = min(2 * b, n)
            roles.append(MachineRole(
                "first", 0, hi, 0, min(2 * b, 2 * n - 1), -1,
                ((0, b), image(0, b)), ship))
        elif 1 <= m <= tail - 1:
            sb = (m - 1) * b
            roles.append(MachineRole(
                "middle", sb, sb + 4 * b, 2 * m * b, 2 * (m + 1) * b, sb,
                ((m * b, (m + 1) * b), image(m * b, (m + 1) * b)), ship))
        elif m == M - 1:
            lo = max(0, n - 8 * b)
            roles.append(MachineRole(
                "last", lo, n, 2 * tail * b, 2 * n - 1, -1,
                ((tail * b, n), image(tail * b, n)), -1))
        else:
            roles.append(MachineRole("store", 0, 0, 0, 0, -1, (), -1))
    return BlockPlan(n=n, epsilon=epsilon, block_len=b, block_count=K,
                     machine_count=M, window=w, tail_block=tail, roles=tuple(roles))


# ---------------------------------------------------------------------------
# local letter access


def _materialize_doubled(letters: np.ndarray, letters_lo: int, n: int,
                         lo: int, hi: int) -> np.ndarray:
    """Doubled-string range [lo, hi) from a machine's placed slice of the text."""
    if lo >= hi:
        return np.empty(0, np.int64)
    parts = []
    if lo < n:
        f_hi = min(hi, n)
        if lo < letters_lo or f_hi - letters_lo > letters.size:
            raise IndexError("forward range escapes the machine's letters")
        parts.append(letters[lo - letters_lo : f_hi - letters_lo])
    if hi > n:
        r_lo = max(lo, n)
        s_lo, s_hi = 2 * n - hi, 2 * n - r_lo
        if s_lo < letters_lo or s_hi - letters_lo > letters.size:
            raise IndexError("reversed range escapes the machine's letters")
        parts.append(letters[s_lo - letters_lo : s_hi - letters_lo][::-1])
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


@njit
def _letters_common_run(a, b, limit):
    run = np.int64(0)
    while run < limit and a[run] == b[run]:
        run += 1
    return run


# ---------------------------------------------------------------------------
# pipeline


class _Query:
    """Driver-side record of one in-flight LCP query of an origin machine."""

    __slots__ = ("qid", "kind", "p1", "p2", "center_u", "chains", "t_star",
                 "w_cap", "singles", "answer", "checked")

    def __init__(self, qid: int, kind: str, p1: int, p2: int, center_u: int = -1):
        self.qid = qid
        self.kind = kind          # "left" | "right" | "center" | "user"
        self.p1 = p1
        self.p2 = p2
        self.center_u = center_u
        self.chains = {}          # side -> list of (rows, vals) parts
        self.t_star = -1
        self.w_cap = 0
        self.singles = {}         # side -> list of (positions, vals) parts
        self.answer = -1
        self.checked = False      # letter spot-check already considered


class MpcPalindromes:
    """One metered run of the pipeline over a fixed text."""

    ROUNDS = 10

    def __init__(self, text, epsilon: float, seed: int = 0, memory_constant: int = 64,
                 scheme: FingerprintScheme | None = None):
        self.sym = as_symbols(text)
        n = int(self.sym.size)
        if n < 1:
            raise ValueError("text must be nonempty")
        self.n = n
        self.plan = plan_decomposition(n, epsilon)
        self.config = ClusterConfig(n=n, epsilon=epsilon, mode="mpc",
                                    memory_constant=memory_constant, seed=seed)
        self.cluster = cluster_init(self.config)
        sigma = int(self.sym.max()) + 1 if n else 2
        self.scheme = scheme if scheme is not None else scheme_init(
            max(2 * n, 2), sigma, FP_LAYERS, seed)
        if self.scheme.modulus != M61:
            raise ValueError("the distributed pipeline requires the 61-bit prime scheme")
        if self.plan.window > self.plan.block_len:
            raise AssertionError("window width exceeds block length; epsilon > 0.5?")
        self.bases = np.asarray(self.scheme.bases, dtype=np.int64)
        w = self.plan.window
        self.pow_w = np.asarray(self.scheme.pow_of(w), dtype=np.int64)
        self.queries: dict[int, dict[int, _Query]] = {}
        self.resolved: dict[int, list[CenterResult]] = {}
        self._place()

    # -- placement (round 0): each machine receives its role's letter slice

    def _place(self) -> None:
        for m, role in enumerate(self.plan.roles):
            payload = self.cluster.machines[m].payload
            letters = self.sym[role.letters_lo : role.letters_hi].copy()
            letters.setflags(write=False)
            payload["letters"] = letters
            payload["letters_lo"] = role.letters_lo

    # -- helpers shared by phases

    def _send_frag_batches(self, ctx: StepContext, positions: np.ndarray,
                           vals: np.ndarray) -> None:
        """Route window fingerprints to their class-store and stripe-store owners.

        Positions within a scan span are consecutive, so class owners cycle
        with stride w and stripe owners change only at row boundaries.
        """
        plan = self.plan
        w = plan.window
        M = plan.machine_count
        span = positions.size
        if span == 0:
            return
        lo = int(positions[0])
        for k in range(min(w, span)):
            ctx.send((lo + k) % w,
                     {"t": "fc", "pos": positions[k::w].copy(), "vals": vals[:, k::w].copy()})
        row_lo = lo // w
        row_hi = (lo + span - 1) // w
        for row in range(row_lo, row_hi + 1):
            s = max(row * w - lo, 0)
            e = min((row + 1) * w - lo, span)
            ctx.send(row % M,
                     {"t": "fs", "pos": positions[s:e], "vals": vals[:, s:e]})

    def _scan_fragments(self, ctx: StepContext, role: MachineRole) -> None:
        n = self.n
        w = self.plan.window
        letters = ctx.payload["letters"]
        lo = ctx.payload["letters_lo"]
        for span_lo, span_hi in role.scan_spans:
            if span_lo >= span_hi:
                continue
            buf_hi = min(span_hi + w - 1, 2 * n)
            buf = _materialize_doubled(letters, lo, n, span_lo, buf_hi)
            span = span_hi - span_lo
            vals = np.empty((self.scheme.layers, span), np.int64)
            for layer in range(self.scheme.layers):
                ops = fragment_fp_scan(buf, span, w, self.bases[layer],
                                       self.pow_w[layer], vals[layer])
                ctx.add_work(int(ops))
            positions = np.arange(span_lo, span_hi, dtype=np.int64)
            self._send_frag_batches(ctx, positions, vals)

    def _new_query(self, m: int, kind: str, p1: int, p2: int, center_u: int = -1) -> _Query:
        per = self.queries.setdefault(m, {})
        q = _Query(len(per), kind, p1, p2, center_u)
        per[q.qid] = q
        self.cluster.stats.bump("lcp_queries")
        return q

    def _broadcast_chain_requests(self, ctx: StepContext, queries: list[_Query]) -> None:
        if not queries:
            return
        key, pos = [], []
        for q in queries:
            for s, p in ((0, q.p1), (1, q.p2)):
                key.append(2 * q.qid + s)
                pos.append(p)
        ctx.broadcast({"t": "cq", "o": ctx.machine_id,
                       "key": np.asarray(key, np.int64), "pos": np.asarray(pos, np.int64)})

    # -- round 1: local phase

    def _r1_local(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        role = self.plan.roles[m]
        plan = self.plan
        n = self.n

        self._scan_fragments(ctx, role)

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
            ctx.add_work(lengths.size)
            ctx.payload["own_lengths"] = lengths
            self.cluster.stats.bump("local_only_machines")
        elif role.kind == "middle":
            letters = ctx.payload["letters"]
            odd, even, ops = manacher_tables(letters)
            ctx.add_work(int(ops))
            ctx.payload["f_odd"] = odd
            ctx.payload["f_even"] = even
            b = plan.block_len
            prefix_lens = _prefix_pal_lengths_from_tables(odd, even, 2 * b, 4 * b)
            ctx.add_work(2 * b)
            i = role.sb_start
            wave1: list[_Query] = []
            if prefix_lens.size == 1:
                self.cluster.stats.bump("classified_single")
                u = 2 * i + int(prefix_lens[0]) - 1
                p1, p2 = _center_query(u, n)
                wave1.append(self._new_query(m, "center", int(p1), int(p2), u))
            elif prefix_lens.size >= 2:
                self.cluster.stats.bump("classified_periodic")
                period = int(prefix_lens[-1] - prefix_lens[-2])
                ctx.payload["period"] = period
                ctx.payload["prefix_lens"] = prefix_lens
                if i > 0:
                    wave1.append(self._new_query(m, "left", 2 * n - i - period, 2 * n - i))
                wave1.append(self._new_query(m, "right", i, i + period))
            else:
                self.cluster.stats.bump("classified_empty")
            self._broadcast_chain_requests(ctx, wave1)

        if role.tail_ship_to >= 0:
            # letters just left of the target's superblock, for first-window checks
            target_sb = self.plan.roles[role.tail_ship_to].sb_start
            w = plan.window
            lo = ctx.payload["letters_lo"]
            seg = ctx.payload["letters"][target_sb - w - lo : target_sb - lo]
            ctx.send(role.tail_ship_to, {"t": "tail", "lo": target_sb - w, "data": seg})

    # -- store installation and chain serving (rounds 2 and 6)

    def _install_and_serve(self, ctx: StepContext, install: bool) -> None:
        m = ctx.machine_id
        plan = self.plan
        n = self.n
        w = plan.window
        M = plan.machine_count
        layers = self.scheme.layers

        chain_reqs = []
        for src, msg in ctx.inbox:
            tag = msg["t"]
            if tag == "fc" and install:
                rows = (msg["pos"] - m) // w
                ctx.payload["cls_vals"][:, rows] = msg["vals"]
                ctx.add_work(rows.size)
            elif tag == "fs" and install:
                rows = msg["pos"] // w
                lidx = (rows - m) // M
                cls = msg["pos"] % w
                ctx.payload["str_vals"][:, lidx, cls] = msg["vals"]
                ctx.add_work(rows.size)
            elif tag == "tail" and install:
                ctx.payload["tail_lo"] = msg["lo"]
                ctx.payload["tail"] = msg["data"]
            elif tag == "cq":
                chain_reqs.append(msg)

        str_vals = ctx.payload.get("str_vals")
        if str_vals is None:
            return
        for msg in chain_reqs:
            origin = int(msg["o"])
            out_key, out_rows, out_vals = [], [], []
            for key, pos in zip(msg["key"], msg["pos"]):
                cls = int(pos) % w
                row0 = int(pos) // w
                total_rows = -(-(2 * n - cls) // w)   # rows existing for this class
                start = row0 + ((m - row0) % M)
                rows = np.arange(start, total_rows, M, dtype=np.int64)
                if rows.size == 0:
                    continue
                out_key.append(int(key))
                out_rows.append(rows)
                out_vals.append(str_vals[:, (rows - m) // M, cls])
                ctx.add_work(rows.size * layers)
            if out_key:
                ctx.send(origin, {"t": "cr", "key": out_key,
                                  "rows": out_rows, "vals": out_vals})

    def _r2_install_serve(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        plan = self.plan
        n = self.n
        w = plan.window
        M = plan.machine_count
        cls_rows = -(-(2 * n - m) // w) if m < w else 0
        row_count = len(range(m, -(-2 * n // w), M))
        ctx.payload["cls_vals"] = np.full((self.scheme.layers, max(cls_rows, 0)), -1, np.int64)
        ctx.payload["str_vals"] = np.full((self.scheme.layers, row_count, w), -1, np.int64)
        self._install_and_serve(ctx, install=True)

    def _r6_serve(self, ctx: StepContext) -> None:
        self._install_and_serve(ctx, install=False)

    # -- chain comparison (rounds 3 and 7)

    def _local_window(self, ctx: StepContext, lo: int, hi: int) -> np.ndarray | None:
        """Doubled-range letters if this machine holds them (superblock or tail)."""
        n = self.n
        letters = ctx.payload["letters"]
        base = ctx.payload["letters_lo"]
        tail = ctx.payload.get("tail")
        if tail is not None:
            letters = np.concatenate((tail, letters))
            base = ctx.payload["tail_lo"]
        try:
            return _materialize_doubled(letters, base, n, lo, hi)
        except IndexError:
            return None

    @staticmethod
    def _first_window_caps(n: int, w: int, q: _Query) -> tuple[int, int, int]:
        len_i = min(w, 2 * n - q.p1)
        len_j = min(w, 2 * n - q.p2)
        return len_i, len_j, min(len_i, len_j)

    def _resolve_first_window(self, ctx: StepContext, q: _Query) -> None:
        """Settle a mismatch inside the first window against locally held letters."""
        len_i, len_j, cap = self._first_window_caps(self.n, self.plan.window, q)
        a = self._local_window(ctx, q.p1, q.p1 + cap)
        b = self._local_window(ctx, q.p2, q.p2 + cap)
        if a is None or b is None:
            raise InconsistentMergeError(
                f"first-window letters for query at ({q.p1}, {q.p2}) are not local")
        run = int(_letters_common_run(a, b, cap))
        ctx.add_work(cap)
        if run == cap and len_i == len_j:
            raise CollisionAbort(
                f"window fingerprints at ({q.p1}, {q.p2}) differ but letters agree")
        q.answer = run

    def _compare_chains(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        n = self.n
        w = self.plan.window
        per = self.queries.get(m, {})
        touched = set()
        for src, msg in ctx.inbox:
            if msg["t"] != "cr":
                continue
            for key, rows, vals in zip(msg["key"], msg["rows"], msg["vals"]):
                q = per[key // 2]
                q.chains.setdefault(key % 2, []).append((rows, vals))
                touched.add(key // 2)

        singles_pos: list[int] = []
        singles_key: list[int] = []
        for qid in sorted(touched):
            q = per[qid]
            chain = {}
            for side, pos in ((0, q.p1), (1, q.p2)):
                parts = q.chains.get(side, [])
                if parts:
                    rows = np.concatenate([r for r, _ in parts])
                    vals = np.concatenate([v for _, v in parts], axis=1)
                    order = np.argsort(rows, kind="stable")
                    rows = rows[order]
                    vals = vals[:, order]
                else:
                    rows = np.empty(0, np.int64)
                    vals = np.empty((self.scheme.layers, 0), np.int64)
                base_row = pos // w
                if rows.size and (rows[0] != base_row or
                                  not np.array_equal(rows, np.arange(base_row, base_row + rows.size))):
                    raise InconsistentMergeError("chain rows arrived with gaps")
                chain[side] = vals
            q.chains = {}

            vi, vj = chain[0], chain[1]
            li = 2 * n - q.p1
            lj = 2 * n - q.p2
            t_max = min(vi.shape[1], vj.shape[1])
            ctx.add_work(t_max * self.scheme.layers)
            # window equality needs equal lengths too: the last window of
            # either suffix may be ragged
            offs = np.arange(t_max, dtype=np.int64) * w
            len_i = np.minimum(w, 2 * n - q.p1 - offs)
            len_j = np.minimum(w, 2 * n - q.p2 - offs)
            eq = np.all(vi[:, :t_max] == vj[:, :t_max], axis=0) & (len_i == len_j)
            bad = np.flatnonzero(~eq)
            if bad.size == 0:
                q.answer = min(li, lj)       # one suffix contains the other
                continue
            t_star = int(bad[0])
            q.t_star = t_star
            if t_star == 0:
                self._resolve_first_window(ctx, q)
                continue
            cap = min(w, min(li, lj) - t_star * w)
            q.w_cap = int(cap)
            for side, pos in ((0, q.p1), (1, q.p2)):
                anchor = pos + t_star * w
                for delta in range(1, q.w_cap + 1):
                    singles_pos.append(anchor + delta - w)
                    singles_key.append(2 * qid + side)

        if singles_pos:
            pos_arr = np.asarray(singles_pos, np.int64)
            key_arr = np.asarray(singles_key, np.int64)
            dest = pos_arr % w
            order = np.argsort(dest, kind="stable")
            cuts = np.flatnonzero(np.diff(dest[order])) + 1
            starts = np.concatenate(([0], cuts))
            ends = np.concatenate((cuts, [order.size]))
            for s, e in zip(starts, ends):
                idx = order[s:e]
                ctx.send(int(dest[order[s]]),
                         {"t": "sq", "o": m, "key": key_arr[idx], "pos": pos_arr[idx]})

    # -- refinement serving (rounds 4 and 8)

    def _serve_singles(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        w = self.plan.window
        cls_vals = ctx.payload.get("cls_vals")
        for src, msg in ctx.inbox:
            if msg["t"] != "sq":
                continue
            rows = (msg["pos"] - m) // w
            vals = cls_vals[:, rows]
            ctx.add_work(rows.size)
            ctx.send(int(msg["o"]), {"t": "sr", "key": msg["key"],
                                     "pos": msg["pos"], "vals": vals})

    # -- refinement consumption

    def _finish_refinements(self, ctx: StepContext) -> None:
        m = ctx.machine_id
        w = self.plan.window
        per = self.queries.get(m, {})
        touched = set()
        for src, msg in ctx.inbox:
            if msg["t"] != "sr":
                continue
            qids = msg["key"] // 2
            for qid in np.unique(qids):
                q = per[int(qid)]
                mask = qids == qid
                q.singles.setdefault("parts", []).append(
                    (msg["key"][mask] % 2, msg["pos"][mask], msg["vals"][:, mask]))
                touched.add(int(qid))

        for qid in sorted(touched):
            q = per[qid]
            parts = q.singles.get("parts", [])
            side = np.concatenate([p[0] for p in parts])
            pos = np.concatenate([p[1] for p in parts])
            vals = np.concatenate([p[2] for p in parts], axis=1)
            q.singles = {}
            anchor0 = q.p1 + q.t_star * w
            anchor1 = q.p2 + q.t_star * w
            by_delta = {}
            for s, anchor in ((0, anchor0), (1, anchor1)):
                mask = side == s
                delta = pos[mask] - (anchor - w)
                v = np.full((self.scheme.layers, q.w_cap + 1), -1, np.int64)
                v[:, delta] = vals[:, mask]
                if (v[:, 1:] < 0).any():
                    raise InconsistentMergeError(
                        f"refinement responses for ({q.p1}, {q.p2}) are incomplete")
                by_delta[s] = v
            eq = np.all(by_delta[0][:, 1:] == by_delta[1][:, 1:], axis=0)
            run, tainted = first_unequal_run(eq)
            ctx.add_work(q.w_cap)
            if tainted:
                raise CollisionAbort(
                    f"refinement scan at ({q.p1}, {q.p2}) is not prefix-monotone")
            q.answer = q.t_star * w + int(run)

    # -- round 5: first-wave resolution and second-wave requests

    def _r5_resolve(self, ctx: StepContext) -> None:
        self._finish_refinements(ctx)
        m = ctx.machine_id
        role = self.plan.roles[m]
        if role.kind != "middle":
            return
        per = self.queries.get(m, {})
        n = self.n
        results: list[CenterResult] = []
        wave2: list[_Query] = []

        period = ctx.payload.get("period")
        if period is not None:
            left_q = next((q for q in per.values() if q.kind == "left"), None)
            right_q = next(q for q in per.values() if q.kind == "right")
            left_ext = left_q.answer if left_q is not None else 0
            # clamp: the periodic run cannot extend past the end of the text
            right_ext = min(period + right_q.answer, self.n - role.sb_start)
            if left_ext < 0 or right_q.answer < 0:
                raise InconsistentMergeError("period probes left unanswered")
            centers, lengths, center_u, err = _periodic_resolve(
                ctx.payload["prefix_lens"], role.sb_start, left_ext, right_ext)
            _check_resolve_err(int(err))
            ctx.add_work(centers.size)
            for u, length in zip(centers.tolist(), lengths.tolist()):
                if length >= 0:
                    results.append(CenterResult(int(u), int(length)))
            if center_u >= 0:
                p1, p2 = _center_query(int(center_u), n)
                wave2.append(self._new_query(m, "center", int(p1), int(p2), int(center_u)))
                self.cluster.stats.bump("simultaneous_centers")
        else:
            for q in per.values():
                if q.kind == "center":
                    if q.answer < 0:
                        raise InconsistentMergeError("lone center query left unanswered")
                    results.append(CenterResult(q.center_u, int(_center_length(q.center_u, q.answer, n))))

        self.resolved[m] = results
        self._broadcast_chain_requests(ctx, wave2)

    # -- rounds 7..9

    def _r7_compare(self, ctx: StepContext) -> None:
        self._compare_chains(ctx)

    def _r9_finalize(self, ctx: StepContext) -> None:
        self._finish_refinements(ctx)
        m = ctx.machine_id
        n = self.n
        role = self.plan.roles[m]
        if role.kind == "middle":
            per = self.queries.get(m, {})
            results = self.resolved.get(m, [])
            for q in per.values():
                if q.kind == "center" and all(r.center_u != q.center_u for r in results):
                    if q.answer < 0:
                        raise InconsistentMergeError("center query left unanswered")
                    results.append(CenterResult(q.center_u, int(_center_length(q.center_u, q.answer, n))))
            res_u = np.asarray([r.center_u for r in results], np.int64)
            res_len = np.asarray([r.length for r in results], np.int64)
            lengths, missing = _merge_b2(ctx.payload["f_odd"], ctx.payload["f_even"],
                                         role.sb_start, self.plan.block_len, res_u, res_len)
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
            ctx.send(0, {"t": "best", "len": int(lengths[best]), "start": int(starts[best])})

    def _r10_reduce(self, ctx: StepContext) -> None:
        if ctx.machine_id != 0:
            return
        best_len = 0
        best_start = 0
        for src, msg in ctx.inbox:
            if msg["t"] != "best":
                continue
            ctx.add_work(1)
            if msg["len"] > best_len or (msg["len"] == best_len and msg["start"] < best_start):
                best_len = msg["len"]
                best_start = msg["start"]
        ctx.payload["lps"] = (best_start, best_len)

    # -- driver

    def run(self) -> None:
        phases = [self._r1_local, self._r2_install_serve, self._compare_chains,
                  self._serve_singles, self._r5_resolve, self._r6_serve,
                  self._r7_compare, self._serve_singles, self._r9_finalize,
                  self._r10_reduce]
        for phase in phases:
            self.cluster.run_round(phase)
        budget = 3 * self.plan.machine_count
        issued = self.cluster.stats.counters.get("lcp_queries", 0)
        if issued > budget:
            raise AssertionError(f"{issued} LCP queries exceed the 3-per-machine budget")
        for m, per in self.queries.items():
            if len(per) > 3:
                raise AssertionError(f"machine {m} issued {len(per)} LCP queries")

    def export_table(self) -> PalindromeTable:
        """Gather the distributed table; desk-scale convenience outside the metered run."""
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

    def table_slice(self, machine_id: int) -> tuple[int, np.ndarray]:
        """One machine's owned stretch of the table, keyed by its first half-index."""
        role = self.plan.roles[machine_id]
        return role.own_u_lo, self.cluster.machines[machine_id].payload.get(
            "own_lengths", np.empty(0, np.int64))

    @property
    def lps(self) -> tuple[int, int]:
        return self.cluster.machines[0].payload["lps"]


@dataclass
class MpcResult:
    table: PalindromeTable
    lps_start: int
    lps_length: int
    stats: RunStats
    plan: BlockPlan


def solve_mpc(text, epsilon: float, seed: int = 0, memory_constant: int = 64,
              scheme: FingerprintScheme | None = None) -> MpcResult:
    """All maximal palindromes and the leftmost-longest palindromic substring."""
    run = MpcPalindromes(text, epsilon, seed=seed, memory_constant=memory_constant,
                         scheme=scheme)
    run.run()
    start, length = run.lps
    return MpcResult(table=run.export_table(), lps_start=start, lps_length=length,
                     stats=run.cluster.stats, plan=run.plan)


class DistributedLcp(MpcPalindromes):
    """Standalone distributed answering of arbitrary LCP queries on the doubled text.

    Queries are spread round-robin over the machines and answered with the
    same two-phase fingerprint protocol as the palindrome pipeline, at most
    three in flight per machine; larger batches are pipelined in waves of
    3 * machine_count, one wave entering every other round. Because arbitrary
    queries have no locality guarantee, first-window mismatches are settled by
    fetching the two letter windows from the machines that placed them, and a
    deterministic sample of fingerprint-resolved answers is letter-verified
    the same way; a contradiction aborts as a collision. 2 * waves + 5 rounds.
    """

    PER_MACHINE_WAVE = 2
    VERIFY_EVERY = 8

    def __init__(self, text, queries: list[tuple[int, int]], epsilon: float,
                 seed: int = 0, memory_constant: int = 64,
                 scheme: FingerprintScheme | None = None):
        super().__init__(text, epsilon, seed=seed, memory_constant=memory_constant,
                         scheme=scheme)
        n = self.n
        self.user_queries = list(queries)
        self.answers: list[int | None] = [None] * len(queries)
        self._slots: dict[tuple[int, int], int] = {}
        self.waves = 0
        M = self.plan.machine_count
        protocol_idx = 0
        for idx, (p1, p2) in enumerate(queries):
            if not (0 <= p1 <= 2 * n and 0 <= p2 <= 2 * n):
                raise ValueError(f"query positions ({p1}, {p2}) outside the doubled text")
            if p1 == 2 * n or p2 == 2 * n:
                self.answers[idx] = 0
                continue
            if p1 == p2:
                self.answers[idx] = 2 * n - p1
                continue
            origin = protocol_idx % M
            q = self._new_query(origin, "user", p1, p2)
            self._slots[(origin, q.qid)] = idx
            self.waves = max(self.waves, q.qid // self.PER_MACHINE_WAVE + 1)
            protocol_idx += 1
        self._emit_wave = 0

    def _emit_wave_requests(self, ctx: StepContext) -> None:
        lo = self._emit_wave * self.PER_MACHINE_WAVE
        hi = lo + self.PER_MACHINE_WAVE
        mine = [q for qid, q in self.queries.get(ctx.machine_id, {}).items()
                if lo <= qid < hi]
        self._broadcast_chain_requests(ctx, mine)

    def _r1_scan_and_ask(self, ctx: StepContext) -> None:
        self._scan_fragments(ctx, self.plan.roles[ctx.machine_id])
        self._emit_wave_requests(ctx)

    def _resolve_first_window(self, ctx: StepContext, q: _Query) -> None:
        # positions are arbitrary: fetch both windows from their placers
        _, _, cap = self._first_window_caps(self.n, self.plan.window, q)
        for side, pos in ((0, q.p1), (1, q.p2)):
            ctx.send(self.plan.holder_of_position(pos),
                     {"t": "lw", "o": ctx.machine_id, "qid": q.qid,
                      "side": side, "pos": pos, "cap": cap})

    def _serve_phase(self, ctx: StepContext) -> None:
        """Answer whatever arrived: chain requests, refinements, letter fetches."""
        self._install_and_serve(ctx, install=False)
        self._serve_singles(ctx)
        for src, msg in ctx.inbox:
            tag = msg["t"]
            if tag == "lw":
                win = self._local_window(ctx, msg["pos"], msg["pos"] + msg["cap"])
                if win is None:
                    raise InconsistentMergeError(
                        f"machine {ctx.machine_id} does not place position {msg['pos']}")
                ctx.add_work(win.size)
                ctx.send(int(msg["o"]), {"t": "lr", "qid": msg["qid"],
                                         "side": msg["side"], "letters": win})
            elif tag == "lv":
                pos = int(msg["pos"])
                win = self._local_window(ctx, pos, pos + 1)
                if win is None:
                    raise InconsistentMergeError(
                        f"machine {ctx.machine_id} does not place position {pos}")
                ctx.send(int(msg["o"]), {"t": "lvr", "qid": msg["qid"],
                                         "side": msg["side"], "sym": int(win[0])})

    def _consume_phase(self, ctx: StepContext) -> None:
        """Consume whatever arrived, then emit the next wave's chain requests."""
        m = ctx.machine_id
        per = self.queries.get(m, {})
        self._compare_chains(ctx)
        self._finish_refinements(ctx)

        windows: dict[int, dict[int, np.ndarray]] = {}
        verdicts: dict[int, dict[int, int]] = {}
        for src, msg in ctx.inbox:
            if msg["t"] == "lr":
                windows.setdefault(int(msg["qid"]), {})[int(msg["side"])] = msg["letters"]
            elif msg["t"] == "lvr":
                verdicts.setdefault(int(msg["qid"]), {})[int(msg["side"])] = msg["sym"]
        for qid, sides in sorted(windows.items()):
            q = per[qid]
            len_i, len_j, cap = self._first_window_caps(self.n, self.plan.window, q)
            run = int(_letters_common_run(sides[0], sides[1], cap))
            ctx.add_work(cap)
            if run == cap and len_i == len_j:
                raise CollisionAbort(
                    f"window fingerprints at ({q.p1}, {q.p2}) differ but letters agree")
            q.answer = run
        for qid, sides in sorted(verdicts.items()):
            q = per[qid]
            if len(sides) == 2 and sides[0] == sides[1]:
                raise CollisionAbort(
                    f"answer {q.answer} for ({q.p1}, {q.p2}) fails the letter spot-check")

        # letter spot-checks for answers that just landed via fingerprints
        newly = set(windows.keys())
        for qid, q in per.items():
            if q.answer >= 0 and qid not in newly and not q.checked:
                q.checked = True
                if q.t_star != 0 and qid % self.VERIFY_EVERY == 0:
                    mu = q.answer
                    for side, pos in ((0, q.p1), (1, q.p2)):
                        if pos + mu < 2 * self.n:
                            ctx.send(self.plan.holder_of_position(pos + mu),
                                     {"t": "lv", "o": m, "qid": qid, "side": side,
                                      "pos": pos + mu})
        self._emit_wave_requests(ctx)

    def run(self) -> list[int]:
        self.cluster.run_round(self._r1_scan_and_ask)
        self.cluster.run_round(self._r2_install_serve)
        total_consumes = self.waves + 2 if self.waves else 0
        for k in range(total_consumes):
            self._emit_wave = k + 1
            self.cluster.run_round(self._consume_phase)
            self.cluster.run_round(self._serve_phase)
        self.cluster.run_round(self._consume_phase)
        for (origin, qid), slot in self._slots.items():
            q = self.queries[origin][qid]
            if q.answer < 0:
                raise InconsistentMergeError("user query left unanswered")
            self.answers[slot] = q.answer
        return [int(a) for a in self.answers]


def distributed_lcp(text, queries: list[tuple[int, int]], epsilon: float = 0.5,
                    seed: int = 0, memory_constant: int = 64):
    """Answer LCP queries on text . reverse(text) through the cluster protocol.

    Returns (answers, stats).
    """
    driver = DistributedLcp(text, queries, epsilon, seed=seed,
                            memory_constant=memory_constant)
    answers = driver.run()
    return answers, driver.cluster.stats


def modular_store_snapshot(text, epsilon: float, seed: int = 0) -> dict[int, dict]:
    """Build the distributed window-fingerprint store and return its contents.

    Test and inspection surface: runs the scan and install rounds only. For
    each machine x the result holds the start positions p (p mod w = x) and
    the per-layer fingerprint values of the width-w windows at those
    positions, plus the stripe rows it replicates.
    """
    run = MpcPalindromes(text, epsilon, seed=seed)
    run.cluster.run_round(run._r1_local)
    run.cluster.run_round(run._r2_install_serve)
    w = run.plan.window
    M = run.plan.machine_count
    out = {}
    for m in range(M):
        payload = run.cluster.machines[m].payload
        cls_vals = payload["cls_vals"]
        positions = m + w * np.arange(cls_vals.shape[1], dtype=np.int64)
        stripe_rows = np.arange(m, -(-2 * run.n // w), M, dtype=np.int64)
        out[m] = {"positions": positions, "values": cls_vals,
                  "stripe_rows": stripe_rows, "stripe_values": payload["str_vals"],
                  "window": w}
    return out
