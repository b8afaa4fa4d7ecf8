"""Deterministic round-based cluster simulator with strict resource metering.

One process simulates a cluster of machines that compute in synchronous
rounds: every machine runs a step against its own payload and inbox only,
then all outboxes are exchanged atomically. Memory is metered in abstract
words (one symbol, position, or length = 1 word; a fingerprint = 3k+1 words
for k hash layers) and checked against the per-machine cap at every round
boundary. Work is whatever the steps declare plus one unit per message word
moved.

The adaptive variant adds a shared read-only store: values written during
round r become visible to every machine in round r+1, never earlier, and
reads of the current snapshot are metered per machine per round.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .fingerprint import Fingerprint

BROADCAST = -1


class EngineError(RuntimeError):
    pass


class UnknownMachineError(EngineError):
    pass


class MemoryCapExceeded(EngineError):
    def __init__(self, machine: int, round_no: int, words: int, cap: int):
        super().__init__(
            f"machine {machine} holds {words} words at round {round_no} boundary, cap {cap}"
        )
        self.machine = machine
        self.round_no = round_no
        self.words = words
        self.cap = cap


class CollisionAbort(RuntimeError):
    """A fingerprint comparison contradicted a literal symbol comparison."""


def ceil_power(n: int, exponent: float) -> int:
    """ceil(n ** exponent), stabilized against float error at exact powers."""
    if n <= 1:
        return 1
    return max(1, math.ceil(round(n ** exponent, 9)))


@dataclass(frozen=True)
class ClusterConfig:
    n: int
    epsilon: float
    mode: str = "mpc"                # "mpc" | "ampc"
    memory_constant: int = 64        # the C in cap = C * ceil(n ** (1 - eps))
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("problem size must be >= 1")
        if self.mode not in ("mpc", "ampc"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "mpc":
            if not 0.0 < self.epsilon <= 0.5:
                raise ValueError(
                    "mpc mode requires epsilon in (0, 0.5]: each machine's local "
                    "memory (~n**(1-eps) words) must be at least the machine count "
                    "(~n**eps) so one round can carry a message from every machine"
                )
        else:
            if not 0.0 < self.epsilon < 1.0:
                raise ValueError("ampc mode requires epsilon in (0, 1)")

    @property
    def block_len(self) -> int:
        return ceil_power(self.n, 1.0 - self.epsilon)

    @property
    def machine_count(self) -> int:
        return math.ceil(self.n / self.block_len)

    @property
    def memory_cap_words(self) -> int:
        return self.memory_constant * self.block_len

    @property
    def shared_read_cap(self) -> int:
        """Adaptive mode: shared reads allowed per machine per round."""
        return self.memory_constant * (self.block_len + 2 * max(1, self.n).bit_length() + 2)


def words_of(obj) -> int:
    """Metered size of a payload in abstract words."""
    if obj is None:
        return 0
    if isinstance(obj, np.ndarray):
        return int(obj.size)
    if isinstance(obj, Fingerprint):
        return obj.words()
    if isinstance(obj, (int, float, bool, np.integer, np.floating)):
        return 1
    if isinstance(obj, str):
        return 1
    if isinstance(obj, dict):
        return sum(words_of(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return sum(words_of(v) for v in obj)
    raise TypeError(f"cannot meter payload of type {type(obj).__name__}")


def _freeze(obj):
    if isinstance(obj, np.ndarray):
        obj.setflags(write=False)
    elif isinstance(obj, dict):
        for v in obj.values():
            _freeze(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _freeze(v)


class MessageEnvelope(NamedTuple):
    src: int
    dst: int
    seq: int
    words: int
    payload: object


@dataclass
class MachineState:
    machine_id: int
    payload: dict = field(default_factory=dict)

    def local_words(self) -> int:
        return words_of(self.payload)


@dataclass
class RunStats:
    rounds: int = 0
    total_work: int = 0
    message_words: int = 0
    machine_count: int = 0
    block_len: int = 0
    cap_words: int = 0
    memory_constant: int = 0
    per_machine_peak: np.ndarray | None = None
    total_memory_peak: int = 0
    shared_words: int = 0
    shared_reads_peak: int = 0
    exported_outside_run: bool = False
    counters: dict = field(default_factory=dict)

    def bump(self, key: str, amount: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + amount

    @property
    def peak_memory_words(self) -> int:
        if self.per_machine_peak is None:
            return 0
        return int(self.per_machine_peak.max()) if self.per_machine_peak.size else 0

    def observed_memory_constant(self) -> int:
        """Smallest integer C' such that every machine stayed within C' * block_len."""
        if not self.block_len:
            return 0
        return math.ceil(self.peak_memory_words / self.block_len)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "total_work": self.total_work,
            "message_words": self.message_words,
            "machine_count": self.machine_count,
            "block_len": self.block_len,
            "cap_words": self.cap_words,
            "memory_constant": self.memory_constant,
            "per_machine_peak": self.peak_memory_words,
            "observed_memory_constant": self.observed_memory_constant(),
            "total_memory_peak": self.total_memory_peak,
            "shared_words": self.shared_words,
            "shared_reads_peak": self.shared_reads_peak,
            "exported_outside_run": self.exported_outside_run,
            "counters": dict(self.counters),
        }


class SharedStore:
    """Versioned key-value store for the adaptive mode.

    Reads always hit the snapshot published at the previous round boundary;
    writes are buffered and become visible only after the barrier. Values are
    numpy arrays or scalars; per-entry reads are metered on the context.
    """

    def __init__(self):
        self._snapshot: dict = {}
        self._pending: dict = {}
        self.total_words = 0

    def write(self, key, value) -> int:
        _freeze(value)
        self._pending[key] = value
        return words_of(value)

    def snapshot_get(self, key):
        return self._snapshot.get(key)

    def publish(self) -> None:
        for key, value in self._pending.items():
            old = self._snapshot.get(key)
            if old is not None:
                self.total_words -= words_of(old)
            self._snapshot[key] = value
            self.total_words += words_of(value)
        self._pending.clear()

    def dump(self) -> dict:
        """Debugging view of the current snapshot."""
        return dict(self._snapshot)


class StepContext:
    """Per-machine view handed to a step: own payload, own inbox, send/work hooks."""

    __slots__ = ("machine_id", "payload", "inbox", "_cluster", "_outbox", "_work", "_reads")

    def __init__(self, cluster: "Cluster", machine_id: int, inbox: list):
        self.machine_id = machine_id
        self.payload = cluster.machines[machine_id].payload
        self.inbox = inbox
        self._cluster = cluster
        self._outbox: list[MessageEnvelope] = []
        self._work = 0
        self._reads = 0

    def send(self, dst: int, payload) -> None:
        cluster = self._cluster
        if dst != BROADCAST and not 0 <= dst < cluster.config.machine_count:
            raise UnknownMachineError(f"machine {self.machine_id} sent to unknown machine {dst}")
        _freeze(payload)
        self._outbox.append(
            MessageEnvelope(self.machine_id, dst, len(self._outbox), words_of(payload), payload)
        )

    def broadcast(self, payload) -> None:
        self.send(BROADCAST, payload)

    def add_work(self, ops: int) -> None:
        self._work += int(ops)

    def shared_write(self, key, value) -> None:
        store = self._cluster.require_shared()
        self._cluster.stats.shared_words = max(
            self._cluster.stats.shared_words, store.total_words + store.write(key, value)
        )

    def shared_read(self, key):
        """Read a whole shared value from the previous round's snapshot."""
        store = self._cluster.require_shared()
        value = store.snapshot_get(key)
        self._reads += 1
        return value


StepFn = Callable[[StepContext], None]


class Cluster:
    def __init__(self, config: ClusterConfig):
        self.config = config
        self.machines = [MachineState(m) for m in range(config.machine_count)]
        self.stats = RunStats(
            machine_count=config.machine_count,
            block_len=config.block_len,
            cap_words=config.memory_cap_words,
            memory_constant=config.memory_constant,
            per_machine_peak=np.zeros(config.machine_count, dtype=np.int64),
        )
        self.shared = SharedStore() if config.mode == "ampc" else None
        self._inboxes: list[list] = [[] for _ in range(config.machine_count)]
        self._inbox_words = np.zeros(config.machine_count, dtype=np.int64)

    def require_shared(self) -> SharedStore:
        if self.shared is None:
            raise EngineError("shared store is only available in ampc mode")
        return self.shared

    def _meter(self, machine_id: int, words: int) -> None:
        stats = self.stats
        if words > self.config.memory_cap_words:
            raise MemoryCapExceeded(machine_id, stats.rounds, words, self.config.memory_cap_words)
        if words > stats.per_machine_peak[machine_id]:
            stats.per_machine_peak[machine_id] = words

    def run_round(self, step: StepFn, order: list[int] | None = None) -> None:
        """Execute one synchronous round: compute on every machine, then exchange.

        ``order`` permutes step execution for determinism testing; results are
        independent of it because steps only see their own state and inbox and
        deliveries are normalized to (sender, sequence) order.
        """
        config = self.config
        stats = self.stats
        machine_ids = order if order is not None else range(config.machine_count)

        all_envelopes: list[MessageEnvelope] = []
        local_after: dict[int, int] = {}
        for m in machine_ids:
            inbox = self._inboxes[m]
            self._inboxes[m] = []
            self._inbox_words[m] = 0
            ctx = StepContext(self, m, inbox)
            step(ctx)
            stats.total_work += ctx._work
            if ctx._reads > stats.shared_reads_peak:
                stats.shared_reads_peak = ctx._reads
            if self.shared is not None and ctx._reads > config.shared_read_cap:
                raise EngineError(
                    f"machine {m} made {ctx._reads} shared reads in round "
                    f"{stats.rounds}, budget {config.shared_read_cap}")
            local = self.machines[m].local_words()
            outbox_words = sum(env.words for env in ctx._outbox)
            local_after[m] = local
            self._meter(m, local + outbox_words)
            all_envelopes.extend(ctx._outbox)

        all_envelopes.sort(key=lambda env: (env.src, env.seq))
        boundary_total = 0
        for env in all_envelopes:
            targets = range(config.machine_count) if env.dst == BROADCAST else (env.dst,)
            for dst in targets:
                self._inboxes[dst].append((env.src, env.payload))
                self._inbox_words[dst] += env.words
                stats.message_words += env.words
                stats.total_work += env.words
        for m in range(config.machine_count):
            total = local_after.get(m, self.machines[m].local_words()) + int(self._inbox_words[m])
            self._meter(m, total)
            boundary_total += total
        if self.shared is not None:
            self.shared.publish()
            stats.shared_words = max(stats.shared_words, self.shared.total_words)
            boundary_total += self.shared.total_words
        stats.total_memory_peak = max(stats.total_memory_peak, boundary_total)
        stats.rounds += 1

    def peek_inbox_words(self, machine_id: int) -> int:
        return int(self._inbox_words[machine_id])

    def drain_inbox(self, machine_id: int) -> list:
        """Consume a machine's pending inbox without running a round.

        The delivery (and its metering) already happened at the previous round
        boundary; this is the receiving side of that exchange.
        """
        inbox = self._inboxes[machine_id]
        self._inboxes[machine_id] = []
        self._inbox_words[machine_id] = 0
        return inbox


def cluster_init(config: ClusterConfig) -> Cluster:
    """Fresh cluster with empty machines and zeroed statistics."""
    return Cluster(config)


def replicate_and_serve(
    cluster: Cluster,
    data_key: str,
    requests: list[tuple[int, int, int, int]],
) -> dict[int, dict[tuple[int, int, int], np.ndarray]]:
    """Serve word-ranges of per-machine arrays without overloading any sender.

    ``requests`` holds (requester, holder, lo, hi) ranges over the holder's
    ``payload[data_key]`` array. Each holder splits the union of its requested
    ranges into as many near-equal chunks as it has requests and ships each
    chunk to a distinct helper machine; every helper then forwards, to each
    requester of that holder, the overlap of its chunk with the requested
    range. Two communication rounds; per-round traffic per machine stays at
    the size of the holder's array plus one copy per requester.

    With at most one request per holder (or none at all) the helper hop is
    elided and the transfer completes in one round (zero rounds when there is
    nothing to do). Returns, per requester, the assembled range keyed by
    (holder, lo, hi).
    """
    machine_count = cluster.config.machine_count
    by_holder: dict[int, list[tuple[int, int, int]]] = {}
    for requester, holder, lo, hi in requests:
        if not 0 <= requester < machine_count or not 0 <= holder < machine_count:
            raise UnknownMachineError("request names a machine outside the cluster")
        if hi - lo > cluster.config.memory_cap_words:
            raise EngineError(f"slice of {hi - lo} words cannot fit any requester's memory")
        arr = cluster.machines[holder].payload.get(data_key)
        if arr is None or not 0 <= lo <= hi <= arr.size:
            raise EngineError(f"holder {holder} has no range [{lo}, {hi}) under {data_key!r}")
        by_holder.setdefault(holder, []).append((requester, lo, hi))
    if not requests:
        return {}

    results: dict[int, dict[tuple[int, int, int], list]] = {}
    direct = all(len(reqs) <= 1 for reqs in by_holder.values()) or machine_count == 1

    if direct:
        def serve_direct(ctx: StepContext) -> None:
            for requester, lo, hi in by_holder.get(ctx.machine_id, []):
                arr = ctx.payload[data_key]
                ctx.send(requester, {"holder": ctx.machine_id, "lo": lo, "hi": hi,
                                     "part_lo": lo, "data": arr[lo:hi]})
                ctx.add_work(hi - lo)

        cluster.run_round(serve_direct)
    else:
        def chunk_to_helpers(ctx: StepContext) -> None:
            reqs = by_holder.get(ctx.machine_id, [])
            if not reqs:
                return
            arr = ctx.payload[data_key]
            span_lo = min(lo for _, lo, _ in reqs)
            span_hi = max(hi for _, _, hi in reqs)
            r = len(reqs)
            chunk = max(1, math.ceil((span_hi - span_lo) / r))
            for c in range(r):
                c_lo = span_lo + c * chunk
                c_hi = min(span_lo + (c + 1) * chunk, span_hi)
                if c_lo >= c_hi:
                    continue
                helper = (ctx.machine_id + 1 + c) % cluster.config.machine_count
                ctx.send(helper, {
                    "holder": ctx.machine_id, "part_lo": c_lo,
                    "data": arr[c_lo:c_hi],
                    "requests": [(req, lo, hi) for req, lo, hi in reqs],
                })
                ctx.add_work(c_hi - c_lo)

        def forward_to_requesters(ctx: StepContext) -> None:
            for _, msg in ctx.inbox:
                part_lo = msg["part_lo"]
                data = msg["data"]
                part_hi = part_lo + data.size
                for requester, lo, hi in msg["requests"]:
                    o_lo = max(lo, part_lo)
                    o_hi = min(hi, part_hi)
                    if o_lo >= o_hi:
                        continue
                    ctx.send(requester, {"holder": msg["holder"], "lo": lo, "hi": hi,
                                         "part_lo": o_lo,
                                         "data": data[o_lo - part_lo : o_hi - part_lo]})
                    ctx.add_work(o_hi - o_lo)

        cluster.run_round(chunk_to_helpers)
        cluster.run_round(forward_to_requesters)

    for m in range(machine_count):
        for _, msg in cluster.drain_inbox(m):
            key = (msg["holder"], msg["lo"], msg["hi"])
            results.setdefault(m, {}).setdefault(key, []).append(
                (msg["part_lo"], msg["data"])
            )

    assembled: dict[int, dict[tuple[int, int, int], np.ndarray]] = {}
    for requester, ranges in results.items():
        out = {}
        for (holder, lo, hi), parts in ranges.items():
            parts.sort(key=lambda t: t[0])
            buf = np.concatenate([p for _, p in parts]) if parts else np.empty(0, np.int64)
            if buf.size != hi - lo:
                raise EngineError("replication lost or duplicated words")
            out[(holder, lo, hi)] = buf
        assembled[requester] = out
    return assembled
