"""The engine contract and five concrete memory engines.

Every engine is an online state machine: it receives one input op at a time,
issues zero or more server probes for it, and answers reads correctly with
probability 1.  The five engines span the security spectrum on purpose:

* ``passthrough``    executes ops directly; maximally leaky baseline.
* ``linear-scan``    full read+write-back pass over all M cells per op; the
                     address trace depends on (n, M) only, so it is perfectly
                     oblivious at linear cost.
* ``tree``           a non-recursive path-tree engine (buckets of 4, client
                     position map and stash) exhibiting logarithmic overhead.
* ``dummy-encoder``  constant overhead; encodes the whole input into the
                     *length distribution* of the trace via a lexicographic
                     comparison with a random sequence.
* ``dummy-leaker``   constant overhead; the trace length distribution leaks
                     the address of a random input op.

The two dummy engines are deliberately insecure constructions with honest
correctness; they exist so the analyses can demonstrate what length-only
security definitions fail to rule out.
"""

from __future__ import annotations

import random
from typing import Callable, Iterable, Iterator

import numpy as np

from ._util import ModelViolationError
from .core import READ, WRITE, InputOp, InputSequence, OramConfig
from .server import FINAL_OP, ServerState

ENGINE_NAMES = ("passthrough", "linear-scan", "tree", "dummy-encoder", "dummy-leaker")


class StashOverflowError(RuntimeError):
    """Tree engine stash grew past its configured bound; the run is aborted."""


class Engine:
    """Base engine: drives per-op probes against a server it owns exclusively."""

    name: str = "abstract"
    online = True

    def __init__(self, config: OramConfig, rng: random.Random):
        self.config = config
        self.rng = rng

    def step(self, server: ServerState, op: InputOp, op_index: int) -> int:
        raise NotImplementedError

    def finalize(self, server: ServerState) -> None:
        """Trailing probes after the last input op (most engines: none)."""

    def run(self, server: ServerState, y: InputSequence) -> list[int]:
        """Step through y in order; returns the answers of all read ops."""
        answers = []
        for i, op in enumerate(y):
            server.begin_op(i)
            ans = self.step(server, op, i)
            if op.kind == READ:
                answers.append(ans)
        server.begin_op(FINAL_OP)
        self.finalize(server)
        return answers

    # client-state snapshot hooks used by the transfer codec
    def export_state(self) -> dict:
        return {}

    def import_state(self, state: dict) -> None:
        if state:
            raise ValueError(f"{self.name} engine carries no client state")


class Passthrough(Engine):
    """One probe per op, straight to the logical address."""

    name = "passthrough"

    def step(self, server, op, op_index):
        return server.probe(op.kind, op.addr, op.data if op.kind == WRITE else 0)


class LinearScan(Engine):
    """Read and write back every cell 1..M for each op.

    The write-back touches every cell even when unchanged, so the address
    trace is a fixed function of (n, M): perfect obliviousness by construction.
    Only O(1) registers persist between probes; the bulk step below is a
    simulation fast path that reproduces the honest probe loop bit for bit
    (the ``_mirror`` cache belongs to the simulator, not to client memory).
    """

    name = "linear-scan"

    def __init__(self, config, rng, fast: bool = True):
        super().__init__(config, rng)
        self._fast = fast
        self._mirror: list[int] | None = None
        m = config.M
        self._addr_pattern = [j for a in range(1, m + 1) for j in (a, a)]
        self._kind_pattern = [0, 1] * m

    def step(self, server, op, op_index):
        if self._fast and server.read_overrides is None:
            return self._step_bulk(server, op, op_index)
        self._mirror = None  # honest probes may change cells behind the cache
        answer = 0
        for j in range(1, self.config.M + 1):
            v = server.probe(READ, j)
            if j == op.addr:
                if op.kind == WRITE:
                    v = op.data
                else:
                    answer = v
            server.probe(WRITE, j, v)
        return answer

    def _step_bulk(self, server, op, op_index):
        m = self.config.M
        mirror = self._mirror
        if mirror is None:
            cells = server.cells
            mirror = self._mirror = [0] + [cells.get(j, 0) for j in range(1, m + 1)]
        reads = mirror[1:]
        if op.kind == WRITE:
            answer = 0
            mirror[op.addr] = op.data
        else:
            answer = mirror[op.addr]
        writes = mirror[1:]
        server._addr.tail.extend(self._addr_pattern)
        if server.record_meta:
            interleaved = [0] * (2 * m)
            interleaved[0::2] = reads
            interleaved[1::2] = writes
            # every cell's last write before this op's read pass was the previous op
            prev = op_index - 1 if op_index > 0 else -1
            server._kind.tail.extend(self._kind_pattern)
            server._data.tail.extend(interleaved)
            server._op.tail.extend([op_index] * (2 * m))
            server._read_src.tail.extend([prev, -1] * m)
        server.cells.update(zip(range(1, m + 1), writes))
        server.last_write_op.update(dict.fromkeys(range(1, m + 1), op_index))
        return answer

    def run(self, server, y):
        if (
            self._fast
            and not server.record_meta
            and server.read_overrides is None
            and server.probe_count == 0
            and not server.cells
        ):
            return self._run_trace_only(server, y)
        return super().run(server, y)

    def _run_trace_only(self, server, y):
        """Whole-run path for address-only logs: one tiled numpy block."""
        m = self.config.M
        answers = []
        vals = [0] * (m + 1)
        for op in y:
            if op.kind == WRITE:
                vals[op.addr] = op.data
            else:
                answers.append(vals[op.addr])
        n = len(y)
        if n:
            pattern = np.repeat(np.arange(1, m + 1, dtype=np.int64), 2)
            server._addr.extend_array(np.tile(pattern, n))
            server.cells = dict(zip(range(1, m + 1), vals[1:]))
            server.last_write_op = dict.fromkeys(range(1, m + 1), n - 1)
        return answers


class TreeOram(Engine):
    """Non-recursive path-tree engine: complete binary tree over M leaves,
    buckets of Z=4 slots, client-side position map and stash.

    Each op reads every slot on a root-to-leaf path, serves the op from the
    fetched blocks plus the stash, remaps the accessed address to a fresh
    uniform leaf, and writes the path back with greedy deepest-first eviction.
    Probes per op are exactly 2*Z*(ceil(log2 M) + 1).

    Deviation (reported by the analysis CLI): the position map and the
    slot-occupancy directory live in client memory, far beyond the m-cell
    budget.  The engine exists to exhibit logarithmic overhead, not to be a
    compliant construction.
    """

    name = "tree"
    Z = 4
    STASH_LIMIT = 64

    def __init__(self, config, rng):
        super().__init__(config, rng)
        self.depth = (config.M - 1).bit_length()
        self.leaves = 1 << self.depth
        n_slots = (2 * self.leaves - 1) * self.Z
        if n_slots > (1 << config.w):
            raise ModelViolationError(
                f"tree of {2 * self.leaves - 1} buckets needs {n_slots} server cells, over 2^{config.w}"
            )
        self.pos = [rng.randrange(self.leaves) for _ in range(config.M)]
        self.slot_owner: list[int | None] = [None] * n_slots
        self.stash: dict[int, int] = {}

    def probes_per_op(self) -> int:
        return 2 * self.Z * (self.depth + 1)

    def _path(self, leaf: int) -> list[int]:
        node = self.leaves - 1 + leaf
        path = [node]
        while node:
            node = (node - 1) // 2
            path.append(node)
        path.reverse()
        return path

    def _ancestor(self, leaf: int, level: int) -> int:
        return ((self.leaves + leaf) >> (self.depth - level)) - 1

    def step(self, server, op, op_index):
        z = self.Z
        leaf = self.pos[op.addr - 1]
        path = self._path(leaf)
        for bucket in path:
            base = bucket * z
            for s in range(z):
                v = server.probe(READ, base + s + 1)
                owner = self.slot_owner[base + s]
                if owner is not None:
                    self.stash[owner] = v
                    self.slot_owner[base + s] = None
        if op.kind == WRITE:
            self.stash[op.addr] = op.data
            answer = 0
        else:
            answer = self.stash.setdefault(op.addr, 0)
        self.pos[op.addr - 1] = self.rng.randrange(self.leaves)
        placement = self._plan_eviction(path)
        for level, bucket in enumerate(path):
            base = bucket * z
            blocks = placement[level]
            for s in range(z):
                if s < len(blocks):
                    addr, val = blocks[s]
                    self.slot_owner[base + s] = addr
                    server.probe(WRITE, base + s + 1, val)
                else:
                    server.probe(WRITE, base + s + 1, 0)
        if len(self.stash) > self.STASH_LIMIT:
            raise StashOverflowError(
                f"stash holds {len(self.stash)} blocks (> {self.STASH_LIMIT}) after op {op_index}"
            )
        return answer

    def _plan_eviction(self, path: list[int]) -> list[list[tuple[int, int]]]:
        placement: list[list[tuple[int, int]]] = [[] for _ in path]
        for level in range(self.depth, -1, -1):
            bucket = path[level]
            slot_list = placement[level]
            for addr, val in list(self.stash.items()):
                if len(slot_list) == self.Z:
                    break
                if self._ancestor(self.pos[addr - 1], level) == bucket:
                    slot_list.append((addr, val))
                    del self.stash[addr]
        return placement

    def export_state(self):
        return {
            "pos": list(self.pos),
            "slot_owner": list(self.slot_owner),
            "stash": dict(self.stash),
            "rng": self.rng.getstate(),
        }

    def import_state(self, state):
        self.pos = list(state["pos"])
        self.slot_owner = list(state["slot_owner"])
        self.stash = dict(state["stash"])
        self.rng.setstate(state["rng"])


def op_order_key(kind: str, addr: int, data: int) -> tuple[int, int, int]:
    """Total order on ops used by the length encoder: W < R, then addr, then data."""
    return (0 if kind == WRITE else 1, addr, data)


class DummyLengthEncoder(Engine):
    """Constant-overhead engine whose trace *length* encodes the input.

    Every op runs directly on the server followed by a read of address 1.  A
    uniformly random comparison sequence of the same length is drawn op by op
    and compared online against the input under the ``op_order_key`` order;
    if the random sequence ends up strictly smaller, one extra read of
    address 1 is issued after the last op.  Trace length is always 2n or
    2n + 1, and the 2n+1 probability equals rank(y) / |sample space|.
    """

    name = "dummy-encoder"

    def __init__(self, config, rng, forced_comparand: Iterable[tuple[str, int, int]] | None = None):
        super().__init__(config, rng)
        self._cmp = 0  # -1: random sequence already smaller, +1: larger, 0: tied so far
        self._forced: Iterator[tuple[str, int, int]] | None = (
            iter(forced_comparand) if forced_comparand is not None else None
        )

    def _draw_op(self) -> tuple[str, int, int]:
        if self._forced is not None:
            return next(self._forced)
        kind = WRITE if self.rng.getrandbits(1) == 0 else READ
        addr = self.rng.randrange(self.config.M) + 1
        data = self.rng.getrandbits(self.config.w)
        return kind, addr, data

    def step(self, server, op, op_index):
        answer = server.probe(op.kind, op.addr, op.data if op.kind == WRITE else 0)
        server.probe(READ, 1)
        r_kind, r_addr, r_data = self._draw_op()
        if self._cmp == 0:
            a = op_order_key(r_kind, r_addr, r_data)
            b = op_order_key(op.kind, op.addr, op.data)
            self._cmp = -1 if a < b else (1 if a > b else 0)
        return answer

    def finalize(self, server):
        # ties count as "not smaller": no extra probe when the sequences match
        if self._cmp < 0:
            server.probe(READ, 1)

    def export_state(self):
        return {"cmp": self._cmp, "rng": self.rng.getstate()}

    def import_state(self, state):
        self._cmp = state["cmp"]
        self.rng.setstate(state["rng"])


class DummyLengthLeaker(Engine):
    """Constant-overhead engine leaking one input address through the length law.

    Draws i uniform in [n] and r uniform in [M] up front (it must know n, so
    it is a fixed-length engine and not online).  Ops before the i-th get two
    extra reads of address 1, the i-th gets two extras iff r <= a_i and one
    otherwise, later ops get none.  The trace length is n + 2i with
    probability a_i / (n M) and n + 2i - 1 with probability (M - a_i) / (n M).
    """

    name = "dummy-leaker"
    online = False

    def __init__(self, config, rng, n: int, forced_draw: tuple[int, int] | None = None):
        super().__init__(config, rng)
        if n < 1:
            raise ModelViolationError("dummy-leaker needs the workload length n >= 1 up front")
        self.n = n
        if forced_draw is not None:
            self.i, self.r = forced_draw
            if not (1 <= self.i <= n and 1 <= self.r <= config.M):
                raise ValueError(f"forced draw {forced_draw} outside [1,{n}] x [1,{config.M}]")
        else:
            self.i = rng.randrange(n) + 1
            self.r = rng.randrange(config.M) + 1

    def step(self, server, op, op_index):
        if op_index >= self.n:
            raise ModelViolationError(f"dummy-leaker was sized for n={self.n} ops")
        answer = server.probe(op.kind, op.addr, op.data if op.kind == WRITE else 0)
        j = op_index + 1
        if j < self.i:
            server.probe(READ, 1)
            server.probe(READ, 1)
        elif j == self.i:
            server.probe(READ, 1)
            if self.r <= op.addr:
                server.probe(READ, 1)
        return answer

    def export_state(self):
        return {"i": self.i, "r": self.r, "rng": self.rng.getstate()}

    def import_state(self, state):
        self.i = state["i"]
        self.r = state["r"]
        self.rng.setstate(state["rng"])


_FACTORIES: dict[str, Callable] = {
    "passthrough": lambda config, rng, **kw: Passthrough(config, rng),
    "linear-scan": lambda config, rng, fast=True, **kw: LinearScan(config, rng, fast=fast),
    "tree": lambda config, rng, **kw: TreeOram(config, rng),
    "dummy-encoder": lambda config, rng, forced=None, **kw: DummyLengthEncoder(
        config, rng, forced_comparand=forced
    ),
    "dummy-leaker": lambda config, rng, n=None, forced=None, **kw: DummyLengthLeaker(
        config, rng, n=n, forced_draw=forced
    ),
}


def make_engine(
    kind: str,
    config: OramConfig,
    seed: int,
    n: int | None = None,
    forced=None,
    fast: bool = True,
) -> Engine:
    if kind not in _FACTORIES:
        raise ValueError(f"unknown engine {kind!r}; expected one of {', '.join(ENGINE_NAMES)}")
    if kind == "dummy-leaker" and n is None:
        raise ModelViolationError("dummy-leaker needs n in advance")
    return _FACTORIES[kind](config, random.Random(seed), n=n, forced=forced, fast=fast)


def run_sequence(
    kind: str,
    config: OramConfig,
    y: InputSequence,
    seed: int,
    record_meta: bool = True,
    fast: bool = True,
    forced=None,
) -> tuple[list[int], ServerState]:
    """Fresh engine + fresh server, every op stepped in order.

    Returns the answers of all read ops and the final server state with its
    probe log.  Deterministic given the seed.
    """
    config.bind_workload_length(len(y))
    for op in y:
        config.check_op(op)
    engine = make_engine(kind, config, seed, n=len(y) or None, forced=forced, fast=fast)
    server = ServerState(config, record_meta=record_meta)
    answers = engine.run(server, y)
    return answers, server
