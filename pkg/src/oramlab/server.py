"""The instrumented array-maintenance server.

The server executes probes with exact read-after-write semantics and records
every probe.  The recorded log keeps ground-truth metadata (kinds, payloads,
the input-op index that triggered each probe, and for reads the op index of
the probed cell's last writer).  ``adversary_view`` projects the log down to
the bare address list, which is all an adversary ever sees in this model.

The log is columnar and chunked: single probes append to plain Python lists,
while engine fast paths may append whole numpy arrays.  Both produce the same
observable log.
"""

from __future__ import annotations

from collections import deque
from typing import Iterator, NamedTuple

import numpy as np

from ._util import ModelViolationError
from .core import READ, WRITE, OramConfig

# op_index sentinel for probes emitted after the last input op (engine wrap-up)
FINAL_OP = -2
# read_src sentinel for "cell never written" and for write probes
NO_WRITER = -1

_KIND_CODE = {READ: 0, WRITE: 1}
_KIND_NAME = {0: READ, 1: WRITE}


class ProbeRecord(NamedTuple):
    t: int
    kind: str
    addr: int
    data: int
    op_index: int


class _Column:
    """Append-only int64 column stored as a list of chunks."""

    __slots__ = ("chunks", "tail")

    def __init__(self):
        self.chunks: list[np.ndarray] = []
        self.tail: list[int] = []

    def __len__(self) -> int:
        return sum(len(c) for c in self.chunks) + len(self.tail)

    def extend_array(self, arr: np.ndarray) -> None:
        self._seal()
        self.chunks.append(arr)

    def _seal(self) -> None:
        if self.tail:
            self.chunks.append(np.asarray(self.tail, dtype=np.int64))
            self.tail = []

    def to_array(self) -> np.ndarray:
        self._seal()
        if not self.chunks:
            return np.empty(0, dtype=np.int64)
        if len(self.chunks) == 1:
            return self.chunks[0]
        merged = np.concatenate(self.chunks)
        self.chunks = [merged]
        return merged


class AccessSequence:
    """The adversary's view: the ordered list of probed server addresses."""

    __slots__ = ("addrs",)

    def __init__(self, addrs):
        self.addrs = np.asarray(addrs, dtype=np.int64)

    @property
    def N(self) -> int:
        return len(self.addrs)

    def __len__(self) -> int:
        return len(self.addrs)

    def __iter__(self):
        return iter(self.addrs.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccessSequence):
            return NotImplemented
        return np.array_equal(self.addrs, other.addrs)

    def __repr__(self) -> str:
        return f"AccessSequence(N={self.N})"


class ServerState:
    """Sparse cell store plus the probe log for one simulation run.

    record_meta=False keeps only the address column; large trace-statistics
    runs use it so a multi-million-probe log costs one int64 array instead of
    a Python object per probe.
    """

    def __init__(self, config: OramConfig, record_meta: bool = True):
        self.config = config
        self.record_meta = record_meta
        self.cells: dict[int, int] = {}
        self.last_write_op: dict[int, int] = {}
        self.op_index = FINAL_OP
        self._addr = _Column()
        if record_meta:
            self._kind = _Column()
            self._data = _Column()
            self._op = _Column()
            self._read_src = _Column()
        self._addr_limit = 1 << config.w
        # decode-replay hook: queued (addr, content) pairs consumed by reads
        self.read_overrides: deque[tuple[int, int]] | None = None

    @property
    def probe_count(self) -> int:
        return len(self._addr)

    def begin_op(self, op_index: int) -> None:
        self.op_index = op_index

    def probe(self, kind: str, addr: int, data: int = 0) -> int:
        """Execute one array-maintenance probe and log it.

        Writes store data and return 0; reads return the last value written
        at addr (0 if the cell was never written).
        """
        if not 1 <= addr <= self._addr_limit:
            raise ModelViolationError(f"probe address {addr} outside [1, 2^{self.config.w}]")
        if kind == WRITE:
            if not 0 <= data < self._addr_limit:
                raise ModelViolationError(f"probe payload {data} does not fit in {self.config.w} bits")
            src = NO_WRITER
            self.cells[addr] = data
            self.last_write_op[addr] = self.op_index
            ret = 0
            logged = data
        elif kind == READ:
            if self.read_overrides is not None and self.read_overrides and self.read_overrides[0][0] == addr:
                _, content = self.read_overrides.popleft()
                self.cells[addr] = content
            src = self.last_write_op.get(addr, NO_WRITER)
            ret = self.cells.get(addr, 0)
            logged = ret
        else:
            raise ModelViolationError(f"unknown probe kind {kind!r}")
        self._addr.tail.append(addr)
        if self.record_meta:
            self._kind.tail.append(_KIND_CODE[kind])
            self._data.tail.append(logged)
            self._op.tail.append(self.op_index)
            self._read_src.tail.append(src)
        return ret

    # -- columnar access -------------------------------------------------

    def addr_column(self) -> np.ndarray:
        return self._addr.to_array()

    def kind_column(self) -> np.ndarray:
        return self._kind.to_array()

    def data_column(self) -> np.ndarray:
        return self._data.to_array()

    def op_column(self) -> np.ndarray:
        return self._op.to_array()

    def read_src_column(self) -> np.ndarray:
        return self._read_src.to_array()

    def records(self) -> list[ProbeRecord]:
        """Materialize the log as record objects (small runs only)."""
        kinds = self.kind_column().tolist()
        return [
            ProbeRecord(t, _KIND_NAME[kinds[t]], a, d, o)
            for t, (a, d, o) in enumerate(
                zip(self.addr_column().tolist(), self.data_column().tolist(), self.op_column().tolist())
            )
        ]

    def iter_op_probes(self) -> Iterator[tuple[int, int]]:
        """(op_index, probe count) pairs in op order, from the metadata column."""
        ops = self.op_column()
        if len(ops) == 0:
            return iter(())
        idx, counts = np.unique(ops, return_counts=True)
        return iter(zip(idx.tolist(), counts.tolist()))


def adversary_view(state: ServerState) -> AccessSequence:
    """Project the probe log to the bare address sequence.

    Everything else in the log (op boundaries, kinds, payloads) is ground
    truth for validation and the transfer codec, and is deliberately dropped
    here: the adversary sees addresses only.
    """
    return AccessSequence(state.addr_column())
