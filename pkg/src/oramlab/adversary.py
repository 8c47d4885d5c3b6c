"""Attacks and estimators run against engine traces.

Contents: the polynomial-time distinguisher over dense-partition structure,
Monte-Carlo estimation of its advantage, dense-partition frequency over fresh
workload samples, and exact/empirical statistical distance.

Estimator determinism: per-trial randomness is derived from (seed, trial
index) by a fixed mixing function, and the two arms of an advantage estimate
share the engine seed and the decision coin per trial (common random numbers;
unbiased, and it makes "identical traces -> advantage exactly 0" hold sample
by sample instead of only in the limit).
"""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Iterable, Mapping, Sequence

from ._util import as_fraction, derive_seed
from .core import (
    READ,
    WRITE,
    InputSequence,
    OramConfig,
    gen_alternating_sequence,
    gen_write_read_blocks,
)
from .graph import build_access_graph
from .orams import run_sequence
from .partition import greedy_dense_partition
from .server import AccessSequence, adversary_view


class WorkloadShapeError(ValueError):
    """The distinguisher's reference input does not parse as a block workload."""


NO_PARTITION = "no_partition"
COIN_FLIP = "coin_flip"


@dataclass(frozen=True)
class DistinguisherVerdict:
    guess: int  # 1 = "the trace came from y", 2 = "from y_prime"
    reason: str  # NO_PARTITION or COIN_FLIP

    def __post_init__(self):
        if self.guess not in (1, 2) or self.reason not in (NO_PARTITION, COIN_FLIP):
            raise ValueError("malformed verdict")
        if self.reason == NO_PARTITION and self.guess != 1:
            raise ValueError("a missing partition always points at the first input")


def parse_block_shape(y: InputSequence) -> tuple[int, int]:
    """Read (k, ell) off a block-shaped sequence by template matching.

    The block length ell is the leading run of writes to addresses 1, 2, ...;
    complete write/read block pairs are then consumed greedily and the rest
    must be alternating address-1 padding.  With ell = 1 a zero-data padding
    pair is indistinguishable from a block pair and parses as one more block;
    that degenerate shape never occurs in the analysis regime.
    """
    ops = y.ops
    n = len(ops)
    if n == 0 or n % 2:
        raise WorkloadShapeError("block workloads have positive even length")
    ell = 0
    while ell < n and ops[ell].kind == WRITE and ops[ell].addr == ell + 1:
        ell += 1
    if ell == 0:
        raise WorkloadShapeError("sequence does not start with a write to address 1")
    k = 0
    pos = 0
    while pos + 2 * ell <= n:
        chunk = ops[pos : pos + 2 * ell]
        if all(o.kind == WRITE and o.addr == j + 1 for j, o in enumerate(chunk[:ell])) and all(
            o.kind == READ and o.addr == j + 1 and o.data == 0 for j, o in enumerate(chunk[ell:])
        ):
            k += 1
            pos += 2 * ell
        else:
            break
    if k == 0:
        raise WorkloadShapeError("no complete write/read block pair found")
    for j in range(pos, n, 2):
        w, r = ops[j], ops[j + 1]
        if not (w.kind == WRITE and w.addr == 1 and w.data == 0 and r.kind == READ and r.addr == 1):
            raise WorkloadShapeError(f"tail op pair at index {j} is not address-1 padding")
    return k, ell


def distinguish(
    y: InputSequence,
    y_prime: InputSequence,
    trace: AccessSequence,
    coin: random.Random,
) -> DistinguisherVerdict:
    """The dense-partition distinguisher.

    Extracts the block count k' of y_prime, tests the trace's access graph
    for an (n/5k')-dense k'-partition, and answers "1" outright when the
    partition is missing (only the block workload is guaranteed to produce
    it); otherwise it flips the supplied coin.  Consumes only the address
    projection of the trace.
    """
    n = len(y)
    if len(y_prime) != n:
        raise ValueError("the distinguisher compares equal-length inputs")
    k_prime, _ = parse_block_shape(y_prime)
    threshold = Fraction(n, 5 * k_prime)
    graph = build_access_graph(trace)
    if greedy_dense_partition(graph, k_prime, threshold) is None:
        return DistinguisherVerdict(1, NO_PARTITION)
    return DistinguisherVerdict(1 if coin.random() < 0.5 else 2, COIN_FLIP)


@dataclass(frozen=True)
class AdvantageEstimate:
    trials: int
    p1_on_y: float
    p1_on_yprime: float
    advantage: float
    half_width: float

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "p1_on_y": self.p1_on_y,
            "p1_on_yprime": self.p1_on_yprime,
            "advantage": self.advantage,
            "half_width": self.half_width,
        }


def _advantage_trial(args) -> tuple[int, int]:
    engine, config, y, y_prime, seed, t = args
    engine_seed = derive_seed(seed, t, 1)
    coin_seed = derive_seed(seed, t, 2)
    hits = []
    for arm in (y, y_prime):
        _, server = run_sequence(engine, config, arm, engine_seed, record_meta=False)
        verdict = distinguish(y, y_prime, adversary_view(server), random.Random(coin_seed))
        hits.append(1 if verdict.guess == 1 else 0)
    return hits[0], hits[1]


def estimate_advantage(
    engine: str,
    config: OramConfig,
    y: InputSequence,
    y_prime: InputSequence,
    trials: int,
    seed: int,
    jobs: int = 1,
) -> AdvantageEstimate:
    """Empirical distinguishing advantage of the dense-partition test.

    Runs the engine ``trials`` times on each input with derived per-trial
    seeds and reports both guess-1 frequencies, their absolute difference,
    and a 95% normal-approximation half-width floored at 1/trials.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    argses = [(engine, config, y, y_prime, seed, t) for t in range(trials)]
    ones_y = 0
    ones_yp = 0
    for g1, g2 in _map_trials(_advantage_trial, argses, jobs):
        ones_y += g1
        ones_yp += g2
    p1 = ones_y / trials
    p2 = ones_yp / trials
    var = p1 * (1 - p1) / trials + p2 * (1 - p2) / trials
    half_width = max(1.96 * sqrt(var), 1.0 / trials)
    return AdvantageEstimate(
        trials=trials,
        p1_on_y=p1,
        p1_on_yprime=p2,
        advantage=abs(p1 - p2),
        half_width=half_width,
    )


def _frequency_trial(args) -> bool:
    engine, config, n, k, seed, family, t = args
    workload_seed = derive_seed(seed, t, 3)
    engine_seed = derive_seed(seed, t, 4)
    if family == "blocks":
        y, _ = gen_write_read_blocks(n, k, config.w, random.Random(workload_seed))
    elif family == "alt":  # debug family: the partition property is expected to fail
        y = gen_alternating_sequence(n)
    else:
        raise ValueError(f"unknown workload family {family!r}")
    _, server = run_sequence(engine, config, y, engine_seed, record_meta=False)
    graph = build_access_graph(adversary_view(server))
    return greedy_dense_partition(graph, k, Fraction(n, 5 * k)) is not None


def dense_partition_frequency(
    engine: str,
    config: OramConfig,
    n: int,
    k: int,
    trials: int,
    seed: int,
    family: str = "blocks",
    jobs: int = 1,
) -> Fraction:
    """Fraction of fresh (workload sample, engine run) trials whose access
    graph admits an (n/5k)-dense k-partition."""
    if trials < 1:
        raise ValueError("need at least one trial")
    argses = [(engine, config, n, k, seed, family, t) for t in range(trials)]
    found = sum(1 for hit in _map_trials(_frequency_trial, argses, jobs) if hit)
    return Fraction(found, trials)


def _map_trials(worker, argses, jobs):
    if jobs <= 1:
        return [worker(a) for a in argses]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, argses, chunksize=max(1, len(argses) // (4 * jobs))))


# -- statistical distance ---------------------------------------------------


def statistical_distance_exact(dist_x: Mapping, dist_y: Mapping) -> Fraction:
    """Exact statistical distance of two finite distributions.

    Inputs are outcome -> probability tables that must each sum to exactly 1.
    Computes the half-L1 form and the one-sided form (the probability excess
    on the set where X outweighs Y) and checks they agree before returning.
    """
    px = {s: as_fraction(p) for s, p in dist_x.items()}
    py = {s: as_fraction(p) for s, p in dist_y.items()}
    for name, table in (("first", px), ("second", py)):
        total = sum(table.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"{name} table sums to {total}, not 1")
        if any(p < 0 for p in table.values()):
            raise ValueError(f"{name} table has a negative probability")
    support = set(px) | set(py)
    half_l1 = sum((abs(px.get(s, 0) - py.get(s, 0)) for s in support), Fraction(0)) / 2
    one_sided = sum(
        (px.get(s, 0) - py.get(s, 0) for s in support if px.get(s, 0) > py.get(s, 0)),
        Fraction(0),
    )
    assert half_l1 == one_sided, "half-L1 and one-sided forms must agree on normalized tables"
    return half_l1


def trace_digest(trace: AccessSequence) -> tuple[int, str]:
    """(length, 64-bit address hash) digest used by the empirical estimator.

    Distances on digests lower-bound distances on full traces (any function
    of the trace can only blur differences), which is the safe direction for
    security claims.
    """
    h = hashlib.blake2b(trace.addrs.tobytes(), digest_size=8)
    return (trace.N, h.hexdigest())


@dataclass(frozen=True)
class EmpiricalDistance:
    distance: Fraction
    n_x: int
    n_y: int
    support: int

    def as_dict(self) -> dict:
        return {
            "distance": float(self.distance),
            "distance_exact": str(self.distance),
            "n_x": self.n_x,
            "n_y": self.n_y,
            "support": self.support,
        }


def statistical_distance_empirical(
    samples_x: Sequence[AccessSequence] | Iterable[AccessSequence],
    samples_y: Sequence[AccessSequence] | Iterable[AccessSequence],
) -> EmpiricalDistance:
    """Plug-in total-variation estimate over trace digests.

    Upward biased for small samples (fresh noise looks like signal), so the
    sample sizes ride along in the result.
    """
    cx: dict = {}
    cy: dict = {}
    for s in samples_x:
        d = trace_digest(s)
        cx[d] = cx.get(d, 0) + 1
    for s in samples_y:
        d = trace_digest(s)
        cy[d] = cy.get(d, 0) + 1
    n_x = sum(cx.values())
    n_y = sum(cy.values())
    if not n_x or not n_y:
        raise ValueError("both sample sets must be non-empty")
    support = set(cx) | set(cy)
    dist = (
        sum((abs(Fraction(cx.get(d, 0), n_x) - Fraction(cy.get(d, 0), n_y)) for d in support), Fraction(0))
        / 2
    )
    return EmpiricalDistance(distance=dist, n_x=n_x, n_y=n_y, support=len(support))
