"""Streaming accumulation of the weighted prime sums.

For the n-th prime p_n the weight is a_n = sqrt(log(p_n)/p_n) (natural
log throughout).  The stream maintains

    S = sum a_k,    M = sum a_k^2,    E = S^2 - M,

where S and M are carried with Neumaier-compensated summation.  E is never
accumulated directly: snapshots compute it as S^2 - M, which suffers no
cancellation at scale (E grows like x/log x while M grows like log x).  A
separate running sum of the per-step jumps 2*a_n*S_{n-1} is carried purely
as a built-in cross-check: telescoped, it must reproduce S^2 - M.

Checkpoints are immutable snapshots taken on a geometric x-grid; sums are
inclusive (p <= x), and a grid point that lands exactly on a prime counts
that prime.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ConfigError, DomainError, SequencingError
from .sieve import DEFAULT_SEGMENT_SIZE, SieveConfig, stream_segments

_MAX_GRID_POINTS = 10_000_000


@dataclass(frozen=True)
class WeightedPrimeTerm:
    """One prime with its weight a_n and squared weight a_n^2.

    weight_sq is stored as weight*weight (the square of the rounded
    weight, within 2 ulps of log(prime)/prime) so that S_1^2 - M_1 is
    exactly zero and every snapshot satisfies E >= 0.
    """

    index: int
    prime: int
    weight: float
    weight_sq: float


def make_term(index: int, prime: int) -> WeightedPrimeTerm:
    """Build the weighted term for the index-th prime."""
    if prime < 2:
        raise DomainError(f"prime must be >= 2, got {prime}")
    if index < 1:
        raise DomainError(f"index must be >= 1, got {index}")
    w = math.sqrt(math.log(prime) / prime)
    return WeightedPrimeTerm(index=index, prime=prime, weight=w, weight_sq=w * w)


@dataclass(frozen=True)
class Checkpoint:
    """Immutable snapshot of the sums at grid point x.

    Ratio fields are NaN below x = 3, where the x/log x scales are not
    meaningful; every pipeline grid starts at 3 or above.
    """

    x: float
    pi: int
    S: float
    M: float
    E: float
    r_S: float
    r_E_pi: float
    r_E_x: float
    mertens_remainder: float


class SumState:
    """Single-writer streaming accumulator; strictly sequential by design.

    S/S_comp and M/M_comp are Neumaier main-plus-compensation pairs; read
    them through S_total/M_total.  E_incremental (with its own residue
    E_comp) is the telescoped jump sum used to cross-check S^2 - M.
    """

    __slots__ = (
        "n",
        "last_prime",
        "S",
        "S_comp",
        "M",
        "M_comp",
        "E_incremental",
        "E_comp",
        "last_weight",
        "last_anS",
        "weights_decreasing",
    )

    def __init__(self) -> None:
        self.n = 0
        self.last_prime = 0
        self.S = 0.0
        self.S_comp = 0.0
        self.M = 0.0
        self.M_comp = 0.0
        self.E_incremental = 0.0
        self.E_comp = 0.0
        self.last_weight = math.inf
        self.last_anS = 0.0
        self.weights_decreasing = True

    @classmethod
    def restore(
        cls,
        *,
        n: int,
        last_prime: int,
        S: float,
        S_comp: float,
        M: float,
        M_comp: float,
        E_incremental: float,
        E_comp: float,
        last_weight: float,
        last_anS: float,
        weights_decreasing: bool,
    ) -> "SumState":
        state = cls()
        state.n = n
        state.last_prime = last_prime
        state.S = S
        state.S_comp = S_comp
        state.M = M
        state.M_comp = M_comp
        state.E_incremental = E_incremental
        state.E_comp = E_comp
        state.last_weight = last_weight
        state.last_anS = last_anS
        state.weights_decreasing = weights_decreasing
        return state

    @property
    def S_total(self) -> float:
        return self.S + self.S_comp

    @property
    def M_total(self) -> float:
        return self.M + self.M_comp

    @property
    def E_total(self) -> float:
        return self.E_incremental + self.E_comp

    def push(self, term: WeightedPrimeTerm) -> "SumState":
        """Absorb one term; primes must arrive strictly ascending."""
        if term.prime <= self.last_prime:
            raise SequencingError(
                f"prime {term.prime} not above last absorbed {self.last_prime}"
            )
        if term.index != self.n + 1:
            raise SequencingError(
                f"term index {term.index} does not follow count {self.n}"
            )
        self._absorb(term.prime, term.weight, term.weight_sq)
        return self

    def _absorb(self, p: int, w: float, wsq: float) -> None:
        # Identical operation order to extend_primes; keep the two in sync.
        t_before = self.S + self.S_comp
        half_jump = w * t_before
        jump = 2.0 * half_jump

        s = self.S
        t = s + w
        if s >= w:
            self.S_comp += (s - t) + w
        else:
            self.S_comp += (w - t) + s
        self.S = t

        m = self.M
        t = m + wsq
        if m >= wsq:
            self.M_comp += (m - t) + wsq
        else:
            self.M_comp += (wsq - t) + m
        self.M = t

        e = self.E_incremental
        t = e + jump
        if e >= jump:
            self.E_comp += (e - t) + jump
        else:
            self.E_comp += (jump - t) + e
        self.E_incremental = t

        self.n += 1
        if self.n >= 3 and w >= self.last_weight:
            self.weights_decreasing = False
        self.last_weight = w
        self.last_anS = half_jump
        self.last_prime = p

    def extend_primes(
        self, primes: Sequence[int], sink: Callable[[int, float], None] | None = None
    ) -> None:
        """Bulk absorb ascending primes (all above last_prime; not checked).

        Bit-identical to pushing make_term for each prime in turn.  When a
        sink is given it receives (n, a_n * S_{n-1}) at every n that is a
        power of two.
        """
        if not primes:
            return
        s, cs = self.S, self.S_comp
        m, cm = self.M, self.M_comp
        e, ce = self.E_incremental, self.E_comp
        n = self.n
        lw = self.last_weight
        dec = self.weights_decreasing
        half_jump = self.last_anS
        log = math.log
        sqrt = math.sqrt
        for p in primes:
            wsq_def = log(p) / p
            w = sqrt(wsq_def)
            wsq = w * w
            t_before = s + cs
            half_jump = w * t_before
            jump = 2.0 * half_jump

            t = s + w
            if s >= w:
                cs += (s - t) + w
            else:
                cs += (w - t) + s
            s = t

            t = m + wsq
            if m >= wsq:
                cm += (m - t) + wsq
            else:
                cm += (wsq - t) + m
            m = t

            t = e + jump
            if e >= jump:
                ce += (e - t) + jump
            else:
                ce += (jump - t) + e
            e = t

            n += 1
            if n >= 3 and w >= lw:
                dec = False
            lw = w
            if sink is not None and (n & (n - 1)) == 0:
                sink(n, half_jump)
        self.S, self.S_comp = s, cs
        self.M, self.M_comp = m, cm
        self.E_incremental, self.E_comp = e, ce
        self.n = n
        self.last_weight = lw
        self.last_anS = half_jump
        self.weights_decreasing = dec
        self.last_prime = primes[-1]


def snapshot(state: SumState, x: float) -> Checkpoint:
    """Freeze the sums as a Checkpoint at x.

    Valid only while x is at or beyond the last absorbed prime and below
    the next unabsorbed one, so the sums over p <= x equal the state; the
    caller owns the upper side of that window.
    """
    if x < state.last_prime:
        raise SequencingError(
            f"snapshot at x={x} behind last absorbed prime {state.last_prime}"
        )
    if x >= 2.0 and state.n == 0:
        raise SequencingError(f"snapshot at x={x} before any prime was absorbed")
    s = state.S_total
    m = state.M_total
    e = s * s - m
    if x >= 3.0:
        lx = math.log(x)
        r_s = s / math.sqrt(x / lx)
        r_e_pi = e / state.n
        r_e_x = e * lx / x
        remainder = m - lx
    else:
        r_s = r_e_pi = r_e_x = remainder = math.nan
    return Checkpoint(
        x=x,
        pi=state.n,
        S=s,
        M=m,
        E=e,
        r_S=r_s,
        r_E_pi=r_e_pi,
        r_E_x=r_e_x,
        mertens_remainder=remainder,
    )


def grid_points(x_start: float, x_max: float, ratio: float) -> list[float]:
    """Geometric grid x_start * ratio^k clipped to x_max, with x_max as the
    final point whether or not it lies on the lattice."""
    if ratio <= 1.0:
        raise ConfigError(f"grid ratio must be > 1, got {ratio}")
    if x_start < 3.0:
        raise ConfigError(f"grid start must be >= 3, got {x_start}")
    if x_max < x_start:
        raise ConfigError(f"grid end {x_max} below grid start {x_start}")
    points: list[float] = []
    k = 0
    while True:
        pt = x_start * ratio**k
        if pt >= x_max:
            break
        points.append(pt)
        k += 1
        if k > _MAX_GRID_POINTS:
            raise ConfigError("grid ratio too close to 1: more than 1e7 points")
    points.append(x_max)
    return points


@dataclass
class RunResult:
    """Everything one accumulation pass produces."""

    checkpoints: list[Checkpoint]
    state: SumState
    an_sn_samples: list[tuple[int, float]]


def run_stream(
    x_max: float,
    grid: Sequence[float],
    *,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    threads: int = 1,
    state: SumState | None = None,
    samples: list[tuple[int, float]] | None = None,
) -> RunResult:
    """Sieve to x_max, fold every prime into the state, snapshot at each
    grid point, and sample a_n * S_{n-1} at power-of-two n plus the final n.

    grid must be ascending and entirely above the state's last prime; pass
    a restored state (and its previously collected samples) to continue an
    earlier run bit-identically.
    """
    state = state if state is not None else SumState()
    samples = samples if samples is not None else []
    checkpoints: list[Checkpoint] = []
    limit = int(math.floor(x_max))
    if limit < 2:
        raise ConfigError(f"x_max must be >= 2, got {x_max}")
    grid = list(grid)

    def sink(n: int, value: float) -> None:
        samples.append((n, value))

    gi = 0
    if state.last_prime < limit:
        cfg = SieveConfig(limit=limit, segment_size=segment_size)
        for seg in stream_segments(cfg, start=state.last_prime + 1, threads=threads):
            plist = seg.primes
            cut = 0
            while gi < len(grid) and grid[gi] <= seg.hi:
                g = grid[gi]
                nxt = bisect.bisect_right(plist, g, cut)
                state.extend_primes(plist[cut:nxt], sink)
                checkpoints.append(snapshot(state, g))
                gi += 1
                cut = nxt
            state.extend_primes(plist[cut:], sink)
    while gi < len(grid):
        checkpoints.append(snapshot(state, grid[gi]))
        gi += 1
    n = state.n
    if n >= 1 and (n & (n - 1)) != 0:
        samples.append((n, state.last_anS))
    return RunResult(checkpoints=checkpoints, state=state, an_sn_samples=samples)


def an_Sn_series(
    x_max: float, *, segment_size: int = DEFAULT_SEGMENT_SIZE, threads: int = 1
) -> list[tuple[int, float]]:
    """The products a_n * S_{n-1} sampled at power-of-two n (plus the final
    n) over all primes <= x_max; a_1 * S_0 = 0 by convention."""
    if x_max < 3:
        raise DomainError(f"x_max must be >= 3, got {x_max}")
    return run_stream(
        x_max, [], segment_size=segment_size, threads=threads
    ).an_sn_samples
