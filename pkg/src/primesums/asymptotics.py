"""Ratio tracking, block bounds, and empirical constant extraction.

Nothing here proves an order-of-magnitude statement; the point is to
measure the quantities that would appear in one.  Checkpoints carry

    r_S   = S / sqrt(x/log x)
    r_E_pi = E / pi(x)
    r_E_x  = E log(x) / x
    mertens_remainder = M - log x

and this module extracts their inf/sup bands over a window, checks the
exact block inequalities that follow from w being decreasing beyond e,
and samples a_n * S_{n-1}.

Block operations read their two endpoints from checkpoints of the same
run: the lower edge x/ratio is snapped down to the nearest grid point,
which keeps every asserted inequality exact (any lower edge >= 3 works)
while avoiding a second sieve pass.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .accumulate import Checkpoint
from .calculus import eval_w
from .errors import ConfigError, DomainError
from .verify import VerificationRecord, bound_record, identity_record

BAND_SERIES = ("r_S", "r_E_pi", "r_E_x", "mertens_remainder")
AN_SN_SERIES = "anS"

_MIN_BLOCK_EDGE = 3.0  # smallest prime above e; w is decreasing from here on


@dataclass(frozen=True)
class BlockStat:
    """Sums over one block (x_lower, x] with the exact sandwich bounds.

    lam is the requested block ratio; x_lower is the grid point that
    x/lam snapped down to, so the effective ratio x/x_lower is >= lam.
    """

    x: float
    lam: float
    x_lower: float
    delta_S: float
    delta_pi: int
    lower: float
    upper: float


@dataclass(frozen=True)
class RatioBand:
    """Empirical inf/sup of one tracked series over an x-window."""

    name: str
    x_min: float
    x_max: float
    inf_value: float
    inf_at: float
    sup_value: float
    sup_at: float


class CheckpointSeries:
    """Ascending checkpoints with floor lookup by x."""

    def __init__(self, checkpoints: Sequence[Checkpoint]):
        cps = list(checkpoints)
        for a, b in zip(cps, cps[1:]):
            if not a.x < b.x:
                raise ConfigError("checkpoints must be strictly ascending in x")
        self._cps = cps
        self._xs = [cp.x for cp in cps]

    def __len__(self) -> int:
        return len(self._cps)

    def __iter__(self):
        return iter(self._cps)

    def __getitem__(self, i: int) -> Checkpoint:
        return self._cps[i]

    def floor(self, x: float) -> Checkpoint | None:
        """The checkpoint with the largest grid x not exceeding x, if any."""
        i = bisect.bisect_right(self._xs, x)
        return self._cps[i - 1] if i else None


def compute_ratios(checkpoint: Checkpoint) -> Checkpoint:
    """Recompute the four ratio fields from (x, pi, S, M, E); rejects
    x < 3 where the x/log x scales degenerate."""
    x = checkpoint.x
    if x < 3.0:
        raise DomainError(f"ratio fields need x >= 3, got {x}")
    lx = math.log(x)
    return replace(
        checkpoint,
        r_S=checkpoint.S / math.sqrt(x / lx),
        r_E_pi=checkpoint.E / checkpoint.pi,
        r_E_x=checkpoint.E * lx / x,
        mertens_remainder=checkpoint.M - lx,
    )


def _block_edges(
    x: float, ratio: float, series: CheckpointSeries
) -> tuple[Checkpoint, Checkpoint]:
    if ratio <= 1.0:
        raise ConfigError(f"block ratio must be > 1, got {ratio}")
    target = x / ratio
    if target < _MIN_BLOCK_EDGE:
        raise DomainError(
            f"block lower edge {target} below {_MIN_BLOCK_EDGE}; "
            "w is only decreasing beyond e"
        )
    hi = series.floor(x)
    if hi is None or hi.x != x:
        raise DomainError(f"no checkpoint at x={x}")
    lo = series.floor(target)
    if lo is None:
        raise DomainError(f"no checkpoint at or below x/ratio={target}")
    return hi, lo


def block_sandwich(x: float, lam: float, series: CheckpointSeries) -> BlockStat:
    """Block sums over (x_lower, x] with their exact bounds: every prime in
    the block has w(x) <= w(p) <= w(x_lower), so

        delta_pi * w(x) <= delta_S <= delta_pi * w(x_lower).
    """
    hi, lo = _block_edges(x, lam, series)
    delta_pi = hi.pi - lo.pi
    return BlockStat(
        x=x,
        lam=lam,
        x_lower=lo.x,
        delta_S=hi.S - lo.S,
        delta_pi=delta_pi,
        lower=delta_pi * eval_w(x),
        upper=delta_pi * eval_w(lo.x),
    )


def sandwich_records(
    stat: BlockStat, tolerance: float = 1e-12
) -> list[VerificationRecord]:
    """The two one-sided checks for a BlockStat."""
    return [
        bound_record(
            "block_sandwich_lower", stat.x, stat.delta_S, stat.lower, tolerance
        ),
        bound_record(
            "block_sandwich_upper",
            stat.x,
            stat.delta_S,
            stat.upper,
            tolerance,
            direction="le",
        ),
    ]


def lower_bound_check(
    x: float, A: float, series: CheckpointSeries, tolerance: float = 1e-12
) -> VerificationRecord:
    """Check S(x) >= (M(x) - M(y)) / w(y) with y the grid point x/A snaps
    down to.  Exact mathematics for any y >= 3; the tolerance only covers
    rounding."""
    hi, lo = _block_edges(x, A, series)
    bound = (hi.M - lo.M) / eval_w(lo.x)
    return bound_record("lower_bound", x, hi.S, bound, tolerance)


def series_band(name: str, samples: Sequence[tuple[float, float]]) -> RatioBand:
    """inf/sup with arg-locations over (location, value) samples."""
    if not samples:
        raise ConfigError(f"no samples to band for series {name!r}")
    inf_at, inf_value = samples[0]
    sup_at, sup_value = samples[0]
    for at, value in samples:
        if value < inf_value:
            inf_value, inf_at = value, at
        if value > sup_value:
            sup_value, sup_at = value, at
    return RatioBand(
        name=name,
        x_min=min(at for at, _ in samples),
        x_max=max(at for at, _ in samples),
        inf_value=inf_value,
        inf_at=inf_at,
        sup_value=sup_value,
        sup_at=sup_at,
    )


def empirical_constants(
    checkpoints: Sequence[Checkpoint],
    x_min: float,
    x_max: float = math.inf,
) -> list[RatioBand]:
    """Bands of the four checkpoint series over checkpoints with
    x_min <= x <= x_max; these are the run's empirical constants."""
    selected = [cp for cp in checkpoints if x_min <= cp.x <= x_max]
    if not selected:
        raise ConfigError(f"no checkpoints in window [{x_min}, {x_max}]")
    bands = []
    for name in BAND_SERIES:
        samples = [(cp.x, getattr(cp, name)) for cp in selected]
        bands.append(series_band(name, samples))
    return bands


def an_sn_band(samples: Sequence[tuple[int, float]], n_min: int = 2) -> RatioBand:
    """Band of a_n * S_{n-1} over sampled n >= n_min (n=1 is always zero
    and excluded).  Locations are the sample indices n."""
    kept = [(float(n), v) for n, v in samples if n >= n_min]
    return series_band(AN_SN_SERIES, kept)


def mertens_width(
    checkpoints: Sequence[Checkpoint], lo: float, hi: float
) -> float:
    """max - min of the Mertens remainder over checkpoints in [lo, hi]."""
    values = [cp.mertens_remainder for cp in checkpoints if lo <= cp.x <= hi]
    if not values:
        raise ConfigError(f"no checkpoints in window [{lo}, {hi}]")
    return max(values) - min(values)


def mertens_contraction_record(
    checkpoints: Sequence[Checkpoint],
    early_window: tuple[float, float] = (1e2, 1e4),
    late_window: tuple[float, float] = (1e6, 1e8),
) -> VerificationRecord:
    """Pass iff the Mertens-remainder fluctuation over the late window is
    strictly smaller than over the early window."""
    early = mertens_width(checkpoints, *early_window)
    late = mertens_width(checkpoints, *late_window)
    violation = max(0.0, late - early) / max(1.0, early)
    return VerificationRecord(
        check_id="mertens_contraction",
        location=late_window[1],
        lhs=late,
        rhs=early,
        residual=violation,
        tolerance=0.0,
        passed=late < early,
    )


def scale_identity_record(
    checkpoints: Sequence[Checkpoint], tolerance: float = 1e-12
) -> VerificationRecord:
    """r_E_x / r_E_pi must equal pi(x) * log(x) / x, a pure algebraic
    consistency among the ratio fields; reports the worst checkpoint."""
    worst: VerificationRecord | None = None
    for cp in checkpoints:
        if cp.x < 3.0:
            continue
        lhs = cp.r_E_x / cp.r_E_pi
        rhs = cp.pi * math.log(cp.x) / cp.x
        rec = identity_record("scale_identity", cp.x, lhs, rhs, tolerance)
        if worst is None or rec.residual > worst.residual:
            worst = rec
    if worst is None:
        raise ConfigError("no checkpoints with x >= 3 to check")
    return worst


def ratio_positivity_record(
    checkpoints: Sequence[Checkpoint],
    an_sn_samples: Sequence[tuple[int, float]] = (),
    x_min: float = 100.0,
) -> VerificationRecord:
    """All of r_S, r_E_pi, r_E_x (for x >= x_min) and a_n S_{n-1} (for
    n >= 2) must be finite and strictly positive."""
    worst = math.inf
    location = x_min
    for cp in checkpoints:
        if cp.x < x_min:
            continue
        low = min(cp.r_S, cp.r_E_pi, cp.r_E_x)
        if math.isnan(low):
            low = -math.inf
        if low < worst:
            worst, location = low, cp.x
    for n, value in an_sn_samples:
        if n >= 2 and value < worst:
            worst, location = value, float(n)
    passed = worst > 0.0 and math.isfinite(worst)
    violation = 0.0 if passed else 1.0
    return VerificationRecord(
        check_id="ratio_positive",
        location=location,
        lhs=worst,
        rhs=0.0,
        residual=violation,
        tolerance=0.0,
        passed=passed,
    )
