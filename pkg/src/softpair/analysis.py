"""Coincidence selection, correlation estimators, and symmetry diagnostics.

All functions accept an ``EventBatch`` (or any iterable of ``Event``, which
is converted).  Measurement settings are matched by exact equality with the
batch's setting tables, so estimates refer to configured axes and never to
"close enough" floating point vectors.

Statistics use mergeable accumulators (count, sum, sum of squares), so
partial results from independently generated chunks combine into exactly the
estimate the concatenated sample would give, whatever the chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UndersampleError
from .events import Channel, EventBatch
from .quantum import Direction, Z_AXIS

FOUR_PI = 4.0 * math.pi


def _as_batch(events) -> EventBatch:
    if isinstance(events, EventBatch):
        return events
    return EventBatch.from_events(events)


@dataclass(frozen=True)
class CoincidenceCut:
    """Detector acceptance applied before any estimate.

    ``solid_angle`` is the acceptance cone around perfect back-to-back
    flight, in steradians (4*pi accepts everything): B must satisfy
    -dir_a . dir_b >= 1 - solid_angle / (2*pi).  ``e_window`` optionally
    restricts the detected fermion energy to [lo, hi].
    """

    solid_angle: float = FOUR_PI
    e_window: tuple[float, float] | None = None

    def __post_init__(self):
        if not 0.0 < self.solid_angle <= FOUR_PI:
            raise ParameterError(
                f"solid_angle must be in (0, 4*pi], got {self.solid_angle}"
            )
        if self.e_window is not None:
            lo, hi = self.e_window
            if not lo <= hi:
                raise ParameterError(f"e_window must satisfy lo <= hi, got {self.e_window}")

    def cos_threshold(self) -> float:
        return 1.0 - self.solid_angle / (2.0 * math.pi)


def coincidence_filter(events, cut: CoincidenceCut) -> EventBatch:
    """Events passing the back-to-back acceptance (and energy window).

    Tightening the cone can only remove events: for cuts c1 wider than c2,
    the c2 survivors are a subset of the c1 survivors, which makes efficiency
    curves over nested cuts monotone by construction.
    """
    batch = _as_batch(events)
    cos_gamma = -np.einsum("ij,ij->i", batch.dir_a, batch.dir_b)
    keep = cos_gamma >= cut.cos_threshold()
    if cut.e_window is not None:
        lo, hi = cut.e_window
        keep &= (batch.e_a >= lo) & (batch.e_a <= hi)
    return batch.select(keep)


class CorrelationAccumulator:
    """Mergeable running statistics of the outcome product s_a * s_b.

    Keeps (count, sum, sum of squares); ``merge`` is associative and
    commutative, so worker partials combine order-independently.
    """

    __slots__ = ("count", "total", "total_sq")

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, products: np.ndarray) -> None:
        products = np.asarray(products, dtype=np.float64)
        self.count += products.size
        self.total += float(products.sum())
        self.total_sq += float((products * products).sum())

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        out = CorrelationAccumulator()
        out.count = self.count + other.count
        out.total = self.total + other.total
        out.total_sq = self.total_sq + other.total_sq
        return out

    def mean(self) -> float:
        if self.count < 1:
            raise UndersampleError("no events accumulated")
        return self.total / self.count

    def stderr(self) -> float:
        """Standard error of the mean, sample variance with ddof = 1."""
        if self.count < 2:
            raise UndersampleError(
                f"need at least 2 events for an uncertainty, have {self.count}"
            )
        mean = self.mean()
        var = max(0.0, (self.total_sq - self.count * mean * mean) / (self.count - 1))
        return math.sqrt(var / self.count)


@dataclass(frozen=True)
class CorrelationEstimate:
    """Monte Carlo estimate of E(a, b) with its standard error."""

    axis_a: Direction
    axis_b: Direction
    value: float
    stderr: float
    n_events: int


def _setting_lookup(table: tuple[Direction, ...], axis: Direction, side: str) -> int:
    for i, d in enumerate(table):
        if d == axis:
            return i
    raise UndersampleError(
        f"axis ({axis.x}, {axis.y}, {axis.z}) is not among side {side}'s settings"
    )


def estimate_correlation(events, a: Direction, b: Direction) -> CorrelationEstimate:
    """Sample mean of s_a * s_b over events measured along exactly (a, b).

    Raises UndersampleError when fewer than two matching events exist (no
    finite uncertainty).
    """
    batch = _as_batch(events)
    ia = _setting_lookup(batch.settings_a, a, "A")
    ib = _setting_lookup(batch.settings_b, b, "B")
    mask = (batch.ia == ia) & (batch.ib == ib)
    products = (batch.s_a[mask].astype(np.float64) * batch.s_b[mask].astype(np.float64))
    acc = CorrelationAccumulator()
    acc.add(products)
    if acc.count < 2:
        raise UndersampleError(
            f"only {acc.count} events measured along the requested pair; need >= 2"
        )
    return CorrelationEstimate(a, b, acc.mean(), acc.stderr(), acc.count)


def chsh_estimate(events, a: Direction, a2: Direction, b: Direction, b2: Direction
                  ) -> tuple[float, float]:
    """CHSH statistic S = |E(a,b) - E(a,b2) + E(a2,b) + E(a2,b2)|.

    Returns (S, stderr) with the four per-pair standard errors combined in
    quadrature.  Raises UndersampleError naming the first setting pair that
    lacks events.
    """
    batch = _as_batch(events)
    terms = []
    for pair, sign in ((("a", a, "b", b), +1.0), (("a", a, "b2", b2), -1.0),
                       (("a2", a2, "b", b), +1.0), (("a2", a2, "b2", b2), +1.0)):
        name_a, ax_a, name_b, ax_b = pair
        try:
            est = estimate_correlation(batch, ax_a, ax_b)
        except UndersampleError as exc:
            raise UndersampleError(f"setting pair ({name_a}, {name_b}): {exc}") from None
        terms.append((sign, est))
    s = sum(sign * est.value for sign, est in terms)
    err = math.sqrt(sum(est.stderr ** 2 for _, est in terms))
    return abs(s), err


@dataclass(frozen=True)
class ViolationReport:
    """Apparent angular-momentum violations among equal-axis events.

    Scans events where both detectors share one ledger axis.  An event whose
    outcomes do not cancel (s_a + s_b != 0) looks like a violation if only
    the fermions are watched; ``photon_compensated`` confirms that in every
    flagged event the recorded photon helicities balance the fermion pair
    (jz_photons == -jz_fermions / 2) and at least one photon exists.
    """

    axis: Direction
    n_selected: int
    n_violation: int
    indices: tuple[int, ...]
    photon_compensated: bool

    @property
    def violation_fraction(self) -> float:
        if self.n_selected == 0:
            return 0.0
        return self.n_violation / self.n_selected


def detect_violations(events, axis: Direction = Z_AXIS) -> ViolationReport:
    """Flag equal-axis events with non-cancelling outcomes and verify that
    radiated photons carry exactly the missing angular momentum."""
    batch = _as_batch(events)
    in_a = np.zeros(len(batch), dtype=bool)
    for i, d in enumerate(batch.settings_a):
        if d == axis:
            in_a |= batch.ia == i
    in_b = np.zeros(len(batch), dtype=bool)
    for i, d in enumerate(batch.settings_b):
        if d == axis:
            in_b |= batch.ib == i
    selected = in_a & in_b
    flagged = selected & (batch.s_a.astype(np.int64) + batch.s_b.astype(np.int64) != 0)
    idx = batch.index[flagged]
    has_photon = batch.k[flagged] >= 1
    balanced = (
        2 * batch.jz_photons[flagged].astype(np.int64)
        == -batch.jz_fermions[flagged].astype(np.int64)
    )
    compensated = bool(np.all(has_photon & balanced)) if idx.size else True
    return ViolationReport(
        axis=axis,
        n_selected=int(selected.sum()),
        n_violation=int(flagged.sum()),
        indices=tuple(int(i) for i in idx),
        photon_compensated=compensated,
    )
