"""Event generation: spin outcomes, soft radiation, and exact J_z bookkeeping.

Channels
--------
Every event lands in one of three channels:

* ``BARE`` (k = 0): no resolvable photon.  Angular momentum conservation
  forces the fermion spins antiparallel, so joint outcomes follow the exact
  singlet law for the chosen axes and the partners fly back to back.
* ``RADIATIVE_ANTIPARALLEL`` (k >= 1): photons are radiated but the fermion
  spins stay antiparallel; outcome statistics are identical to BARE.
* ``RADIATIVE_PARALLEL`` (k >= 1): the radiated photons absorb one unit of
  spin, leaving the fermions parallel; both detectors then report the same
  sign (+1 with probability 1/2), whatever their axes.

Angular-momentum ledger
-----------------------
The source has J_z = 0.  Each event records ``jz_fermions`` (outcome sum in
hbar/2 units along the pair's common spin axis: 0 for antiparallel channels,
+-2 for parallel) and ``jz_photons`` (summed photon helicities in hbar).
Closure ``jz_fermions / 2 + jz_photons = 0`` holds exactly, event by event:

* antiparallel channels need a photon helicity sum of 0, so k must be even;
* the parallel channel needs helicity sum -+1, so k must be odd.

The sampled multiplicity is therefore nudged to the channel's parity: an
even draw in the parallel channel drops one photon; an odd draw in the
antiparallel channel gains one (or, if the budget forbids k+1, drops one,
which fails loudly when that would reach zero).  Helicities are then
assigned by ranking per-photon uniform keys and giving the required number
of +1s to the largest keys, which is a uniform choice among the helicity
patterns with the required sum.

Draw contract
-------------
Event ``i`` owns the stream ``Xoshiro256.from_key(seed, i)`` and consumes
uniforms in this exact order (see ``rng``):

1. setting index for A:  ia = min(int(u * n_a), n_a - 1)
2. setting index for B:  ib likewise
3. multiplicity k_raw: smallest k with u < count_cdf[k]

k_raw = 0 (BARE):
4. singlet cell: thresholds from p_same = max(0, (1 - a.b)/4), in cell order
   (+,+), (+,-), (-,+), (-,-)
5. cos(theta) of A's flight direction: 2u - 1
6. azimuth of A's flight direction: 2*pi*u;  B flies exactly opposite.

k_raw >= 1 (RADIATIVE):
4.  channel: parallel iff u < parallel_spin_probability
5.  outcome: parallel channel: common sign +1 iff u < 1/2; antiparallel:
    singlet cell exactly as in the bare step 4.  Then k_raw is parity
    adjusted to k (no draw).
6.  photon energies: attempts of exactly k draws each,
    E = e_min * exp(u * log(lam / e_min)), accepted when the running sum
    (left to right) is <= lam; at most ``max_retries`` attempts.
7.  per photon j = 0..k-1: cos(theta_j) = 2u - 1, then phi_j = 2*pi*u
8.  per photon j = 0..k-1: helicity ranking key u_j
9.  cos(theta) of A's flight direction: 2u - 1
10. azimuth of A's flight direction: 2*pi*u
11. recoil magnitude: two draws u1, u2 give the half Box-Muller normal
    z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
12. recoil azimuth: 2*pi*u

B's direction is -dir_a tilted by delta = smear_sigma * (sum E / lam) * |z|
toward the recoil azimuth, in the deterministic orthonormal frame built on
-dir_a (helper axis z unless |v_z| > 0.99, then x).  ``pt_residual`` is the
photon system's transverse momentum sum (E_j * x_j, E_j * y_j).

The vectorized and compiled kernels replay this contract lane by lane, so
every backend and any worker partition produce identical events.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .emission import EmissionParams, PhotonRecord, available_energy, parallel_spin_probability, photon_count_distribution
from .errors import GenerationError, ParameterError
from .quantum import Direction, Z_AXIS
from .rng import Xoshiro256

TWO_PI = 2.0 * math.pi


class Channel(enum.IntEnum):
    """Event channel codes as stored in batches and logs."""

    BARE = 0
    RADIATIVE_ANTIPARALLEL = 1
    RADIATIVE_PARALLEL = 2

    @property
    def token(self) -> str:
        return _CHANNEL_TOKENS[self.value]


_CHANNEL_TOKENS = ("bare", "radiative-antiparallel", "radiative-parallel")
CHANNEL_FROM_TOKEN = {t: Channel(i) for i, t in enumerate(_CHANNEL_TOKENS)}


@dataclass(frozen=True)
class Event:
    """One generated event (scalar view; batches store the same columns)."""

    index: int
    k: int
    channel: Channel
    axis_a: Direction
    axis_b: Direction
    outcome_a: int
    outcome_b: int
    dir_a: Direction
    dir_b: Direction
    photons: tuple[PhotonRecord, ...]
    e_a: float
    jz_fermions: int
    jz_photons: int
    pt_residual: tuple[float, float]

    @property
    def jz_source(self) -> int:
        """The source's angular momentum along z: always 0."""
        return 0

    def ledger_residual(self) -> float:
        """jz_fermions / 2 + jz_photons + jz_source; zero for every event."""
        return self.jz_fermions / 2.0 + self.jz_photons + self.jz_source


@dataclass(frozen=True)
class GeneratorConfig:
    """Full recipe for a reproducible event sample."""

    emission: EmissionParams = field(default_factory=EmissionParams)
    settings_a: tuple[Direction, ...] = (Z_AXIS,)
    settings_b: tuple[Direction, ...] = (Z_AXIS,)
    seed: int = 0
    n_events: int = 1000
    smear_sigma: float = 0.5
    max_retries: int = 100

    def __post_init__(self):
        if len(self.settings_a) < 1 or len(self.settings_b) < 1:
            raise ParameterError("each side needs at least one measurement setting")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ParameterError(f"seed must be a nonnegative int, got {self.seed}")
        if not isinstance(self.n_events, int) or self.n_events < 1:
            raise ParameterError(f"n_events must be a positive int, got {self.n_events}")
        if not self.smear_sigma >= 0.0:
            raise ParameterError(f"smear_sigma must be nonnegative, got {self.smear_sigma}")
        if not isinstance(self.max_retries, int) or self.max_retries < 1:
            raise ParameterError(f"max_retries must be a positive int, got {self.max_retries}")


class EventBatch:
    """Columnar store of events; iterating yields ``Event`` objects.

    Photon columns are ragged and stored CSR style: event ``i`` owns photon
    rows ``photon_offsets[i]:photon_offsets[i+1]``.  ``photon_dir_complete``
    is False for batches read back from logs, which keep only cos(theta) of
    each photon (x and y components are NaN there).
    """

    __slots__ = (
        "settings_a", "settings_b", "e_a", "index", "k", "channel", "ia", "ib",
        "s_a", "s_b", "dir_a", "dir_b", "jz_fermions", "jz_photons", "pt",
        "photon_offsets", "photon_energy", "photon_helicity", "photon_dir",
        "photon_dir_complete",
    )

    def __init__(self, settings_a, settings_b, e_a, index, k, channel, ia, ib,
                 s_a, s_b, dir_a, dir_b, jz_fermions, jz_photons, pt,
                 photon_offsets, photon_energy, photon_helicity, photon_dir,
                 photon_dir_complete=True):
        self.settings_a = tuple(settings_a)
        self.settings_b = tuple(settings_b)
        self.e_a = float(e_a)
        self.index = np.asarray(index, dtype=np.int64)
        self.k = np.asarray(k, dtype=np.int16)
        self.channel = np.asarray(channel, dtype=np.int8)
        self.ia = np.asarray(ia, dtype=np.int32)
        self.ib = np.asarray(ib, dtype=np.int32)
        self.s_a = np.asarray(s_a, dtype=np.int8)
        self.s_b = np.asarray(s_b, dtype=np.int8)
        self.dir_a = np.asarray(dir_a, dtype=np.float64).reshape(-1, 3)
        self.dir_b = np.asarray(dir_b, dtype=np.float64).reshape(-1, 3)
        self.jz_fermions = np.asarray(jz_fermions, dtype=np.int8)
        self.jz_photons = np.asarray(jz_photons, dtype=np.int16)
        self.pt = np.asarray(pt, dtype=np.float64).reshape(-1, 2)
        self.photon_offsets = np.asarray(photon_offsets, dtype=np.int64)
        self.photon_energy = np.asarray(photon_energy, dtype=np.float64)
        self.photon_helicity = np.asarray(photon_helicity, dtype=np.int8)
        self.photon_dir = np.asarray(photon_dir, dtype=np.float64).reshape(-1, 3)
        self.photon_dir_complete = bool(photon_dir_complete)
        n = len(self.index)
        for name in ("k", "channel", "ia", "ib", "s_a", "s_b", "jz_fermions", "jz_photons"):
            if len(getattr(self, name)) != n:
                raise ParameterError(f"column {name} has wrong length")
        if self.dir_a.shape != (n, 3) or self.dir_b.shape != (n, 3) or self.pt.shape != (n, 2):
            raise ParameterError("vector columns have wrong shape")
        if len(self.photon_offsets) != n + 1:
            raise ParameterError("photon_offsets must have n + 1 entries")
        m = int(self.photon_offsets[-1]) if n else 0
        if len(self.photon_energy) != m or len(self.photon_helicity) != m or self.photon_dir.shape != (m, 3):
            raise ParameterError("photon columns disagree with offsets")

    def __len__(self) -> int:
        return len(self.index)

    @property
    def n_photons(self) -> int:
        return len(self.photon_energy)

    def axis_a_vectors(self) -> np.ndarray:
        """Per-event A axis as an (n, 3) array."""
        table = np.array([[d.x, d.y, d.z] for d in self.settings_a], dtype=np.float64)
        return table[self.ia]

    def axis_b_vectors(self) -> np.ndarray:
        table = np.array([[d.x, d.y, d.z] for d in self.settings_b], dtype=np.float64)
        return table[self.ib]

    def event(self, i: int) -> Event:
        """Materialize event ``i`` as an Event object."""
        lo = int(self.photon_offsets[i])
        hi = int(self.photon_offsets[i + 1])
        photons = []
        for j in range(lo, hi):
            if self.photon_dir_complete:
                d = Direction(*self.photon_dir[j])
            else:
                raise ParameterError(
                    "this batch was read from a log and keeps only photon cos(theta); "
                    "full photon directions are unavailable"
                )
            photons.append(PhotonRecord(float(self.photon_energy[j]), d, int(self.photon_helicity[j])))
        return Event(
            index=int(self.index[i]),
            k=int(self.k[i]),
            channel=Channel(int(self.channel[i])),
            axis_a=self.settings_a[int(self.ia[i])],
            axis_b=self.settings_b[int(self.ib[i])],
            outcome_a=int(self.s_a[i]),
            outcome_b=int(self.s_b[i]),
            dir_a=Direction(*self.dir_a[i]),
            dir_b=Direction(*self.dir_b[i]),
            photons=tuple(photons),
            e_a=self.e_a,
            jz_fermions=int(self.jz_fermions[i]),
            jz_photons=int(self.jz_photons[i]),
            pt_residual=(float(self.pt[i, 0]), float(self.pt[i, 1])),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self.event(i)

    def to_events(self) -> list[Event]:
        return list(self)

    def select(self, mask: np.ndarray) -> "EventBatch":
        """New batch with the events where ``mask`` is True (photons carried)."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.index.shape:
            raise ParameterError("mask length must equal batch length")
        counts = np.diff(self.photon_offsets)
        kept = counts[mask]
        new_offsets = np.zeros(int(mask.sum()) + 1, dtype=np.int64)
        np.cumsum(kept, out=new_offsets[1:])
        starts = self.photon_offsets[:-1][mask]
        total = int(new_offsets[-1])
        ph_idx = np.repeat(starts, kept) + (np.arange(total, dtype=np.int64) - np.repeat(new_offsets[:-1], kept))
        return EventBatch(
            self.settings_a, self.settings_b, self.e_a,
            self.index[mask], self.k[mask], self.channel[mask], self.ia[mask], self.ib[mask],
            self.s_a[mask], self.s_b[mask], self.dir_a[mask], self.dir_b[mask],
            self.jz_fermions[mask], self.jz_photons[mask], self.pt[mask],
            new_offsets, self.photon_energy[ph_idx], self.photon_helicity[ph_idx],
            self.photon_dir[ph_idx], self.photon_dir_complete,
        )

    @classmethod
    def concat(cls, batches: list["EventBatch"]) -> "EventBatch":
        """Concatenate chunks that share settings and e_a (worker merge)."""
        if not batches:
            raise ParameterError("cannot concatenate zero batches")
        first = batches[0]
        for b in batches[1:]:
            if b.settings_a != first.settings_a or b.settings_b != first.settings_b:
                raise ParameterError("cannot concatenate batches with different settings")
            if b.e_a != first.e_a:
                raise ParameterError("cannot concatenate batches with different e_a")
        counts = [np.diff(b.photon_offsets) for b in batches]
        offsets = np.zeros(sum(len(b) for b in batches) + 1, dtype=np.int64)
        np.cumsum(np.concatenate(counts), out=offsets[1:])
        return cls(
            first.settings_a, first.settings_b, first.e_a,
            np.concatenate([b.index for b in batches]),
            np.concatenate([b.k for b in batches]),
            np.concatenate([b.channel for b in batches]),
            np.concatenate([b.ia for b in batches]),
            np.concatenate([b.ib for b in batches]),
            np.concatenate([b.s_a for b in batches]),
            np.concatenate([b.s_b for b in batches]),
            np.concatenate([b.dir_a for b in batches]),
            np.concatenate([b.dir_b for b in batches]),
            np.concatenate([b.jz_fermions for b in batches]),
            np.concatenate([b.jz_photons for b in batches]),
            np.concatenate([b.pt for b in batches]),
            offsets,
            np.concatenate([b.photon_energy for b in batches]),
            np.concatenate([b.photon_helicity for b in batches]),
            np.concatenate([b.photon_dir for b in batches]),
            all(b.photon_dir_complete for b in batches),
        )

    @classmethod
    def from_events(cls, events, settings_a=None, settings_b=None, e_a=None) -> "EventBatch":
        """Build a batch from Event objects (axes mapped by exact equality)."""
        events = list(events)
        if not events:
            raise ParameterError("cannot build a batch from zero events")

        def table(axes, given):
            if given is not None:
                t = tuple(given)
                lookup = {d: i for i, d in enumerate(t)}
                return t, lookup
            seen = {}
            order = []
            for d in axes:
                if d not in seen:
                    seen[d] = len(order)
                    order.append(d)
            return tuple(order), seen

        sett_a, lut_a = table((ev.axis_a for ev in events), settings_a)
        sett_b, lut_b = table((ev.axis_b for ev in events), settings_b)
        try:
            ia = [lut_a[ev.axis_a] for ev in events]
            ib = [lut_b[ev.axis_b] for ev in events]
        except KeyError as exc:
            raise ParameterError(f"event axis {exc.args[0]} not in the provided settings") from None
        offsets = np.zeros(len(events) + 1, dtype=np.int64)
        np.cumsum([len(ev.photons) for ev in events], out=offsets[1:])
        ph = [p for ev in events for p in ev.photons]
        return cls(
            sett_a, sett_b,
            events[0].e_a if e_a is None else e_a,
            [ev.index for ev in events],
            [ev.k for ev in events],
            [int(ev.channel) for ev in events],
            ia, ib,
            [ev.outcome_a for ev in events],
            [ev.outcome_b for ev in events],
            [[ev.dir_a.x, ev.dir_a.y, ev.dir_a.z] for ev in events],
            [[ev.dir_b.x, ev.dir_b.y, ev.dir_b.z] for ev in events],
            [ev.jz_fermions for ev in events],
            [ev.jz_photons for ev in events],
            [list(ev.pt_residual) for ev in events],
            offsets,
            [p.energy for p in ph] if ph else np.empty(0),
            [p.helicity for p in ph] if ph else np.empty(0, dtype=np.int8),
            [[p.direction.x, p.direction.y, p.direction.z] for p in ph] if ph else np.empty((0, 3)),
        )


@dataclass(frozen=True)
class KernelInputs:
    """Precomputed, backend-agnostic sampling tables.

    Built once per batch in plain Python so every backend consumes bitwise
    identical thresholds (dot products, count CDF, channel probability).
    """

    n_a: int
    n_b: int
    dots: np.ndarray          # (n_a, n_b) axis dot products
    count_cdf: np.ndarray     # multiplicity CDF, last entry exactly 1.0
    p_par: float
    lam: float
    e_min: float
    log_ratio: float
    smear_sigma: float
    max_retries: int


def kernel_inputs(config: GeneratorConfig) -> KernelInputs:
    axes_a = np.array([[d.x, d.y, d.z] for d in config.settings_a], dtype=np.float64)
    axes_b = np.array([[d.x, d.y, d.z] for d in config.settings_b], dtype=np.float64)
    dots = axes_a @ axes_b.T
    dist = photon_count_distribution(config.emission)
    lam = available_energy(config.emission)
    e_min = config.emission.e_min
    log_ratio = math.log(lam / e_min) if lam > e_min else 0.0
    return KernelInputs(
        n_a=len(config.settings_a),
        n_b=len(config.settings_b),
        dots=np.ascontiguousarray(dots),
        count_cdf=dist.cdf(),
        p_par=parallel_spin_probability(config.emission, 1),
        lam=lam,
        e_min=e_min,
        log_ratio=log_ratio,
        smear_sigma=config.smear_sigma,
        max_retries=config.max_retries,
    )


def _setting_index(u: float, n: int) -> int:
    return min(int(u * n), n - 1)


def _singlet_cell(u: float, adotb: float) -> int:
    """Map one uniform to a joint-outcome cell of the singlet law."""
    p_same = 0.25 * (1.0 - adotb)
    if p_same < 0.0:
        p_same = 0.0
    p_diff = 0.25 * (1.0 + adotb)
    c0 = p_same
    c1 = c0 + p_diff
    c2 = c1 + p_diff
    cell = 0
    if u >= c0:
        cell = 1
    if u >= c1:
        cell = 2
    if u >= c2:
        cell = 3
    return cell


_CELL_SA = (1, 1, -1, -1)
_CELL_SB = (1, -1, 1, -1)


def _count_from_cdf(u: float, cdf) -> int:
    k = 0
    last = len(cdf) - 1
    while k < last and u >= cdf[k]:
        k += 1
    return k


def _parity_adjusted_count(k_raw: int, parallel: bool, e_min: float, lam: float) -> int:
    """Nudge the sampled multiplicity to the channel's helicity parity."""
    if parallel:
        return k_raw if k_raw % 2 == 1 else k_raw - 1
    if k_raw % 2 == 0:
        return k_raw
    if (k_raw + 1) * e_min <= lam:
        return k_raw + 1
    if k_raw - 1 >= 2:
        return k_raw - 1
    raise GenerationError(
        "antiparallel radiative event needs an even photon count >= 2 "
        f"but the budget {lam!r} holds at most one photon of energy >= {e_min!r}; "
        "lower e_min below lam / 2"
    )


def _unit_from_draws(cos_t: float, phi: float) -> tuple[float, float, float]:
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    return (sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t)


def _tilted_opposite(vx, vy, vz, delta, phi):
    """Unit vector at angle delta from v = (vx, vy, vz), toward azimuth phi.

    The frame is deterministic: helper axis z unless |v_z| > 0.99, then x;
    e1 = normalize(h x v), e2 = v x e1.
    """
    if abs(vz) <= 0.99:
        e1x = -vy
        e1y = vx
        e1z = 0.0
    else:
        e1x = 0.0
        e1y = -vz
        e1z = vy
    n1 = math.sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
    e1x /= n1
    e1y /= n1
    e1z /= n1
    e2x = vy * e1z - vz * e1y
    e2y = vz * e1x - vx * e1z
    e2z = vx * e1y - vy * e1x
    cd = math.cos(delta)
    sd = math.sin(delta)
    cp = math.cos(phi)
    sp = math.sin(phi)
    return (
        cd * vx + sd * (cp * e1x + sp * e2x),
        cd * vy + sd * (cp * e1y + sp * e2y),
        cd * vz + sd * (cp * e1z + sp * e2z),
    )


def generate_event(config: GeneratorConfig, a: Direction, b: Direction, rng,
                   index: int = 0, _inputs: KernelInputs | None = None,
                   _adotb: float | None = None) -> Event:
    """Generate one event measured along ``a`` and ``b``.

    ``rng`` is a scalar uniform stream; draws follow the module contract
    starting at the multiplicity draw (batch generation prepends the two
    setting draws on the same stream).  This is the readable reference
    implementation that the vectorized and compiled kernels replicate.
    """
    inputs = kernel_inputs(config) if _inputs is None else _inputs
    adotb = a.dot(b) if _adotb is None else _adotb
    em = config.emission

    k_raw = _count_from_cdf(rng.uniform(), inputs.count_cdf)

    if k_raw == 0:
        cell = _singlet_cell(rng.uniform(), adotb)
        s_a = _CELL_SA[cell]
        s_b = _CELL_SB[cell]
        cos_a = 2.0 * rng.uniform() - 1.0
        phi_a = TWO_PI * rng.uniform()
        ax, ay, az = _unit_from_draws(cos_a, phi_a)
        return Event(
            index=index, k=0, channel=Channel.BARE, axis_a=a, axis_b=b,
            outcome_a=s_a, outcome_b=s_b,
            dir_a=Direction(ax, ay, az), dir_b=Direction(-ax, -ay, -az),
            photons=(), e_a=em.e_a, jz_fermions=0, jz_photons=0,
            pt_residual=(0.0, 0.0),
        )

    parallel = rng.uniform() < inputs.p_par
    u_outcome = rng.uniform()
    if parallel:
        s = 1 if u_outcome < 0.5 else -1
        s_a = s_b = s
        jz_f = 2 * s
    else:
        cell = _singlet_cell(u_outcome, adotb)
        s_a = _CELL_SA[cell]
        s_b = _CELL_SB[cell]
        jz_f = 0
    try:
        k = _parity_adjusted_count(k_raw, parallel, inputs.e_min, inputs.lam)
    except GenerationError as exc:
        raise GenerationError(str(exc), index) from None
    if k * inputs.e_min > inputs.lam:
        raise GenerationError(
            f"{k} photons of energy >= {inputs.e_min!r} cannot fit budget {inputs.lam!r}", index
        )

    energies = None
    for _ in range(inputs.max_retries):
        trial = []
        total = 0.0
        for _ in range(k):
            e = inputs.e_min * math.exp(rng.uniform() * inputs.log_ratio)
            trial.append(e)
            total += e
        if total <= inputs.lam:
            energies = trial
            break
    if energies is None:
        raise GenerationError(
            f"no group of {k} photon energies fit budget {inputs.lam!r} "
            f"in {inputs.max_retries} attempts", index
        )

    ph_dirs = []
    pt_x = 0.0
    pt_y = 0.0
    for j in range(k):
        cos_j = 2.0 * rng.uniform() - 1.0
        phi_j = TWO_PI * rng.uniform()
        px, py, pz = _unit_from_draws(cos_j, phi_j)
        ph_dirs.append((px, py, pz))
        pt_x += energies[j] * px
        pt_y += energies[j] * py

    keys = [rng.uniform() for _ in range(k)]
    target = -jz_f // 2  # required photon helicity sum
    n_plus = (k + target) // 2
    helicities = []
    for j in range(k):
        rank = 0
        for l in range(k):
            if keys[l] > keys[j] or (keys[l] == keys[j] and l < j):
                rank += 1
        helicities.append(1 if rank < n_plus else -1)

    cos_a = 2.0 * rng.uniform() - 1.0
    phi_a = TWO_PI * rng.uniform()
    ax, ay, az = _unit_from_draws(cos_a, phi_a)
    u1 = rng.uniform()
    u2 = rng.uniform()
    z_n = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(TWO_PI * u2)
    phi_s = TWO_PI * rng.uniform()
    delta = inputs.smear_sigma * (total / inputs.lam) * abs(z_n)
    bx, by, bz = _tilted_opposite(-ax, -ay, -az, delta, phi_s)

    photons = tuple(
        PhotonRecord(energies[j], Direction(*ph_dirs[j]), helicities[j]) for j in range(k)
    )
    return Event(
        index=index, k=k,
        channel=Channel.RADIATIVE_PARALLEL if parallel else Channel.RADIATIVE_ANTIPARALLEL,
        axis_a=a, axis_b=b, outcome_a=s_a, outcome_b=s_b,
        dir_a=Direction(ax, ay, az), dir_b=Direction(bx, by, bz),
        photons=photons, e_a=em.e_a, jz_fermions=jz_f, jz_photons=sum(helicities),
        pt_residual=(pt_x, pt_y),
    )


def _reference_batch(config: GeneratorConfig, start: int, n: int) -> EventBatch:
    """Scalar-loop batch generation (slow; for cross-validation)."""
    inputs = kernel_inputs(config)
    events = []
    for i in range(start, start + n):
        stream = Xoshiro256.from_key(config.seed, i)
        ia = _setting_index(stream.uniform(), inputs.n_a)
        ib = _setting_index(stream.uniform(), inputs.n_b)
        ev = generate_event(
            config, config.settings_a[ia], config.settings_b[ib], stream,
            index=i, _inputs=inputs, _adotb=float(inputs.dots[ia, ib]),
        )
        events.append(ev)
    return EventBatch.from_events(events, config.settings_a, config.settings_b,
                                  e_a=config.emission.e_a)


def generate_batch(config: GeneratorConfig, *, start: int = 0, count: int | None = None,
                   backend: str | None = None) -> EventBatch:
    """Generate events ``start .. start + count - 1`` of the configured run.

    ``count`` defaults to ``config.n_events``.  The result is independent of
    how a run is split into (start, count) chunks and of the backend choice
    ("cython", "numpy", or the scalar "reference").
    """
    n = config.n_events if count is None else count
    if start < 0 or n < 0:
        raise ParameterError("start and count must be nonnegative")
    name = _backend.resolve_name(backend)
    if name == "reference":
        return _reference_batch(config, start, n)
    run = _backend.get_kernel(name)
    inputs = kernel_inputs(config)
    cols = run(
        config.seed, start, n, inputs.n_a, inputs.n_b, inputs.dots,
        inputs.count_cdf, inputs.p_par, inputs.lam, inputs.e_min,
        inputs.log_ratio, inputs.smear_sigma, inputs.max_retries,
    )
    (ia, ib, k, channel, s_a, s_b, dir_a, dir_b, jz_f, jz_ph, pt,
     offsets, ph_e, ph_hel, ph_dir) = cols
    return EventBatch(
        config.settings_a, config.settings_b, config.emission.e_a,
        np.arange(start, start + n, dtype=np.int64), k, channel, ia, ib,
        s_a, s_b, dir_a, dir_b, jz_f, jz_ph, pt, offsets, ph_e, ph_hel, ph_dir,
    )
