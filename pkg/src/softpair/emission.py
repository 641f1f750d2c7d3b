"""Soft-photon emission model for the decaying source.

The source produces the fermion pair plus an undetermined number of soft
photons.  With total energy E_total, a detected fermion energy E_A and a
partner rest mass m_B (c = 1), the energy left over for radiation is

    lam = E_total - E_A - m_B.

Photon multiplicity follows a truncated Poisson law with intensity

    mu = kappa_rad * alpha * log(lam / e_min),

i.e. p_k proportional to mu^k / k! for k = 0..k_max, renormalized.  The
logarithm is the usual soft/infrared enhancement: lowering the resolution
cutoff e_min makes radiation more likely.  Whenever lam <= e_min there is no
room for a resolvable photon and p_0 = 1.

Individual photon energies follow a 1/E spectrum on [e_min, lam] (log-uniform:
E = e_min * (lam/e_min)**u), and a group of k photons is accepted only if the
energies fit the budget, sum E <= lam.

A radiated pair can land in a spin-parallel configuration instead of the
singlet-like antiparallel one; the chance of that is phase-space suppressed as

    parallel_spin_probability = min(1, kappa_par * (max(lam, 0) / E_total)**2)

and is zero when no photon is radiated (k = 0), where angular momentum
conservation pins the pair antiparallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSampleError, ParameterError
from .quantum import Direction

FINE_STRUCTURE = 1.0 / 137.0

#: Hard cap on the multiplicity truncation, sized for the compiled kernel's
#: fixed per-event scratch buffers.
K_MAX_LIMIT = 64


@dataclass(frozen=True)
class EmissionParams:
    """Source and radiation parameters.  Energies share one unit (c = 1).

    alpha      coupling strength of the radiation (0 switches it off)
    e_total    total energy released by the source, > 0
    e_a        energy of the detected fermion A
    m_b        rest mass of partner B
    e_min      detector resolution / infrared cutoff for photons, > 0
    kappa_rad  order-one prefactor of the multiplicity intensity
    kappa_par  order-one prefactor of the parallel-spin probability
    k_max      multiplicity truncation, 1 <= k_max <= 64
    """

    alpha: float = FINE_STRUCTURE
    e_total: float = 1.0
    e_a: float = 0.6
    m_b: float = 0.1
    e_min: float = 1e-3
    kappa_rad: float = 1.0
    kappa_par: float = 1.0
    k_max: int = 8

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError(f"alpha must be in [0, 1), got {self.alpha}")
        if not self.e_total > 0.0:
            raise ParameterError(f"e_total must be positive, got {self.e_total}")
        if self.e_a < 0.0:
            raise ParameterError(f"e_a must be nonnegative, got {self.e_a}")
        if self.m_b < 0.0:
            raise ParameterError(f"m_b must be nonnegative, got {self.m_b}")
        if not self.e_min > 0.0:
            raise ParameterError(f"e_min must be positive, got {self.e_min}")
        if self.kappa_rad < 0.0:
            raise ParameterError(f"kappa_rad must be nonnegative, got {self.kappa_rad}")
        if self.kappa_par < 0.0:
            raise ParameterError(f"kappa_par must be nonnegative, got {self.kappa_par}")
        if not isinstance(self.k_max, int) or not 1 <= self.k_max <= K_MAX_LIMIT:
            raise ParameterError(f"k_max must be an int in [1, {K_MAX_LIMIT}], got {self.k_max}")


@dataclass(frozen=True)
class PhotonRecord:
    """One radiated photon: energy, direction, helicity (+-1 in hbar units)."""

    energy: float
    direction: Direction
    helicity: int

    def __post_init__(self):
        if not self.energy > 0.0:
            raise ParameterError(f"photon energy must be positive, got {self.energy}")
        if self.helicity not in (+1, -1):
            raise ParameterError(f"photon helicity must be +1 or -1, got {self.helicity}")


@dataclass(frozen=True)
class PhotonCountDistribution:
    """Multiplicity law p_0..p_kmax.

    Invariants: entries are nonnegative, sum to 1 within 1e-12, and are
    strictly decreasing while positive (the soft hierarchy: each extra photon
    costs a factor < 1).  Trailing exact zeros are allowed so the radiation-off
    limit (p_0 = 1) fits the same type.
    """

    probabilities: tuple[float, ...]

    def __post_init__(self):
        p = self.probabilities
        if len(p) < 1:
            raise ParameterError("count distribution needs at least p_0")
        if any(q < 0.0 for q in p):
            raise ParameterError("count probabilities must be nonnegative")
        if abs(sum(p) - 1.0) > 1e-12:
            raise ParameterError(f"count probabilities sum to {sum(p)!r}, not 1")
        for k in range(len(p) - 1):
            if p[k + 1] >= p[k] and p[k + 1] > 0.0:
                raise ParameterError(
                    f"count probabilities must decrease strictly: p_{k}={p[k]!r} "
                    f"but p_{k + 1}={p[k + 1]!r}"
                )

    @property
    def k_max(self) -> int:
        return len(self.probabilities) - 1

    @property
    def p0(self) -> float:
        return self.probabilities[0]

    def cdf(self) -> np.ndarray:
        """Cumulative table used by the samplers; last entry forced to 1.

        A uniform u in [0, 1) maps to the smallest k with u < cdf[k], so the
        forced final 1.0 guarantees k <= k_max for every draw.
        """
        c = np.cumsum(np.asarray(self.probabilities, dtype=np.float64))
        c[-1] = 1.0
        return c

    def mean(self) -> float:
        return float(sum(k * q for k, q in enumerate(self.probabilities)))


def available_energy(params: EmissionParams) -> float:
    """Energy budget lam = e_total - e_a - m_b left for radiation.

    May be zero or negative (an over-constrained kinematic point); callers
    treat lam <= e_min as "no resolvable photon".
    """
    return params.e_total - params.e_a - params.m_b


def photon_count_distribution(params: EmissionParams) -> PhotonCountDistribution:
    """Truncated-Poisson multiplicity law for the given parameters.

    Raises ParameterError when the intensity mu >= 1, because the soft
    hierarchy (strictly decreasing p_k) would be violated.
    """
    lam = available_energy(params)
    k_max = params.k_max
    if lam <= params.e_min:
        return PhotonCountDistribution((1.0,) + (0.0,) * k_max)
    mu = params.kappa_rad * params.alpha * math.log(lam / params.e_min)
    if mu >= 1.0:
        raise ParameterError(
            f"multiplicity intensity {mu!r} >= 1 breaks the soft hierarchy; "
            "reduce kappa_rad or alpha, or raise e_min"
        )
    if mu == 0.0:
        return PhotonCountDistribution((1.0,) + (0.0,) * k_max)
    weights = []
    w = 1.0
    for k in range(k_max + 1):
        if k > 0:
            w *= mu / k
        weights.append(w)
    total = sum(weights)
    return PhotonCountDistribution(tuple(w / total for w in weights))


def sample_photon_energies(k: int, params: EmissionParams, rng, max_retries: int = 100) -> list[float]:
    """Draw k energies from the 1/E spectrum, accepted only if they fit lam.

    Group rejection: each attempt consumes exactly k uniforms; the group is
    accepted when sum(E) <= lam.  Raises InfeasibleSampleError when no draw
    can succeed (k * e_min > lam) or when max_retries attempts all failed.
    """
    lam = available_energy(params)
    if k < 1:
        raise ParameterError(f"photon count must be >= 1, got {k}")
    if lam <= params.e_min:
        raise ParameterError(f"no energy budget for photons: lam={lam!r} <= e_min={params.e_min!r}")
    if k * params.e_min > lam:
        raise InfeasibleSampleError(
            f"{k} photons of energy >= {params.e_min} cannot fit budget {lam!r}"
        )
    log_ratio = math.log(lam / params.e_min)
    for _ in range(max_retries):
        energies = []
        total = 0.0
        for _ in range(k):
            e = params.e_min * math.exp(rng.uniform() * log_ratio)
            energies.append(e)
            total += e
        if total <= lam:
            return energies
    raise InfeasibleSampleError(
        f"no group of {k} photon energies fit budget {lam!r} in {max_retries} attempts"
    )


def sample_photons(k: int, params: EmissionParams, rng, max_retries: int = 100) -> list[PhotonRecord]:
    """Draw k photons: energies by group rejection, then isotropic directions,
    then independent uniform +-1 helicities.

    Draw budget per call: k * attempts uniforms for the energies, then 3 * k
    (cos theta, phi, helicity per photon).  The event generator uses the same
    energy and direction sampling but assigns helicities under an angular
    momentum constraint instead of independently; this standalone operation
    keeps them unbiased coin flips.
    """
    energies = sample_photon_energies(k, params, rng, max_retries=max_retries)
    photons = []
    for e in energies:
        cos_t = 2.0 * rng.uniform() - 1.0
        phi = 2.0 * math.pi * rng.uniform()
        sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        direction = Direction(sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t)
        helicity = +1 if rng.uniform() < 0.5 else -1
        photons.append(PhotonRecord(e, direction, helicity))
    return photons


def parallel_spin_probability(params: EmissionParams, k: int) -> float:
    """Chance that a k-photon event leaves the fermion spins parallel.

    Zero for k = 0 (nothing to absorb the spin flip); otherwise the
    phase-space suppressed min(1, kappa_par * (max(lam, 0) / e_total)**2).
    """
    if k < 0:
        raise ParameterError(f"photon count must be >= 0, got {k}")
    if k == 0:
        return 0.0
    lam = max(0.0, available_energy(params))
    return min(1.0, params.kappa_par * (lam / params.e_total) ** 2)
