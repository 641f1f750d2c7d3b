"""Two-qubit spin states, measurements along arbitrary axes, and CHSH algebra.

Conventions
-----------
* Spin outcomes are reported as +1 / -1 in units of hbar/2.
* The two-qubit basis is ordered ``(+,+), (+,-), (-,+), (-,-)`` where the
  first sign is particle A and the second is particle B, both along z.
* The spin-up eigenvector along a unit vector n = (sin t cos p, sin t sin p,
  cos t) is ``(cos(t/2), e^{ip} sin(t/2))``; spin-down is
  ``(-e^{-ip} sin(t/2), cos(t/2))``.

For the singlet state the joint outcome distribution along axes a and b has
the closed form p(+,+) = p(-,-) = (1 - a.b)/4 and p(+,-) = p(-,+) =
(1 + a.b)/4, giving the correlation E(a, b) = -a.b (in units of hbar^2/4).
``joint_distribution`` does not use the closed form: it evaluates Born-rule
probabilities with explicit projectors so the closed form can be tested
against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, NormalizationError, ParameterError

_UNIT_TOL = 1e-12

#: Outcome pairs in basis order: (s_a, s_b) for cells 0..3.
OUTCOME_CELLS = ((+1, +1), (+1, -1), (-1, +1), (-1, -1))


@dataclass(frozen=True)
class Direction:
    """A unit vector in 3-space (measurement axis or momentum direction)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not abs(n - 1.0) <= _UNIT_TOL:
            raise NormalizationError(
                f"direction ({self.x}, {self.y}, {self.z}) has norm {n!r}, not 1 within 1e-12"
            )

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "Direction":
        """Scale an arbitrary nonzero vector onto the unit sphere."""
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise ParameterError(f"cannot normalize vector ({x}, {y}, {z})")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_polar(cls, theta: float, phi: float) -> "Direction":
        """Unit vector at polar angle theta and azimuth phi (radians)."""
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)


X_AXIS = Direction(1.0, 0.0, 0.0)
Y_AXIS = Direction(0.0, 1.0, 0.0)
Z_AXIS = Direction(0.0, 0.0, 1.0)


class TwoQubitSpinState:
    """Pure state of two spin-1/2 particles, four complex amplitudes.

    Amplitudes are stored in basis order ``(+,+), (+,-), (-,+), (-,-)`` along
    z.  The norm must be 1 within 1e-12.
    """

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        amp = np.asarray(amplitudes, dtype=np.complex128)
        if amp.shape != (4,):
            raise ParameterError(f"two-qubit state needs 4 amplitudes, got shape {amp.shape}")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise NormalizationError(f"state norm squared is {norm!r}, not 1 within 1e-12")
        self.amplitudes = amp

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def overlap(self, other: "TwoQubitSpinState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"TwoQubitSpinState({self.amplitudes.tolist()})"


@dataclass(frozen=True)
class JointDistribution:
    """Born probabilities for one axis pair, in basis cell order.

    ``probabilities[cell]`` is the chance of ``OUTCOME_CELLS[cell]``.
    """

    axis_a: Direction
    axis_b: Direction
    probabilities: tuple[float, float, float, float]

    def __post_init__(self):
        p = self.probabilities
        if len(p) != 4 or any(q < 0.0 for q in p):
            raise ParameterError(f"joint distribution needs 4 nonnegative entries, got {p}")
        if abs(sum(p) - 1.0) > _UNIT_TOL:
            raise NormalizationError(f"joint probabilities sum to {sum(p)!r}, not 1")

    def probability(self, s_a: int, s_b: int) -> float:
        return self.probabilities[OUTCOME_CELLS.index((s_a, s_b))]

    def correlation(self) -> float:
        """Expectation of the outcome product s_a * s_b."""
        p = self.probabilities
        return p[0] - p[1] - p[2] + p[3]


def make_singlet() -> TwoQubitSpinState:
    """The rotationally invariant singlet, (|+-> - |-+>)/sqrt(2)."""
    r = 1.0 / math.sqrt(2.0)
    return TwoQubitSpinState([0.0, r, -r, 0.0])


def spin_eigenvector(axis: Direction, sign: int) -> np.ndarray:
    """Single-qubit eigenvector of n.sigma with eigenvalue ``sign``."""
    if sign not in (+1, -1):
        raise ParameterError(f"spin eigenvalue must be +1 or -1, got {sign}")
    theta = math.acos(max(-1.0, min(1.0, axis.z)))
    phi = math.atan2(axis.y, axis.x)
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    if sign == +1:
        return np.array([c, s * complex(math.cos(phi), math.sin(phi))], dtype=np.complex128)
    return np.array([-s * complex(math.cos(phi), -math.sin(phi)), c], dtype=np.complex128)


def spin_projector(axis: Direction, sign: int) -> np.ndarray:
    """2x2 projector (I + sign * n.sigma) / 2."""
    if sign not in (+1, -1):
        raise ParameterError(f"spin eigenvalue must be +1 or -1, got {sign}")
    nx, ny, nz = axis.x, axis.y, axis.z
    n_sigma = np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=np.complex128)
    return 0.5 * (np.eye(2, dtype=np.complex128) + sign * n_sigma)


def joint_distribution(state: TwoQubitSpinState, a: Direction, b: Direction) -> JointDistribution:
    """Born-rule outcome table for measuring A along ``a`` and B along ``b``.

    Probabilities come from the projector expectation <psi| P_a x P_b |psi>,
    evaluated cell by cell; tiny negative round-off is clipped to zero.
    """
    if abs(state.norm_squared() - 1.0) > _UNIT_TOL:
        raise NormalizationError("state must be normalized before measuring")
    psi = state.amplitudes
    probs = []
    for s_a, s_b in OUTCOME_CELLS:
        proj = np.kron(spin_projector(a, s_a), spin_projector(b, s_b))
        p = float(np.real(np.vdot(psi, proj @ psi)))
        probs.append(max(0.0, p))
    return JointDistribution(a, b, tuple(probs))


def measure_pair(state: TwoQubitSpinState, a: Direction, b: Direction, rng) -> tuple[int, int]:
    """Sample one joint outcome ``(s_a, s_b)``.

    Consumes exactly one uniform draw from ``rng``: the unit interval is
    split into the four cells in basis order and the draw picks a cell.
    """
    dist = joint_distribution(state, a, b)
    u = rng.uniform()
    acc = 0.0
    for cell in range(3):
        acc += dist.probabilities[cell]
        if u < acc:
            return OUTCOME_CELLS[cell]
    return OUTCOME_CELLS[3]


def collapse_after_a(state: TwoQubitSpinState, a: Direction, outcome: int) -> np.ndarray:
    """B's conditional single-qubit state after A measured ``outcome`` along ``a``.

    Contracts A's index with the selected eigenvector and renormalizes.
    Raises ConditioningError if the outcome has zero probability.
    """
    chi = spin_eigenvector(a, outcome)
    m = state.amplitudes.reshape(2, 2)  # rows: A basis, columns: B basis
    b_amp = np.conj(chi) @ m
    p = float(np.real(np.vdot(b_amp, b_amp)))
    if p <= 1e-14:
        raise ConditioningError(
            f"outcome {outcome:+d} along ({a.x}, {a.y}, {a.z}) has zero probability"
        )
    return b_amp / math.sqrt(p)


def correlation_analytic(a: Direction, b: Direction) -> float:
    """Singlet correlation E(a, b) = -a.b, in units of hbar^2/4."""
    return -a.dot(b)


def chsh_analytic(a: Direction, a2: Direction, b: Direction, b2: Direction) -> float:
    """|E(a,b) - E(a,b2) + E(a2,b) + E(a2,b2)| for the singlet.

    Peaks at 2*sqrt(2) for the usual coplanar axes (a, a2 at 0 and 90
    degrees; b, b2 at 45 and 135 degrees).
    """
    return abs(
        correlation_analytic(a, b)
        - correlation_analytic(a, b2)
        + correlation_analytic(a2, b)
        + correlation_analytic(a2, b2)
    )
