"""Two-qubit spin algebra: states, Born probabilities, sampling, collapse.

Oracles are closed forms: the zero-total-spin state gives joint probabilities
(1 -+ a.b)/4, correlation E(a, b) = -a.b, and a four-setting combination that
peaks at 2*sqrt(2) for coplanar axes at 0/90/45/135 degrees.
"""

import math

import numpy as np
import pytest

from softpair.errors import ConditioningError, NormalizationError, ParameterError
from softpair.quantum import (
    OUTCOME_CELLS,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    Direction,
    JointDistribution,
    TwoQubitSpinState,
    chsh_analytic,
    collapse_after_a,
    correlation_analytic,
    joint_distribution,
    make_singlet,
    measure_pair,
    spin_eigenvector,
    spin_projector,
)
from softpair.rng import Xoshiro256

SQRT2 = math.sqrt(2.0)
PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def random_directions(n, seed=0):
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(n, 3))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return [Direction(*v) for v in vecs]


def n_dot_sigma(axis):
    return axis.x * PAULI["x"] + axis.y * PAULI["y"] + axis.z * PAULI["z"]


# ------------------------------------------------------------------ Direction

def test_direction_requires_unit_norm():
    Direction(0.0, 0.0, 1.0)
    Direction(0.6, 0.8, 0.0)
    with pytest.raises(ParameterError):
        Direction(0.0, 0.0, 0.9)
    with pytest.raises(ParameterError):
        Direction(1.0, 1.0, 1.0)


def test_direction_normalized_constructor():
    d = Direction.normalized(3.0, 4.0, 0.0)
    assert (d.x, d.y, d.z) == (0.6, 0.8, 0.0)
    with pytest.raises(ParameterError):
        Direction.normalized(0.0, 0.0, 0.0)


def test_direction_from_polar():
    d = Direction.from_polar(math.pi / 2.0, 0.0)
    assert abs(d.x - 1.0) < 1e-15 and abs(d.y) < 1e-15 and abs(d.z) < 1e-15
    theta, phi = 1.1, 2.3
    d = Direction.from_polar(theta, phi)
    assert d.x == pytest.approx(math.sin(theta) * math.cos(phi), abs=1e-15)
    assert d.y == pytest.approx(math.sin(theta) * math.sin(phi), abs=1e-15)
    assert d.z == pytest.approx(math.cos(theta), abs=1e-15)


def test_direction_dot_and_negation():
    a = Direction.from_polar(0.7, 0.3)
    b = Direction.from_polar(1.9, -1.1)
    arr_dot = float(a.as_array() @ b.as_array())
    assert a.dot(b) == pytest.approx(arr_dot, abs=1e-15)
    assert (-a).dot(a) == pytest.approx(-1.0, abs=1e-15)
    assert (-Z_AXIS).z == -1.0


# ------------------------------------------------------------------- states

def test_singlet_amplitudes():
    s = make_singlet()
    r = 1.0 / SQRT2
    assert np.allclose(s.amplitudes, [0.0, r, -r, 0.0])
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-15)


def test_state_norm_enforced():
    with pytest.raises(NormalizationError):
        TwoQubitSpinState([1.0, 1.0, 0.0, 0.0])


def test_state_overlap():
    s = make_singlet()
    assert s.overlap(s) == pytest.approx(1.0)
    triplet0 = TwoQubitSpinState([0.0, 1 / SQRT2, 1 / SQRT2, 0.0])
    assert abs(s.overlap(triplet0)) < 1e-15


# ---------------------------------------------------------------- eigensystem

def test_spin_eigenvectors_along_z():
    up = spin_eigenvector(Z_AXIS, +1)
    dn = spin_eigenvector(Z_AXIS, -1)
    assert np.allclose(up, [1.0, 0.0])
    assert np.allclose(dn, [0.0, 1.0])


@pytest.mark.parametrize("axis", random_directions(8, seed=3))
@pytest.mark.parametrize("sign", [+1, -1])
def test_spin_eigenvector_equation(axis, sign):
    v = spin_eigenvector(axis, sign)
    assert np.allclose(n_dot_sigma(axis) @ v, sign * v, atol=1e-12)
    assert np.vdot(v, v).real == pytest.approx(1.0, abs=1e-12)


def test_spin_eigenvectors_orthogonal():
    for axis in random_directions(6, seed=4):
        plus = spin_eigenvector(axis, +1)
        minus = spin_eigenvector(axis, -1)
        assert abs(np.vdot(plus, minus)) < 1e-12


def test_spin_eigenvector_sign_validation():
    with pytest.raises(ParameterError):
        spin_eigenvector(Z_AXIS, 0)


def test_spin_projector_properties():
    for axis in random_directions(5, seed=5):
        p_plus = spin_projector(axis, +1)
        p_minus = spin_projector(axis, -1)
        assert np.allclose(p_plus @ p_plus, p_plus, atol=1e-12)
        assert np.allclose(p_plus + p_minus, np.eye(2), atol=1e-12)
        assert np.trace(p_plus).real == pytest.approx(1.0, abs=1e-12)
        expected = 0.5 * (np.eye(2) + n_dot_sigma(axis))
        assert np.allclose(p_plus, expected, atol=1e-12)


# ------------------------------------------------------------ joint outcomes

def test_joint_distribution_equal_axes():
    dist = joint_distribution(make_singlet(), Z_AXIS, Z_AXIS)
    assert dist.probabilities == pytest.approx((0.0, 0.5, 0.5, 0.0), abs=1e-14)
    assert dist.correlation() == pytest.approx(-1.0, abs=1e-14)


def test_joint_distribution_orthogonal_axes():
    dist = joint_distribution(make_singlet(), Z_AXIS, X_AXIS)
    assert dist.probabilities == pytest.approx((0.25, 0.25, 0.25, 0.25), abs=1e-14)
    assert dist.correlation() == pytest.approx(0.0, abs=1e-14)


def test_joint_distribution_rotationally_invariant():
    """Same-sign cells carry (1 - a.b)/4 each for any axis pair."""
    singlet = make_singlet()
    axes = random_directions(10, seed=6)
    for a, b in zip(axes[:5], axes[5:]):
        dist = joint_distribution(singlet, a, b)
        p_same = (1.0 - a.dot(b)) / 4.0
        p_diff = (1.0 + a.dot(b)) / 4.0
        assert dist.probability(+1, +1) == pytest.approx(p_same, abs=1e-10)
        assert dist.probability(-1, -1) == pytest.approx(p_same, abs=1e-10)
        assert dist.probability(+1, -1) == pytest.approx(p_diff, abs=1e-10)
        assert dist.probability(-1, +1) == pytest.approx(p_diff, abs=1e-10)
        assert dist.correlation() == pytest.approx(-a.dot(b), abs=1e-10)


def test_joint_distribution_validation():
    with pytest.raises(ParameterError):
        JointDistribution(Z_AXIS, Z_AXIS, (-0.1, 0.6, 0.5, 0.0))
    with pytest.raises(NormalizationError):
        JointDistribution(Z_AXIS, Z_AXIS, (0.1, 0.1, 0.1, 0.1))


def test_measure_pair_consumes_one_draw():
    rng = Xoshiro256.from_key(0, 0)
    measure_pair(make_singlet(), Z_AXIS, X_AXIS, rng)
    assert rng.draws == 1


def test_measure_pair_equal_axes_always_opposite():
    singlet = make_singlet()
    rng = Xoshiro256.from_key(10, 0)
    for _ in range(500):
        s_a, s_b = measure_pair(singlet, Z_AXIS, Z_AXIS, rng)
        assert s_a == -s_b
        assert (s_a, s_b) in OUTCOME_CELLS


def test_measure_pair_frequencies_match_born_rule():
    singlet = make_singlet()
    a = Direction.from_polar(0.9, 0.4)
    b = Direction.from_polar(2.1, -0.8)
    dist = joint_distribution(singlet, a, b)
    rng = Xoshiro256.from_key(77, 0)
    n = 20000
    counts = {cell: 0 for cell in OUTCOME_CELLS}
    for _ in range(n):
        counts[measure_pair(singlet, a, b, rng)] += 1
    for cell in OUTCOME_CELLS:
        p = dist.probability(*cell)
        sigma = math.sqrt(p * (1.0 - p) / n)
        assert abs(counts[cell] / n - p) <= 4.0 * sigma + 1e-12


# -------------------------------------------------------------------- collapse

def test_collapse_equal_axis():
    """A +1 result along z on the anticorrelated pair leaves B pointing down."""
    b_state = collapse_after_a(make_singlet(), Z_AXIS, +1)
    assert np.allclose(b_state, [0.0, 1.0], atol=1e-14)
    # the -1 branch lands on -|up>; the global phase follows from the fixed
    # eigenvector convention and carries no physics
    b_state = collapse_after_a(make_singlet(), Z_AXIS, -1)
    assert np.allclose(b_state, [-1.0, 0.0], atol=1e-14)


def test_collapse_x_axis():
    b_state = collapse_after_a(make_singlet(), X_AXIS, +1)
    r = 1.0 / SQRT2
    assert np.allclose(b_state, [-r, r], atol=1e-12)
    # and that is exactly the -1 eigenvector along x
    minus_x = spin_eigenvector(X_AXIS, -1)
    overlap = abs(np.vdot(minus_x, b_state))
    assert overlap == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("axis", random_directions(6, seed=9))
def test_collapse_any_axis_gives_opposite_eigenvector(axis):
    for outcome in (+1, -1):
        b_state = collapse_after_a(make_singlet(), axis, outcome)
        opposite = spin_eigenvector(axis, -outcome)
        assert abs(np.vdot(opposite, b_state)) == pytest.approx(1.0, abs=1e-10)


def test_collapse_zero_probability_outcome():
    both_up = TwoQubitSpinState([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ConditioningError):
        collapse_after_a(both_up, Z_AXIS, -1)


# ------------------------------------------------------------------ analytics

def test_correlation_analytic():
    assert correlation_analytic(Z_AXIS, Z_AXIS) == -1.0
    assert correlation_analytic(Z_AXIS, X_AXIS) == 0.0
    a = Direction.from_polar(0.5, 1.0)
    b = Direction.from_polar(1.5, -0.5)
    assert correlation_analytic(a, b) == pytest.approx(-a.dot(b), abs=1e-15)


def test_chsh_peak_value():
    a = Direction.from_polar(0.0, 0.0)
    a2 = Direction.from_polar(math.pi / 2.0, 0.0)
    b = Direction.from_polar(math.pi / 4.0, 0.0)
    b2 = Direction.from_polar(3.0 * math.pi / 4.0, 0.0)
    assert chsh_analytic(a, a2, b, b2) == pytest.approx(2.0 * SQRT2, abs=1e-12)


def test_chsh_never_exceeds_quantum_bound():
    """Scan coplanar four-angle grids; the combination stays within 2*sqrt(2)."""
    angles = np.linspace(0.0, 2.0 * math.pi, 13)
    bound = 2.0 * SQRT2 + 1e-9
    for ta in angles[:6]:
        for ta2 in angles[6:]:
            for tb in angles[::3]:
                for tb2 in angles[1::3]:
                    s = chsh_analytic(
                        Direction.from_polar(ta, 0.0),
                        Direction.from_polar(ta2, 0.0),
                        Direction.from_polar(tb, 0.0),
                        Direction.from_polar(tb2, 0.0),
                    )
                    assert s <= bound
