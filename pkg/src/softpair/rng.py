"""Counter-derived random streams shared by every sampling backend.

Reproducibility contract
------------------------
Event ``i`` of a run with seed ``s`` consumes uniforms from its own
xoshiro256** generator whose four state words are produced by a splitmix64
chain keyed on ``(s, i)``::

    sm   = (s + i * GOLDEN) mod 2**64        # GOLDEN = 0x9E3779B97F4A7C15
    wordj: sm += GOLDEN; wordj = mix64(sm)   # j = 0..3

Because the stream depends only on ``(s, i)``, any partition of a batch over
workers, or any choice of backend, replays the exact same bit sequence for
every event.  A uniform double is the top 53 bits of one 64-bit output::

    u = (next_u64() >> 11) * 2**-53          # u in [0, 1)

splitmix64 and xoshiro256** follow the public-domain reference algorithms
(Blackman and Vigna).  They are implemented by hand, here and again in the
compiled kernel, because the contract above requires stepping an identical
integer state machine in pure Python, in vectorized numpy, and in C; the
stdlib and numpy generators do not expose one cheaply in all three forms.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53

_U = np.uint64
_GOLDEN_U = _U(GOLDEN)


def mix64(z: int) -> int:
    """splitmix64 output function (a 64-bit bijection)."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def stream_state(seed: int, index: int) -> tuple[int, int, int, int]:
    """Four xoshiro256** state words for event ``index`` under ``seed``."""
    sm = (seed + index * GOLDEN) & MASK64
    words = []
    for _ in range(4):
        sm = (sm + GOLDEN) & MASK64
        words.append(mix64(sm))
    return tuple(words)


class Xoshiro256:
    """Scalar xoshiro256** stream with a draw counter.

    The counter exists so tests can pin down exactly how many uniforms an
    operation consumes; it has no effect on the generated sequence.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "draws")

    def __init__(self, state: tuple[int, int, int, int]):
        if len(state) != 4 or all(w == 0 for w in state):
            raise ValueError("xoshiro256** state must be four words, not all zero")
        self._s0, self._s1, self._s2, self._s3 = (w & MASK64 for w in state)
        self.draws = 0

    @classmethod
    def from_key(cls, seed: int, index: int = 0) -> "Xoshiro256":
        """The stream owned by event ``index`` of a run seeded with ``seed``."""
        return cls(stream_state(seed, index))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        self.draws += 1
        return result

    def uniform(self) -> float:
        """One double in [0, 1), from the top 53 bits of one output."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` consecutive uniforms as a float64 array."""
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = self.uniform()
        return out

    @property
    def state(self) -> tuple[int, int, int, int]:
        return (self._s0, self._s1, self._s2, self._s3)


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


def _rotl_arr(x: np.ndarray, k: int) -> np.ndarray:
    return (x << _U(k)) | (x >> _U(64 - k))


class XoshiroLanes:
    """A block of per-event streams stepped in lockstep (numpy, uint64).

    Lane ``j`` holds the stream of event ``start + j`` and reproduces, bit for
    bit, the sequence of ``Xoshiro256.from_key(seed, start + j)``.  ``step``
    advances a subset of lanes by one draw each, which is how the vectorized
    kernel keeps per-event draw order identical to the scalar path even when
    events need different numbers of draws.
    """

    def __init__(self, seed: int, start: int, n: int):
        idx = np.arange(start, start + n, dtype=np.uint64)
        sm = _U(seed & MASK64) + idx * _GOLDEN_U
        words = []
        for _ in range(4):
            sm = sm + _GOLDEN_U
            words.append(_mix64_arr(sm))
        self._s0, self._s1, self._s2, self._s3 = words

    def step(self, lanes: np.ndarray | None = None) -> np.ndarray:
        """One uniform from each selected lane (all lanes when None)."""
        if lanes is None:
            s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        else:
            s0 = self._s0[lanes]
            s1 = self._s1[lanes]
            s2 = self._s2[lanes]
            s3 = self._s3[lanes]
        result = _rotl_arr(s1 * _U(5), 7) * _U(9)
        t = s1 << _U(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = _rotl_arr(s3, 45)
        if lanes is None:
            self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        else:
            self._s0[lanes] = s0
            self._s1[lanes] = s1
            self._s2[lanes] = s2
            self._s3[lanes] = s3
        return (result >> _U(11)).astype(np.float64) * _INV_2_53
