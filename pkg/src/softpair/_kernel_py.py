"""Vectorized numpy batch kernel.

Replays the per-event draw contract documented in ``events`` with lockstep
xoshiro256** lanes: each masked ``step`` hands one uniform to a subset of
events, so every event consumes draws in exactly the scalar order however the
lanes interleave.  All data-dependent thresholds (axis dot products, count
CDF, channel probability) arrive precomputed so decisions are bitwise
identical to the other backends; only transcendental results may differ from
C libm by an ulp.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GenerationError
from .rng import XoshiroLanes

TWO_PI = 2.0 * math.pi


def _cells(u: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Joint-outcome cell (0..3) of the singlet law for each lane."""
    p_same = np.maximum(0.25 * (1.0 - d), 0.0)
    p_diff = 0.25 * (1.0 + d)
    c0 = p_same
    c1 = c0 + p_diff
    c2 = c1 + p_diff
    return (
        (u >= c0).astype(np.int64) + (u >= c1).astype(np.int64) + (u >= c2).astype(np.int64)
    )


def _units(cos_t: np.ndarray, phi: np.ndarray):
    sin_t = np.sqrt(np.maximum(1.0 - cos_t * cos_t, 0.0))
    return sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t


def run_kernel(seed, start, n, n_a, n_b, dots, count_cdf, p_par, lam, e_min,
               log_ratio, smear_sigma, max_retries):
    lanes = XoshiroLanes(seed, start, n)

    ia = np.minimum((lanes.step() * n_a).astype(np.int64), n_a - 1).astype(np.int32)
    ib = np.minimum((lanes.step() * n_b).astype(np.int64), n_b - 1).astype(np.int32)
    k_raw = np.searchsorted(count_cdf, lanes.step(), side="right").astype(np.int64)
    dvals = dots[ia, ib]

    k_out = np.zeros(n, dtype=np.int16)
    channel = np.zeros(n, dtype=np.int8)
    s_a = np.zeros(n, dtype=np.int8)
    s_b = np.zeros(n, dtype=np.int8)
    dir_a = np.zeros((n, 3), dtype=np.float64)
    dir_b = np.zeros((n, 3), dtype=np.float64)
    jz_f = np.zeros(n, dtype=np.int8)
    jz_ph = np.zeros(n, dtype=np.int16)
    pt = np.zeros((n, 2), dtype=np.float64)

    bidx = np.flatnonzero(k_raw == 0)
    if bidx.size:
        cell = _cells(lanes.step(bidx), dvals[bidx])
        s_a[bidx] = np.where(cell <= 1, 1, -1)
        s_b[bidx] = np.where((cell == 0) | (cell == 2), 1, -1)
        cos_a = 2.0 * lanes.step(bidx) - 1.0
        phi_a = TWO_PI * lanes.step(bidx)
        ax, ay, az = _units(cos_a, phi_a)
        dir_a[bidx, 0] = ax
        dir_a[bidx, 1] = ay
        dir_a[bidx, 2] = az
        dir_b[bidx] = -dir_a[bidx]

    ridx = np.flatnonzero(k_raw != 0)
    if ridx.size:
        m = ridx.size
        par = lanes.step(ridx) < p_par
        u_out = lanes.step(ridx)
        s = np.where(u_out < 0.5, 1, -1).astype(np.int64)
        cell = _cells(u_out, dvals[ridx])
        s_a[ridx] = np.where(par, s, np.where(cell <= 1, 1, -1))
        s_b[ridx] = np.where(par, s, np.where((cell == 0) | (cell == 2), 1, -1))
        jz_f[ridx] = np.where(par, 2 * s, 0)
        channel[ridx] = np.where(par, 2, 1)

        # parity adjustment of the multiplicity (no draws)
        k0 = k_raw[ridx]
        even = (k0 % 2) == 0
        k = np.where(par & even, k0 - 1, k0)
        anti_odd = (~par) & (~even)
        fits = (k0 + 1) * e_min <= lam
        k = np.where(anti_odd & fits, k0 + 1, k)
        dropping = anti_odd & (~fits)
        k = np.where(dropping & (k0 - 1 >= 2), k0 - 1, k)
        err = dropping & (k0 - 1 < 2)
        if err.any():
            first = int(start + ridx[np.flatnonzero(err)[0]])
            raise GenerationError(
                "antiparallel radiative event needs an even photon count >= 2 "
                f"but the budget {lam!r} holds at most one photon of energy >= {e_min!r}; "
                "lower e_min below lam / 2",
                first,
            )
        if np.any(k * e_min > lam):
            bad = np.flatnonzero(k * e_min > lam)[0]
            raise GenerationError(
                f"{int(k[bad])} photons of energy >= {e_min!r} cannot fit budget {lam!r}",
                int(start + ridx[bad]),
            )
        k_out[ridx] = k

        # photon energies: group rejection, k draws per attempt per active lane
        kmax_here = int(k.max())
        e_buf = np.zeros((m, kmax_here), dtype=np.float64)
        esum = np.zeros(m, dtype=np.float64)
        active = np.arange(m)
        for _ in range(max_retries):
            if active.size == 0:
                break
            esum[active] = 0.0
            for j in range(int(k[active].max())):
                sub = active[k[active] > j]
                e = e_min * np.exp(lanes.step(ridx[sub]) * log_ratio)
                e_buf[sub, j] = e
                esum[sub] += e
            active = active[esum[active] > lam]
        if active.size:
            raise GenerationError(
                f"no group of {int(k[active[0]])} photon energies fit budget {lam!r} "
                f"in {max_retries} attempts",
                int(start + ridx[active[0]]),
            )

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(k_out, dtype=np.int64, out=offsets[1:])
    total_ph = int(offsets[-1])
    ph_e = np.zeros(total_ph, dtype=np.float64)
    ph_hel = np.zeros(total_ph, dtype=np.int8)
    ph_dir = np.zeros((total_ph, 3), dtype=np.float64)

    if ridx.size:
        # photon directions and the transverse-momentum residual
        for j in range(kmax_here):
            sub = np.flatnonzero(k > j)
            rows = offsets[ridx[sub]] + j
            cos_j = 2.0 * lanes.step(ridx[sub]) - 1.0
            phi_j = TWO_PI * lanes.step(ridx[sub])
            px, py, pz = _units(cos_j, phi_j)
            ph_dir[rows, 0] = px
            ph_dir[rows, 1] = py
            ph_dir[rows, 2] = pz
            e_j = e_buf[sub, j]
            ph_e[rows] = e_j
            pt[ridx[sub], 0] += e_j * px
            pt[ridx[sub], 1] += e_j * py

        # helicity ranking keys, one per photon
        key_buf = np.full((m, kmax_here), -1.0, dtype=np.float64)
        for j in range(kmax_here):
            sub = np.flatnonzero(k > j)
            key_buf[sub, j] = lanes.step(ridx[sub])

        # required helicity sum per lane, met by giving +1 to the largest keys
        target = np.where(par, -s, 0)
        n_plus = (k + target) // 2
        hel_buf = np.zeros((m, kmax_here), dtype=np.int8)
        for kv in np.unique(k):
            rows = np.flatnonzero(k == kv)
            keys = key_buf[rows, :kv]
            order = np.argsort(-keys, axis=1, kind="stable")
            ranks = np.empty_like(order)
            np.put_along_axis(
                ranks, order, np.broadcast_to(np.arange(kv), (rows.size, kv)), axis=1
            )
            hel_buf[rows, :kv] = np.where(ranks < n_plus[rows][:, None], 1, -1)
        for j in range(kmax_here):
            sub = np.flatnonzero(k > j)
            ph_hel[offsets[ridx[sub]] + j] = hel_buf[sub, j]
        jz_ph[ridx] = target

        # flight directions: A isotropic, B back to back with a recoil tilt
        cos_a = 2.0 * lanes.step(ridx) - 1.0
        phi_a = TWO_PI * lanes.step(ridx)
        ax, ay, az = _units(cos_a, phi_a)
        dir_a[ridx, 0] = ax
        dir_a[ridx, 1] = ay
        dir_a[ridx, 2] = az
        u1 = lanes.step(ridx)
        u2 = lanes.step(ridx)
        z_n = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(TWO_PI * u2)
        phi_s = TWO_PI * lanes.step(ridx)
        delta = smear_sigma * (esum / lam) * np.abs(z_n)

        vx, vy, vz = -ax, -ay, -az
        use_z = np.abs(vz) <= 0.99
        e1x = np.where(use_z, -vy, 0.0)
        e1y = np.where(use_z, vx, -vz)
        e1z = np.where(use_z, 0.0, vy)
        n1 = np.sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
        e1x = e1x / n1
        e1y = e1y / n1
        e1z = e1z / n1
        e2x = vy * e1z - vz * e1y
        e2y = vz * e1x - vx * e1z
        e2z = vx * e1y - vy * e1x
        cd = np.cos(delta)
        sd = np.sin(delta)
        cp = np.cos(phi_s)
        sp = np.sin(phi_s)
        dir_b[ridx, 0] = cd * vx + sd * (cp * e1x + sp * e2x)
        dir_b[ridx, 1] = cd * vy + sd * (cp * e1y + sp * e2y)
        dir_b[ridx, 2] = cd * vz + sd * (cp * e1z + sp * e2z)

    return (ia, ib, k_out, channel, s_a, s_b, dir_a, dir_b, jz_f, jz_ph, pt,
            offsets, ph_e, ph_hel, ph_dir)
