# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial loop for :mod:`tmqi.montecarlo`.

Must stay draw-for-draw identical to ``tmqi._kernel_py``; the test suite
compares both backends bit for bit.
"""

import numpy as np

from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t DRAW_STEP = 0xD1B54A32D192ED03ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0

BACKEND = "cython"


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double unif(uint64_t tkey, uint64_t draw) noexcept nogil:
    return <double>(mix64(tkey + (draw + 1) * DRAW_STEP) >> 11) * INV_2_53


def simulate_chunk(
    uint64_t key,
    int64_t start,
    int64_t stop,
    int64_t n_trials,
    int m,
    int schedule,
    double chi,
    double eta_w,
    double gamma,
    double eta_r,
    double lam,
    double exp_neg_lam,
    double[::1] stokes_p1,
    double[:, ::1] cond_p1,
):
    """Run trials ``start <= t < stop`` and return their integer tallies."""
    tables_a = np.zeros((4, 2, 2), dtype=np.int64)
    noise_a = np.zeros((4, 2, 2), dtype=np.int64)
    per_bin_a = np.zeros(m, dtype=np.int64)
    setting_a = np.zeros(4, dtype=np.int64)
    cdef int64_t[:, :, ::1] tables = tables_a
    cdef int64_t[:, :, ::1] noise = noise_a
    cdef int64_t[::1] per_bin = per_bin_a
    cdef int64_t[::1] setting_n = setting_a
    cdef int64_t n_heralds = 0
    cdef int64_t as_clicks = 0

    cdef int64_t t
    cdef int i, s, a, b, herald_det, k, j
    cdef int herald_bin
    cdef uint64_t tkey, base
    cdef double u, p, cdf

    with nogil:
        for t in range(start, stop):
            if schedule == 0:
                s = <int>(t % 4)
            else:
                s = <int>((t * 4) // n_trials)
            setting_n[s] += 1
            tkey = mix64(key ^ (<uint64_t>t * GOLDEN))

            herald_bin = -1
            herald_det = 0
            for i in range(m):
                if unif(tkey, 3 * i) < chi:
                    a = 1 if unif(tkey, 3 * i + 1) < stokes_p1[s] else 2
                    if unif(tkey, 3 * i + 2) < eta_w:
                        per_bin[i] += 1
                        if herald_bin < 0:
                            herald_bin = i
                            herald_det = a
            if herald_bin < 0:
                continue
            n_heralds += 1
            base = 3 * m

            if unif(tkey, base) < gamma:
                b = 1 if unif(tkey, base + 1) < cond_p1[s, herald_det - 1] else 2
                if unif(tkey, base + 2) < eta_r:
                    tables[s, herald_det - 1, b - 1] += 1
                    as_clicks += 1

            # Poisson noise photon number by inverse CDF
            u = unif(tkey, base + 3)
            k = 0
            p = exp_neg_lam
            cdf = p
            while u >= cdf:
                k += 1
                p = p * lam / k
                cdf += p
                if p == 0.0:
                    break
            for j in range(k):
                if unif(tkey, base + 4 + 2 * j) < eta_r:
                    b = 1 if unif(tkey, base + 5 + 2 * j) < 0.5 else 2
                    tables[s, herald_det - 1, b - 1] += 1
                    noise[s, herald_det - 1, b - 1] += 1
                    as_clicks += 1

    return tables_a, noise_a, per_bin_a, setting_a, int(n_heralds), int(as_clicks)
