"""Vectorised numpy implementation of the trial loop.

Used when the compiled ``tmqi._kernel`` extension is unavailable or when
``TMQI_PURE_PYTHON=1`` is set. Draw indices and float operations mirror the
compiled kernel exactly.
"""

from __future__ import annotations

import numpy as np

from .rng import trial_keys_np, uniform_np

BACKEND = "numpy"


def _scatter(target, s, a, b):
    np.add.at(target, (s, a - 1, b - 1), 1)


def simulate_chunk(
    key, start, stop, n_trials, m, schedule,
    chi, eta_w, gamma, eta_r, lam, exp_neg_lam, stokes_p1, cond_p1,
):
    tables = np.zeros((4, 2, 2), dtype=np.int64)
    noise = np.zeros((4, 2, 2), dtype=np.int64)
    stokes_p1 = np.asarray(stokes_p1, dtype=np.float64)
    cond_p1 = np.asarray(cond_p1, dtype=np.float64)

    t = np.arange(start, stop, dtype=np.int64)
    if schedule == 0:
        s = t % 4
    else:
        s = (t * 4) // n_trials
    setting_n = np.bincount(s, minlength=4).astype(np.int64)
    tkeys = trial_keys_np(key, t)

    bins = np.arange(m, dtype=np.uint64)
    tk = tkeys[:, None]
    pair = uniform_np(tk, 3 * bins) < chi
    # later draws only matter where a pair exists; computing them everywhere
    # is cheaper than masking and does not change any outcome
    outcome = np.where(uniform_np(tk, 3 * bins + 1) < stokes_p1[s][:, None], 1, 2)
    detected = pair & (uniform_np(tk, 3 * bins + 2) < eta_w)
    per_bin = detected.sum(axis=0).astype(np.int64)

    has_herald = detected.any(axis=1)
    first = np.argmax(detected, axis=1)
    idx = np.nonzero(has_herald)[0]
    n_heralds = int(idx.size)
    if n_heralds == 0:
        return tables, noise, per_bin, setting_n, 0, 0

    tkh = tkeys[idx]
    sh = s[idx]
    a = outcome[idx, first[idx]]
    base = 3 * m

    emit = uniform_np(tkh, base) < gamma
    b = np.where(uniform_np(tkh, base + 1) < cond_p1[sh, a - 1], 1, 2)
    click = emit & (uniform_np(tkh, base + 2) < eta_r)
    _scatter(tables, sh[click], a[click], b[click])
    as_clicks = int(click.sum())

    u = uniform_np(tkh, base + 3)
    k = np.zeros(idx.size, dtype=np.int64)
    p = np.full(idx.size, exp_neg_lam)
    cdf = p.copy()
    active = u >= cdf
    j = 0
    while active.any():
        j += 1
        p[active] = p[active] * lam / j
        cdf[active] += p[active]
        k[active] = j
        active &= (u >= cdf) & (p != 0.0)

    for jj in range(int(k.max(initial=0))):
        live = k > jj
        det = live & (uniform_np(tkh, base + 4 + 2 * jj) < eta_r)
        route = np.where(uniform_np(tkh, base + 5 + 2 * jj) < 0.5, 1, 2)
        _scatter(tables, sh[det], a[det], route[det])
        _scatter(noise, sh[det], a[det], route[det])
        as_clicks += int(det.sum())

    return tables, noise, per_bin, setting_n, n_heralds, as_clicks
