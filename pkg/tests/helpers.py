"""Random data generators and brute-force oracles shared by the tests."""

import warnings

import numpy as np

from cgfactorial import Dataset, GroupedSample, TiesWarning


def random_group(rng, n=None, integer_times=False, censor_rate=0.3, label=None):
    n = int(rng.integers(3, 25)) if n is None else n
    if integer_times:
        time = rng.integers(1, 8, n).astype(float)
    else:
        time = rng.exponential(1.0, n) + 1e-3
    status = (rng.random(n) > censor_rate).astype(int)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiesWarning)
        return GroupedSample.from_arrays(time, status, label)


def random_dataset(rng, d=None, **kw):
    d = int(rng.integers(2, 6)) if d is None else d
    return Dataset([random_group(rng, label=i, **kw) for i in range(d)])


def brute_force_w(x, y, tau):
    """(wins + ties / 2) / (n_x n_y) on min(., tau)-truncated values."""
    x = np.minimum(np.asarray(x, float), tau)[:, None]
    y = np.minimum(np.asarray(y, float), tau)[None, :]
    return float(((x > y).sum() + 0.5 * (x == y).sum()) / (x.size * y.size))


def km_by_hand(time, status):
    """Textbook product-limit estimate at each distinct event time."""
    time, status = np.asarray(time, float), np.asarray(status)
    out_t, out_s, s = [], [], 1.0
    for t in np.unique(time[status == 1]):
        at_risk = np.sum(time >= t)
        deaths = np.sum((time == t) & (status == 1))
        s *= 1 - deaths / at_risk
        out_t.append(t)
        out_s.append(s)
    return np.array(out_t), np.array(out_s)
