"""Independent reference implementations used as test oracles."""

import math

import numpy as np


def radial(name, a, r):
    """Kernel profile written out directly from the textbook formulas."""
    if name == "gaussian":
        return math.exp(-r * r) / math.sqrt(2 * math.pi)
    if name == "epanechnikov":
        return 0.75 * (1 - r * r) if r <= 1 else 0.0
    if r == 0:
        return math.inf
    if name == "singular-indicator":
        return r ** (-a) if r <= 1 else 0.0
    if name == "singular-truncpoly":
        return r ** (-a) * max(1 - r, 0.0) ** 2
    if name == "singular-cossq":
        return r ** (-a) * math.cos(math.pi * r / 2) ** 2 if r <= 1 else 0.0
    raise ValueError(name)


def brute_force_nw(points, responses, name, a, h, x):
    """Three-case estimator by plain loops, no index, no normalization tricks."""
    x = np.asarray(x, dtype=float)
    for i, p in enumerate(points):
        if math.sqrt(sum((float(u) - float(v)) ** 2 for u, v in zip(x, p))) == 0.0:
            return float(responses[i])
    terms, weights = [], []
    for p, y in zip(points, responses):
        r = math.sqrt(sum((float(u) - float(v)) ** 2 for u, v in zip(x, p))) / h
        w = radial(name, a, r)
        terms.append(w * float(y))
        weights.append(w)
    # fsum keeps the oracle accurate when responses of mixed sign cancel
    den = math.fsum(weights)
    return 0.0 if den == 0 else math.fsum(terms) / den


def linear_scan(points, x, radius):
    d = np.sqrt(np.sum((np.asarray(points) - np.asarray(x)) ** 2, axis=1))
    return np.flatnonzero(d <= radius)


def normal_equations(ns, ys):
    """Slope/intercept of log y on log n by solving X^T X b = X^T y."""
    X = np.column_stack([np.ones(len(ns)), np.log(ns)])
    b = np.linalg.solve(X.T @ X, X.T @ np.log(ys))
    return float(b[1]), float(b[0])
