"""Exact lattice-layer counts, corner volumes and the volume stability constant.

Everything in this module is integer / rational arithmetic; no floats enter
any computation, so results can be asserted with ``==``.
"""

from __future__ import annotations

import math
from fractions import Fraction


def layer_count(d, t):
    """Number of d-tuples of non-negative integers with coordinate sum t.

    Equals binom(t + d - 1, d - 1).
    """
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    if t < 0:
        raise ValueError("layer index must be non-negative")
    return math.comb(t + d - 1, d - 1)


def enumerate_layer(d, t):
    """All d-tuples of non-negative integers summing to t, lexicographic order.

    Returns a list of tuples; its length always equals ``layer_count(d, t)``.
    """
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    if t < 0:
        raise ValueError("layer index must be non-negative")
    if d == 1:
        return [(t,)]
    out = []
    stack = [((), t)]
    # iterative depth-first walk keeps lexicographic order without recursion
    # limits for large d
    while stack:
        prefix, rest = stack.pop()
        if len(prefix) == d - 1:
            out.append(prefix + (rest,))
            continue
        # push in reverse so that smaller leading coordinates pop first
        for first in range(rest, -1, -1):
            stack.append((prefix + (first,), rest - first))
    return out


def corner_volume(d, t):
    """Volume of {x in [0,1]^d : sum(x) <= t} as an exact Fraction.

    Inclusion-exclusion over the faces of the cube:

        V(t) = (1/d!) * sum_{j=0}^{floor(t)} (-1)^j binom(d, j) (t - j)^d

    for 0 <= t <= d; V(t) = 0 for t <= 0 and 1 for t >= d.
    """
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    t = Fraction(t)
    if t < 0 or t > d:
        raise ValueError("t must lie in [0, d]")
    if t == 0:
        return Fraction(0)
    if t == d:
        return Fraction(1)
    total = Fraction(0)
    for j in range(math.floor(t) + 1):
        term = Fraction(math.comb(d, j)) * (t - j) ** d
        total += -term if j % 2 else term
    return total / math.factorial(d)


def threshold_k(d):
    """Smallest summand count for which the stability constant is defined."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return max(2, (d - 1) * (d - 2))


def stability_constant(d, k):
    """Stability constant C(d, k) = k^d / (1 - k^d / ((k-d+2)(k+1)^{d-1})).

    Defined (positive and finite) for k >= max(2, (d-1)(d-2)).  Exact
    rational output; raises ValueError below the threshold.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if k < threshold_k(d):
        raise ValueError(
            "stability constant undefined below k = max(2, (d-1)(d-2)) = %d"
            % threshold_k(d)
        )
    ratio = Fraction(k**d, (k - d + 2) * (k + 1) ** (d - 1))
    denom = 1 - ratio
    if denom <= 0:
        # cannot happen at or above the threshold; guard anyway
        raise ValueError("stability constant denominator non-positive")
    return Fraction(k**d) / denom


def simplex_spider_volume(d, k):
    """Exact volume of (1/k) S[k] for the axis-segment spider S in R^d.

    S is the union of the d unit coordinate segments joined at the origin.
    The k-fold average has volume binom(k, d) / k^d (zero when k < d).
    """
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    if k < 1:
        raise ValueError("summand count must be a positive integer")
    return Fraction(math.comb(k, d), k**d)
