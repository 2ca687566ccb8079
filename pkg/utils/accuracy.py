"""Error-tracked floating point accumulation.

Sums are carried as a Shewchuk expansion so the only rounding in the result is
the final conversion to float; the rounding already present in each term is
tracked separately as a first-order bound.
"""
import math

from shewchuk import Expansion

UNIT_ROUNDOFF = 2.0 ** -53


def gamma(k):
    """Classic γ_k = k·u / (1 − k·u) bound on k accumulated roundings"""
    ku = k * UNIT_ROUNDOFF
    if ku >= 1.0:
        return math.inf
    return ku / (1.0 - ku)


def one_minus_qpow(q, m):
    """1 − q^m without cancellation for q close to 1; relative error ≤ 4u"""
    if m == 0:
        return 0.0
    return -math.expm1(m * math.log(q))


class ErrorTrackedSum:
    """Running sum whose terms carry their own relative error bounds"""

    def __init__(self):
        self._acc = Expansion()
        self.term_error = 0.0
        self.count = 0

    def add(self, value, rel_error=0.0):
        """Add a term known to within |value|·rel_error"""
        self._acc = self._acc + value
        self.term_error += abs(value) * rel_error
        self.count += 1

    @property
    def value(self):
        return float(self._acc)

    def rounding_bound(self):
        """Bound on |value − exact sum of the exact terms|, excluding truncation"""
        return 2.0 * UNIT_ROUNDOFF * abs(self.value) + self.term_error
