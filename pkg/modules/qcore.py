"""q-shifted factorials and the shared series/product machinery.

Floating point routines return plain floats or an EvalResult carrying a
conservative absolute error; the exact routines work on Fraction inputs and
are used as oracles.
"""
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from utils.accuracy import UNIT_ROUNDOFF, ErrorTrackedSum, gamma, one_minus_qpow
from utils.errors import ConvergenceError, QDomainError
from utils.settings import NUMERICS

logger = logging.getLogger(__name__)


class EvalMethod(str, Enum):
    SERIES = 'series'
    PRODUCT = 'product'
    TAIL_SERIES = 'tail_series'
    CROSS_CHECKED = 'cross_checked'


@dataclass(frozen=True)
class QDomain:
    """Parameter bundle (q, z, n); per-function z ranges are checked by the callers"""

    q: float
    z: float
    n: int = 0

    def __post_init__(self):
        check_q(self.q)
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise QDomainError(f"n must be an integer, got {self.n!r}")
        if self.n < 0:
            raise QDomainError(f"n must be non-negative, got {self.n}")
        if not math.isfinite(self.z):
            raise QDomainError(f"z must be finite, got {self.z}")

    def require_z(self, unit_interval, allow_zero=False):
        """Check z against (0,1) for the e-family or (0,∞) for the E-family"""
        low_ok = self.z >= 0 if allow_zero else self.z > 0
        if not low_ok:
            raise QDomainError(f"z must be positive, got {self.z}")
        if unit_interval and self.z >= 1:
            raise QDomainError(f"z must lie in (0, 1) for the e-family, got {self.z}")
        return self

    def with_n(self, n):
        return QDomain(self.q, self.z, n)


@dataclass(frozen=True)
class EvalResult:
    value: float
    abs_error: float
    method: EvalMethod
    terms: int = 0

    def __post_init__(self):
        if not (self.abs_error >= 0 and math.isfinite(self.abs_error)):
            raise ValueError(f"abs_error must be finite and non-negative, got {self.abs_error}")

    @property
    def rel_error(self):
        return self.abs_error / abs(self.value) if self.value else math.inf


@dataclass(frozen=True)
class SeriesSum:
    value: float
    abs_error: float
    truncation: float
    terms: int


def check_q(q):
    if isinstance(q, Fraction):
        ok = 0 < q < 1
    else:
        ok = isinstance(q, (int, float)) and math.isfinite(q) and 0 < q < 1
    if not ok:
        raise QDomainError(f"q must lie strictly inside (0, 1), got {q!r}")


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise QDomainError(f"n must be a non-negative integer, got {n!r}")


def qpoch(a, q, n):
    """(a; q)_n = ∏_{k<n} (1 − a q^k); exact when a and q are Fractions"""
    check_q(q)
    _check_n(n)
    if isinstance(a, Fraction) and isinstance(q, Fraction):
        return qpoch_exact(a, q, n)
    result = 1.0
    for k in range(n):
        factor = 1.0 - a * q ** k
        if factor == 0.0:
            return 0.0
        result *= factor
    return result


def qpoch_exact(a, q, n):
    check_q(q)
    _check_n(n)
    a = Fraction(a)
    q = Fraction(q)
    result = Fraction(1)
    qk = Fraction(1)
    for _ in range(n):
        result *= 1 - a * qk
        qk *= q
    return result


def qpoch_multi(a_list, q, n):
    """(a_1, …, a_p; q)_n as the product of the single symbols"""
    a_list = list(a_list)
    if not a_list:
        raise QDomainError("qpoch_multi needs at least one base")
    if all(isinstance(a, Fraction) for a in a_list) and isinstance(q, Fraction):
        result = Fraction(1)
        for a in a_list:
            result *= qpoch_exact(a, q, n)
        return result
    result = 1.0
    for a in a_list:
        result *= qpoch(a, q, n)
    return result


class _QFactorialCache:
    """Prefix products (q;q)_0..(q;q)_m per q, keyed by the bit pattern of q"""

    def __init__(self, max_entries=4096):
        self.max_entries = max_entries
        self._prefixes = {}
        self._lock = threading.Lock()

    def get(self, q, n):
        key = q.hex()
        with self._lock:
            prefix = self._prefixes.get(key)
            if prefix is None:
                if len(self._prefixes) >= self.max_entries:
                    self._prefixes.pop(next(iter(self._prefixes)))
                prefix = [1.0]
                self._prefixes[key] = prefix
            while len(prefix) <= n:
                k = len(prefix)
                prefix.append(prefix[-1] * one_minus_qpow(q, k))
            return prefix[n]

    def clear(self):
        with self._lock:
            self._prefixes.clear()


_QFACT_CACHE = _QFactorialCache()


def qfact(q, n, use_cache=True):
    """(q; q)_n, relative error ≤ γ_{5n}"""
    check_q(q)
    _check_n(n)
    if isinstance(q, Fraction):
        return qpoch_exact(q, q, n)
    q = float(q)
    if use_cache:
        return _QFACT_CACHE.get(q, n)
    # same multiplication order as the cache so both paths agree bit for bit
    result = 1.0
    for k in range(1, n + 1):
        result *= one_minus_qpow(q, k)
    return result


def qfact_exact(q, n):
    return qpoch_exact(q, q, n)


def qfact_rel_error(n):
    return gamma(5 * n + 1)


def q_number(q, m):
    """(1 − q^m)/(1 − q) = 1 + q + … + q^{m−1}; exact for Fraction q"""
    check_q(q)
    if isinstance(q, Fraction):
        return (1 - q ** m) / (1 - q)
    return one_minus_qpow(q, m) / one_minus_qpow(q, 1)


def q_number_bound_holds(q, k):
    """Exact check of (1 − q^{k+1})/(1 − q) ≤ k + 1; returns (holds, equality)"""
    lhs = q_number(Fraction(q), k + 1)
    return lhs <= k + 1, lhs == k + 1


def rising_factorial(a, n):
    result = 1.0
    for j in range(n):
        result *= a + j
    return result


def q_rising_ratio(a, q, n):
    """(q^a; q)_n / (1 − q)^n, which tends to (a)_n as q → 1"""
    check_q(q)
    _check_n(n)
    result = 1.0
    one_minus_q = one_minus_qpow(q, 1)
    for k in range(n):
        # 1 − q^{a+k} = −expm1((a+k) log q)
        result *= -math.expm1((a + k) * math.log(q)) / one_minus_q
    return result


def qpoch_inf(a, q, tol=NUMERICS.default_tol):
    """(a; q)_∞ with a bound on truncation and rounding error.

    The product stops once |a| q^k ≤ 1/2 and the remaining factors can move
    the logarithm by at most ε = 2|a| q^k / (1 − q), with |P|·(e^ε − 1)
    below tol/2, or below tol·|P|/2 when |P| < 1.
    """
    check_q(q)
    if not tol > 0:
        raise QDomainError(f"tol must be positive, got {tol}")
    if a == 0:
        return EvalResult(1.0, 0.0, EvalMethod.PRODUCT)

    one_minus_q = one_minus_qpow(q, 1)
    product = 1.0
    rel_error = 0.0
    k = 0
    while True:
        tail_scale = abs(a) * q ** k
        if tail_scale <= 0.5:
            eps = 2.0 * tail_scale / one_minus_q
            residual = abs(product) * math.expm1(eps)
            if residual <= 0.5 * tol * min(1.0, abs(product)) or tail_scale == 0.0:
                break
        if k >= NUMERICS.max_terms:
            raise ConvergenceError(f"(a; q)_inf did not settle within {k} factors (a={a}, q={q})")
        x = a * q ** k
        factor = 1.0 - x
        if factor == 0.0:
            return EvalResult(0.0, 0.0, EvalMethod.PRODUCT, terms=k + 1)
        product *= factor
        # x carries 2u relative error, amplified by |x|/|1 − x| in the difference
        rel_error += 2.0 * UNIT_ROUNDOFF * abs(x) / abs(factor) + 2.0 * UNIT_ROUNDOFF
        k += 1

    abs_error = residual + abs(product) * rel_error
    logger.debug(f"qpoch_inf(a={a}, q={q}) used {k} factors, abs_error={abs_error:.3e}")
    return EvalResult(product, abs_error, EvalMethod.PRODUCT, terms=k)


def sum_positive_series(first_term, first_rel_error, ratio_at, start, tol, *,
                        relative=True, skip_leading=0, ratio_rel_error=10 * UNIT_ROUNDOFF,
                        max_terms=None):
    """Sum t_start + t_{start+1} + … of a positive series.

    ratio_at(k) returns t_{k+1}/t_k and must be non-increasing in k, so once
    it drops below 1 the omitted tail after t_k is at most t_k·r/(1 − r).
    The tail bound is compared against tol times the sum (relative) or
    tol·max(1, sum) (absolute). With skip_leading > 0 the reference sum
    excludes the first terms, which keeps a later up-shift accurate.
    """
    max_terms = max_terms or NUMERICS.max_terms
    acc = ErrorTrackedSum()
    reference = ErrorTrackedSum()
    term = first_term
    rel = first_rel_error
    k = start
    truncation = 0.0
    while True:
        acc.add(term, rel)
        if k - start >= skip_leading:
            reference.add(term, rel)
        if term == 0.0:
            break
        ratio = ratio_at(k)
        r = ratio * (1.0 + 2.0 * ratio_rel_error)
        if r < 1.0:
            bound = term * r / (1.0 - r)
            scale = reference.value if relative else max(1.0, acc.value)
            if reference.count and bound <= tol * scale:
                truncation = bound
                break
        if acc.count >= max_terms:
            raise ConvergenceError(f"series starting at index {start} exceeded {max_terms} terms")
        term *= ratio
        rel += ratio_rel_error
        k += 1

    return SeriesSum(acc.value, acc.rounding_bound() + truncation, truncation, acc.count)
