"""Extended-precision oracles shared by the test modules."""
import mpmath
import pytest

from utils.settings import NUMERICS


def _mp_qfact(q, n):
    result = mpmath.mpf(1)
    for k in range(1, n + 1):
        result *= 1 - q ** k
    return result


def oracle_term(kind, q, z, k):
    """k-th series term of e (kind 'e'/'I') or E (kind 'E') at working precision"""
    q = mpmath.mpf(q)
    z = mpmath.mpf(z)
    term = z ** k / _mp_qfact(q, k)
    if kind == 'E':
        term *= q ** (k * (k - 1) // 2)
    return term


def oracle_tail(kind, q, z, n):
    """Σ_{k>n} t_k to well beyond double precision"""
    with mpmath.workdps(NUMERICS.oracle_dps):
        total = mpmath.mpf(0)
        k = n + 1
        term = oracle_term(kind, q, z, k)
        while True:
            total += term
            if term < total * mpmath.mpf(10) ** (-NUMERICS.oracle_dps + 5):
                break
            k += 1
            term = term * mpmath.mpf(z) / (1 - mpmath.mpf(q) ** k)
            if kind == 'E':
                term *= mpmath.mpf(q) ** (k - 1)
        return total


def oracle_ratio(kind, q, z, n):
    with mpmath.workdps(NUMERICS.oracle_dps):
        return oracle_tail(kind, q, z, n - 1) * oracle_tail(kind, q, z, n + 1) / oracle_tail(kind, q, z, n) ** 2


def oracle_determinant(kind, q, z, n):
    with mpmath.workdps(NUMERICS.oracle_dps):
        return oracle_tail(kind, q, z, n - 1) * oracle_tail(kind, q, z, n + 1) - oracle_tail(kind, q, z, n) ** 2


def oracle_classical_tail(x, n):
    with mpmath.workdps(NUMERICS.oracle_dps):
        x = mpmath.mpf(x)
        return mpmath.exp(x) - sum(x ** k / mpmath.factorial(k) for k in range(n + 1))


def oracle_classical_ratio(x, n):
    with mpmath.workdps(NUMERICS.oracle_dps):
        return oracle_classical_tail(x, n - 1) * oracle_classical_tail(x, n + 1) / oracle_classical_tail(x, n) ** 2


def oracle_qpoch_inf(a, q):
    """Π_{k≥0} (1 − a·q^k), multiplied out until the factors reach working precision"""
    with mpmath.workdps(NUMERICS.oracle_dps):
        a, q = mpmath.mpf(a), mpmath.mpf(q)
        eps = mpmath.mpf(10) ** (-NUMERICS.oracle_dps - 5)
        product = mpmath.mpf(1)
        power = a
        while abs(power) >= eps:
            product *= 1 - power
            power *= q
        return product


@pytest.fixture(autouse=True)
def _clear_qfact_cache():
    from modules.qcore import _QFACT_CACHE
    _QFACT_CACHE.clear()
    yield
