"""The q-exponentials e(q;z) and E(q;z), by series and by product.

    e(q;z) = Σ z^k/(q;q)_k             = 1/(z;q)_∞,   0 < z < 1
    E(q;z) = Σ q^{k(k−1)/2} z^k/(q;q)_k = (−z;q)_∞,    z > 0
"""
import logging
from enum import Enum

from modules.qcore import (EvalMethod, EvalResult, QDomain, check_q, qfact, qfact_rel_error,
                           qpoch_inf, sum_positive_series)
from utils.accuracy import UNIT_ROUNDOFF, gamma, one_minus_qpow
from utils.errors import CrossCheckError, QDomainError
from utils.settings import NUMERICS

logger = logging.getLogger(__name__)


class QExpKind(str, Enum):
    SMALL_E = 'e'
    BIG_E = 'E'

    @property
    def unit_interval(self):
        return self is QExpKind.SMALL_E


def series_term(kind, q, z, k):
    """k-th series term and a bound on its relative rounding error"""
    kind = QExpKind(kind)
    term = z ** k / qfact(q, k)
    if kind is QExpKind.BIG_E:
        term *= q ** (k * (k - 1) // 2)
    return term, qfact_rel_error(k) + gamma(4)


def term_ratio(kind, q, z, k):
    """t_{k+1}/t_k; non-increasing in k for both kinds"""
    ratio = z / one_minus_qpow(q, k + 1)
    if kind is QExpKind.BIG_E:
        ratio *= q ** k
    return ratio


def sum_series(kind, q, z, start, tol, relative=True, skip_leading=0):
    """Σ_{k ≥ start} t_k with the geometric tail bound of sum_positive_series"""
    kind = QExpKind(kind)
    first, first_rel = series_term(kind, q, z, start)
    return sum_positive_series(
        first, first_rel, lambda k: term_ratio(kind, q, z, k), start, tol,
        relative=relative, skip_leading=skip_leading,
    )


def _series_route(kind, dom, tol):
    result = sum_series(kind, dom.q, dom.z, 0, tol, relative=False)
    logger.debug(f"{kind.value}(q={dom.q}, z={dom.z}) series used {result.terms} terms")
    return EvalResult(result.value, result.abs_error, EvalMethod.SERIES, terms=result.terms)


def _product_route(kind, dom, tol):
    if kind is QExpKind.BIG_E:
        product = qpoch_inf(-dom.z, dom.q, tol)
        return EvalResult(product.value, product.abs_error, EvalMethod.PRODUCT, terms=product.terms)

    product = qpoch_inf(dom.z, dom.q, tol)
    p, err = product.value, product.abs_error
    value = 1.0 / p
    # |1/(p ± err) − 1/p| ≤ err / (p (p − err))
    abs_error = err / (p * (p - err)) + UNIT_ROUNDOFF * value
    return EvalResult(value, abs_error, EvalMethod.PRODUCT, terms=product.terms)


def validate_domain(kind, dom):
    kind = QExpKind(kind)
    if not isinstance(dom, QDomain):
        raise QDomainError(f"expected a QDomain, got {type(dom).__name__}")
    dom.require_z(kind.unit_interval, allow_zero=True)
    return kind


def eval_qexp(kind, dom, tol=NUMERICS.default_tol, method=EvalMethod.CROSS_CHECKED):
    """Evaluate e(q;z) or E(q;z).

    The cross-checked route runs the series and the product and requires
    them to agree within the sum of their error bounds; it returns the
    product value.
    """
    kind = validate_domain(kind, dom)
    method = EvalMethod(method)
    if not tol > 0:
        raise QDomainError(f"tol must be positive, got {tol}")
    if dom.z == 0:
        return EvalResult(1.0, 0.0, method)

    if method is EvalMethod.SERIES:
        return _series_route(kind, dom, tol)
    if method is EvalMethod.PRODUCT:
        return _product_route(kind, dom, tol)
    if method is not EvalMethod.CROSS_CHECKED:
        raise QDomainError(f"eval_qexp does not support method {method.value!r}")

    series_tol = tol
    if kind is QExpKind.SMALL_E and dom.z > NUMERICS.boundary_z:
        series_tol = tol * NUMERICS.boundary_widening
    series = _series_route(kind, dom, series_tol)
    product = _product_route(kind, dom, tol)
    gap = abs(series.value - product.value)
    if gap > series.abs_error + product.abs_error:
        logger.error(
            f"{kind.value}(q={dom.q}, z={dom.z}): series {series.value!r} and product "
            f"{product.value!r} differ by {gap:.3e}"
        )
        raise CrossCheckError(
            f"series and product disagree for {kind.value}(q={dom.q}, z={dom.z}): gap {gap:.3e} "
            f"exceeds {series.abs_error + product.abs_error:.3e}"
        )
    return EvalResult(product.value, product.abs_error, EvalMethod.CROSS_CHECKED,
                      terms=series.terms + product.terms)


def euler_pair_residual(q, z, tol=1e-15):
    """e(q;z)·E(q;−z) − 1, with e from its series and E(q;−z) = (z;q)_∞ from the product"""
    check_q(q)
    dom = QDomain(q, z, 0).require_z(unit_interval=True)
    e = _series_route(QExpKind.SMALL_E, dom, tol)
    e_neg = qpoch_inf(z, q, tol)
    product = e.value * e_neg.value
    residual = product - 1.0
    bound = (e.abs_error * e_neg.value + e.value * e_neg.abs_error
             + 2.0 * UNIT_ROUNDOFF * abs(product) + UNIT_ROUNDOFF)
    if abs(residual) > bound:
        logger.error(f"Euler pairing broken at q={q}, z={z}: residual {residual:.3e} > {bound:.3e}")
        raise CrossCheckError(f"e(q;z)·E(q;−z) − 1 = {residual:.3e} exceeds its bound {bound:.3e}")
    return residual
