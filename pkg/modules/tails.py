"""Series remainders of the q-exponentials and their index shifts.

    I_n(q;z) = Σ_{k>n} z^k/(q;q)_k                 (0 < z < 1)
    J_n(q;z) = Σ_{k>n} q^{k(k−1)/2} z^k/(q;q)_k     (z > 0)

Both are summed directly from k = n+1. Subtracting a partial sum from the
full function would cancel every significant digit at small z.
"""
import logging
from enum import Enum

from modules.qcore import EvalMethod, EvalResult, QDomain
from modules.qexp import QExpKind, series_term, sum_series
from utils.accuracy import UNIT_ROUNDOFF, ErrorTrackedSum
from utils.errors import ConvergenceError, QDomainError, RemainderShiftError
from utils.settings import NUMERICS

logger = logging.getLogger(__name__)


class RemainderKind(str, Enum):
    TAIL_I = 'I'
    TAIL_J = 'E'

    @property
    def exp_kind(self):
        return QExpKind.SMALL_E if self is RemainderKind.TAIL_I else QExpKind.BIG_E

    @property
    def unit_interval(self):
        return self is RemainderKind.TAIL_I


class ShiftDirection(str, Enum):
    DOWN = 'down'
    UP = 'up'


def validate_domain(kind, dom):
    kind = RemainderKind(kind)
    if not isinstance(dom, QDomain):
        raise QDomainError(f"expected a QDomain, got {type(dom).__name__}")
    dom.require_z(kind.unit_interval)
    return kind


def remainder(kind, dom, tol=NUMERICS.default_tol, skip_leading=0):
    """Direct tail sum from k = n+1; tol is relative to the result.

    skip_leading=1 tightens the truncation so that the (n+1)-remainder
    obtained by an up-shift keeps relative accuracy tol as well.
    """
    kind = validate_domain(kind, dom)
    if not tol > 0:
        raise QDomainError(f"tol must be positive, got {tol}")
    result = sum_series(kind.exp_kind, dom.q, dom.z, dom.n + 1, tol, skip_leading=skip_leading)
    if not result.value > 0:
        raise ConvergenceError(
            f"{kind.value}-remainder underflows at q={dom.q}, z={dom.z}, n={dom.n}"
        )
    return EvalResult(result.value, result.abs_error, EvalMethod.TAIL_SERIES, terms=result.terms)


def partial_sum(kind, dom):
    """Σ_{k=0}^{n} t_k, the part of the function a remainder leaves out"""
    kind = validate_domain(kind, dom)
    acc = ErrorTrackedSum()
    for k in range(dom.n + 1):
        term, rel = series_term(kind.exp_kind, dom.q, dom.z, k)
        acc.add(term, rel)
    return EvalResult(acc.value, acc.rounding_bound(), EvalMethod.SERIES, terms=acc.count)


def _shift_term(kind, dom, direction):
    index = dom.n if direction is ShiftDirection.DOWN else dom.n + 1
    return series_term(kind.exp_kind, dom.q, dom.z, index)


def shift_remainder(kind, dom, value_at_n, direction):
    """Move the remainder index by one.

    down: R_{n−1} = R_n + t_n
    up:   R_{n+1} = R_n − t_{n+1}
    """
    kind = validate_domain(kind, dom)
    direction = ShiftDirection(direction)
    term, _ = _shift_term(kind, dom, direction)
    if direction is ShiftDirection.DOWN:
        return value_at_n + term

    shifted = value_at_n - term
    if not shifted > 0:
        raise RemainderShiftError(
            f"up-shift of the {kind.value}-remainder at q={dom.q}, z={dom.z}, n={dom.n} "
            f"gave {shifted!r}; the input carries too much error"
        )
    return shifted


def shift_remainder_result(kind, dom, result, direction):
    """shift_remainder on an EvalResult, propagating the error bound"""
    kind = validate_domain(kind, dom)
    direction = ShiftDirection(direction)
    value = shift_remainder(kind, dom, result.value, direction)
    term, term_rel = _shift_term(kind, dom, direction)
    abs_error = result.abs_error + term * term_rel + UNIT_ROUNDOFF * abs(value)
    return EvalResult(value, abs_error, EvalMethod.TAIL_SERIES, terms=result.terms)
