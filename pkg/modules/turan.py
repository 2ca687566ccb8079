"""Turán ratios R_{n−1}R_{n+1}/R_n² of the q-exponential remainders.

For the e-family the ratio lies in ((1−q^{n+1})/(1−q^{n+2}), 1) on 0 < z < 1;
for the E-family in ((q−q^{n+2})/(1−q^{n+2}), 1) on z > 0. Both lower
constants are the z → 0 limits of the ratio. As q → 1 with z = (1−q)x the
E-family statement turns into the classical one for e^x, whose constant is
(n+1)/(n+2).

Verdict margins are not formed as ratio − constant: for small q the whole
enclosure is narrower than the rounding error of the ratio. Everything is
measured in units of t_{n+1}, so nothing underflows at tiny z or large n.
The upper margin comes from the closed-form determinant series,

    upper = 1 − ratio = |R_{n−1}R_{n+1} − R_n²| / R_n²
          = (|R_{n−1}R_{n+1} − R_n²| / t_{n+1}²) / (1 + R_{n+1}/t_{n+1})²,

where the scaled determinant series starts at exactly 1 − c. The lower one
is whichever of (1 − c) − upper and a tail-quotient form is tighter; the
two must agree. The shift-based ratio is checked against the upper one.
"""
import logging
import math
import sys
from dataclasses import dataclass, field
from enum import Enum

from modules.qcore import (EvalMethod, EvalResult, QDomain, check_q, qfact, qfact_rel_error,
                           sum_positive_series)
from modules.qexp import series_term, term_ratio
from modules.tails import (RemainderKind, ShiftDirection, remainder, shift_remainder_result,
                           validate_domain)
from utils.accuracy import UNIT_ROUNDOFF, gamma, one_minus_qpow
from utils.errors import (ConvergenceError, CrossCheckError, QDomainError, RemainderShiftError,
                          TuranIndexError)
from utils.settings import NUMERICS

logger = logging.getLogger(__name__)

# below this a remainder carries subnormal rounding the error bounds do not model
_NORMAL_FLOOR = sys.float_info.min / UNIT_ROUNDOFF


class TuranOutcome(str, Enum):
    CERTIFIED = 'certified'
    VIOLATED = 'violated'
    INDETERMINATE = 'indeterminate'


@dataclass(frozen=True)
class TuranVerdict:
    ratio: float
    lower_constant: float
    upper_constant: float
    lower_margin: float
    upper_margin: float
    outcome: TuranOutcome
    error_budget: float
    determinant: float = math.nan

    @property
    def certified(self):
        return self.outcome is TuranOutcome.CERTIFIED


def classify(lower_margin, upper_margin, error_budget):
    """Three-state outcome; anything inside the error band is indeterminate"""
    if lower_margin < -error_budget or upper_margin < -error_budget:
        return TuranOutcome.VIOLATED
    if lower_margin > error_budget and upper_margin > error_budget:
        return TuranOutcome.CERTIFIED
    return TuranOutcome.INDETERMINATE


def _require_turan_index(n):
    if n < 1:
        raise TuranIndexError(f"Turán expressions need n ≥ 1 (R_{{n−1}} at n = 0 is not certified), got n={n}")


def _ratio_of_three(below, centre, above):
    """R_{n−1}R_{n+1}/R_n² with a non-linearized relative error bound"""
    ratio = (below.value / centre.value) * (above.value / centre.value)
    rel = ((1.0 + below.rel_error) * (1.0 + above.rel_error) / (1.0 - centre.rel_error) ** 2 - 1.0
           + 4.0 * UNIT_ROUNDOFF)
    return EvalResult(ratio, abs(ratio) * rel, EvalMethod.TAIL_SERIES, terms=centre.terms)


def turan_ratio(kind, dom, tol=NUMERICS.default_tol):
    """Turán ratio from one direct tail at n and shifts to n−1 and n+1"""
    kind = validate_domain(kind, dom)
    _require_turan_index(dom.n)
    centre = remainder(kind, dom, tol, skip_leading=1)
    below = shift_remainder_result(kind, dom, centre, ShiftDirection.DOWN)
    above = shift_remainder_result(kind, dom, centre, ShiftDirection.UP)
    if not above.value > _NORMAL_FLOOR:
        raise ConvergenceError(
            f"{kind.value}-remainders leave the normal range at q={dom.q}, z={dom.z}, n={dom.n}"
        )
    return _ratio_of_three(below, centre, above)


def best_constant(kind, q, n):
    """Sharp lower constant: (1−q^{n+1})/(1−q^{n+2}) for I, q times that for E"""
    kind = RemainderKind(kind)
    check_q(q)
    _require_turan_index(n)
    constant = one_minus_qpow(q, n + 1) / one_minus_qpow(q, n + 2)
    if kind is RemainderKind.TAIL_J:
        constant *= q
    return constant


def best_constant_gap(kind, q, n):
    """1 − best_constant: q^{n+1}(1−q)/(1−q^{n+2}) for I, (1−q)/(1−q^{n+2}) for E"""
    kind = RemainderKind(kind)
    check_q(q)
    _require_turan_index(n)
    gap = one_minus_qpow(q, 1) / one_minus_qpow(q, n + 2)
    if kind is RemainderKind.TAIL_I:
        gap *= q ** (n + 1)
    return gap


def _determinant_ratio(kind, q, z, n):
    """|T_{j+1}|/|T_j| for the determinant series; its own first term needs no ratio"""
    def ratio_at(j):
        m = j - 1 - n
        ratio = z / one_minus_qpow(q, j + 1) * one_minus_qpow(q, m + 1) / one_minus_qpow(q, m)
        if kind is RemainderKind.TAIL_J:
            ratio *= q ** (j - 1)
        return ratio

    return ratio_at


def _determinant_pieces(kind, q, z, n):
    """Leading term and term ratio of R_{n−1}R_{n+1} − R_n² = −Σ_{j≥n+2} |T_j|.

    |T_j| = C·(1 − q^{j−1−n})·s_j with
      I: C = q^{n+1} z^n/(q;q)_{n+1},       s_j = z^j/(q;q)_j
      E: C = q^{n(n+1)/2} z^n/(q;q)_{n+1},  s_j = q^{(j−1)(j−2)/2} z^j/(q;q)_j
    """
    j0 = n + 2
    if kind is RemainderKind.TAIL_I:
        coefficient = q ** (n + 1) * z ** n / qfact(q, n + 1)
        s0 = z ** j0 / qfact(q, j0)
    else:
        coefficient = q ** (n * (n + 1) // 2) * z ** n / qfact(q, n + 1)
        s0 = q ** ((j0 - 1) * (j0 - 2) // 2) * z ** j0 / qfact(q, j0)
    first = coefficient * one_minus_qpow(q, 1) * s0
    first_rel = qfact_rel_error(n + 1) + qfact_rel_error(j0) + gamma(16)
    return first, first_rel, _determinant_ratio(kind, q, z, n), j0


def turan_determinant_series(kind, dom, tol=NUMERICS.default_tol):
    """Closed-form series for R_{n−1}R_{n+1} − R_n²; negative in-domain"""
    kind = validate_domain(kind, dom)
    _require_turan_index(dom.n)
    first, first_rel, ratio_at, j0 = _determinant_pieces(kind, dom.q, dom.z, dom.n)
    magnitude = sum_positive_series(first, first_rel, ratio_at, j0, tol,
                                    ratio_rel_error=20 * UNIT_ROUNDOFF)
    return EvalResult(-magnitude.value, magnitude.abs_error, EvalMethod.TAIL_SERIES,
                      terms=magnitude.terms)


def _scaled_sum(first, first_rel, ratio_at, start, tol, ratio_rel_error=10 * UNIT_ROUNDOFF):
    result = sum_positive_series(first, first_rel, ratio_at, start, tol, ratio_rel_error=ratio_rel_error)
    return EvalResult(result.value, result.abs_error, EvalMethod.TAIL_SERIES, terms=result.terms)


def _tail_quotient(term_ratio_at, m, tol):
    """R_m/t_m = Σ_{k>m} t_k/t_m, summed from term ratios so neither side can underflow"""
    return _scaled_sum(term_ratio_at(m), gamma(6), term_ratio_at, m + 1, tol)


def _lower_from_quotients(constant, gap, u0, u1):
    """ratio − c = (c·u1 + (gap − c)·u0 + gap·u0²) / (1 + u0)²

    with u0 = R_{n+1}/t_{n+1} and u1 = R_{n+2}/t_{n+2}. Nothing cancels when
    c < 1/2, which is where gap − upper loses every digit.
    """
    a, b = u0.value, u1.value
    scale = (1.0 + a) ** 2
    value = (constant * b + (gap - constant) * a + gap * a * a) / scale
    abs_error = ((constant * u1.abs_error + (abs(gap - constant) + 2.0 * gap * a) * u0.abs_error) / scale
                 + gamma(16) * (constant * b + (constant + gap) * a + gap * a * a) / scale
                 + abs(value) * 2.0 * u0.abs_error / (1.0 + a))
    return EvalResult(value, abs_error, EvalMethod.TAIL_SERIES)


def _margins(scaled_determinant, u0, u1, constant, gap, gap_error, label):
    """(lower, upper) margins; lower takes the tighter of its two routes.

    scaled_determinant is |R_{n−1}R_{n+1} − R_n²|/t_{n+1}², whose first term
    is exactly the gap, so upper = scaled_determinant/(1 + u0)².
    """
    scale = (1.0 + u0.value) ** 2
    upper_value = scaled_determinant.value / scale
    upper_error = upper_value * (scaled_determinant.rel_error + 2.0 * u0.abs_error / (1.0 + u0.value)
                                 + 3.0 * UNIT_ROUNDOFF)
    upper = EvalResult(upper_value, upper_error, EvalMethod.TAIL_SERIES)

    lower = gap - upper.value
    by_gap = EvalResult(lower, gap_error + upper.abs_error + UNIT_ROUNDOFF * abs(lower), EvalMethod.TAIL_SERIES)
    by_quotients = _lower_from_quotients(constant, gap, u0, u1)
    spread = abs(by_gap.value - by_quotients.value)
    if spread > by_gap.abs_error + by_quotients.abs_error:
        logger.error(f"lower margin routes disagree at {label}: {by_gap.value!r} vs {by_quotients.value!r}")
        raise CrossCheckError(f"lower margin routes differ by {spread:.3e} at {label}")
    return min(by_gap, by_quotients, key=lambda r: r.abs_error), upper


def _unscaled_determinant(scaled, term, term_rel):
    """−scaled·t², informational only; may underflow to −0.0"""
    value = -(scaled.value * term) * term
    abs_error = (scaled.abs_error * term) * term + abs(value) * (2.0 * term_rel + 2.0 * UNIT_ROUNDOFF)
    return EvalResult(value, abs_error, EvalMethod.TAIL_SERIES)


def turan_margins(kind, dom, tol=NUMERICS.default_tol):
    """(ratio − best_constant, 1 − ratio, determinant) as EvalResults, cancellation-free"""
    kind = validate_domain(kind, dom)
    _require_turan_index(dom.n)
    q, z, n = dom.q, dom.z, dom.n
    tol = min(tol, NUMERICS.margin_tol)

    def term_ratio_at(k):
        return term_ratio(kind.exp_kind, q, z, k)

    u0, u1 = (_tail_quotient(term_ratio_at, m, tol) for m in (n + 1, n + 2))
    constant = best_constant(kind, q, n)
    gap = best_constant_gap(kind, q, n)
    scaled = _scaled_sum(gap, gamma(12), _determinant_ratio(kind, q, z, n), n + 2, tol,
                         ratio_rel_error=20 * UNIT_ROUNDOFF)
    lower, upper = _margins(scaled, u0, u1, constant, gap, gamma(12) * gap,
                            f"{kind.value} q={q} z={z} n={n}")
    return lower, upper, _unscaled_determinant(scaled, *series_term(kind.exp_kind, q, z, n + 1))


def error_budget(lower, upper, ratio):
    """Safety factor times the error of whichever margin decides the verdict.

    That is the smaller margin, plus the larger one whenever it does not clear
    its own error by the safety factor. The floor of one ulp of the ratio keeps
    a certified row's ratio column strictly inside (lower_constant, 1).
    """
    safety = NUMERICS.safety_factor
    smaller, larger = sorted((lower, upper), key=lambda r: r.value)
    errors = [UNIT_ROUNDOFF * abs(ratio), smaller.abs_error]
    if not larger.value > safety * larger.abs_error:
        errors.append(larger.abs_error)
    return safety * max(errors)


def _certify(lower_constant, lower, upper, determinant, ratio_route, label):
    """Classify the margins and check them against the shift-based ratio.

    The reported ratio is 1 − upper_margin, which is accurate to a few ulps;
    the shift route only has to agree within its own error bound.
    """
    if determinant.value > 0:
        logger.error(f"positive determinant {determinant.value!r} at {label}")
        raise CrossCheckError(f"R_(n-1)R_(n+1) - R_n^2 came out positive at {label}")

    ratio_value = 1.0 - upper.value
    budget = error_budget(lower, upper, ratio_value)
    try:
        ratio = ratio_route()
    except (RemainderShiftError, ConvergenceError) as e:
        logger.debug(f"shift route broke down at {label}, cross-check skipped: {e}")
    else:
        mismatch = abs((1.0 - ratio.value) - upper.value)
        allowed = ratio.abs_error + upper.abs_error + 2.0 * UNIT_ROUNDOFF
        if mismatch > allowed:
            logger.error(f"ratio {ratio.value!r} and upper margin {upper.value!r} disagree at {label}")
            raise CrossCheckError(
                f"shift route and determinant route differ by {mismatch:.3e} (allowed {allowed:.3e}) at {label}"
            )

    return TuranVerdict(
        ratio=ratio_value,
        lower_constant=lower_constant,
        upper_constant=1.0,
        lower_margin=lower.value,
        upper_margin=upper.value,
        outcome=classify(lower.value, upper.value, budget),
        error_budget=budget,
        determinant=determinant.value,
    )


def verify_turan(kind, dom, tol=NUMERICS.default_tol):
    """Certify best_constant < ratio < 1 at one point"""
    kind = validate_domain(kind, dom)
    _require_turan_index(dom.n)
    lower_constant = best_constant(kind, dom.q, dom.n)
    lower, upper, determinant = turan_margins(kind, dom, tol)
    label = f"{kind.value} q={dom.q} z={dom.z} n={dom.n}"
    return _certify(lower_constant, lower, upper, determinant,
                    lambda: turan_ratio(kind, dom, tol), label)


@dataclass(frozen=True)
class SharpnessPoint:
    z: float
    ratio: float
    best_constant: float
    deviation: float


@dataclass
class SharpnessReport:
    kind: RemainderKind
    q: float
    n: int
    points: list = field(default_factory=list)

    @property
    def deviations(self):
        return [p.deviation for p in self.points]

    @property
    def monotone(self):
        devs = self.deviations
        return all(b < a for a, b in zip(devs, devs[1:]))

    @property
    def slope(self):
        """Empirical C with deviation ≤ C·z along the whole sequence"""
        return max((p.deviation / p.z for p in self.points), default=0.0)

    def pairs(self):
        return [(p.z, p.deviation) for p in self.points]


def _require_strictly_monotone(values, increasing, name):
    values = list(values)
    if not values:
        raise QDomainError(f"{name} must not be empty")
    pairs = zip(values, values[1:])
    ok = all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)
    if not ok:
        order = 'increasing' if increasing else 'decreasing'
        raise QDomainError(f"{name} must be strictly {order}, got {values}")
    return values


def sharpness_probe(kind, q, n, z_sequence, tol=NUMERICS.default_tol):
    """|ratio − best_constant| along z → 0, taken from the lower margin"""
    kind = RemainderKind(kind)
    z_values = _require_strictly_monotone(z_sequence, increasing=False, name='z_sequence')
    constant = best_constant(kind, q, n)
    report = SharpnessReport(kind, q, n)
    for z in z_values:
        lower, _, _ = turan_margins(kind, QDomain(q, z, n), tol)
        report.points.append(SharpnessPoint(z, constant + lower.value, constant, abs(lower.value)))
    if not report.monotone:
        logger.warning(f"sharpness deviations are not decreasing for {kind.value} q={q} n={n}: {report.deviations}")
    return report


def _classical_term(x, k):
    """x^k/k! and its relative rounding bound"""
    term = 1.0
    for j in range(1, k + 1):
        term *= x / j
    return term, gamma(2 * k)


def _check_x(x, n):
    if not x > 0:
        raise QDomainError(f"x must be positive, got {x}")
    if n < 0:
        raise QDomainError(f"n must be non-negative, got {n}")


def _classical_tail(x, n, tol, skip_leading=0):
    """Σ_{k>n} x^k/k! summed directly"""
    _check_x(x, n)
    first, first_rel = _classical_term(x, n + 1)
    result = sum_positive_series(first, first_rel, lambda k: x / (k + 1), n + 1, tol,
                                 skip_leading=skip_leading, ratio_rel_error=3 * UNIT_ROUNDOFF)
    return EvalResult(result.value, result.abs_error, EvalMethod.TAIL_SERIES, terms=result.terms)


def classical_remainder(x, n, tol=1e-16):
    """e^x − Σ_{k≤n} x^k/k!"""
    return _classical_tail(x, n, tol).value


def classical_turan_ratio(x, n, tol=NUMERICS.default_tol):
    _require_turan_index(n)
    centre = _classical_tail(x, n, tol, skip_leading=1)
    down_term, down_rel = _classical_term(x, n)
    up_term, up_rel = _classical_term(x, n + 1)
    below_value = centre.value + down_term
    above_value = centre.value - up_term
    if not above_value > 0:
        raise RemainderShiftError(f"classical up-shift at x={x}, n={n} gave {above_value!r}")
    below = EvalResult(below_value, centre.abs_error + down_term * down_rel + UNIT_ROUNDOFF * below_value,
                       EvalMethod.TAIL_SERIES)
    above = EvalResult(above_value, centre.abs_error + up_term * up_rel + UNIT_ROUNDOFF * above_value,
                       EvalMethod.TAIL_SERIES)
    return _ratio_of_three(below, centre, above)


def _classical_determinant_ratio(x, n):
    def ratio_at(k):
        return x / (k + 1) * (k - n) / (k - n - 1)

    return ratio_at


def classical_determinant_series(x, n, tol=NUMERICS.default_tol):
    """I_{n−1}I_{n+1} − I_n² = −Σ_{k≥n+2} (k−n−1) x^{k+n} / ((n+1)! k!)"""
    _check_x(x, n)
    _require_turan_index(n)
    # leading term x^n/(n+1)! · x^{n+2}/(n+2)!
    a, a_rel = _classical_term(x, n)
    a /= n + 1
    b, b_rel = _classical_term(x, n + 2)
    magnitude = sum_positive_series(a * b, a_rel + b_rel + gamma(2), _classical_determinant_ratio(x, n),
                                    n + 2, tol, ratio_rel_error=5 * UNIT_ROUNDOFF)
    return EvalResult(-magnitude.value, magnitude.abs_error, EvalMethod.TAIL_SERIES,
                      terms=magnitude.terms)


def alzer_constant(n):
    _require_turan_index(n)
    return (n + 1) / (n + 2)


def verify_alzer(x, n, tol=NUMERICS.default_tol):
    """Certify (n+1)/(n+2) < I_{n−1}(x)I_{n+1}(x)/I_n(x)² < 1 for e^x"""
    _check_x(x, n)
    constant = alzer_constant(n)
    gap = 1.0 / (n + 2)
    margin_tol = min(tol, NUMERICS.margin_tol)

    def term_ratio_at(k):
        return x / (k + 1)

    u0, u1 = (_tail_quotient(term_ratio_at, m, margin_tol) for m in (n + 1, n + 2))
    scaled = _scaled_sum(gap, UNIT_ROUNDOFF, _classical_determinant_ratio(x, n), n + 2, margin_tol,
                         ratio_rel_error=5 * UNIT_ROUNDOFF)
    label = f"classical x={x} n={n}"
    lower, upper = _margins(scaled, u0, u1, constant, gap, UNIT_ROUNDOFF * gap, label)
    determinant = _unscaled_determinant(scaled, *_classical_term(x, n + 1))
    return _certify(constant, lower, upper, determinant,
                    lambda: classical_turan_ratio(x, n, tol), label)


@dataclass(frozen=True)
class QLimitPoint:
    q: float
    q_ratio: float
    classical_ratio: float
    deviation: float


@dataclass
class QLimitReport:
    x: float
    n: int
    points: list = field(default_factory=list)

    @property
    def deviations(self):
        return [p.deviation for p in self.points]

    @property
    def monotone(self):
        devs = self.deviations
        return all(b < a for a, b in zip(devs, devs[1:]))

    def pairs(self):
        return [(p.q, p.deviation) for p in self.points]


def q_limit_check(x, n, q_sequence, tol=NUMERICS.default_tol):
    """E-family ratio at z = (1−q)x against the classical ratio at x, as q → 1"""
    _check_x(x, n)
    q_values = _require_strictly_monotone(q_sequence, increasing=True, name='q_sequence')
    for q in q_values:
        check_q(q)
    classical = classical_turan_ratio(x, n, tol).value
    report = QLimitReport(x, n)
    for q in q_values:
        z = (1.0 - q) * x
        q_ratio = turan_ratio(RemainderKind.TAIL_J, QDomain(q, z, n), tol).value
        report.points.append(QLimitPoint(q, q_ratio, classical, abs(q_ratio - classical)))
    if not report.monotone:
        logger.warning(f"q-limit deviations are not decreasing for x={x}, n={n}: {report.deviations}")
    return report
