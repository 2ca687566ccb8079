import numpy as np
import pytest

from modules.qcore import EvalMethod, QDomain, qfact
from modules.qexp import eval_qexp
from modules.tails import (RemainderKind, ShiftDirection, partial_sum, remainder, shift_remainder,
                           shift_remainder_result)
from tests.conftest import oracle_tail
from utils.errors import QDomainError, RemainderShiftError

Q_GRID = [0.05, 0.3, 0.5, 0.7, 0.95]
Z_I = [0.05, 0.3, 0.5, 0.7, 0.95]
Z_E = [0.1, 0.5, 1.0, 3.0, 10.0]


def test_remainder_i_example():
    result = remainder('I', QDomain(0.5, 0.5, 0))
    assert result.value == pytest.approx(2.4627466, abs=1e-6)
    assert result.method is EvalMethod.TAIL_SERIES


def test_remainder_e_example():
    assert remainder('E', QDomain(0.5, 1.0, 0)).value == pytest.approx(3.768462, abs=1e-6)


def test_remainder_small_z_is_leading_term():
    z = 1e-6
    value = remainder(RemainderKind.TAIL_I, QDomain(0.5, z, 1)).value
    assert value == pytest.approx(z ** 2 / 0.375, rel=1e-5)


@pytest.mark.parametrize("kind, z_values", [('I', Z_I), ('E', Z_E)])
def test_remainder_matches_oracle(kind, z_values):
    for q in Q_GRID:
        for z in z_values:
            for n in (0, 1, 4, 10):
                result = remainder(kind, QDomain(q, z, n))
                truth = float(oracle_tail(kind, q, z, n))
                assert abs(result.value - truth) <= result.abs_error
                assert result.value == pytest.approx(truth, rel=2e-12)


def test_remainder_keeps_precision_where_subtraction_fails():
    # e − partial sum would lose about 24 digits here
    q, z, n = 0.5, 1e-6, 3
    truth = float(oracle_tail('I', q, z, n))
    assert remainder('I', QDomain(q, z, n)).value == pytest.approx(truth, rel=1e-12)


@pytest.mark.parametrize("kind", ['I', 'E'])
def test_remainder_plus_partial_sum_is_full_function(kind):
    dom = QDomain(0.6, 0.4, 3)
    tail = remainder(kind, dom)
    head = partial_sum(kind, dom)
    full = eval_qexp(RemainderKind(kind).exp_kind, QDomain(0.6, 0.4))
    bound = tail.abs_error + head.abs_error + full.abs_error + 4e-16 * full.value
    assert abs(tail.value + head.value - full.value) <= bound


@pytest.mark.parametrize("kind, z", [('I', 0.5), ('E', 2.0)])
def test_remainder_decreases_in_n(kind, z):
    values = [remainder(kind, QDomain(0.5, z, n)).value for n in range(16)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_remainder_domain_errors():
    with pytest.raises(QDomainError):
        remainder('I', QDomain(0.5, 1.0, 1))
    with pytest.raises(QDomainError):
        remainder('E', QDomain(0.5, -1.0, 1))
    with pytest.raises(QDomainError):
        remainder('I', QDomain(0.5, 0.5, 1), tol=0.0)
    with pytest.raises(ValueError):
        remainder('X', QDomain(0.5, 0.5, 1))


def test_down_shift_from_zero_gives_full_function():
    dom = QDomain(0.5, 0.5, 0)
    shifted = shift_remainder('I', dom, remainder('I', dom).value, 'down')
    assert shifted == pytest.approx(eval_qexp('e', dom).value, rel=1e-14)


def test_down_shift_example():
    dom = QDomain(0.5, 0.5, 1)
    shifted = shift_remainder('I', dom, remainder('I', dom).value, ShiftDirection.DOWN)
    assert shifted == pytest.approx(remainder('I', dom.with_n(0)).value, abs=1e-12)


def test_up_shift_example():
    dom = QDomain(0.5, 1.0, 1)
    shifted = shift_remainder('E', dom, remainder('E', dom).value, ShiftDirection.UP)
    assert shifted == pytest.approx(remainder('E', dom.with_n(2)).value, abs=1e-12)


@pytest.mark.parametrize("kind, z_values", [
    ('I', np.linspace(0.05, 0.95, 7).tolist()),
    ('E', np.geomspace(0.1, 10.0, 7).tolist()),
])
def test_shift_recurrences_within_error_bounds(kind, z_values):
    for q in Q_GRID:
        for z in z_values:
            for n in range(1, 16):
                dom = QDomain(q, z, n)
                centre = remainder(kind, dom, skip_leading=1)
                for direction, neighbour_n in ((ShiftDirection.DOWN, n - 1), (ShiftDirection.UP, n + 1)):
                    direct = remainder(kind, dom.with_n(neighbour_n))
                    try:
                        shifted = shift_remainder_result(kind, dom, centre, direction)
                    except RemainderShiftError:
                        # the neighbour is below the rounding level of the centre
                        assert direction is ShiftDirection.UP
                        assert direct.value <= 4 * centre.abs_error
                        continue
                    assert abs(shifted.value - direct.value) <= shifted.abs_error + direct.abs_error


def test_up_shift_rejects_inconsistent_input():
    dom = QDomain(0.5, 0.5, 1)
    t2 = 0.25 / qfact(0.5, 2)
    with pytest.raises(RemainderShiftError):
        shift_remainder('I', dom, 0.5 * t2, 'up')
