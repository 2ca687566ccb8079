import math
import random

import pytest

from modules.qcore import QDomain
from modules.scanner import (EXIT_INDETERMINATE, EXIT_OK, EXIT_VIOLATED, GridSpec, ScanRecord, ScanSummary,
                             evaluate_point, run_sharpness, scan, sharpness_sequence)
from modules.turan import TuranOutcome, verify_turan
from tests.conftest import oracle_ratio
from utils.errors import CrossCheckError, GridSpecError


def small_grid(kind='I', **overrides):
    params = dict(kind=kind, q_min=0.1, q_max=0.9, q_steps=5, n_min=1, n_max=5,
                  z_min=0.1, z_max=0.9, z_steps=5, tol=1e-12)
    params.update(overrides)
    return GridSpec(**params)


def test_small_grid_certified_and_ordered():
    result = scan(small_grid())
    records = result.records
    assert len(records) == 125
    assert result.summary.violated == 0
    keys = [(r.q, r.n, r.z) for r in records]
    assert keys == sorted(keys)
    assert result.summary.exit_code() in (EXIT_OK, EXIT_INDETERMINATE)


def test_scan_spot_checks_against_oracle():
    records = scan(small_grid()).records
    for record in random.Random(7).sample(records, 5):
        truth = float(oracle_ratio('I', record.q, record.z, record.n))
        assert record.ratio == pytest.approx(truth, abs=1e-11)
        assert record.outcome == verify_turan('I', QDomain(record.q, record.z, record.n)).outcome.value


def test_records_follow_verdict_classification():
    for record in scan(small_grid('E', z_min=0.1, z_max=10.0, log_z=True)).records:
        if record.outcome == 'certified':
            assert record.lower_margin > record.error_budget
            assert record.upper_margin > record.error_budget
        assert record.outcome != 'violated'


def test_tiny_z_gives_indeterminate_records():
    result = scan(small_grid(z_min=1e-15, z_max=1e-1, z_steps=3, log_z=True, q_steps=1, q_max=0.1))
    assert result.summary.indeterminate > 0
    assert result.summary.violated == 0
    assert result.summary.exit_code() == EXIT_INDETERMINATE


def test_parallel_scan_matches_serial():
    spec = small_grid('E', z_max=5.0, log_z=True)
    assert scan(spec, workers=4).records == scan(spec, workers=1).records


def test_summary_reports_smallest_margins():
    records = [
        ScanRecord('I', 0.5, 1, 0.2, 0.9, 0.85, 3e-2, 1e-1, 1e-12, 'certified'),
        ScanRecord('I', 0.5, 2, 0.3, 0.95, 0.9, 1e-2, 5e-2, 1e-12, 'certified'),
        ScanRecord('I', 0.5, 3, 0.4, 0.99, 0.95, 4e-2, 1e-2, 1e-12, 'certified'),
    ]
    summary = ScanSummary.from_records(records)
    assert summary.total == 3
    assert summary.certified == 3
    assert summary.min_lower_margin == 1e-2
    assert summary.min_lower_at == (0.5, 2, 0.3)
    assert summary.min_upper_margin == 1e-2
    assert summary.min_upper_at == (0.5, 3, 0.4)
    assert summary.exit_code() == EXIT_OK


def test_summary_exit_codes():
    violated = ScanRecord('I', 0.5, 1, 0.2, 0.5, 0.85, -0.35, 0.5, 1e-12, 'violated')
    unsure = ScanRecord('I', 0.5, 1, 0.2, 0.85, 0.85, 0.0, 0.15, 1e-12, 'indeterminate')
    assert ScanSummary.from_records([violated, unsure]).exit_code() == EXIT_VIOLATED
    assert ScanSummary.from_records([unsure]).exit_code() == EXIT_INDETERMINATE
    assert ScanSummary.from_records([]).exit_code() == EXIT_OK


def test_classical_scan():
    spec = GridSpec.default('A', n_max=3, z_steps=4)
    result = scan(spec)
    assert len(result.records) == 12
    assert all(r.kind == 'A' and r.q == 1.0 for r in result.records)
    assert result.summary.certified == 12


def test_underflowing_remainders_still_give_a_verdict():
    spec = small_grid('E', q_min=0.05, q_max=0.05, q_steps=1, z_min=1e-30, z_max=1e-30, z_steps=1,
                      n_min=15, n_max=15)
    record = evaluate_point(spec, 0.05, 15, 1e-30)
    assert record.outcome == TuranOutcome.INDETERMINATE.value
    assert math.isfinite(record.ratio)
    assert record.upper_margin > 0


def test_failed_evaluation_becomes_indeterminate_record(monkeypatch):
    def broken(kind, dom, tol):
        raise CrossCheckError("routes disagree")

    monkeypatch.setattr('modules.scanner.verify_turan', broken)
    record = evaluate_point(small_grid(), 0.5, 3, 0.5)
    assert record.outcome == TuranOutcome.INDETERMINATE.value
    assert math.isnan(record.ratio)
    assert ScanSummary.from_records([record]).exit_code() == EXIT_INDETERMINATE


def test_tiny_z_at_large_index_is_indeterminate():
    spec = small_grid(q_min=0.1, q_max=0.5, q_steps=2, n_min=8, n_max=15,
                      z_min=1e-20, z_max=1e-15, z_steps=2, log_z=True)
    result = scan(spec)
    assert len(result.records) == 32
    assert result.summary.violated == 0
    assert all(math.isfinite(r.ratio) for r in result.records)
    assert result.summary.exit_code() == EXIT_INDETERMINATE


@pytest.mark.parametrize("overrides", [
    {'q_min': 0.9, 'q_max': 0.1},
    {'q_min': 0.0},
    {'q_max': 1.0},
    {'z_max': 1.0},
    {'z_min': 0.0},
    {'z_min': 0.5, 'z_max': 0.5},
    {'n_min': 0},
    {'n_min': 4, 'n_max': 3},
    {'q_steps': 0},
    {'z_steps': 2.5},
    {'tol': 0.0},
    {'kind': 'X'},
])
def test_invalid_specs(overrides):
    with pytest.raises(GridSpecError):
        small_grid(**overrides)


def test_single_point_axis():
    spec = small_grid(q_min=0.5, q_max=0.5, q_steps=1)
    assert spec.q_values() == [0.5]
    assert spec.size == len(spec.points()) == 25


def test_classical_scan_pins_q():
    with pytest.raises(GridSpecError):
        GridSpec.default('A', q_min=0.5, q_max=0.5)


def test_default_grids():
    spec = GridSpec.default('I')
    assert spec.size == 19 * 10 * 19
    assert spec.q_values()[0] == 0.05
    big = GridSpec.default('E')
    z = big.z_values()
    assert len(z) == 25
    assert z[0] == pytest.approx(0.1)
    assert z[-1] == pytest.approx(10.0)
    assert z[1] / z[0] == pytest.approx(z[2] / z[1])


def test_scan_rejects_bad_workers():
    with pytest.raises(GridSpecError):
        scan(small_grid(), workers=0)


def test_sharpness_sequence():
    assert sharpness_sequence(1e-1, 1e-6, 6) == pytest.approx([1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    assert sharpness_sequence(1e-2, 1e-2, 1) == [1e-2]
    with pytest.raises(GridSpecError):
        sharpness_sequence(1e-6, 1e-1, 3)
    with pytest.raises(GridSpecError):
        sharpness_sequence(1e-1, 0.0, 3)


def test_run_sharpness_wraps_argument_errors():
    with pytest.raises(GridSpecError):
        run_sharpness('I', 0.5, 0, [1e-2, 1e-3])
    with pytest.raises(GridSpecError):
        run_sharpness('I', 0.5, 1, [1e-3, 1e-2])


@pytest.mark.slow
@pytest.mark.parametrize("kind", ['I', 'E'])
def test_default_scan_certifies(kind):
    result = scan(GridSpec.default(kind), workers=4)
    summary = result.summary
    assert summary.violated == 0
    assert summary.certified >= 0.99 * summary.total
    assert summary.exit_code() in (EXIT_OK, EXIT_INDETERMINATE)


@pytest.mark.slow
def test_default_classical_scan_certifies():
    assert scan(GridSpec.default('A')).summary.exit_code() == EXIT_OK


@pytest.mark.slow
@pytest.mark.parametrize("kind", ['I', 'E'])
def test_default_axes_at_large_index(kind):
    result = scan(GridSpec.default(kind, n_min=11, n_max=15), workers=4)
    assert result.summary.violated == 0
    assert all(math.isfinite(r.ratio) for r in result.records)
