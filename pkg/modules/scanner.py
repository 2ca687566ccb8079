"""Grid scans of the Turán verdicts and the sharpness sweep behind the CLI."""
import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from dataclasses import asdict, dataclass, field

import numpy as np

from modules.qcore import QDomain
from modules.tails import RemainderKind
from modules.turan import TuranOutcome, sharpness_probe, verify_alzer, verify_turan
from utils.data_exporter import DataExporter
from utils.errors import CrossCheckError, GridSpecError, QDomainError, QTuranError
from utils.settings import DEFAULT_GRIDS, NUMERICS

logger = logging.getLogger(__name__)

CLASSICAL_KIND = 'A'
SCAN_KINDS = ('I', 'E', CLASSICAL_KIND)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INDETERMINATE = 2
EXIT_USAGE = 64
EXIT_IO = 74


def _axis(low, high, steps, geometric=False):
    if steps == 1:
        return [float(low)]
    if geometric:
        return np.geomspace(low, high, steps).tolist()
    return np.linspace(low, high, steps).tolist()


def _check_range(name, low, high, steps):
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise GridSpecError(f"{name}_steps must be a positive integer, got {steps!r}")
    if not (math.isfinite(low) and math.isfinite(high)):
        raise GridSpecError(f"{name} range must be finite, got [{low}, {high}]")
    if steps == 1 and low != high:
        raise GridSpecError(f"{name}_steps=1 needs {name}_min == {name}_max, got [{low}, {high}]")
    if steps > 1 and not low < high:
        raise GridSpecError(f"{name}_min must be below {name}_max, got [{low}, {high}]")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (q, n, z) box; for kind 'A' q is pinned to 1 and z stands for x"""

    kind: str
    q_min: float
    q_max: float
    q_steps: int
    n_min: int
    n_max: int
    z_min: float
    z_max: float
    z_steps: int
    tol: float = NUMERICS.default_tol
    log_z: bool = False

    def __post_init__(self):
        if self.kind not in SCAN_KINDS:
            raise GridSpecError(f"kind must be one of {SCAN_KINDS}, got {self.kind!r}")
        _check_range('q', self.q_min, self.q_max, self.q_steps)
        _check_range('z', self.z_min, self.z_max, self.z_steps)
        for name in ('n_min', 'n_max'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise GridSpecError(f"{name} must be an integer, got {value!r}")
        if self.n_min < 1:
            raise GridSpecError(f"n_min must be at least 1, got {self.n_min}")
        if self.n_min > self.n_max:
            raise GridSpecError(f"n_min must not exceed n_max, got [{self.n_min}, {self.n_max}]")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise GridSpecError(f"tol must be positive, got {self.tol}")

        if self.kind == CLASSICAL_KIND:
            if self.q_min != 1.0 or self.q_max != 1.0:
                raise GridSpecError("the classical scan runs at q = 1 only")
        elif not (0 < self.q_min and self.q_max < 1):
            raise GridSpecError(f"q must stay inside (0, 1), got [{self.q_min}, {self.q_max}]")
        if not self.z_min > 0:
            raise GridSpecError(f"z_min must be positive, got {self.z_min}")
        if self.kind == RemainderKind.TAIL_I.value and not self.z_max < 1:
            raise GridSpecError(f"kind I needs z_max < 1, got {self.z_max}")

    @classmethod
    def default(cls, kind, **overrides):
        """Default grid for a kind, with selected fields replaced"""
        if kind not in DEFAULT_GRIDS:
            raise GridSpecError(f"no default grid for kind {kind!r}")
        params = dict(DEFAULT_GRIDS[kind])
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **params)

    def q_values(self):
        return _axis(self.q_min, self.q_max, self.q_steps)

    def n_values(self):
        return list(range(self.n_min, self.n_max + 1))

    def z_values(self):
        return _axis(self.z_min, self.z_max, self.z_steps, geometric=self.log_z)

    def points(self):
        """Grid points in q-major, then n, then z order"""
        return list(itertools.product(self.q_values(), self.n_values(), self.z_values()))

    @property
    def size(self):
        return self.q_steps * (self.n_max - self.n_min + 1) * self.z_steps


@dataclass(frozen=True)
class ScanRecord:
    kind: str
    q: float
    n: int
    z: float
    ratio: float
    lower_constant: float
    lower_margin: float
    upper_margin: float
    error_budget: float
    outcome: str

    @classmethod
    def from_verdict(cls, kind, q, n, z, verdict):
        return cls(kind, q, n, z, verdict.ratio, verdict.lower_constant, verdict.lower_margin,
                   verdict.upper_margin, verdict.error_budget, verdict.outcome.value)

    def to_row(self):
        return asdict(self)


@dataclass
class ScanSummary:
    total: int = 0
    counts: dict = field(default_factory=dict)
    min_lower_margin: float = math.nan
    min_lower_at: tuple = ()
    min_upper_margin: float = math.nan
    min_upper_at: tuple = ()

    @classmethod
    def from_records(cls, records):
        """Counts by outcome and the smallest margins with their grid locations"""
        summary = cls(total=len(records))
        tally = Counter(r.outcome for r in records)
        summary.counts = {outcome.value: tally[outcome.value] for outcome in TuranOutcome}
        if records:
            lowest = min(records, key=lambda r: r.lower_margin)
            summary.min_lower_margin = lowest.lower_margin
            summary.min_lower_at = (lowest.q, lowest.n, lowest.z)
            lowest = min(records, key=lambda r: r.upper_margin)
            summary.min_upper_margin = lowest.upper_margin
            summary.min_upper_at = (lowest.q, lowest.n, lowest.z)
        return summary

    @property
    def violated(self):
        return self.counts.get(TuranOutcome.VIOLATED.value, 0)

    @property
    def indeterminate(self):
        return self.counts.get(TuranOutcome.INDETERMINATE.value, 0)

    @property
    def certified(self):
        return self.counts.get(TuranOutcome.CERTIFIED.value, 0)

    def exit_code(self):
        if self.violated:
            return EXIT_VIOLATED
        if self.indeterminate:
            return EXIT_INDETERMINATE
        return EXIT_OK

    def as_dict(self):
        return {
            'Total Points': self.total,
            'Certified': self.certified,
            'Violated': self.violated,
            'Indeterminate': self.indeterminate,
            'Min Lower Margin': self.min_lower_margin,
            'Min Lower Margin At (q, n, z)': str(self.min_lower_at),
            'Min Upper Margin': self.min_upper_margin,
            'Min Upper Margin At (q, n, z)': str(self.min_upper_at),
        }


@dataclass
class ScanResult:
    spec: GridSpec
    records: list
    summary: ScanSummary


def evaluate_point(spec, q, n, z):
    """One verdict as a ScanRecord; a point the evaluators give up on becomes an indeterminate row"""
    try:
        if spec.kind == CLASSICAL_KIND:
            verdict = verify_alzer(z, n, spec.tol)
        else:
            verdict = verify_turan(spec.kind, QDomain(q, z, n), spec.tol)
    except QTuranError as e:
        log = logger.error if isinstance(e, CrossCheckError) else logger.warning
        log(f"no verdict at kind={spec.kind} q={q} n={n} z={z}: {e}")
        return ScanRecord(spec.kind, q, n, z, math.nan, math.nan, 0.0, 0.0, 0.0,
                          TuranOutcome.INDETERMINATE.value)
    return ScanRecord.from_verdict(spec.kind, q, n, z, verdict)


def scan(spec, workers=1):
    """verify_turan (or verify_alzer) at every grid point, in deterministic order"""
    if not isinstance(spec, GridSpec):
        raise GridSpecError(f"expected a GridSpec, got {type(spec).__name__}")
    if workers < 1:
        raise GridSpecError(f"workers must be at least 1, got {workers}")

    points = spec.points()
    logger.info(f"Scanning {len(points)} points of kind {spec.kind} with {workers} worker(s)")
    if workers == 1:
        records = [evaluate_point(spec, q, n, z) for q, n, z in points]
    else:
        # map() yields in submission order, whatever order the points finish in
        chunksize = max(1, len(points) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(partial(evaluate_point, spec), *zip(*points), chunksize=chunksize))

    summary = ScanSummary.from_records(records)
    logger.info(
        f"Scan finished: {summary.certified} certified, {summary.violated} violated, "
        f"{summary.indeterminate} indeterminate"
    )
    if summary.indeterminate:
        logger.warning(f"{summary.indeterminate} indeterminate point(s); smallest lower margin "
                       f"{summary.min_lower_margin:.3e} at {summary.min_lower_at}")
    return ScanResult(spec, records, summary)


def sharpness_sequence(z_max, z_min, steps):
    """Decreasing geometric z sequence from z_max down to z_min"""
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise GridSpecError(f"z_steps must be a positive integer, got {steps!r}")
    if not (0 < z_min and math.isfinite(z_max)):
        raise GridSpecError(f"sharpness z range must be positive and finite, got [{z_min}, {z_max}]")
    if steps == 1:
        return [float(z_max)]
    if not z_min < z_max:
        raise GridSpecError(f"z_min must be below z_max, got [{z_min}, {z_max}]")
    return np.geomspace(z_max, z_min, steps).tolist()


def run_sharpness(kind, q, n, z_sequence, tol=NUMERICS.default_tol):
    """sharpness_probe with argument problems reported as grid errors"""
    try:
        return sharpness_probe(kind, q, n, z_sequence, tol)
    except (QDomainError, IndexError) as e:
        raise GridSpecError(f"invalid sharpness request: {e}") from e


def emit_csv(records, path):
    """Write scan records to path (a file name or a text stream)"""
    return DataExporter().export_records_to_csv(records, path)


def emit_sharpness(kind, q, n, z_sequence, path, tol=NUMERICS.default_tol):
    """Run the sharpness probe and write z, ratio, best_constant, deviation"""
    report = run_sharpness(kind, q, n, z_sequence, tol)
    DataExporter().export_sharpness_to_csv(report.points, path)
    return report
