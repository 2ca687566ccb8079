"""Numerical knobs and default scan grids.

Everything tunable lives here so the evaluation modules stay free of magic
numbers. Nothing is read from the environment.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericSettings:
    """Constants for truncation control and verdict classification"""

    # multiplier applied to propagated error bounds before classifying a verdict
    safety_factor: float = 8.0
    # hard cap on series length; in-domain series finish far below it
    max_terms: int = 200_000
    default_tol: float = 1e-12
    # verdict margins are summed to rounding level whatever tol the caller asks for
    margin_tol: float = 1e-15
    # SmallE series above this z needs O(1/(1-z)) terms
    boundary_z: float = 0.9
    boundary_widening: float = 1e3
    # extended-precision digits used by the oracle helpers in tests
    oracle_dps: int = 50


NUMERICS = NumericSettings()

# per-kind default grids: (q_min, q_max, q_steps, n_min, n_max, z_min, z_max, z_steps, log_z)
DEFAULT_GRIDS = {
    'I': {
        'q_min': 0.05, 'q_max': 0.95, 'q_steps': 19,
        'n_min': 1, 'n_max': 10,
        'z_min': 0.05, 'z_max': 0.95, 'z_steps': 19,
        'log_z': False,
    },
    'E': {
        'q_min': 0.05, 'q_max': 0.95, 'q_steps': 19,
        'n_min': 1, 'n_max': 10,
        'z_min': 0.1, 'z_max': 10.0, 'z_steps': 25,
        'log_z': True,
    },
    # classical mode scans x in place of z
    'A': {
        'q_min': 1.0, 'q_max': 1.0, 'q_steps': 1,
        'n_min': 1, 'n_max': 10,
        'z_min': 0.1, 'z_max': 10.0, 'z_steps': 25,
        'log_z': True,
    },
}

SHARPNESS_DEFAULTS = {
    'q': 0.5,
    'n': 1,
    'z_max': 1e-1,
    'z_min': 1e-6,
    'z_steps': 6,
}

CSV_COLUMNS = [
    'kind', 'q', 'n', 'z', 'ratio', 'lower_constant',
    'lower_margin', 'upper_margin', 'error_budget', 'outcome',
]

SHARPNESS_COLUMNS = ['z', 'ratio', 'best_constant', 'deviation']
