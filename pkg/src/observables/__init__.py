"""Correlators, quadratic expectations and persistent currents."""

from .correlators import distribution, correlator_matrix, expect_quadratic
from .currents import (
    DELTA_PHI,
    ZERO_GUARD,
    CurrentCurve,
    trace_functional,
    thermal_functional,
    persistent_current_trace,
    persistent_current_trace_ph,
    persistent_current_finiteT,
    current_lr,
    current_rr,
    current_rr_site_resolved,
    operator_current_site_resolved,
    isolated_current,
)

__all__ = [
    'distribution',
    'correlator_matrix',
    'expect_quadratic',
    'DELTA_PHI',
    'ZERO_GUARD',
    'CurrentCurve',
    'trace_functional',
    'thermal_functional',
    'persistent_current_trace',
    'persistent_current_trace_ph',
    'persistent_current_finiteT',
    'current_lr',
    'current_rr',
    'current_rr_site_resolved',
    'operator_current_site_resolved',
    'isolated_current',
]
