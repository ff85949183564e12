"""Confidence bounds on individual welfare loss under random quasilinear demand.

Thin re-export of the C++ core; see ``help(qlwelfare._core)``.
"""

from ._core import (
    GoodSample,
    Interval,
    IntervalSource,
    QlwError,
    bonferroni_share,
    critical_value,
    cs_combined,
    cs_xi,
    draw_sample,
    fit_inverse_demand,
    ingest_csv,
    intersect,
    shape_diagnostic,
    theta_interval_delta,
    welfare_bounds,
    welfare_loss,
    xi,
    xi_statistic,
)

__all__ = [
    "GoodSample",
    "Interval",
    "IntervalSource",
    "QlwError",
    "bonferroni_share",
    "critical_value",
    "cs_combined",
    "cs_xi",
    "draw_sample",
    "fit_inverse_demand",
    "ingest_csv",
    "intersect",
    "shape_diagnostic",
    "theta_interval_delta",
    "welfare_bounds",
    "welfare_loss",
    "xi",
    "xi_statistic",
]
