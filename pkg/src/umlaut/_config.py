"""Numerical tolerances shared across the package.

All information quantities are computed in nats. Conversion to bits happens
only when results are rendered (see :func:`to_unit`).
"""

import math

HERM_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_TOL = 1e-9
# eigenvalues below SPEC_CUTOFF * max|eigenvalue| count as exact zeros
SPEC_CUTOFF = 1e-12
# support-inclusion decisions for the +inf branch of divergences
SUPP_TOL = 1e-8


def to_unit(value, base="nats"):
    if base == "nats":
        return value
    if base == "bits":
        return value / math.log(2)
    raise ValueError(f"unknown unit {base!r}; expected 'nats' or 'bits'")
