"""Majority dynamics on random graphs and expanders.

The package covers graph generation and the synchronous majority step. On
top of these sit spectral checks and audits for regular expanders, and a
seeded Monte Carlo harness with a file-based CLI.
"""

from .dynamics import (Configuration, TrajectoryReport, controlled_set, controls, evolve, is_dynamo,
                       majority_step, min_dynamo_exhaustive, random_configuration)
from .errors import (DataError, MajorityLabError, NumericalError, PeriodNotDetectedError,
                     PreconditionError, UsageError)
from .generators import GenSpec, gen_gnp, gen_lps_ramanujan, gen_named, gen_random_regular
from .graph import Graph, NodeSet, degree, edge_count_between, load_edgelist, save_edgelist, validate
from .spectral import SpectralReport, lambda_second, mixing_audit

__version__ = "0.1.0"
