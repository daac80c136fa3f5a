"""Central numeric defaults.

Every tunable default lives here so CLI flags, library calls and the test
suite agree on one source of truth.  Environment overrides are deliberately
limited to the RNG seed (SPLITDYN_SEED) and thread count (SPLITDYN_THREADS).
"""

import os

#: default RNG seed for every sampling operation
DEFAULT_SEED = int(os.environ.get("SPLITDYN_SEED", "0"))

#: worker hint for sampling; the reference implementation runs sequentially
#: but merges in fixed order, so the value only caps future parallelism
DEFAULT_THREADS = int(os.environ.get("SPLITDYN_THREADS", "1"))

#: default tolerance for height limits and root polishing
DEFAULT_TOL = 1e-9

#: total coefficient-bit budget for exact polynomial results (see poly.py);
#: turns runaway coefficient blowup into a clean ResourceBudgetError
DEFAULT_BIT_BUDGET = 1 << 20

#: burn-in steps for the backward-orbit measure sampler
DEFAULT_BURN_IN = 50

#: default sample count for empirical measures
DEFAULT_SAMPLES = 10_000

#: fixed, versioned test-function dictionary for measure discrepancy;
#: the thresholds below were calibrated against the Monte Carlo
#: self-distance of repeated samplings at DEFAULT_SAMPLES
DISCREPANCY_DICTIONARY_VERSION = "v1"
DISCREPANCY_SAME_THRESHOLD = 0.05
DISCREPANCY_DISTINCT_THRESHOLD = 0.15

#: escape-time rendering defaults
DEFAULT_RENDER_WINDOW = 2.0
DEFAULT_RENDER_ITERATIONS = 96

#: hard cap on points enumerated when searching for rational preperiodic
#: points (pairs (a, b) scanned), beyond which a ResourceBudgetError is raised
ENUMERATION_BUDGET = 2_000_000
