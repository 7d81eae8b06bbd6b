import math

# agnostic base measures (median of G_0 equal to one)
POISSON_AGNOSTIC_LAMBDA = 0.6954
GEOMETRIC_AGNOSTIC_P = 1.0 - math.sqrt(2.0) / 2.0

PMF_SUM_TOL = 1e-12
MEDIAN_CDF_TOL = 1e-12
# tail mass below which a base measure is treated as exhausted
BASE_TAIL_TOL = 1e-12
# laws with |m - 1| within this band are critical
CRITICAL_MEAN_TOL = 1e-12

SUPERCRITICAL_THRESHOLD = 1.0
PROBABILITY_THRESHOLD = 0.5
