"""
Two-tailed p-values for a correlation coefficient
=================================================

The p-value of Pearson's r comes from the Student t tail with n - 2
degrees of freedom.  When r is reported to two decimals, the matching
p can only be bracketed over the rounding interval of r.
"""
import numpy as np

from denominal.stats import p_from_r, student_t_sf

for n, lo, hi, reported in [(291, 0.465, 0.475, 1.53e-17), (291, 0.255, 0.265, 8.73e-6),
                            (31, 0.505, 0.515, 0.0031), (31, 0.375, 0.385, 0.035)]:
    p_hi, p_lo = p_from_r(lo, n), p_from_r(hi, n)
    inside = p_lo <= reported <= p_hi
    print(f"n={n:3d} r in [{lo}, {hi}]: p in [{p_lo:.3g}, {p_hi:.3g}], reported {reported:g} inside: {inside}")

# The tail keeps its relative accuracy far from the centre, where 1 - cdf
# would have cancelled to zero long ago.
for t in (5.0, 10.0, 20.0):
    print(f"P(T > {t:4.1f}), df=289: {student_t_sf(t, 289):.3e}")

# With many degrees of freedom the t tail approaches the normal tail.
from statistics import NormalDist
ts = np.linspace(-6, 6, 121)
for df in (10, 100, 1000, 10000):
    gap = max(abs(student_t_sf(t, df) - (1 - NormalDist().cdf(t))) for t in ts)
    print(f"df={df:5d}: max gap to normal tail {gap:.2e}")
