# Second-order variations along irregular grids.
#
# On a grid whose consecutive step ratios l_k settle down, the normalised
# variation converges to 2 kappa^2 * integral of g(l(t)), not to the regular
# value.  g(l) = g(1/l), so a grid alternating steps h, 2h gives the same
# limit as one alternating 2h, h.

import numpy as np

from orey import (SubFBm, expected_qv, g_function, limit_value, make_alternating, make_regular,
                  orey_profile, ratio_profile)

spec = SubFBm(0.7)
prof = orey_profile(spec)

print("g on a few ratios, gamma = 0.7")
for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
    print("  g(%.2f) = %.6f" % (lam, g_function(lam, prof.gamma)))

print()
print("%8s %12s %12s %12s" % ("pairs", "E[V]", "limit", "rel err"))
for pairs in (128, 256, 512, 1024):
    p = make_alternating(2.0, pairs)
    e = expected_qv(spec, p, prof)
    lim = limit_value(prof, ratio_profile(p))
    print("%8d %12.6f %12.6f %12.2e" % (pairs, e, lim, abs(e - lim) / lim))

# Same number of points, regular grid: a different limit
p = make_regular(2048)
print()
print("regular grid limit %.6f vs alternating limit %.6f"
      % (limit_value(prof, ratio_profile(p)), limit_value(prof, ratio_profile(make_alternating(2.0, 1024)))))
