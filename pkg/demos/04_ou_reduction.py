# The fractional Ornstein-Uhlenbeck process inherits its variation from the
# driving fBm: V(X) - theta^2 V(B) -> 0 as the grid is refined.  Both are
# built from the same random draw here, so the gap is visible path by path.

import numpy as np

from orey import FracOU, Path, SeedPolicy, make_regular, normalized_qv, sample_frac_ou

spec = FracOU(0.4, mu=1.0, theta=1.5, x0=2.0)
print("%6s %12s %12s %12s" % ("N", "V(X)", "theta^2 V(B)", "mean gap"))
for N in (256, 512, 1024, 2048):
    p = make_regular(N)
    vx, vb, gaps = [], [], []
    for r in range(40):
        path = sample_frac_ou(spec, p, SeedPolicy(3, r))
        a = normalized_qv(path.centered(), spec.H)
        b = spec.theta ** 2 * normalized_qv(Path(p, path.driver), spec.H)
        vx.append(a)
        vb.append(b)
        gaps.append(abs(a - b))
    print("%6d %12.5f %12.5f %12.2e" % (N, np.mean(vx), np.mean(vb), np.mean(gaps)))
