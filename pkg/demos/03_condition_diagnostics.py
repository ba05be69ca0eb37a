# How fast does sigma(t, t+h) / (kappa h^gamma) approach 1?
#
# Lambda(delta) is the worst relative deviation over t in [phi(delta), T - delta]
# and h <= delta.  Each family has a closed-form upper bound.  For the
# fractional bridge with H >= 1/2 the bound with constant H^2 is exceeded;
# the derivative of the pinning term is a sum of two powers, not a
# difference, and 4 H^2 is the constant that holds.

from orey import BiFBm, FBm, FBridge, Power, SubFBm, lambda_sweep, remark_check, remark_constant

deltas = (0.04, 0.02, 0.01, 0.005, 0.0025)
for spec in [FBm(0.4), SubFBm(0.7), BiFBm(0.8, 0.5), FBridge(0.3), FBridge(0.6)]:
    rep = lambda_sweep(spec, phi=Power(0.2), deltas=deltas)
    print(repr(spec))
    for d, lam, b in zip(rep.deltas, rep.lambdas, rep.bounds):
        print("   delta %.4f  Lambda %.5f  bound %.5f  %s" % (d, lam, b, "ok" if lam <= b else "EXCEEDED"))

fixed = lambda_sweep(FBridge(0.6), deltas=deltas, corrected=True)
print("bridge H=0.6 with the 4 H^2 constant:", "holds" if fixed.passed else "fails")

# Without the boundary layer phi the sub-fractional deviation does not vanish.
print()
for H in (0.6, 0.75, 0.9):
    rep = remark_check(H)
    print("H = %.2f: sup near 0 stays at %.4f, constant %.4f" % (H, rep.sups.min(), remark_constant(H)))
