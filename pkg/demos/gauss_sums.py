"""Quadratic Gauss sums two ways, and the theta multiplier they feed into."""

from thetanv.gauss import GaussSumSpec, gauss_closed, gauss_direct, gauss_verify_range
from thetanv.theta_matrix import EpsilonContext, epsilon_closed, epsilon_def, verify_epsilon_identity

for a, b, c in [(1, 0, 5), (1, 2, 4), (3, 1, 8), (2, 0, 12), (5, 3, 9)]:
    s = GaussSumSpec(a, b, c)
    direct, closed = gauss_direct(s), gauss_closed(s)
    print(f"G({a},{b},{c}) = {closed.embed():.6f}   exact match: {direct == closed}")

r = gauss_verify_range(30)
print("sweep c <= 30:", r["checked"], "triples,", len(r["failures"]), "failures")
print("  by case:", r["case_counts"])

# eps is a scaled Gauss sum; it vanishes on the "wrong" differences
ctx = EpsilonContext.make(15, 3, 7)
print("eps(1, 1) =", epsilon_def(ctx, 1, 1).embed(), "closed:", epsilon_closed(ctx, 1, 1).embed())
print("eps(1, 2) =", epsilon_def(ctx, 1, 2).embed())
rep = verify_epsilon_identity(ctx)
print("identity on", rep["pairs"], "pairs, mismatches:", rep["mismatches"])
