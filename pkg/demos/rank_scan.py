"""Square classes and the maximal-rank check on a small index range."""

from thetanv.cyclotomic import exact_rank
from thetanv.theta_matrix import EpsilonContext, build_class_matrix, scan_theorem1, square_class

print(square_class(3, 5, 1))
ctx = EpsilonContext.make(3, 3, 5)
mat = build_class_matrix(ctx, 1)
print("class matrix", mat.shape, "rank", exact_rank(mat))

r = scan_theorem1(35)
print(f"index <= 35: {r['cells']} cells, {r['passes']} full rank, {r['crt_checks']} CRT checks")

# even m2 is where it breaks
r = scan_theorem1(10, include_even=True, crt=False)
print("with even m2:", len(r["failures"]), "deficient cells, e.g.", r["failures"][:3])
