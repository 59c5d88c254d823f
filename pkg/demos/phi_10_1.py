"""The weight 10 index 1 cusp form: build it, lift it, split it into theta components."""

from thetanv.jacobi import (
    V_ell,
    build_witness,
    check_primitive_nonvanishing,
    construct_phi_10_1,
    numeric_verify_transform,
    theta_decompose,
    theta_recombine,
)

phi = construct_phi_10_1(40)
print("c(1,1), c(1,0), c(2,0) =", phi.coeff(1, 1), phi.coeff(1, 0), phi.coeff(2, 0))

h = theta_decompose(phi)
for mu, comp in enumerate(h.components):
    print(f"h_{mu}: valuation {comp.valuation()}/{comp.denom}")
print("round trip:", theta_recombine(h, weight=10, cusp=True).same_form(phi))

for ell in (3, 5, 7):
    r = check_primitive_nonvanishing(V_ell(phi, ell))
    print(f"V_{ell}: nonzero primitive components {r['primitive_nonzero']}")

r = numeric_verify_transform(3)
print(f"transformation residual {r['max_residual']:.1e}, unconjugated {r['max_residual_unconjugated']:.1e}")

w = build_witness(7, 3, 19)
print("witness", w.entries, "4 det =", 4 * w.det())
