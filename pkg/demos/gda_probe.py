"""Hessian-free curvature probes: gradient differences vs exact
Hessian-vector products, and where the second-order remainder bound lives.

For a displacement d, the probe g(w + d) - g(w) approximates H(w) d with
error at most (L/2) ||d||^2 whenever L also controls how fast the Hessian
itself changes along the segment.  Quadratics are exact; a quartic shows the
quadratic shrinkage of the remainder; and near the quartic's center the
plain gradient-Lipschitz constant is too small for the bound (the documented
boundary of validity).
"""

import numpy as np

from amsfl import Quadratic, Quartic, gda_remainder, gradient_difference

rng = np.random.default_rng(0)

print("Quadratic: probe equals the Hessian product exactly")
A = np.array([[2.0, 0.3], [0.3, 1.0]])
quad = Quadratic(A, np.zeros(2))
w, d = rng.standard_normal(2), np.array([0.3, -0.1])
probe = gradient_difference(quad, w, d)
exact = quad.hessian_vector(w, d)
print(f"  probe  {probe}")
print(f"  exact  {exact}")
print(f"  |difference| = {np.linalg.norm(probe - exact):.2e}")

print("\nQuartic at distance 3 from its center: remainder shrinks like ||d||^2")
quartic = Quartic(np.zeros(2), 0.25)
w = np.array([3.0, 0.0])
print(f"  {'||d||':>8} {'remainder':>12} {'bound (L/2)||d||^2':>20} {'ratio':>8}")
for scale in (0.8, 0.4, 0.2, 0.1, 0.05):
    d = scale * np.array([0.6, 0.8])
    L = quartic.smoothness_constants(scale / 2 + 1e-9, w + d / 2).L
    rep = gda_remainder(quartic, w, d, L)
    print(f"  {scale:8.2f} {rep.remainder_norm:12.3e} {rep.bound:20.3e} {rep.remainder_norm / rep.bound:8.3f}")

print("\nSame quartic, segment close to the center: the gradient-Lipschitz")
print("constant no longer dominates the Hessian's variation and the bound fails")
w, d = np.array([0.5, 0.0]), np.array([0.1, 0.0])
L = quartic.smoothness_constants(0.05 + 1e-9, w + d / 2).L
rep = gda_remainder(quartic, w, d, L)
print(f"  remainder {rep.remainder_norm:.4e} vs bound {rep.bound:.4e}  satisfied: {rep.satisfied}")
print("  (verification sweeps therefore draw quartic segments at distance >= 2.2)")
