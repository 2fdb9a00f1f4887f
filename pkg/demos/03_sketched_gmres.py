"""sGMRES on a non-orthogonal sketch-and-select basis tracks GMRES closely."""
import math

import numpy as np

from ssarnoldi import ArnoldiConfig, generate, gmres, make_rhs, make_sketch, sgmres

a = generate("conv_diff_2d", grid=48, peclet=200.0)
b = make_rhs("gaussian", a.nrows, seed=4)

ref = gmres(a, b, 300, tol=1e-8, true_resid_stride=5)
m = ref.dims[-1]
s = 2 * (m + 1)
cfg = ArnoldiConfig.from_name("ssa-pinv", m_max=m + 20, k=5, s=s + 40)
rep = sgmres(a, b, cfg, make_sketch("srht", a.nrows, s + 40, seed=5), tol=1e-8, true_resid_stride=5)

print(f"GMRES converged in {m} steps; sGMRES stopped after {rep.dims[-1]} ({rep.stop_reason})")
print(f"{'j':>4} {'gmres':>12} {'sgmres':>12} {'ratio':>7} {'cond(V_j)':>11}")
gm = dict(zip(ref.dims, ref.true_resid))
for j, t, c in zip(rep.dims, rep.true_resid, rep.cond):
    if math.isnan(t) or j not in gm or math.isnan(gm[j]):
        continue
    print(f"{j:>4} {gm[j]:12.3e} {t:12.3e} {t / gm[j]:7.2f} {c:11.2e}")

# with eps = 1/sqrt(2) the sketch guarantees a ratio below (1+eps)/(1-eps), about 5.8
