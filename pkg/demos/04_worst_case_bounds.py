"""Worst-case growth of cond([V, v]) when v couples to V by alpha = sigma_min / 2."""
import math

import numpy as np

from ssarnoldi import adversarial_next_vector, bound_report, decay_recurrence
from ssarnoldi.analysis import adversarial_replay, geometric_envelope

rng = np.random.default_rng(0)
v = rng.standard_normal((50, 6))
v /= np.linalg.norm(v, axis=0)
sigma = np.linalg.svd(v, compute_uv=False)
alpha = 0.5 * sigma[-1]

vstar = adversarial_next_vector(v, alpha)
rep = bound_report(v, vstar)
print(f"sigma_min(V)^2         {sigma[-1] ** 2:.6f}")
print(f"lower bound            {rep.lower_bound_sigma_min_sq:.6f}")
print(f"attained by v*         {rep.measured_sigma_min_sq:.6f}")
print(f"cond^2 upper bound     {rep.upper_bound_cond_sq:.4f}")
print(f"cond^2 measured        {rep.measured_cond_sq:.4f}")
print(f"gap factor / (m+1)     {rep.gap_factor / 7:.3f}")

# the scalar recurrence and the matrix replay agree step by step
x0 = 1 / math.sqrt(2)
xs = decay_recurrence(x0, 0, 40)
env = geometric_envelope(x0, 40)
_, replay = adversarial_replay(np.eye(60)[:, :1], 40)
print("\n  m   recurrence    (7/8)^(m/2) x0   replay from e1")
for i in range(0, 41, 5):
    print(f"{i:>3}   {xs[i]:.6f}      {env[i]:.6f}         {replay[i]:.6f}")
