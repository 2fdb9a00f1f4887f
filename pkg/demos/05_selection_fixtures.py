"""Small 4x3 example where the biggest coefficient is not the best vector to project out."""
import numpy as np

from ssarnoldi import select
from ssarnoldi.analysis import cond_after_projection, orthogonality_metrics, project_single
from ssarnoldi.selection import select_bruteforce

V = np.array([[1, 0, 0], [2, 2, 0], [0, 1, 1], [0, 0, 2]]) / np.sqrt(5)
w = np.array([8.0, 8, 9, 7])

print("V^+ w =", np.round(np.linalg.pinv(V) @ w, 2))
print("V^T w =", np.round(V.T @ w, 2))
for name in ["pinv", "pinv2", "corr", "corr-pinv", "omp", "sp", "greedy", "bruteforce"]:
    res = select(name, V, w, 1)
    print(f"{name:>10} projects out v{res.indices[0] + 1} with coefficient {res.coeffs[0]:.4f}")

print("\ncond after projecting against one column")
for i in range(3):
    raw, normed = cond_after_projection(V, w, i)
    print(f"  v{i + 1}: {raw:8.3f} unnormalized, {normed:7.3f} normalized")
best = select_bruteforce(V, w, 1, objective="cond").indices[0] + 1
print(f"best for conditioning: v{best}")

w2 = np.array([9.0, 9, 10, 10])
print("\nw = [9, 9, 10, 10]: loss-of-orthogonality metrics (new column normalized)")
for i in range(3):
    m = orthogonality_metrics(V, project_single(V, w2, i))
    print(f"  v{i + 1}: " + "  ".join(f"{k}={x:.4f}" for k, x in m.items()))
