"""A small Dolan-More profile of basis dimension reached before cond > 1e8."""
import numpy as np

from ssarnoldi import ArnoldiConfig, arnoldi_run, generate, make_rhs, make_sketch, performance_profile

problems = {
    "cd32-pe0": ("conv_diff_2d", dict(grid=32, peclet=0.0)),
    "cd32-pe300": ("conv_diff_2d", dict(grid=32, peclet=300.0)),
    "cd48-pe1000": ("conv_diff_2d", dict(grid=48, peclet=1000.0)),
    "toep-a": ("tridiag_toeplitz", dict(n=1500, a=4.0, b=-1.0, c=-2.0)),
    "toep-b": ("tridiag_toeplitz", dict(n=1500, a=1.0, b=-1.0, c=-3.0)),
}
methods = ["truncated", "ssa-pinv", "ssa-omp", "ssa-sp", "ssa-corr"]
m, k, s = 100, 3, 202

table = np.zeros((len(methods), len(problems)))
for p, (gen, params) in enumerate(problems.values()):
    a = generate(gen, **params)
    b = make_rhs("gaussian", a.nrows, seed=2)
    sketch = make_sketch("srht", a.nrows, s, seed=3)
    for i, name in enumerate(methods):
        cfg = ArnoldiConfig.from_name(name, m_max=m, k=k, s=s, cond_threshold=1e8)
        state, _ = arnoldi_run(a, b, cfg, sketch)
        table[i, p] = state.dim_reached

print("dimension reached")
print(" " * 12 + "".join(f"{name:>13}" for name in problems))
for name, row in zip(methods, table):
    print(f"{name:<12}" + "".join(f"{int(x):>13d}" for x in row))

prof = performance_profile(table, methods, list(problems))
print("\nprofile (theta, fraction of problems within theta of the best)")
for name in methods:
    print(f"{name:<12}", ", ".join(f"({t:.2f}, {y:.2f})" for t, y in prof.curves[name]))
