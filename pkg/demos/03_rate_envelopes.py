"""Check the theoretical rate guarantees against ensemble behavior.

Two envelopes:
* the sublinear expected-gap bound, which holds under convexity alone, and
* the geometric envelope under strong convexity in the weighted norm.

Both are expectations, so the comparison averages many seeded runs.  The
ensemble mean must sit below each curve; the printout shows by how much.
"""

import numpy as np

from pbcd import (RateBundle, SamplerConfig, SolverConfig,
                  bundle_from_reference, estimate_strong_convexity,
                  generate_lasso, linear_rate_strongly_convex,
                  reference_solution, run, sublinear_gap_bound)
from pbcd.generators import lasso_from_matrix
from pbcd.matrixio import MatrixFile

SEEDS = 30

print("== sublinear envelope on a sparse lasso instance ==")
gen = generate_lasso(m=90, n=100, sparsity=0.04, lam=1.0, seed=21)
problem = gen.problem
xstar, fstar, _ = reference_solution(problem, tol=1e-10)
x0 = np.zeros(problem.n)
batch, kmax = 5, 400
gaps = []
for seed in range(SEEDS):
    cfg = SolverConfig(mode="rcd", sampler=SamplerConfig(batch, seed=seed),
                       max_iters=kmax, trace_stride=1)
    gaps.append(np.array(run(problem, cfg, x0).trace.objectives) - fstar)
mean_gap = np.mean(gaps, axis=0)
bundle = bundle_from_reference(problem, x0, xstar, fstar, batch)
print(f"distance surrogate {bundle.radius:.4f}, initial gap "
      f"{bundle.initial_gap:.4f}, batch {batch}")
print("    k    mean gap      bound        mean/bound")
for k in (0, 10, 50, 100, 200, 400):
    bound = sublinear_gap_bound(bundle, k)
    print(f"  {k:4d}  {mean_gap[k]:.4e}  {bound:.4e}  {mean_gap[k] / bound:8.4f}")

print("\n== geometric envelope on a strongly convex instance ==")
rng = np.random.Generator(np.random.Philox(3))
n = 24
rows = list(range(n)) + [n + i for i in range(6) for _ in range(4)]
cols = list(range(n)) + [int(c) for i in range(6)
                         for c in rng.choice(n, 4, replace=False)]
vals = [float(v) for v in rng.uniform(0.9, 1.5, size=n)] + \
       [float(0.4 * rng.normal()) for _ in range(24)]
mat = MatrixFile(rows=n + 6, cols=n, row_idx=rows, col_idx=cols, values=vals)
sc_problem = lasso_from_matrix(mat, rng.normal(size=n + 6), lam=0.2)
sigma = estimate_strong_convexity(sc_problem)
print(f"strong convexity modulus in the weighted norm: {sigma:.4f}")
xstar, fstar, _ = reference_solution(sc_problem, tol=1e-11)
x0 = np.ones(n)
gap0 = sc_problem.objective(x0) - fstar
batch = 4
factor = linear_rate_strongly_convex(
    RateBundle(num_blocks=n, batch_size=batch, strong_convexity=sigma))
gaps = []
for seed in range(SEEDS):
    cfg = SolverConfig(mode="rcd", sampler=SamplerConfig(batch, seed=seed),
                       max_iters=300, trace_stride=1)
    gaps.append(np.array(run(sc_problem, cfg, x0).trace.objectives) - fstar)
mean_gap = np.mean(gaps, axis=0)
print(f"per-iteration contraction bound: {factor:.5f}")
print("    k    mean gap      envelope     mean/envelope")
for k in (0, 25, 50, 100, 200, 300):
    env = gap0 * factor ** k
    print(f"  {k:4d}  {mean_gap[k]:.4e}  {env:.4e}  {mean_gap[k] / env:8.4f}")
