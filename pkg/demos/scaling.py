"""
Operation counts: HHL estimate against classical solvers
========================================================
"""

import numpy as np

from hhllab.bench import crossover_table, measured_ops
from hhllab.linalg import conjugate_gradient_run, gaussian_elimination

# unit constants everywhere; these show growth rates, not run times
table = crossover_table(s=2, k=2, eps=0.1, N_grid=[2 ** e for e in range(2, 21, 2)])
print(table.to_csv())
print("HHL estimate first below CG at N =", table.first_below("cg"))
print("HHL estimate first below Gaussian elimination at N =", table.first_below("gauss"))

# measured multiply-adds grow like N^3 / 3
rng = np.random.default_rng(1)
for n in (16, 32, 64, 128):
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    ops = measured_ops(gaussian_elimination(a, rng.normal(size=n)))
    print(n, ops, round(ops / (n ** 3 / 3), 3))

# CG on a spectrum with three distinct values needs three iterations
q, _ = np.linalg.qr(rng.normal(size=(50, 50)))
lam = rng.choice([1.0, 4.0, 9.0], size=50)
run = conjugate_gradient_run((q * lam) @ q.T, rng.normal(size=50))
print("CG iterations", run.iterations, "ops", run.ops)
