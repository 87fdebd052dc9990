"""
How gate errors wash out the answer
===================================

Run the 2x2 circuit on the density-matrix backend while the two-qubit
depolarizing rate grows from 0 to 0.15.
"""

from hhllab import preprocess, worked_example
from hhllab.noise import NoiseModel, noise_sweep

p = preprocess(*worked_example())
grid = [0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15]

sweep = noise_sweep(p, grid, base=NoiseModel.transmon())
print("ideal", sweep.ideal)

print(" p_2q    P11(2q)  P11(full)  P01(2q)  P01(full)")
for g, a, b, c, d in zip(
    grid,
    sweep.series("2q_only", "11"),
    sweep.series("full", "11"),
    sweep.series("2q_only", "01"),
    sweep.series("full", "01"),
):
    print(f"{g:5.3f}   {a:.4f}   {b:.4f}     {c:.4f}   {d:.4f}")

# with T1/T2 and readout error on top, P11 sits lower at every rate
# and the wrong answer 01 fills in toward 1/4

with open("sweep.csv", "w") as fh:
    fh.write(sweep.to_csv())
