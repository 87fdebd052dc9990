"""
Solving a 2x2 system end to end
===============================

Walk through the HHL circuit for ``[[3/2, 1/2], [1/2, 3/2]] x = (0, 1)``,
printing the register state at each stage.
"""

import numpy as np

from hhllab import preprocess, run_hhl, verify_solution, worked_example

A, b = worked_example()
p = preprocess(A, b)

# eigenvalues 1 and 2 with t = pi/2 land exactly on clock values 1 and 2
print("eigenvalues:", p.eig.values)
print("clock qubits:", p.n_clock, " t:", p.t, " C:", p.C)

r = run_hhl(p)


def show(label):
    amps = r.snapshots[label].amplitudes
    print(label)
    for i in np.flatnonzero(np.abs(amps) > 1e-12):
        anc, clock, bit = i & 1, (i >> 1) & 3, i >> 3
        print(f"   a={anc} clock={clock:02b} b={bit}   {amps[i].real:+.4f}{amps[i].imag:+.4f}j")


# uniform clock superposition, then phases, then eigenvalues written into the clock
for label in ("phi2", "phi3", "phi4"):
    show(label)

# after the ancilla rotation the clock still holds the eigenvalues
show("phi6")

# uncomputation clears the clock; the a=1 rows carry x up to scale
show("phi9")

print("success probability", r.success_probability)
print("direction", np.round(r.direction.real, 6))
print("rescaled solution", np.round(r.rescaled_solution.real, 12))
print("classical", np.linalg.solve(A, b).real)

rep = verify_solution(p, r)
print("residual", rep.residual, "cosine", rep.cosine_similarity)

# a measurement shows only magnitudes: 1:9 in the ancilla=1 half of the histogram
shots = run_hhl(p, "shots", shots=4096, seed=42)
print(shots.histogram.counts, "ratio", shots.ratio_11_01)
