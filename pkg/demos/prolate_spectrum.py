"""
Prolate matrix spectra in multiprecision
========================================

The finite sections Q = (alpha sinc(alpha (j-k))) have about alpha*N
eigenvalues near 1 and the rest plunge to 0 exponentially fast.  The small
ones are far below double precision, so they are computed with gmpy2.
"""

import numpy as np

from modfold.prolate import minkowski_bound, plunge_fit, prolate_matrix, spectrum

r = spectrum(prolate_matrix(0.5, 64), epsilon=0.1)
print("working precision (bits):", r.bits)
print("largest eigenvalues: ", np.round(r.eigenvalues[:3], 6))
print("around the plunge:   ", np.round(r.eigenvalues[30:36], 4))
print("smallest eigenvalue: ", r.eigenvalues[-1])
print("sum of eigenvalues:  ", r.eigenvalues.sum(), "(alpha N = 32)")

# The eigenvalue just past the plunge decays exponentially with N.
slope, _ = plunge_fit(0.5, [16, 32, 48], epsilon=0.1)
print("fitted log-decay per N:", slope)

# The Minkowski bound on the shortest integer vector shrinks with N.
for N in (4, 16, 32):
    print(f"N = {N:2d}: Minkowski bound {minkowski_bound(prolate_matrix(0.3, N)):.3e}")
