"""
Folding and the toral metric
============================

A folding ADC reports each sample modulo 2*lam, reduced into [-lam, lam).
Distances between folded values only make sense on the torus.
"""

import numpy as np

from modfold import BandlimitedSignal, SeparatedSet, fold, toral_dist, toral_seq_dist

lam = 0.5

# Values that differ by a multiple of 2*lam fold to the same point.
x = np.array([-1.3, -0.2, 0.3, 0.75, 2.3])
print("raw     ", x)
print("folded  ", fold(x, lam))

# Across the wrap-around point, the torus sees two nearby values as nearby.
print("toral distance between 0.49 and -0.49:", toral_dist(0.49, -0.49, lam))

# The unit sinc atom on the integers is 1 at the origin and 0 elsewhere.
# Folding at lam = 1/2 maps 1 to 0, so it cannot be told apart from zero.
X = SeparatedSet.centered(1.0, 11)
f = BandlimitedSignal.atom(1.0)
print("folded sinc on Z:", np.round(fold(f(X.points), lam), 15) + 0.0)
print("toral distance to the zero signal:", toral_seq_dist(fold(f(X.points), lam), np.zeros(len(X)), lam))
