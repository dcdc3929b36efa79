"""
Integer sequences that defeat folded sampling
=============================================

On the grid alpha*Z with alpha < 1, some integer sequences lie very close to
the range of the sampling operator.  Each yields a bandlimited function whose
folded samples are nearly zero although its energy is large.
"""

import math

from modfold.certificates import (
    binomial_bound,
    binomial_certificate,
    chebyshev_certificate,
    critical_function,
    svp_certificate,
)

alpha, lam = 0.7, 0.5

# Binomial sequences: the residual decays geometrically once alpha > 2/3.
print(" N   residual      bound")
for N in (1, 5, 10, 20, 40):
    cert = binomial_certificate(N, alpha)
    print(f"{N:2d}   {cert.residual:.3e}   {binomial_bound(N, alpha):.3e}")
print("ratio of the bound:", 2 * math.sin(math.pi * (1 - alpha) / 2))

# Integer Chebyshev polynomials and lattice reduction give competing sequences.
print("chebyshev degree 4:", chebyshev_certificate(4, 0.8, 5).residual)
print("binomial order 4:  ", binomial_certificate(4, 0.8).residual)
print("exact SVP, N = 8:  ", svp_certificate(alpha, 8, "exact").residual)

# The critical function turns a sequence into a signal with tiny folded samples.
cf = critical_function(binomial_certificate(43, alpha), lam)
print(f"N = 43: folded norm {cf.folded_norm:.2e}, energy {cf.energy:.2e}")
