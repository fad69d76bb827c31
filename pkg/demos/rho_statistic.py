"""How strongly does the threshold shrink differences?

For random pairs of nonnegative matrices the ratio
||T(A) - T(B)|| / ||A - B|| is far below its worst-case bound of one. The
ratios are written to rho.txt for plotting elsewhere.
"""

import numpy as np

import hopr

for n in (100, 200, 400):
    rhos = hopr.rho_experiment(n, 200, seed=0)
    print(f"n={n:4d}  max rho {max(rhos):.4f}  mean {np.mean(rhos):.4f}")

raw = hopr.rho_experiment(200, 50, seed=0, normalize=False)
print(f"without normalizing the draws: max rho {max(raw):.4f}")

hopr.write_rho_table("rho.txt", hopr.rho_experiment(200, 2000, seed=0))
print("wrote rho.txt")
