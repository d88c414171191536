# %% [markdown]
# Exact recurrence versus spectral closed form
#
# A q-additive model is fixed by its closure (the last column of the
# companion matrix) and the values e_1..e_q at 1, a, ..., a^(q-1) copies.
# The recurrence gives exact rationals on the lattice; the closed form
# extends the law to any N >= 1.

# %%
import numpy as np
from fractions import Fraction

from qadditive import ScalingModel, closed_form_eval, oracle_eval
from qadditive.model import scalability_consistency_check

# %%
m = ScalingModel(3, (Fraction(1, 4), Fraction(2), Fraction(5)), closure=(Fraction(3, 2), -2, Fraction(5, 2)))
sp = m.spectrum
print("eigenvalues:", sp.roots)
print("multiplicities:", sp.multiplicities)
print("flags:", sp.flags)

# %%
for n in range(9):
    exact = oracle_eval(m, n)
    approx = closed_form_eval(m, 3.0 ** n)
    print(f"{3 ** n:6d} {float(exact):16.8f} {approx:16.8f} {abs(approx - float(exact)):.1e}")

# %% [markdown]
# Off the lattice only the closed form is available.

# %%
Ns = np.linspace(1, 30, 8)
print(np.column_stack([Ns, closed_form_eval(m, Ns) / Ns]))

# %% [markdown]
# Splitting N = a^n as a^k groups of a^(n-k) copies gives the same value,
# exactly.

# %%
print(max(scalability_consistency_check(m, 8, k).residual for k in range(9)))
