# %% [markdown]
# Fitting a scaling law to data
#
# With exponents fixed the e-vector enters linearly.  Unknown exponents
# are searched on a grid and polished jointly.

# %%
import numpy as np

from qadditive import ScalingModel, closed_form_eval
from qadditive.fit import FitProblem, fit_evector, fit_exponents

# %%
truth = ScalingModel(2, (0.4, 1.7), exponents=(1.0, 0.5))
N = 2.0 ** np.arange(8)
E = closed_form_eval(truth, N)
r = fit_exponents(FitProblem(N, E, 2, 2))
print("exponents", r.exponents)
print("e-vector ", r.evector)
print("rms      ", r.rms)

# %% [markdown]
# Noisy data with the OSD exponents held fixed.

# %%
rng = np.random.default_rng(3)
osd = ScalingModel(6, (0.0, 1.0, 18.648), exponents=(1.0, 0.5, 0.0))
N = np.arange(1.0, 41.0)
E = closed_form_eval(osd, N) * (1 + 0.01 * rng.standard_normal(N.size))
E[0] = 0.0
r = fit_evector(FitProblem(N, np.clip(E, 0, None), 6, 3, exponents=(1.0, 0.5, 0.0)))
print(r.evector, r.rms)
print([(c.name, c.satisfied) for c in r.feasibility])
