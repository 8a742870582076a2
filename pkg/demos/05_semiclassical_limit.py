# %% [markdown]
# # From the lattice to the continuum
#
# As h -> 0 the lattice symbol h^{-2 alpha}[sum 4 sin^2(pi h xi)]^alpha
# tends to |2 pi xi|^{2 alpha}.  The data below have the same Fourier modes
# on every lattice with box length 4, so only the symbol changes.

# %%
import numpy as np

from latheat import BandLimited, CoefficientModel, Constant, LimitProblem, semiclassical_experiment
from latheat.experiments import single_mode_error

u0 = BandLimited.gaussian(1, 4.0, max_mode=2, width=0.5)
for alpha in (0.5, 1.0):
    rep = semiclassical_experiment(LimitProblem(u0, alpha))
    errs = "  ".join(f"{e:.2e}" for e in rep.values)
    print(f"alpha={alpha}: max_t error per h: {errs}")
    print(f"           fitted slope {rep.fitted_slope:.3f} (threshold {2 * alpha - 0.3})")

# %% [markdown]
# The error falls like h^2 for both orders.  The expansion
# 4 sin^2(x) = 4x^2 (1 - x^2/3 + ...) makes the relative symbol error
# O(h^2) at fixed frequency, which is faster than the h^{2 alpha}
# that a Hoelder argument guarantees once alpha < 1.
#
# A single mode has a closed-form error.

# %%
lp = LimitProblem(BandLimited.single(1, 4.0, 3), 0.5)
rep = semiclassical_experiment(lp)
for h, e in zip(rep.parameter_grid, rep.values):
    print(f"h={h:.5f}  solver {e:.10e}  closed form {max(single_mode_error(lp, h, t) for t in rep.times):.10e}")

# %% [markdown]
# The same holds for the regularised problem with b = delta + H at a fixed eps.

# %%
b = CoefficientModel(Constant(0.0), ((0.0, 1.0),), ((0.0, 1.0),))
for eps in (2.0**-4, 2.0**-8):
    rep = semiclassical_experiment(LimitProblem(u0, 1.0, b=b), eps=eps)
    print(f"eps={eps}: slope {rep.fitted_slope:.3f}")
