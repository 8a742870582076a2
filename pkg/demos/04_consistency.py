# %% [markdown]
# # Recovering the classical solution
#
# With regular coefficients the eps-net converges to the classical
# solution.  The mollifier is one-sided, so a Lipschitz coefficient is
# reproduced with an error of order omega(eps).

# %%
import numpy as np

from latheat import CoefficientModel, GridFunction, HeatProblem, LatticeSpec, Mollifier, Oscillation, Polynomial, PowerSchedule, consistency_experiment

spec = LatticeSpec(1, 0.25, 16)
u0 = GridFunction.from_function(spec, lambda x: np.exp(-(x**2)))
problem = HeatProblem(spec, 0.75, 1.0, u0, a=CoefficientModel(Polynomial((1.0, 0.5))), b=CoefficientModel(Oscillation(0.0, 1.0)))

# %% [markdown]
# Under the logarithmic schedule omega only falls from 0.42 to 0.11 over
# eps = 2^-2 .. 2^-12.  The distance therefore shrinks steadily but slowly,
# with slope 1 against omega.

# %%
rep = consistency_experiment(problem)
for e, w, v in zip(rep.parameter_grid, rep.fit_x, rep.values):
    print(f"eps=2^{int(np.log2(e)):3d}  omega={w:.4f}  ||u_eps - u||={v:.3e}")
print(f"slope vs omega {rep.fitted_slope:.3f}; final relative distance {rep.extra['relative_final']:.2e}; flags {rep.passed}")

# %% [markdown]
# A power schedule omega = eps shrinks the mollifier much faster.

# %%
rep = consistency_experiment(problem, 2.0 ** -np.arange(1, 9), Mollifier(PowerSchedule(1.0)))
print(f"power schedule: slope {rep.fitted_slope:.3f}; final relative distance {rep.extra['relative_final']:.2e}; flags {rep.passed}")
