# %% [markdown]
# # The discrete fractional Laplacian
#
# On the lattice hZ^n the operator (-L_h)^alpha acts as a convolution with
# coefficients a_j.  They are the Fourier coefficients of the periodic symbol
# [sum_l 4 sin^2(pi xi_l)]^alpha, computed here with the trapezoidal rule.

# %%
import numpy as np

from latheat import GridFunction, LatticeSpec, apply_spectral, apply_stencil, stencil_coefficients, symbol

# %% [markdown]
# For alpha = 1 the kernel is the familiar nearest-neighbour Laplacian.

# %%
k = stencil_coefficients(1.0, 2, 2, 64)
print("alpha = 1, n = 2 kernel (rows j1, columns j2):")
print(np.round(k.coeffs, 12))

# %% [markdown]
# Fractional orders have infinitely many nonzero coefficients.  They are
# negative off the centre and decay like |j|^{-1-2 alpha}.

# %%
for alpha in (0.25, 0.5, 0.75):
    c = stencil_coefficients(alpha, 1, 32).coeffs[32:]
    slope = np.polyfit(np.log(np.arange(8, 33)), np.log(-c[8:]), 1)[0]
    print(f"alpha={alpha}: a_0={c[0]:.6f}  a_1={c[1]:.6f}  tail exponent {slope:.3f} (expect {-1 - 2 * alpha})")

# %% [markdown]
# Truncating at radius R drops part of the kernel, and `tail_mass` records
# how much.  Folding the kernel onto the period of the lattice removes the
# truncation altogether, after which the stencil and the Fourier
# multiplier agree exactly.

# %%
rng = np.random.default_rng(0)
spec = LatticeSpec(1, 1 / 64, 64)
f = GridFunction(spec, rng.standard_normal(64))
sym = symbol(spec, 0.5)
for periodic in (False, True):
    kern = stencil_coefficients(0.5, 1, 32, 256, periodic=periodic)
    d = apply_stencil(f, kern) - apply_spectral(f, sym)
    rel = np.linalg.norm(d.values) / np.linalg.norm(f.values)
    print(f"periodic={periodic!s:5}  tail_mass={kern.tail_mass:.3e}  relative discrepancy {rel:.3e}")
