"""Spectrum of the linearization at the constant equilibrium.

At M=100, K=3 the linearization has two unstable conjugate pairs, the mass
eigenvalue 0, one large negative real eigenvalue, and 47 further pairs that
hug the ellipse lambda = (2+K)(cos s - 1) + i K sin s traced by roots on the
unit circle.  The eigenvalues come from Newton iteration on a scalar
characteristic function rather than a dense eigensolver, so the same code
scales to M in the thousands.
"""
import numpy as np

from bubbelator import roots
from bubbelator.model import ModelParams

p = ModelParams(100, 3.0)
spec = roots.spectrum_via_F(p)
lam = spec.eigenvalues
print(f"M={p.M}, K={p.K}: {len(lam)} eigenvalues")
print(f"unstable pairs (upper half plane): {spec.unstable()}")

real = np.sort(lam[np.abs(lam.imag) <= 1e-9].real)
print(f"real eigenvalues: {real}")
print(f"complex-conjugate pairs: {spec.n_conjugate_pairs}")

s = np.linspace(0, 2 * np.pi, 2001)
ellipse = (2 + p.K) * (np.cos(s) - 1) + 1j * p.K * np.sin(s)
bulk = lam[np.abs(lam.imag) > 1e-9]
dists = [np.min(np.abs(ellipse - x)) for x in bulk]
print(f"distance of the {len(bulk)} non-real eigenvalues to the ellipse: "
      f"max {max(dists):.3f}, median {np.median(dists):.4f}")
