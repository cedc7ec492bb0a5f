"""Critical crossing points and their large-M limit.

For each system size M there is a critical kappa_1(M) = K sqrt(M) where the
leading eigenvalue pair crosses the imaginary axis.  As M grows these values
decrease toward kappa_cr = (sqrt(1 + t_1^2) - 1)^(1/2) with tan t_1 = t_1,
the first crossing of the limit function Q(z; kappa).
"""
import numpy as np

from bubbelator import charfn, hopf, roots

rows = hopf.table1([100, 1000, 10000, 100000, 1000000])
print(hopf.format_table1_text(rows))

t1 = roots.tan_eq_t_roots(1)[0]
k0 = roots.kappa_j0(1)
print(f"tan t = t (cos t < 0): t_1 = {t1:.7f}")
print(f"limit kappa_cr = {k0:.5f}")
print(f"kappa_1(M) - kappa_cr: "
      + ", ".join(f"{hp.kappa - k0:.4f}" for _, hp, _ in rows))

# the root curve of Q crosses the imaginary axis exactly at kappa_cr
curve = roots.q_root_curve(1, np.linspace(1.0, 3.0, 9))
print("\nroot curve z_1(kappa) of the limit function:")
for kappa, z in curve.samples:
    q = abs(charfn.Q_of_z(z, kappa).value)
    print(f"  kappa={kappa:.3f}: z = {z.real:+.4f} {z.imag:+.4f}i  (|Q| = {q:.1e})")
