"""
Hyperelastic energy densities and the expression language
==========================================================

Large-deformation materials are defined by a strain-energy density
Psi(F), F = I + grad u. Three isochoric models ship as builtins
(neo-Hookean, Isihara, Gent-Thomas), and each also has a canonical text
form in the expression language, written over the displacement-gradient
symbols ux..wz. This demo shows:

  1. the sanity property every model must satisfy: Psi = 0 and zero
     stress at the undeformed state F = I;
  2. that the text form and the closed-form builtin agree to machine
     precision at random deformation states;
  3. a user-defined material from a one-line string.
"""

import numpy as np

from lmdem.materials import (
    BUILTIN_FOR_EXPRESSION,
    EXPRESSION_STRINGS,
    Custom,
    density_eval,
)

# 1. zero energy and stress at the identity ------------------------------
u0 = np.zeros((1, 3))
G0 = np.zeros((1, 3, 3))  # grad u = 0, i.e. F = I
for name, model in BUILTIN_FOR_EXPRESSION.items():
    psi, stress, _ = density_eval(model, u0, G0, 3)
    print(f"{name:12s}  Psi(I) = {psi[0]:+.2e}   max|dPsi/dF| = {np.abs(stress).max():.2e}")

# 2. builtin vs its expression string ------------------------------------
rng = np.random.default_rng(0)
G = 0.2 * rng.normal(size=(500, 3, 3))
# keep only non-inverted states (det F > 0 is required; log/sqrt of the
# invariants would fail otherwise)
G = G[np.linalg.det(np.eye(3) + G) > 0.2]
u = np.zeros((len(G), 3))

print()
for name, text in EXPRESSION_STRINGS.items():
    builtin = BUILTIN_FOR_EXPRESSION[name]
    custom = Custom.from_text(text, dim=3)
    psi_b, dF_b, _ = density_eval(builtin, u, G, 3)
    psi_c, dF_c, _ = density_eval(custom, u, G, 3)
    gap = max(np.abs(psi_b - psi_c).max(), np.abs(dF_b - dF_c).max())
    print(f"{name:12s}  {len(G)} random states, worst deviation {gap:.2e}")

# 3. roll your own -------------------------------------------------------
# Any expression over ux..wz (and u, v, w, x, y, z for spatial terms) is
# a material. Here: a simple quadratic "pseudo-elastic" density.
mine = Custom.from_text("0.5*(ux**2 + vy**2) + 0.25*(uy + vx)**2", dim=2)
G2 = 0.1 * rng.normal(size=(3, 2, 2))
psi, dF, _ = density_eval(mine, np.zeros((3, 2)), G2, 2)
print(f"\ncustom 2D density at three random states: {psi}")
