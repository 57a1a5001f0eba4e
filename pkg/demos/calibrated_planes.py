"""Calibration forms and the planes they calibrate.

Builds the standard forms, checks the structure identities, estimates
comass values and classifies a few planes.
"""
import numpy as np

from calibra import classify, comass, g2_phi, kahler_power, slag_plane, spin7_phi, structure_identities
from calibra.forms import OrientedPlane
from calibra.octonion import cross7, triple_cross

for name, dev in structure_identities()[:6]:
    print(f"{name:40s} {dev:.1e}")

for name, form in [("omega^2/2 on C^3", kahler_power(3, 2)), ("phi", g2_phi()), ("Phi", spin7_phi())]:
    rep = comass(form, starts=50, seed=1)
    print(f"comass {name:18s} {rep.value:.12f}")

rng = np.random.default_rng(0)
u, v = np.linalg.qr(rng.standard_normal((7, 2)))[0].T
x, y, z = np.linalg.qr(rng.standard_normal((8, 3)))[0].T
planes = {
    "P(pi/3, pi/3, pi/3)": slag_plane(np.full(3, np.pi / 3)),
    "{u, v, u x v}": OrientedPlane([u, v, cross7(u, v)]),
    "{x, y, z, x x y x z}": OrientedPlane([x, y, z, triple_cross(x, y, z)]),
    "random 3-plane in R^7": OrientedPlane(np.linalg.qr(rng.standard_normal((7, 3)))[0].T),
}
for name, P in planes.items():
    c = classify(P)
    print(f"{name:24s} -> {c.label}" + (f" (phase {c.phase:.4f})" if c.phase is not None else ""))
