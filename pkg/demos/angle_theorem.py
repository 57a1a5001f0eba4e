"""When is a pair of transverse n-planes area minimizing?

Scans P(theta) against R^n in C^3 along a line of characterising angles
and prints the verdict, the sum of the psi angles and, for minimizing
pairs, the largest value of the witness torus form.
"""
import numpy as np

from calibra import angle_theorem, slag_plane, torus_form_max
from calibra.forms import evaluate

P = slag_plane(np.zeros(3))
print(" theta_3   sum psi   minimizing   max torus form   eta(P)   eta(Q)")
for t3 in np.linspace(0.6, 2.2, 9):
    th = np.array([0.5, 0.8, t3])
    Q = slag_plane(th)
    rep = angle_theorem(P, Q, want_witness=True)
    line = f"{t3:8.3f}  {rep.psi_sum:8.5f}   {str(rep.minimizing):10s}"
    if rep.witness is not None:
        line += (f"   {torus_form_max(rep.witness.u):14.10f}"
                 f"   {evaluate(rep.eta, P.basis):.6f} {evaluate(rep.eta, Q.basis):.6f}")
    print(line)
