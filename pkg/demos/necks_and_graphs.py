"""Lawlor necks and graph equations.

Solves for the neck asymptotic to a given pair of planes, checks that the
samples are special Lagrangian, then solves the minimal surface equation
over Scherk's square and measures the mesh convergence.
"""
import numpy as np

from calibra.graphpde import boundary_preset, solve_newton, solve_picard
from calibra.errors import NoConvergence
from calibra.lawlor import lawlor_asymptotic, lawlor_sample, lawlor_solve, slag_defect

psi = np.array([0.7, 1.0, np.pi - 1.7])
sol = lawlor_solve(psi)
print("a =", np.round(sol.params.a, 8), " residual", f"{sol.residual:.1e}")
print("2 x asymptotic angles", 2 * lawlor_asymptotic(sol.params))
samples = lawlor_sample(sol.params, np.linspace(-2, 2, 9), 50, seed=0)
print("max SLag defect over", len(samples), "samples:", max(max(slag_defect(s)) for s in samples))

prev = None
for n in (17, 33, 65, 129):
    b = boundary_preset("scherk", n)
    rep = solve_newton("minimal", b)
    err = np.max(np.abs(rep.solution.values - b.values))
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"scherk n={n:4d}  newton its {rep.iterations}  max err {err:.2e}{ratio}")
    prev = err

for amp in (0.25, 1.0, 2.0, 4.0):
    b = boundary_preset("wave", 33, amplitude=amp)
    try:
        its = solve_picard("minimal", b).iterations
    except NoConvergence:
        its = "diverges"
    print(f"wave amplitude {amp}: picard {its}, newton {solve_newton('minimal', b).iterations}")
