"""Calibrated geometry in flat space R^n, n <= 8.

Constant-coefficient forms and the standard calibrations (Kahler, special
Lagrangian, associative, coassociative, Cayley), plane classification, the
angle criterion for pairs of planes with explicit calibration witnesses,
Lawlor necks, and finite-difference solvers for the minimal graph and
special Lagrangian graph equations.
"""

from .errors import CalibraError
from .forms import (
    Form,
    OrientedPlane,
    contract,
    dx,
    evaluate,
    hodge_star,
    make_form,
    orthonormalize,
    pullback,
    wedge,
)
from .holonomy import (
    g2_phi,
    g2_star_phi,
    holomorphic_volume,
    kahler_form,
    kahler_power,
    slag_form,
    spin7_phi,
    structure_identities,
)
from .octonion import Octonion, associator, cross7, fourfold, tau
from .planes import (
    characterising_angles,
    classify,
    kahler_angles,
    principal_angles,
    slag_plane,
)
from .calibrate import angle_theorem, comass, nance_witness, spherical_polygon, torus_form_max
from .lawlor import LawlorParams, lawlor_angles, lawlor_asymptotic, lawlor_sample, lawlor_solve, slag_defect
from .varmin import area, first_variation, mean_curvature
from .graphpde import (
    GridField,
    lagrangian_check,
    minimal_residual,
    slag_residual,
    solve_newton,
    solve_picard,
)

__version__ = "0.1.0"
