"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line and then asserts the same
condition. Under pytest the lines are collected into an "acceptance criteria"
section of the terminal summary; ``python tests/test_acceptance.py`` prints
them directly.
"""

import time
from itertools import combinations

import numpy as np
import pytest

from calibra.calibrate import angle_theorem, comass, nance_witness, torus_form_max
from calibra.forms import OrientedPlane, evaluate
from calibra.graphpde import (
    GridField,
    boundary_preset,
    jacobian,
    residual,
    solve_newton,
    solve_picard,
)
from calibra.holonomy import g2_phi, g2_star_phi, kahler_power, spin7_phi, structure_identities
from calibra.lawlor import (
    lawlor_asymptotic,
    lawlor_sample,
    lawlor_solve,
    ode_residual,
    slag_defect,
)
from calibra.octonion import associator, cross7, fourfold, fourfold_convention, tau, triple_cross
from calibra.planes import j_invariance_defect, random_plane, random_rotation, slag_plane
from calibra.varmin import (
    catenoid,
    first_variation,
    helicoid,
    mean_curvature,
    random_bump_field,
    random_polynomial_patch,
)

RESULTS = []


def report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
    RESULTS.append(line)
    print(line)
    return ok


def _frames(rng, count, k, n):
    Q, R = np.linalg.qr(rng.standard_normal((count, n, k)))
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[:, None, :]
    return np.swapaxes(Q, 1, 2)


def admissible_theta(rng, n):
    """Characterising angles theta_1 <= ... <= theta_n with
    theta_n <= theta_1 + ... + theta_{n-1}."""
    while True:
        head = np.sort(rng.uniform(0.05, np.pi / 2, n - 1))
        last = rng.uniform(head[-1], np.pi - head[-1])
        if last <= head.sum():
            return np.concatenate([head, [last]])


def slag_boundary_theta(rng, n):
    """theta in (0, pi)^n summing to pi."""
    while True:
        th = rng.dirichlet(np.ones(n)) * np.pi
        if th.min() > 0.05:
            return th


# 1 -----------------------------------------------------------------------------

def test_criterion_1_structure_identities():
    t0 = time.perf_counter()
    rows = structure_identities()
    dt = time.perf_counter() - t0
    worst = max(d for _, d in rows)
    names = " ".join(n for n, _ in rows)
    covered = all(s in names for s in ("phi = dx1^omega + Re Upsilon", "*phi = omega^2/2",
                                       "Phi = omega^2/2 + Re Upsilon", "Phi = dx1^phi + *phi",
                                       "hodge_star(phi) = *phi", "*(omega^"))
    ok = covered and worst <= 1e-14 and dt < 1.0
    report("criterion 1 structure identities",
           ok, f"({len(rows)} identities, max deviation {worst:.1e}, {dt:.2f} s)")
    assert ok


# 2 -----------------------------------------------------------------------------

def test_criterion_2_comass():
    t0 = time.perf_counter()
    forms = {"omega^2/2 on C^3": kahler_power(3, 2), "phi": g2_phi(),
             "*phi": g2_star_phi(), "Phi": spin7_phi()}
    vals, jdef = {}, None
    for i, (name, a) in enumerate(forms.items()):
        rep = comass(a, starts=1000, seed=i)
        vals[name] = rep.value
        if name.startswith("omega"):
            jdef = j_invariance_defect(rep.argmax)
    dt = time.perf_counter() - t0
    ok = all(abs(v - 1) <= 1e-6 for v in vals.values()) and jdef < 1e-6 and dt < 120
    detail = ", ".join(f"{k} {v:.10f}" for k, v in vals.items())
    report("criterion 2 comass", ok, f"({detail}; J-defect {jdef:.1e}; {dt:.1f} s)")
    assert ok


# 3 -----------------------------------------------------------------------------

def _mixed(rng, count, calibrated):
    F = calibrated(count // 2)
    G = rng.permutation(np.concatenate([F, _random_like(rng, count - count // 2, F.shape[1:])]))
    return G


def _random_like(rng, count, shape):
    k, n = shape
    return _frames(rng, count, k, n)


def test_criterion_3_plane_equivalences():
    rng = np.random.default_rng(2024)
    N = 10_000
    R7 = np.array([random_rotation(rng, 7) for _ in range(8)])

    def assoc(m):
        F = _frames(rng, m, 2, 7)
        return np.stack([F[:, 0], F[:, 1], cross7(F[:, 0], F[:, 1])], axis=1)

    def coassoc(m):
        A = assoc(m)
        out = np.empty((m, 4, 7))
        for i, a in enumerate(A):
            q = np.linalg.qr(np.concatenate([a, rng.standard_normal((4, 7))]).T)[0]
            out[i] = q[:, 3:].T
        return out

    def cayley(m):
        F = _frames(rng, m, 3, 8)
        return np.stack([F[:, 0], F[:, 1], F[:, 2], triple_cross(F[:, 0], F[:, 1], F[:, 2])], axis=1)

    bad, counts = 0, []
    F = _mixed(rng, N, assoc)
    chi = np.linalg.norm(associator(F[:, 0], F[:, 1], F[:, 2]), axis=-1)
    val = np.abs(evaluate(g2_phi(), F))
    bad += int(np.sum((chi < 1e-10) != (val > 1 - 1e-10)))
    counts.append(int(np.sum(chi < 1e-10)))

    F = _mixed(rng, N, coassoc)
    phi = g2_phi()
    restr = np.max([np.abs(evaluate(phi, F[:, list(c)])) for c in combinations(range(4), 3)], axis=0)
    val = np.abs(evaluate(g2_star_phi(), F))
    bad += int(np.sum((restr < 1e-10) != (val > 1 - 1e-10)))
    counts.append(int(np.sum(restr < 1e-10)))

    F = _mixed(rng, N, cayley)
    t = np.linalg.norm(tau(F[:, 0], F[:, 1], F[:, 2], F[:, 3]), axis=-1)
    val = np.abs(evaluate(spin7_phi(), F))
    bad += int(np.sum((t < 1e-10) != (val > 1 - 1e-10)))
    counts.append(int(np.sum(t < 1e-10)))

    ok = bad == 0 and counts == [N // 2] * 3
    report("criterion 3 plane-condition equivalences", ok,
           f"(3 x {N} frames, special per family {counts}, misclassified {bad})")
    assert ok


# 4 -----------------------------------------------------------------------------

def test_criterion_4_fourfold_convention():
    res = fourfold_convention()
    rng = np.random.default_rng(4)
    F = _frames(rng, 1000, 4, 8)
    out = fourfold(F[:, 0], F[:, 1], F[:, 2], F[:, 3])
    dev = float(np.max(np.abs(out[:, 0] ** 2 + np.sum(out[:, 1:] ** 2, axis=-1) - 1)))
    ok = res.chosen is not None and len(res.accepted) >= 1 and dev < 1e-12
    report("criterion 4 fourfold convention", ok,
           f"({len(res.candidates)} candidates, {len(res.accepted)} accepted, "
           f"chosen {res.chosen}; max |re^2 + |tau|^2 - 1| = {dev:.1e})")
    assert ok


# 5 -----------------------------------------------------------------------------

def test_criterion_5_angle_theorem():
    rng = np.random.default_rng(5)
    lines_ok = True
    for _ in range(50):
        P, Q = random_plane(rng, 2, 1), random_plane(rng, 2, 1)
        lines_ok &= not angle_theorem(P, Q).minimizing

    boundary_err = 0.0
    boundary_ok = True
    for n in (2, 3):
        for _ in range(10):
            th = slag_boundary_theta(rng, n)
            R = random_rotation(rng, 2 * n)
            P = slag_plane(np.zeros(n)).transformed(R)
            Q = (-slag_plane(th)).transformed(R)
            rep = angle_theorem(P, Q)
            boundary_ok &= bool(rep.minimizing)
            boundary_err = max(boundary_err, abs(rep.psi_sum - np.pi))
    boundary_ok &= boundary_err < 1e-9

    witness_ok, successes, torus_worst, cal_worst = True, 0, 0.0, 0.0
    for n in (3, 4):
        for _ in range(100):
            th = admissible_theta(rng, n)
            R = random_rotation(rng, 2 * n)
            P = slag_plane(np.zeros(n)).transformed(R)
            Q = slag_plane(th).transformed(R)
            rep = angle_theorem(P, Q, want_witness=True)
            if not rep.minimizing or rep.witness is None or rep.witness_error:
                witness_ok = False
                continue
            successes += 1
            torus_worst = max(torus_worst, torus_form_max(rep.witness.u))
            cal_worst = max(cal_worst, abs(evaluate(rep.eta, P.basis) - 1),
                            abs(evaluate(rep.eta, Q.basis) - 1))
    witness_ok &= torus_worst <= 1 + 1e-6 and cal_worst < 1e-9
    ok = lines_ok and boundary_ok and witness_ok
    report("criterion 5 angle theorem", ok,
           f"(lines ok {lines_ok}; boundary |sum psi - pi| {boundary_err:.1e}; "
           f"witnesses {successes}/200, torus max {torus_worst:.9f}, calibration err {cal_worst:.1e})")
    assert ok


# 6 -----------------------------------------------------------------------------

def test_criterion_6_lawlor_necks():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    psis = [np.full(3, np.pi / 3), slag_boundary_theta(rng, 3), slag_boundary_theta(rng, 3)]
    res_worst = defect_worst = asym_worst = ode_worst = 0.0
    n_samples = 0
    ts = np.linspace(-3, 3, 10)
    for i, psi in enumerate(psis):
        sol = lawlor_solve(psi)
        res_worst = max(res_worst, sol.residual)
        p = sol.params
        asym_worst = max(asym_worst, abs(np.sum(lawlor_asymptotic(p)) - np.pi / 2))
        samples = lawlor_sample(p, ts, 100, seed=i)
        n_samples += len(samples)
        defect_worst = max(defect_worst, max(max(slag_defect(s)) for s in samples))
        ode_worst = max(ode_worst, max(ode_residual(p, t) for t in ts))
    dt = time.perf_counter() - t0
    ok = (res_worst < 1e-8 and defect_worst < 1e-6 and asym_worst <= 1e-8
          and ode_worst < 1e-6 and dt < 60 and n_samples >= 1000)
    report("criterion 6 Lawlor necks", ok,
           f"(solve residual {res_worst:.1e}; {n_samples} samples, max defect {defect_worst:.1e}; "
           f"asymptotic sum err {asym_worst:.1e}; ODE residual {ode_worst:.1e}; {dt:.1f} s)")
    assert ok


# 7 -----------------------------------------------------------------------------

def _cubic_errors():
    errs, reports = [], []
    for n in (33, 65, 129):
        b = boundary_preset("harmonic-cubic", n)
        rep = solve_newton("slag2", b)
        errs.append(float(np.max(np.abs(rep.solution.values - b.values))))
        reports.append(rep)
    return errs, reports


def test_criterion_7a_convergence_order():
    errs, _ = _cubic_errors()
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = [float(np.log2(errs[0] / errs[1])), float(np.log2(errs[1] / errs[2]))]
    ok = all(1.9 <= o <= 2.1 for o in orders)
    report("criterion 7a slag2 convergence order on the harmonic cubic", ok,
           f"(max errors {', '.join(f'{e:.1e}' for e in errs)}; orders {orders[0]:.2f}, {orders[1]:.2f}; "
           "the cubic is reproduced exactly by the 5-point stencil, so errors sit at round-off)")
    assert ok


def test_criterion_7b_newton_picard_jacobian():
    _, reports = _cubic_errors()
    newton_ok = all(r.residual_norm < 1e-10 and r.iterations <= 10 for r in reports)
    agree = 0.0
    for eq, b in (("slag2", boundary_preset("harmonic-cubic", 33)),
                  ("minimal", boundary_preset("wave", 33, amplitude=0.05))):
        agree = max(agree, float(np.max(np.abs(solve_picard(eq, b).solution.values
                                               - solve_newton(eq, b).solution.values))))
    rng = np.random.default_rng(7)
    jac = 0.0
    for eq, dim in (("minimal", 2), ("slag2", 2), ("slag3", 3)):
        f = GridField(0.5 * rng.standard_normal((5,) * dim), 0.25)
        J = jacobian(eq, f).toarray()
        inner = (slice(1, -1),) * dim
        cols = []
        for idx in np.ndindex(f.values[inner].shape):
            p = tuple(i + 1 for i in idx)
            v = np.array(f.values)
            v[p] += 1e-6
            rp = residual(eq, f.with_values(v)).values[inner].ravel()
            v[p] -= 2e-6
            rm = residual(eq, f.with_values(v)).values[inner].ravel()
            cols.append((rp - rm) / 2e-6)
        Jfd = np.array(cols).T
        jac = max(jac, float(np.max(np.abs(J - Jfd)) / np.max(np.abs(Jfd))))
    ok = newton_ok and agree < 1e-8 and jac < 1e-6
    report("criterion 7b Newton / Picard / Jacobian", ok,
           f"(Newton iterations {[r.iterations for r in reports]}, residuals "
           f"{max(r.residual_norm for r in reports):.1e}; Picard vs Newton {agree:.1e}; "
           f"Jacobian rel err {jac:.1e})")
    assert ok


# 8 -----------------------------------------------------------------------------

def test_criterion_8_first_variation():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(3, 7))
        P = random_polynomial_patch(rng, m=m)
        X = random_bump_field(rng, m=m)
        lhs, rhs = first_variation(P, X)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
    Hmax = 0.0
    for patch in (catenoid(), helicoid()):
        u0, u1, v0, v1 = patch.domain
        U, V = np.meshgrid(np.linspace(u0, u1, 20), np.linspace(v0, v1, 20), indexing="ij")
        Hmax = max(Hmax, float(np.max(np.linalg.norm(mean_curvature(patch, U, V), axis=-1))))
    ok = worst < 1e-5 and Hmax < 1e-7
    report("criterion 8 first variation and mean curvature", ok,
           f"(max relative first-variation error {worst:.1e}; max |H| {Hmax:.1e})")
    assert ok


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
