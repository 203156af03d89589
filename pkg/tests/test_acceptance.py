"""Acceptance gate: one test per headline criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  Tolerances are pinned here, not tuned: analytic routes at 1e-10,
RK4 agreement at 1e-6, conservation at 1e-12, leakage fit in [1.8, 2.2] with
|c| < 1 and r^2 >= 0.98.
"""

import csv
import io
import math
import time
from contextlib import redirect_stderr, redirect_stdout

import numpy as np

from nstate import (
    ConstantPulse,
    CosinePulse,
    GaussianPulse,
    IntegratorConfig,
    KickTrain,
    convergence_order,
    design_spec,
    design_transfer,
    eigen_decompose,
    evolve_analytic,
    fit_power_law,
    integrate,
    integrate_kicks,
    invert_area,
    leakage_scan,
    populations_exact,
    populations_universal,
    propagator,
    reduced_system,
    build_coupling,
)
from nstate.cli import main


def _verdict(num: int, name: str, started: float, failures: list[str]):
    elapsed = time.time() - started
    status = "PASS" if not failures else "FAIL"
    print(f"acceptance {num} ({name}): {status} [{elapsed:.2f}s]")
    assert not failures, "; ".join(failures)
    assert elapsed < 60.0, f"criterion {num} took {elapsed:.1f}s"


def _designed_pulse(n: int, n0: int = 1) -> CosinePulse:
    area = abs(design_transfer(n, n0).area) if n >= 3 else n0 * math.pi / 2.0
    return CosinePulse(chi=1.0, omega=1.0 / (1.05 * area))


def test_criterion_1_three_state_transfer():
    started = time.time()
    failures = []
    design = design_transfer(3, 1)
    if abs(design.alpha) > 0:
        failures.append(f"alpha {design.alpha} != 0")
    if abs(design.area - math.pi / math.sqrt(2)) > 1e-12:
        failures.append(f"area {design.area}")
    pulse = _designed_pulse(3)
    t0 = invert_area(pulse, design.area)
    analytic = evolve_analytic(design_spec(3), pulse, [t0]).populations[-1, 1]
    if abs(analytic - 1.0) > 1e-10:
        failures.append(f"analytic P2 {analytic}")
    rk4 = integrate(design_spec(3), pulse, IntegratorConfig(t_end=t0)).populations[-1, 1]
    if abs(rk4 - 1.0) > 1e-6:
        failures.append(f"rk4 P2 {rk4}")
    _verdict(1, "three-state complete transfer", started, failures)


def test_criterion_2_designs_up_to_ten_states():
    started = time.time()
    failures = []
    for n in range(4, 11):
        for n0 in (1, 3):
            design = design_transfer(n, n0)
            if abs(design.alpha + (n - 3) / 3.0) > 1e-14:
                failures.append(f"alpha(n={n})")
            rs = reduced_system(n, design.alpha)
            _, p2, _ = populations_exact(rs, design.area)
            if abs(p2 - 1.0) > 1e-10:
                failures.append(f"P2(n={n},n0={n0})={p2}")
            c1 = (rs.z[0] - rs.z[1]) * design.area / math.pi - 2 * n0
            c2 = (rs.z[1] - rs.z[2]) * design.area / math.pi + n0
            if abs(c1) > 1e-10 or abs(c2) > 1e-10:
                failures.append(f"phase conditions(n={n},n0={n0})")
            # same answer through the full n-by-n propagator
            es = eigen_decompose(build_coupling(design_spec(n, n0)))
            p2_full = abs(propagator(es, design.area)[1, 0]) ** 2
            if abs(p2_full - 1.0) > 1e-10:
                failures.append(f"full-matrix P2(n={n},n0={n0})")
    _verdict(2, "transfer designs n=4..10, n0 in {1,3}", started, failures)


def test_criterion_3_figure_reproduction(tmp_path):
    started = time.time()
    failures = []
    cfg = tmp_path / "figure.cfg"
    cfg.write_text(
        "[system]\nn = 4\n\n"
        "[pulse]\nshape = cosine\nchi = 1.0\n\n"
        "[run]\nsamples = 250\nmethod = both\nn0 = 1\n"
    )
    out_path = tmp_path / "figure.csv"
    with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
        code = main(
            ["simulate", "--config", str(cfg), "--out", str(out_path),
             "--svg", str(tmp_path / "figure.svg"), "--porcelain"]
        )
    if code != 0:
        failures.append(f"simulate exit code {code}")
    else:
        with open(out_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        thetas = [float(r["theta"]) for r in rows]
        if abs(thetas[0]) > 1e-12 or abs(thetas[-1] - 2 * math.pi) > 1e-8:
            failures.append(f"theta span [{thetas[0]}, {thetas[-1]}]")
        delta = max(
            abs(float(r[col]) - float(r[col + "_rk4"]))
            for r in rows
            for col in ("P1", "P2", "P3_per_state")
        )
        if delta > 1e-6:
            failures.append(f"analytic vs rk4 delta {delta}")
        for suffix in ("", "_rk4"):
            conservation = max(
                abs(
                    float(r["P1" + suffix])
                    + float(r["P2" + suffix])
                    + 2 * float(r["P3_per_state" + suffix])
                    - 1.0
                )
                for r in rows
            )
            if conservation > 1e-12:
                failures.append(f"conservation{suffix or '_analytic'} {conservation}")
    _verdict(3, "four-state figure, analytic vs rk4", started, failures)


def test_criterion_4_universal_profile_audit():
    started = time.time()
    failures = []
    # exactness at n=3 on a dense angle grid
    design = design_transfer(3, 1)
    rs = reduced_system(3, 0.0)
    theta = np.arange(0.0, 4.0 * math.pi, 1e-3)
    p1, p2, p3 = populations_exact(rs, theta * design.area / (2.0 * math.pi))
    profile = populations_universal(theta, 3)
    dev3 = max(
        np.max(np.abs(p1 - profile.p1)),
        np.max(np.abs(p2 - profile.p2)),
        np.max(np.abs(p3 - profile.p3_per_state)),
    )
    if dev3 > 1e-12:
        failures.append(f"n=3 deviation {dev3}")
    # endpoint agreement at n=4 plus the measured mid-pulse gap
    design4 = design_transfer(4, 1)
    rs4 = reduced_system(4, design4.alpha)
    for th in (0.0, 2.0 * math.pi):
        exact = populations_exact(rs4, th * design4.area / (2.0 * math.pi))
        prof = populations_universal(th, 4)
        dev = max(
            abs(exact[0] - prof.p1), abs(exact[1] - prof.p2), abs(exact[2] - prof.p3_per_state)
        )
        if dev > 1e-10:
            failures.append(f"n=4 endpoint deviation {dev} at theta={th}")
    grid = np.linspace(0.0, 2.0 * math.pi, 8001)
    p1g, _, _ = populations_exact(rs4, grid * design4.area / (2.0 * math.pi))
    prof_g = populations_universal(grid, 4)
    measured = float(np.max(np.abs(p1g - prof_g.p1)))
    print(f"  measured n=4 mid-pulse closed-form deviation: {measured:.6f} (exact 1/40)")
    if abs(measured - 1.0 / 40.0) > 1e-9:
        failures.append(f"mid-pulse deviation {measured} != 1/40")
    if profile.is_exact is not True or prof_g.is_exact is not False:
        failures.append("exactness flags wrong")
    _verdict(4, "closed-form profile audit", started, failures)


def test_criterion_5_two_state_and_large_n_limits():
    started = time.time()
    failures = []
    times = np.linspace(0.0, 2.0 * math.pi, 401)
    traj = evolve_analytic(design_spec(2), ConstantPulse(1.0), times)
    dev = max(
        np.max(np.abs(traj.p1 - np.cos(times) ** 2)),
        np.max(np.abs(traj.p2 - np.sin(times) ** 2)),
    )
    if dev > 1e-10:
        failures.append(f"two-state closed form deviation {dev}")
    for n in (10, 100):
        design = design_transfer(n, 1)
        pulse = _designed_pulse(n)
        t0 = invert_area(pulse, design.area)
        p2 = evolve_analytic(design_spec(n), pulse, [t0]).populations[-1, 1]
        if abs(p2 - 1.0) > 1e-10:
            failures.append(f"n={n} transfer {p2}")
    _verdict(5, "two-state and large-n limits", started, failures)


def test_criterion_6_leakage_scaling():
    started = time.time()
    failures = []
    design = design_transfer(4, 1)
    omega = 1.0 / (1.05 * design.area)
    points = leakage_scan(4, 1, omega, np.geomspace(0.01, 0.1, 8))
    fit = fit_power_law(points)
    print(
        f"  leakage fit: exponent={fit.exponent:.4f} c={fit.coefficient:.4f} "
        f"r2={fit.r_squared:.6f}"
    )
    if not 1.8 <= fit.exponent <= 2.2:
        failures.append(f"exponent {fit.exponent}")
    if not abs(fit.coefficient) < 1.0:
        failures.append(f"coefficient {fit.coefficient}")
    if not fit.r_squared >= 0.98:
        failures.append(f"r2 {fit.r_squared}")
    _verdict(6, "detuning leakage scales quadratically", started, failures)


def test_criterion_7_kick_semantics():
    started = time.time()
    failures = []
    spec = design_spec(2)
    train = KickTrain(kicks=((1.0, math.pi / 2.0),))
    traj = integrate_kicks(spec, train, t_end=5.0)
    after = traj.times >= 1.0
    worst = np.max(np.abs(traj.populations[after, 1] - 1.0))
    if worst > 1e-12:
        failures.append(f"post-kick P2 deviates by {worst}")
    # finite-width pulses approach the ideal jump as the width shrinks
    from nstate import ExplicitCoupling, SystemSpec

    split = SystemSpec(
        n=2,
        coupling=ExplicitCoupling(np.array([[0.0, 1.0], [1.0, 0.0]])),
        energies=(0.0, 0.5),
    )
    reference = integrate_kicks(split, KickTrain(kicks=((0.5, math.pi / 2.0),)), t_end=1.0)
    target = reference.populations[-1, 1]
    errors = []
    for width in (0.08, 0.04, 0.02, 0.01):
        peak = (math.pi / 2.0) / (width * math.sqrt(2.0 * math.pi))
        run = integrate(split, GaussianPulse(peak=peak, center=0.5, width=width),
                        IntegratorConfig(t_end=1.0))
        errors.append(abs(run.populations[-1, 1] - target))
    print("  finite-width kick errors:", ["%.3e" % e for e in errors])
    if not all(e1 > e2 for e1, e2 in zip(errors, errors[1:])):
        failures.append(f"errors not monotone: {errors}")
    _verdict(7, "kick switches and their finite-width limit", started, failures)


def test_criterion_8_numerics_hygiene():
    started = time.time()
    failures = []
    order_cos = convergence_order(design_spec(3), CosinePulse(1.0, 0.7), t_probe=2.0)
    order_con = convergence_order(design_spec(2), ConstantPulse(1.0), t_probe=2.0)
    for label, order in (("cosine", order_cos), ("constant", order_con)):
        if not 3.7 <= order <= 4.3:
            failures.append(f"{label} order {order}")
    rng = np.random.default_rng(19)
    for n in (2, 4, 8):
        m = rng.normal(size=(n, n))
        es = eigen_decompose(m + m.T)
        a1, a2 = rng.uniform(-4, 4, size=2)
        u1, u2 = propagator(es, a1), propagator(es, a2)
        if np.max(np.abs(u1 @ u1.conj().T - np.eye(n))) > 1e-10:
            failures.append(f"unitarity n={n}")
        if np.max(np.abs(u1 @ u2 - propagator(es, a1 + a2))) > 1e-10:
            failures.append(f"group law n={n}")
    for n in (2, 3, 5):
        pulse = _designed_pulse(n)
        traj = integrate(design_spec(n), pulse, IntegratorConfig(t_end=2.0))
        if np.max(np.abs(traj.norms - 1.0)) > 1e-8:
            failures.append(f"norm drift n={n}")
    _verdict(8, "integration order, unitarity, norm", started, failures)
