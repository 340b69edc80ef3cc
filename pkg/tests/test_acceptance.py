"""The acceptance battery.

Thirteen numbered criteria, each a single test that measures one quantitative
property of the implementation against a pinned tolerance and prints one
pass/fail line.  The shared epsilon sweep (criteria 8 and 9) runs once per
session; everything else is self-contained.
"""
import numpy as np
import pytest

from slitflow.cli import main
from slitflow.conformal import as_complex, disk_identity_map, epsilon_map, segment_map
from slitflow.harness import RunConfig, fit_exponent, run_experiment
from slitflow.jump import jump_mass, jump_profile, pure_circulation_jump
from slitflow.kernels import (VelocityEvaluator, biot_savart_kernel,
                              contour_circulation, green_function,
                              harmonic_field)
from slitflow.limits import CutoffField, transition_measure, weak_residual
from slitflow.testfuncs import BoxPlateau, RadialPlateau, SpaceTimeTest, TimeWindow
from slitflow.transport import (InitialVorticity, conservation_report,
                                discretize, run)
from slitflow.jump import distributional_curl_check

from conftest import (GENERIC_GAMMA, GENERIC_POS, GENERIC_STR,
                      random_exterior_points)

BUMP = InitialVorticity(center=(0.0, 1.0), radius=0.35, amplitude=5.0, power=4)


def _line(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num:02d}: {detail}"


@pytest.fixture(scope="module")
def sweep_bundle():
    cfg = RunConfig(gamma=0.4, vorticity=BUMP, grid_spacing=0.02,
                    blob_radius=0.04, time_step=0.002, t_end=0.5,
                    eps_values=(0.2, 0.1, 0.05, 0.025), snapshot_times=(0.5,),
                    ball_radius=3.0)
    return run_experiment(cfg)


def test_criterion_01_harmonic_circulation():
    worst = 0.0
    for cmap in (disk_identity_map(), segment_map()):
        circ = contour_circulation(lambda p: harmonic_field(cmap, p), radius=4.0)
        worst = max(worst, abs(circ - 1.0))
    _line(1, worst < 1e-10, f"max |circulation - 1| = {worst:.2e} (tol 1e-10)")


def test_criterion_02_kernel_is_green_gradient():
    cmap = segment_map()
    rng = np.random.default_rng(11)
    x = random_exterior_points(rng, 3000)
    y = random_exterior_points(rng, 3000)
    keep = np.abs(x - y) > 0.05
    x, y = x[keep][:1000], y[keep][:1000]
    assert x.size == 1000
    h = 1e-5
    worst = 0.0
    for xi, yi in zip(x, y):
        k = biot_savart_kernel(cmap, xi, yi)
        gx = (green_function(cmap, xi + h, yi)
              - green_function(cmap, xi - h, yi)) / (2.0 * h)
        gy = (green_function(cmap, xi + 1j * h, yi)
              - green_function(cmap, xi - 1j * h, yi)) / (2.0 * h)
        ref = np.array([-gy, gx])   # perpendicular gradient
        worst = max(worst, np.max(np.abs(k - ref)) / max(np.linalg.norm(k), 1e-12))
    _line(2, worst <= 1e-6,
          f"kernel vs FD perp-gradient, max rel err {worst:.2e} over 1000 pairs")


def test_criterion_03_boundary_tangency():
    emap = epsilon_map(segment_map(), 0.05)
    alpha = GENERIC_GAMMA + GENERIC_STR.sum()
    ev = VelocityEvaluator(emap, GENERIC_POS, GENERIC_STR, alpha,
                           blob_radius=0.05)
    rng = np.random.default_rng(23)
    w = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, 1000))
    u = ev.velocity_from_mapped(w)
    dT = 1.0 / emap.dinverse(w)
    normal = np.conj(dT) * w
    normal = normal / np.abs(normal)
    un = np.abs(np.real(np.conj(u) * normal))
    bound = 1e-6 * float(np.max(np.abs(u)))
    _line(3, float(np.max(un)) <= bound,
          f"max normal flow {np.max(un):.2e} vs 1e-6 max speed {bound:.2e}")


def test_criterion_04_far_field_decay():
    cmap = segment_map()
    kernel_only = VelocityEvaluator(cmap, GENERIC_POS, GENERIC_STR, alpha=0.0,
                                    blob_radius=0.0)
    r = np.geomspace(50.0, 400.0, 6)
    ray = r * np.exp(0.37j)
    k_decay = fit_exponent(r, np.abs(kernel_only.velocity_z(ray))).exponent
    h_decay = fit_exponent(r, np.abs(harmonic_field(cmap, ray))).exponent
    ok = -2.05 <= k_decay <= -1.95 and -1.02 <= h_decay <= -0.98
    _line(4, ok, f"vortex part decays like r^{k_decay:.3f} (want [-2.05,-1.95]), "
                 f"circulation part r^{h_decay:.3f} (want [-1.02,-0.98])")


def test_criterion_05_tip_blowup():
    ev = VelocityEvaluator(segment_map(), np.zeros((0, 2)), np.zeros(0),
                           alpha=1.0, blob_radius=0.0)
    d = np.geomspace(1e-4, 1e-3, 7)
    speeds = np.abs(ev.velocity_z((1.0 + d).astype(complex)))
    slope = fit_exponent(d, speeds).exponent
    _line(5, -0.53 <= slope <= -0.47,
          f"speed near the tip grows like distance^{slope:.4f} (want [-0.53,-0.47])")


def test_criterion_06_exact_conservation():
    sample = discretize(BUMP, 0.014)
    n = sample.n
    before = sample.strengths.copy()
    traj = run(segment_map(), sample, 0.4, t_end=1.0, dt=1e-3)
    rep = conservation_report(traj)
    multiset_ok = np.array_equal(np.sort(sample.strengths), np.sort(before))
    exact_ok = np.array_equal(sample.strengths, before)
    ok = (1500 <= n <= 2500 and rep.sum_drift == 0.0 and multiset_ok
          and exact_ok and rep.envelope_ok)
    _line(6, ok, f"N={n}, strength-sum drift {rep.sum_drift!r}, multiset "
                 f"unchanged: {multiset_ok}, support {rep.support_initial:.3f}"
                 f"->{rep.support_final:.3f} inside envelope: {rep.envelope_ok}")


def test_criterion_07_cutoff_orthogonality_and_measure():
    rng = np.random.default_rng(37)
    eps_values = (0.2, 0.1, 0.05, 0.025)
    worst_dot = 0.0
    ratios = []
    for eps in eps_values:
        emap = epsilon_map(segment_map(), eps)
        phi = CutoffField(emap)
        r = rng.uniform(1.0 + 1e-9, 1.0 + 2.0 * eps, 2500)
        th = rng.uniform(0.0, 2.0 * np.pi, 2500)
        z = emap.inverse(r * np.exp(1j * th))
        H = harmonic_field(emap, z)
        dots = np.abs(np.real(np.conj(H) * phi.gradient(z)))
        worst_dot = max(worst_dot, float(np.max(dots)))
        ratios.append(transition_measure(emap) / eps)
    spread = max(ratios) / min(ratios)
    ok = worst_dot <= 1e-12 and spread <= 2.0
    _line(7, ok, f"max |H . grad Phi| = {worst_dot:.2e} over 10^4 annulus points "
                 f"(tol 1e-12); transition area / eps spread {spread:.3f} (tol 2)")


def test_criterion_08_flux_decays(sweep_bundle):
    ok = True
    details = []
    for t in sweep_bundle.sweep.snapshot_times:
        series = sweep_bundle.sweep.series("flux", t)
        mono = all(b < a for a, b in zip(series, series[1:]))
        fit = sweep_bundle.flux_fits[t]
        ok &= mono and fit.exponent >= 0.25
        details.append(f"t={t}: decreasing={mono}, exponent {fit.exponent:.3f}")
    _line(8, ok, "; ".join(details) + " (want decreasing, exponent >= 0.25)")


def test_criterion_09_velocity_converges_on_ball(sweep_bundle):
    ok = True
    details = []
    for t in sweep_bundle.sweep.snapshot_times:
        series = sweep_bundle.sweep.series("l2", t)
        mono = all(b < a for a, b in zip(series, series[1:]))
        shrink = series[-1] / series[0]
        ok &= mono and shrink <= 0.5
        details.append(f"t={t}: decreasing={mono}, final/first {shrink:.3f}")
    _line(9, ok, "; ".join(details) + " (want decreasing, final <= half of first)")


def test_criterion_10_pure_circulation_jump():
    ev = VelocityEvaluator(segment_map(), np.zeros((0, 2)), np.zeros(0),
                           alpha=1.0, blob_radius=0.0)
    center_gap = abs(jump_profile(ev, np.array([0.0]))[0] - 1.0 / np.pi)
    s = np.linspace(-0.9, 0.9, 37)
    profile_gap = float(np.max(np.abs(jump_profile(ev, s)
                                      - pure_circulation_jump(s))))
    mass_gap = abs(jump_mass(ev) - 1.0)
    ok = center_gap < 1e-6 and profile_gap < 1e-6 and mass_gap < 1e-6
    _line(10, ok, f"center gap {center_gap:.2e}, profile gap {profile_gap:.2e}, "
                  f"mass gap {mass_gap:.2e} (all tol 1e-6)")


def test_criterion_11_distributional_curl():
    alpha = GENERIC_GAMMA + GENERIC_STR.sum()
    ev = VelocityEvaluator(segment_map(), GENERIC_POS, GENERIC_STR, alpha,
                           blob_radius=0.0)
    tests = [
        RadialPlateau(center=(0.0, 0.0), r0=1.8, r1=2.8),
        RadialPlateau(center=(0.3, 0.4), r0=2.0, r1=3.0),
        RadialPlateau(center=(0.0, 0.0), r0=1.2, r1=3.5),
        BoxPlateau(x_outer=(-2.6, 2.6), x_inner=(-1.6, 1.6),
                   y_outer=(-2.2, 2.2), y_inner=(-1.2, 1.2)),
        BoxPlateau(x_outer=(-3.0, 2.4), x_inner=(-1.9, 1.5),
                   y_outer=(-2.5, 1.9), y_inner=(-1.4, 1.1)),
    ]
    rels = []
    for phi in tests:
        residual, scale, _ = distributional_curl_check(ev, phi, n=128)
        rels.append(residual / scale)
    r64, s64, _ = distributional_curl_check(ev, tests[0], n=64)
    r256, _, _ = distributional_curl_check(ev, tests[0], n=256)
    order = float(np.log(r64 / r256) / np.log(4.0))
    ok = max(rels) <= 1e-3 and order >= 2.0
    _line(11, ok, f"max relative residual {max(rels):.2e} over 5 test functions "
                  f"(tol 1e-3); refinement order {order:.2f} (want >= 2)")


def test_criterion_12_weak_residual_refinement():
    chi = RadialPlateau(center=(0.0, 1.0), r0=1.2, r1=2.2)
    test = SpaceTimeTest(chi, TimeWindow(0.1, 0.45))
    plate = segment_map()
    residuals = []
    for h, dt in ((0.02, 0.025), (0.01, 0.0125)):
        sample = discretize(BUMP, h)
        traj = run(plate, sample, 0.4, t_end=0.5, dt=dt, record_full=True)
        residuals.append(abs(weak_residual(traj, test, omega0=BUMP)))
    ratio = residuals[0] / residuals[1]
    # halving both h and dt shifts the residual by the slower h^2 factor 4
    _line(12, ratio >= 4.0,
          f"residual {residuals[0]:.3e} -> {residuals[1]:.3e} under joint "
          f"halving, ratio {ratio:.1f} (want >= 4)")


def test_criterion_13_bitwise_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"flow": {"gamma": 0.3}, '
                   '"discretization": {"grid_spacing": 0.07, '
                   '"time_step": 0.02, "t_end": 0.1}, '
                   '"sweep": {"eps_values": [0.2, 0.1], '
                   '"snapshot_times": [0.1]}}')
    outs = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        outs.append(out)
    same_metrics = ((outs[0] / "metrics.csv").read_bytes()
                    == (outs[1] / "metrics.csv").read_bytes())
    same_fits = ((outs[0] / "fits.csv").read_bytes()
                 == (outs[1] / "fits.csv").read_bytes())
    _line(13, same_metrics and same_fits,
          f"metrics.csv identical: {same_metrics}, fits.csv identical: {same_fits}")
