"""Acceptance cross-checks shared by ``drivendicke verify`` and the test
suite.

Each check exercises one quantitative statement about the implementation
(solver-vs-solver oracles, closed-form limits, phenomenology of the
N = 15 reference run) at a pinned tolerance and returns a CheckResult;
nothing here is calibrated after the fact.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0, j1

from . import cumulant, hp_model, observables
from .dynamics import LindbladSpec, evolve
from .errors import ParametricInstabilityError
from .params import PhysicalParams, derive_couplings, lorentz_factor_coefficients

FIG2 = {"gamma_c": 0.02, "gamma_d": 0.02, "lam": 0.01}      # N_crit = 1
FIG3 = {"gamma_c": 2e4, "gamma_d": 2e-4, "lam": 1.5e-9}     # N_crit ~ 4.4e17


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: list = field(default_factory=list)
    duration: float = 0.0


class _Check:
    def __init__(self, name):
        self.name = name
        self.details = []
        self.ok = True

    def expect(self, condition, message):
        tagged = f"{'ok' if condition else 'FAIL'}: {message}"
        self.details.append(tagged)
        if not condition:
            self.ok = False

    def result(self, t0) -> CheckResult:
        return CheckResult(name=self.name, passed=self.ok,
                           details=self.details, duration=time.time() - t0)


def _fig2_reference_run(n=15, n_points=2001, t_final=400.0, stride=10,
                        rtol=1e-9, atol=1e-11, n_max=45):
    t = np.linspace(0.0, t_final, n_points)
    spec = LindbladSpec.rwa(n, n_max, FIG2["lam"], FIG2["gamma_c"],
                            FIG2["gamma_d"])
    return evolve(spec, None, t, rtol=rtol, atol=atol, snapshot_stride=stride)


def check_oracle_equivalence() -> CheckResult:
    """1: permutation-symmetric vs product-space solver, N = 2 and 3."""
    t0 = time.time()
    c = _Check("1 oracle equivalence (block vs brute force)")
    t = np.linspace(0.0, 400.0, 801)
    for n in (2, 3):
        kw = dict(rtol=1e-10, atol=1e-12)
        tr_b = evolve(LindbladSpec.rwa(n, 15, FIG2["lam"], FIG2["gamma_c"],
                                       FIG2["gamma_d"]), None, t, **kw)
        tr_p = evolve(LindbladSpec.rwa(n, 15, FIG2["lam"], FIG2["gamma_c"],
                                       FIG2["gamma_d"], product=True),
                      None, t, **kw)
        dn = float(np.max(np.abs(tr_b.n - tr_p.n)))
        dz = float(np.max(np.abs(tr_b.real("z") - tr_p.real("z"))))
        c.expect(dn <= 1e-6, f"N={n}: max|d<n>| = {dn:.3e} <= 1e-6")
        c.expect(dz <= 1e-6, f"N={n}: max|d<sz>| = {dz:.3e} <= 1e-6")
        # criterion 9 piggybacks on these runs
        for nm, sym in (("a", "<a>"), ("aa", "<aa>"), ("a_jp", "<aJ+>")):
            mx = float(np.max(np.abs(tr_p.data[nm])))
            c.expect(mx <= 1e-8,
                     f"N={n} (criterion 9): max|{sym}| = {mx:.1e} <= 1e-8")
    return c.result(t0)


def resonant_test_params(xi=1e-3, lambda_target=1e-3, N=2, n_max=8):
    """Model-unit parameter set exactly on parametric resonance."""
    omega_c = omega_d0 = c_light = 1.0
    d0, d2 = lorentz_factor_coefficients(xi)
    om = omega_c + omega_d0 * d0
    amp = xi * c_light / om
    c1 = 2.0 * j1(omega_c * xi / om)
    b = omega_d0 * d2 / (2.0 * om)
    lam0 = lambda_target / (0.5 * c1 * (j0(b) - j1(b)))
    return PhysicalParams(omega_c=omega_c, omega_d0=omega_d0, lambda0=lam0,
                          Omega_m=om, A=amp, N=N, gamma_c=0.0, gamma_d=0.0,
                          n_max=n_max, c_light=c_light)


def check_rwa_validity() -> CheckResult:
    """2: laboratory-frame vs resonant solver, envelope deviation <= 5%."""
    t0 = time.time()
    c = _Check("2 RWA validity (time-dependent vs resonant)")
    p = resonant_test_params()
    dc = derive_couplings(p)
    c.expect(abs(dc.lambda_eff - 1e-3) < 1e-9, "coupling tuned to 1e-3 omega_c")
    t_rabi = 2.0 * math.pi / (math.sqrt(p.N) * dc.lambda_eff)
    t = np.linspace(0.0, 2.0 * t_rabi, 1601)
    tr_full = evolve(LindbladSpec.full_td(p), None, t, rtol=1e-7, atol=1e-11)
    tr_rwa = evolve(LindbladSpec.rwa_from_physical(p, dc), None, t,
                    rtol=1e-11, atol=1e-13)
    run_max = np.maximum.accumulate(np.maximum(tr_rwa.n, 1e-30))
    # envelope = windowed maxima over an eighth of a Rabi period
    edges = np.linspace(0.0, t[-1], 17)
    devs = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (t >= a) & (t <= b)
        devs.append(abs(tr_full.n[m].max() - tr_rwa.n[m].max())
                    / run_max[m].max())
    dev = float(np.max(devs))
    c.expect(dev <= 0.05, f"envelope deviation {dev:.4f} <= 0.05 "
                          "over two collective Rabi periods")
    return c.result(t0)


def check_cumulant_vs_full(traj=None) -> CheckResult:
    """3: N = 15 burst peak and delay, fourth closure vs block solver."""
    t0 = time.time()
    c = _Check("3 cumulant vs full numerics (N = 15 burst)")
    t = np.linspace(0.0, 400.0, 2001)
    tr = traj if traj is not None else _fig2_reference_run(stride=None)
    full_burst = observables.burst_summary(t, tr.n)
    p = cumulant.MomentParams(N=15, lam=FIG2["lam"], gamma_c=FIG2["gamma_c"],
                              gamma_d=FIG2["gamma_d"])
    mtraj = cumulant.integrate_moments(cumulant.MomentState(), p,
                                       cumulant.CLOSURE_FOURTH, t)
    mom_burst = observables.burst_summary(t, mtraj.n)
    c.expect(full_burst.peak_value is not None and
             mom_burst.peak_value is not None, "both solvers show a burst")
    if c.ok:
        dp = abs(mom_burst.peak_value - full_burst.peak_value) / full_burst.peak_value
        dt = abs(mom_burst.t_d - full_burst.t_d) / full_burst.t_d
        c.expect(dp <= 0.10, f"peak height deviation {dp:.3f} <= 0.10 "
                 f"(block {full_burst.peak_value:.3f}, "
                 f"moments {mom_burst.peak_value:.3f})")
        c.expect(dt <= 0.10, f"delay deviation {dt:.3f} <= 0.10 "
                 f"(block t_d {full_burst.t_d:.1f}, "
                 f"moments {mom_burst.t_d:.1f})")
    return c.result(t0)


def check_closed_form_steady() -> CheckResult:
    """4: third-closure integration matches the closed form; limits hold."""
    t0 = time.time()
    c = _Check("4 closed-form steady state (third closure)")
    gc = gd = 0.02
    n_crit = 1e6
    lam = math.sqrt(gc * gd / (4.0 * n_crit))
    for ratio in (0.01, 0.1, 10.0, 100.0):
        n_val = ratio * n_crit
        p = cumulant.MomentParams(N=n_val, lam=lam, gamma_c=gc, gamma_d=gd)
        m = cumulant.integrate_to_steady(p, cumulant.CLOSURE_THIRD)
        cf = cumulant.steady_state_third(n_val, gc, gd, n_crit)
        rel = abs(m.n - cf) / cf
        c.expect(rel <= 1e-6,
                 f"N/N_crit={ratio:g}: |integrated - closed|/closed "
                 f"= {rel:.2e} <= 1e-6")
    for ratio, label, ref_fn in (
        (1e-3, "weak-drive limit N gd/(N_crit (gc+gd))",
         lambda n: n * gd / (n_crit * (gc + gd))),
        (1e3, "strong-drive limit N gd/(2 gc)",
         lambda n: n * gd / (2.0 * gc)),
    ):
        n_val = ratio * n_crit
        cf = cumulant.steady_state_third(n_val, gc, gd, n_crit)
        rel = abs(cf - ref_fn(n_val)) / ref_fn(n_val)
        c.expect(rel <= 0.01, f"{label} at N/N_crit={ratio:g}: {rel:.2e} <= 1%")
    return c.result(t0)


def check_fig3_scaling() -> CheckResult:
    """5: phase-transition asymptotes, peak exponent, inverse-delay law."""
    t0 = time.time()
    c = _Check("5 large-N phase transition and burst scaling")
    gc, gd, lam = FIG3["gamma_c"], FIG3["gamma_d"], FIG3["lam"]
    n_crit = gc * gd / (4.0 * lam ** 2)
    c.expect(abs(n_crit - 4.44e17) < 0.05e17,
             f"N_crit = {n_crit:.3e} (about 4.4e17)")
    # (a) steady-state asymptotes of the fourth closure
    low = cumulant.steady_state_fourth(cumulant.MomentParams(
        N=1e-3 * n_crit, lam=lam, gamma_c=gc, gamma_d=gd)) / (1e-3 * n_crit)
    high = cumulant.steady_state_fourth(cumulant.MomentParams(
        N=1e3 * n_crit, lam=lam, gamma_c=gc, gamma_d=gd)) / (1e3 * n_crit)
    c.expect(1 / 1.5 <= low / 2.5e-26 <= 1.5,
             f"low-N steady slope {low:.3e} within factor 1.5 of 2.5e-26")
    c.expect(abs(high - 5e-9) <= 0.1 * 5e-9,
             f"high-N steady slope {high:.3e} within 10% of 5e-9")
    # (b, c) burst sweep over N/N_crit in [10, 1e3]
    ratios = np.logspace(1, 3, 7)
    peaks, tds = [], []
    for ratio in ratios:
        n_val = ratio * n_crit
        p = cumulant.MomentParams(N=n_val, lam=lam, gamma_c=gc, gamma_d=gd)
        t_max = 2000.0 / (gd * (ratio - 1.0))
        grid = np.linspace(0.0, t_max, 3001)
        traj = cumulant.integrate_moments(cumulant.MomentState(), p,
                                          cumulant.CLOSURE_FOURTH, grid,
                                          dense=True)
        i = int(np.argmax(traj.n))
        from scipy.optimize import minimize_scalar
        i = max(1, min(i, len(grid) - 2))
        res = minimize_scalar(lambda tt: -traj.solution(tt)[0],
                              bracket=(grid[i - 1], grid[i], grid[i + 1]))
        peaks.append(-res.fun)
        tds.append(res.x)
    ns = ratios * n_crit
    fit = observables.scaling_fit(ns, np.array(peaks), kind="power")
    c.expect(1.8 <= fit.slope <= 2.2,
             f"burst peak exponent alpha = {fit.slope:.3f} in [1.8, 2.2]")
    lin = observables.scaling_fit(ns, 1.0 / np.array(tds), kind="linear")
    c.expect(lin.r_squared >= 0.99,
             f"1/t_d linear in N with R^2 = {lin.r_squared:.5f} >= 0.99")
    return c.result(t0)


def check_hp_consistency() -> CheckResult:
    """6: bosonic-limit dynamics vs closed form, threshold, sinh^2."""
    t0 = time.time()
    c = _Check("6 bosonic pair-amplifier limit")
    n_val, gc, gd = 4.0, 0.7, 0.11
    for ratio in (0.1, 0.5, 0.9):
        lam = math.sqrt(ratio * gc * gd / (4.0 * n_val))
        t_conv = hp_model.hp_convergence_time(n_val, lam, gc, gd)
        tr = hp_model.hp_dynamics(hp_model.GaussianState(), n_val, lam, gc,
                                  gd, np.linspace(0.0, t_conv, 60))
        ss = hp_model.hp_steady_state(n_val, lam, gc, gd)
        rel = abs(tr.n_a[-1] - ss) / ss
        c.expect(rel <= 0.01,
                 f"threshold ratio {ratio}: long-time vs closed form "
                 f"{rel:.2e} <= 1%")
    lam_thr = math.sqrt(gc * gd / (4.0 * n_val))
    try:
        hp_model.hp_steady_state(n_val, lam_thr, gc, gd)
        c.expect(False, "instability error raised exactly at threshold")
    except ParametricInstabilityError:
        c.expect(True, "instability error raised exactly at threshold")
    just_below = math.sqrt((1 - 1e-12) * gc * gd / (4.0 * n_val))
    try:
        hp_model.hp_steady_state(n_val, just_below, gc, gd)
        c.expect(True, "no error just below threshold")
    except ParametricInstabilityError:
        c.expect(False, "no error just below threshold")
    lam = 0.05
    g = math.sqrt(n_val) * lam
    t = np.linspace(0.0, 3.0 / g, 200)
    tr = hp_model.hp_dynamics(hp_model.GaussianState(), n_val, lam, 0.0, 0.0, t)
    ref = np.sinh(g * t) ** 2
    err = float(np.max(np.abs(tr.n_a - ref) / np.maximum(ref, 1.0)))
    c.expect(err <= 1e-8,
             f"undamped growth matches sinh^2(sqrt(N) lam t) to {err:.2e}")
    return c.result(t0)


def check_entanglement_fano(traj=None) -> CheckResult:
    """7: N = 15 entanglement extremum vs Fano extremum phenomenology."""
    t0 = time.time()
    c = _Check("7 entanglement / Fano phenomenology (N = 15)")
    tr = traj if traj is not None else _fig2_reference_run()
    t = tr.t
    idx = np.array(sorted(tr.snapshots))
    en = np.array([observables.log_negativity(tr.snapshots[i]) for i in idx])
    t_en = t[idx]
    c.expect(abs(en[0]) <= 1e-10, f"E_N(0) = {en[0]:.2e}")
    i_max = int(np.argmax(en))
    interior = 0 < i_max < len(en) - 1
    c.expect(interior, "E_N has an interior maximum")
    # uniqueness: no second local maximum above 90% of the peak
    peaks = [i for i in range(1, len(en) - 1)
             if en[i] >= en[i - 1] and en[i] >= en[i + 1]
             and en[i] >= 0.9 * en[i_max]]
    c.expect(len(peaks) == 1, f"E_N maximum unique ({len(peaks)} found)")
    fano_t = tr.fano
    i_fano = int(np.nanargmax(fano_t))
    dt_rel = abs(t_en[i_max] - t[i_fano]) / t[i_fano]
    c.expect(dt_rel <= 0.15,
             f"E_N max at t={t_en[i_max]:.1f} vs Fano max at t={t[i_fano]:.1f}"
             f": offset {dt_rel:.3f} of t(Fano max) <= 0.15")
    c.expect(en[-1] <= 0.5 * en[i_max],
             f"long-time E_N {en[-1]:.3f} below half the peak {en[i_max]:.3f}")
    return c.result(t0)


def check_wigner_properties(traj=None) -> CheckResult:
    """8: vacuum Gaussian, rotational symmetry, ring at the Fano trough."""
    t0 = time.time()
    c = _Check("8 phase-space (Wigner) properties")
    rng = np.random.default_rng(11)
    pts = rng.normal(size=24).view(complex) * 1.5
    rho_vac = np.zeros((25, 25), dtype=complex)
    rho_vac[0, 0] = 1.0
    w = observables.wigner_at(rho_vac, pts)
    ref = (2.0 / math.pi) * np.exp(-2.0 * np.abs(pts) ** 2)
    err = float(np.max(np.abs(w - ref)))
    c.expect(err <= 1e-8, f"vacuum Wigner matches (2/pi)e^-2|a|^2 to {err:.1e}")

    tr = traj if traj is not None else _fig2_reference_run()
    t = tr.t
    fano_t = tr.fano
    i_peak = int(np.nanargmax(fano_t))
    i_trough = i_peak + int(np.nanargmin(fano_t[i_peak:]))
    snaps = sorted(tr.snapshots)
    for label, i_want in (("fano_peak", i_peak), ("fano_trough", i_trough),
                          ("final", len(t) - 1)):
        i = min(snaps, key=lambda s: abs(s - i_want))
        rho_c = observables.reduced_cavity(tr.snapshots[i])
        rs = np.array([0.5, 1.5, 2.5, 3.5], dtype=complex)
        w0 = observables.wigner_at(rho_c, rs)
        wmax = float(np.max(np.abs(w0)))
        for theta in (math.pi / 4, math.pi / 2):
            wr = observables.wigner_at(rho_c, rs * np.exp(1j * theta))
            dev = float(np.max(np.abs(wr - w0)))
            c.expect(dev <= 1e-6 * max(wmax, 1e-12),
                     f"{label}: rotation by {theta:.3f} changes W by "
                     f"{dev:.1e} (<= 1e-6 relative)")
        if label == "fano_trough":
            radii, prof, _ = observables.wigner_radial_profile(
                rho_c, r_max=3.0 * math.sqrt(max(
                    observables.photon_number(rho_c), 1.0)))
            r_star = float(radii[int(np.argmax(prof))])
            c.expect(r_star > 0.5,
                     f"ring: radial maximum at r = {r_star:.2f} beyond the "
                     "vacuum rms radius 0.5")
    return c.result(t0)


def check_selection_rules() -> CheckResult:
    """9: G-symmetry selection rules on canonical runs."""
    t0 = time.time()
    c = _Check("9 symmetry selection rules")
    t = np.linspace(0.0, 400.0, 801)
    for n in (2, 3):
        for product in (True, False):
            spec = LindbladSpec.rwa(n, 12, FIG2["lam"], FIG2["gamma_c"],
                                    FIG2["gamma_d"], product=product)
            kwargs = {} if product else {"representation": "full"}
            tr = evolve(spec, None, t, rtol=1e-10, atol=1e-12, **kwargs)
            for nm, sym in (("a", "<a>"), ("aa", "<aa>"), ("a_jp", "<aJ+>")):
                mx = float(np.max(np.abs(tr.data[nm])))
                solver = "product" if product else "block(full)"
                c.expect(mx <= 1e-8,
                         f"N={n} {solver}: max|{sym}| = {mx:.1e} <= 1e-8")
    return c.result(t0)


CHECKS = {
    1: check_oracle_equivalence,
    2: check_rwa_validity,
    3: check_cumulant_vs_full,
    4: check_closed_form_steady,
    5: check_fig3_scaling,
    6: check_hp_consistency,
    7: check_entanglement_fano,
    8: check_wigner_properties,
    9: check_selection_rules,
}

PROFILES = {
    "default": (1, 2, 4, 6),        # criterion 9 piggybacks inside 1
    "full": (1, 2, 3, 4, 5, 6, 7, 8, 9),
}


def run_profile(profile: str = "default") -> list:
    ids = PROFILES[profile]
    results = []
    shared_traj = None
    for cid in ids:
        if cid in (3, 7, 8):
            if shared_traj is None:
                shared_traj = _fig2_reference_run()
            results.append(CHECKS[cid](shared_traj))
        else:
            results.append(CHECKS[cid]())
    return results


def report(results, stream) -> list:
    failed = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        stream.write(f"[{status}] criterion {res.name} ({res.duration:.1f}s)\n")
        for line in res.details:
            stream.write(f"    {line}\n")
        if not res.passed:
            failed.append(res.name)
    stream.write(f"{len(results) - len(failed)}/{len(results)} criteria passed\n")
    return failed
