"""Invariant suite run by ``phase selftest``.

Each check is a small, fast instance of one module invariant.  A check
returns (passed, detail); exceptions and warnings raised inside a check count
as failures so nothing degrades silently.
"""
from __future__ import annotations

import contextlib
import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dynamics1, gwphase, phasedist, shgpdc, specfun, states, twomode

PI2_6_TRUE = math.pi ** 2 / 6


@dataclass
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class SelftestOptions:
    M: int = phasedist.DEFAULT_M


# ---------------------------------------------------------------------------
# specfun


def _laguerre_recurrence(opt):
    worst = 0.0
    for a in (0.0, 0.5, 3.0):
        for x in (-50.0, -7.5, 0.3, 12.0, 50.0):
            L = [specfun.laguerre_assoc(n, a, x) for n in range(52)]
            for n in range(1, 50):
                lhs = (n + 1) * L[n + 1]
                rhs = (2 * n + 1 + a - x) * L[n] - (n + a) * L[n - 1]
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0))
    return worst < 1e-12, f"max rel residual {worst:.2e}"


def _dilog_anchor(opt):
    d0 = specfun.dilog(0.0)
    d2 = specfun.dilog(2.0)
    err = max(abs(d0 - PI2_6_TRUE), abs(d2 + PI2_6_TRUE / 2), abs(specfun.dilog(1.0)))
    return err < 1e-14, f"anchor error {err:.2e}"


def _dilog_reflection(opt):
    from scipy.integrate import quad

    worst = 0.0
    for x in np.arange(0.1, 1.95, 0.1):
        # ln(t)/(t-1) written as log1p(u)/u, u = t - 1, to avoid 0/0 at t = 1
        direct = sum(-quad(lambda u: math.log1p(u) / u if u else 1.0, 0.0, y - 1.0, epsabs=1e-15)[0]
                     for y in (x, 2.0 - x))
        worst = max(worst, abs(specfun.dilog(x) + specfun.dilog(2.0 - x) - direct))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def _hyp2f1_rational(opt):
    def oracle(n, b, c, x):
        tot, term = Fraction(0), Fraction(1)
        for k in range(n + 1):
            tot += term
            term = term * (k - n) * (b + k) / ((c + k) * (k + 1)) * x
        return tot

    worst = 0.0
    for n in range(11):
        for b, c, x in ((Fraction(1, 2), Fraction(3, 2), Fraction(1, 3)),
                        (Fraction(-7, 3), Fraction(5, 4), Fraction(-2, 5)),
                        (Fraction(3), Fraction(1, 7), Fraction(9, 10))):
            exact = float(oracle(n, b, c, x))
            got = float(specfun.hyp2f1_terminating(n, b, c, x))
            worst = max(worst, abs(got - exact) / max(abs(exact), 1.0))
    return worst < 1e-13, f"max rel error {worst:.2e}"


def _erf_shape(opt):
    x = np.linspace(0, 6, 1001)
    y = specfun.erf(x)
    # |erf| saturates to 1.0 in double precision beyond x ~ 5.9
    ok = bool(np.all(np.diff(y) >= 0) and np.all(specfun.erf(-x) == -y) and np.all(np.abs(y) <= 1.0))
    return ok, f"monotone/odd/bounded on [-6, 6]: {ok}"


# ---------------------------------------------------------------------------
# states


def _unit_norm(opt):
    built = [states.coherent(1.3 + 0.4j), states.squeezed(0.8, 0.7, 0.3), states.displaced_number(1.5, 2),
             states.cat(1.7, 0.5), states.kitten(1.2, [0, 2 * math.pi / 3, 4 * math.pi / 3], [1, 1, 1])]
    worst = max(abs(s.norm() - 1.0) for s in built)
    tail = max(s.tail_mass for s in built)
    return worst < 1e-12 and tail < states.TAIL_EPS, f"norm error {worst:.2e}, worst tail {tail:.2e}"


def _degeneracies(opt):
    a = states.coherent(1.1, 40).amplitudes
    b = states.squeezed(1.1, 0.0, 0.0, 40).amplitudes
    c = states.displaced_number(1.1, 0, 40).amplitudes
    d = states.squeezed(0.0, 0.0, 0.0, 40).amplitudes
    e = np.zeros(41, dtype=complex)
    e[0] = 1
    err = max(np.max(np.abs(a - b)), np.max(np.abs(a - c)), np.max(np.abs(d - e)))
    return err < 1e-12, f"max difference {err:.2e}"


def _cat_norm(opt):
    worst = 0.0
    for a0, g in ((1.0, 0.0), (1.5, math.pi), (2.0, 1.1)):
        st = states.cat(a0, g)
        raw = (states.coherent(a0, st.truncation).amplitudes
               + np.exp(1j * g) * states.coherent(-a0, st.truncation).amplitudes)
        analytic = 1.0 / math.sqrt(2 + 2 * math.cos(g) * math.exp(-2 * a0 ** 2))
        worst = max(worst, abs(analytic * np.linalg.norm(raw) - 1.0))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _fd_distinct(opt):
    a = math.sqrt(4.0)
    small = abs(np.vdot(states.fd_coherent_truncated(a, 4).amplitudes,
                        states.fd_coherent_displacement(a, 4).amplitudes)) ** 2
    big = abs(np.vdot(states.fd_coherent_truncated(a, 60).amplitudes,
                      states.fd_coherent_displacement(a, 60).amplitudes)) ** 2
    return small < 1 - 1e-6 and big > 1 - 1e-8, f"overlap sigma=4 {small:.6f}, sigma=60 {big:.12f}"


# ---------------------------------------------------------------------------
# phasedist


def _normalization(opt):
    """PB series of a coherent state with nbar = 40 sampled on the configured grid."""
    st = states.coherent(math.sqrt(40.0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dist = phasedist.pb_distribution(st, None, opt.M)
    flagged = [w for w in caught if issubclass(w.category, phasedist.GridResolutionWarning)]
    vals = phasedist.evaluate_series(dist.coefficients, dist.theta)
    err = abs(float(np.sum(vals)) * 2 * math.pi / opt.M - 1.0)
    ok = err <= phasedist.NORM_TOL and not flagged
    return ok, f"M={opt.M}: |integral - 1| = {err:.2e}" + (", grid resolution warning" if flagged else "")


def _nonnegativity(opt):
    worst = 0.0
    for st in (states.coherent(1.2), states.cat(1.5, 0.3), states.squeezed(0, 1.0)):
        for s in (None, -1):
            d = phasedist.pb_distribution(st) if s is None else phasedist.sparam_distribution(st, s)
            worst = min(worst, float(d.values.min()))
    odd = states.from_amplitudes(np.array([0, 1, 0, 1]) / math.sqrt(2))
    w = phasedist.sparam_distribution(odd, 0)
    worst = min(worst, float(w.values.min()))
    return worst > -1e-12, f"min value {worst:.2e}"


def _husimi_broadening(opt):
    G = phasedist.g_matrix(30, -1)
    off = G[~np.eye(G.shape[0], dtype=bool)]
    st = states.coherent(math.sqrt(2))
    peak_pb = phasedist.pb_distribution(st).values.max()
    peak_q = phasedist.sparam_distribution(st, -1).values.max()
    return bool(np.all(off < 1) and peak_q <= peak_pb), f"max G(-1) off-diagonal {off.max():.4f}"


def _g_triple(opt):
    worst = 0.0
    for s in (-1, -0.5, 0, 0.5):
        for m in range(0, 41, 4):
            for n in range(0, 41, 3):
                vals = [phasedist.g_coefficient(m, n, s, meth) for meth in ("sum", "jacobi", "hypergeometric")]
                ref = abs(vals[0])
                worst = max(worst, max(abs(v - vals[0]) for v in vals) / max(ref, 1e-300))
    return worst < 1e-10, f"max rel spread {worst:.2e}"


def _sparam_oracle(opt):
    st = states.coherent(math.sqrt(2.0))
    worst = 0.0
    for s in (0, -1):
        a = phasedist.sparam_distribution(st, s, None, 256)
        b = phasedist.radial_integrate(phasedist.quasidist_grid(st, s, M=256, n_r=200))
        worst = max(worst, float(np.max(np.abs(a.values - b.values))))
    return worst < 1e-5, f"sup-norm {worst:.2e}"


def _variance_order(opt):
    st = states.coherent(math.sqrt(2.0))
    v0 = phasedist.sparam_distribution(st, 0).mean_variance()[1]
    vpb = phasedist.pb_distribution(st).mean_variance()[1]
    vq = phasedist.sparam_distribution(st, -1).mean_variance()[1]
    return v0 < vpb < vq, f"W {v0:.5f} < PB {vpb:.5f} < Q {vq:.5f}"


# ---------------------------------------------------------------------------
# dynamics1


def _anharmonic_number(opt):
    st = states.coherent(2.0)
    ev = dynamics1.anharmonic_evolve(st, 0.37)
    err = float(np.max(np.abs(np.abs(ev.amplitudes) ** 2 - np.abs(st.amplitudes) ** 2)))
    return err < 1e-15, f"max change {err:.2e}"


def _anharmonic_mirror(opt):
    st = states.coherent(2.0)
    tau = 0.9
    p1 = dynamics1.anharmonic_pb_distribution(st, tau, -math.pi, 512).values
    p2 = dynamics1.anharmonic_pb_distribution(st, 2 * math.pi - tau, -math.pi, 512).values
    # theta_k -> -theta_k on the grid -pi + k h maps index k to (M - k) mod M
    mirrored = np.roll(p2[::-1], 1)
    err = float(np.max(np.abs(p1 - mirrored)))
    return err < 1e-12, f"max asymmetry {err:.2e}"


def _jcm_series(opt):
    st = dynamics1.jcm_evolve(math.sqrt(20.0), 12.3)
    series = dynamics1.jcm_phase_variance(st)
    quad = dynamics1.jcm_phase_distribution(st).mean_variance()[1]
    return abs(series - quad) < 1e-6, f"difference {abs(series - quad):.2e}"


def _jcm_revivals(opt):
    a0 = math.sqrt(20.0)
    traj = dynamics1.jcm_trajectory(a0, np.arange(0.0, 2.5 + 1e-9, 0.01))
    centers = dynamics1.revival_centers(traj, 2)
    ext = [dynamics1.nearest_variance_extremum(traj, c) for c in centers]
    gaps = [abs(e - c) for e, c in zip(ext, centers)]
    return len(gaps) == 2 and max(gaps) <= 0.05, f"revivals {centers}, variance extrema {ext}"


# ---------------------------------------------------------------------------
# twomode


def _casting_conserves(opt):
    st = states.two_mode_squeezed_vacuum(0.8)
    raw = twomode.raw_4pi(st)
    cast = twomode.cast_2pi(raw)
    err = max(abs(raw.integral() - 1), abs(cast.integral() - 1))
    simp = twomode.cast_2pi_simplified(st, M=raw.meta.get("M"))
    diff = cast.max_abs_diff(simp)
    return err < 1e-10 and diff < 1e-10, f"integral error {err:.2e}, recipes differ by {diff:.2e}"


def _uniform_marginals(opt):
    worst = 0.0
    for st in (states.two_mode_squeezed_vacuum(1.0), states.pair_coherent(2.0)):
        pm = twomode.difference_marginal(st, M=256)
        worst = max(worst, float(np.max(np.abs(pm.values - 1 / (2 * math.pi)))))
        pa, pb = twomode.marginals(twomode.joint_pb(st, M=128))
        for p in (pa, pb):
            worst = max(worst, float(np.max(np.abs(p.values - 1 / (2 * math.pi)))))
    return worst < 1e-10, f"max deviation from 1/(2 pi) {worst:.2e}"


def _variance_identity(opt):
    worst = 0.0
    for st in (states.two_mode_squeezed_vacuum(0.6), states.pair_coherent(1.5),
               twomode.kerr_two_mode(1.0, 1.5, 0.5, 1.0)):
        worst = max(worst, twomode.correlation_report(st).identity_residual())
    return worst < 1e-10, f"max residual {worst:.2e}"


def _c12_series(opt):
    worst = 0.0
    for r in (0.5, 2.0):
        worst = max(worst, abs(twomode.correlation_report(states.two_mode_squeezed_vacuum(r)).C12
                               - twomode.tmsv_c12_series(r)))
    for z in (1.0, 4.0):
        worst = max(worst, abs(twomode.correlation_report(states.pair_coherent(z)).C12
                               - twomode.pair_coherent_c12(z)))
    return worst < 1e-6, f"max difference {worst:.2e}"


def _kerr_half(opt):
    taus = np.linspace(0, 2 * math.pi, 121)
    best = {d: float(np.max(twomode.kerr_trajectory(0.5, 2.0, d, taus)["C12"])) for d in (0, 0.25, 0.5, 0.75, 1)}
    return max(best, key=best.get) == 0.5, "max C12: " + ", ".join(f"d={d}: {v:.3f}" for d, v in best.items())


# ---------------------------------------------------------------------------
# shgpdc


def _block_checks(opt):
    worst = {"unitarity": 0.0, "parity": 0.0, "energy": 0.0}
    for proc, evolve in ((shgpdc.SHG, shgpdc.shg_evolve), (shgpdc.PDC, shgpdc.pdc_evolve)):
        base = None
        for gt in np.arange(0.0, 5.0 + 1e-9, 0.5):
            f = evolve(2.0, gt, 40)
            worst["unitarity"] = max(worst["unitarity"], f.unitarity_defect())
            worst["parity"] = max(worst["parity"], f.parity_defect())
            ex = f.excitation() if proc == shgpdc.SHG else f.mean_photons()[0] + 2 * f.mean_photons()[1]
            base = ex if base is None else base
            worst["energy"] = max(worst["energy"], abs(ex - base))
    ok = all(v < 1e-10 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def _shg_series(opt):
    worst = 0.0
    for proc, evolve in ((shgpdc.SHG, shgpdc.shg_evolve), (shgpdc.PDC, shgpdc.pdc_evolve)):
        f = evolve(2.0, 0.7)
        va, vb = shgpdc.phase_variances(f)
        pa, pb = shgpdc.marginals(f, 1024)
        worst = max(worst, abs(va - pa.mean_variance()[1]), abs(vb - pb.mean_variance()[1]))
    return worst < 1e-5, f"max difference {worst:.2e}"


def _pdc_ideal(opt):
    early = max(abs(shgpdc.phase_variances(shgpdc.pdc_evolve(2.0, gt))[0] - shgpdc.ideal_squeezed_variance(4 * gt))
                for gt in (0.02, 0.05, 0.1))
    late = abs(shgpdc.phase_variances(shgpdc.pdc_evolve(2.0, 1.0))[0] - shgpdc.ideal_squeezed_variance(4.0))
    return early < 0.02 and late > 0.2, f"early gap {early:.2e}, gap at gt=1 {late:.3f}"


# ---------------------------------------------------------------------------
# gwphase


def _gw_phi(opt):
    cache = gwphase.GWBasisCache.build(8, 0.0, 256)
    err = max(float(np.max(np.abs(cache.phi[n] - gwphase.phi_partition(cache.gamma, n)))) for n in range(9))
    return err < 1e-8, f"max difference {err:.2e}"


def _gw_gamma(opt):
    err = max(abs(gwphase.gw_gamma(n, th) - gwphase.gw_gamma_quad(n, th))
              for n in range(1, 6) for th in (0.4, 2.0, math.pi, 5.5))
    return err < 1e-8, f"max difference {err:.2e}"


def _gw_vacuum(opt):
    ratio = gwphase.interior_ratio(gwphase.gw_distribution(states.number(0)))
    flat = gwphase.pb_vacuum_flatness()
    return ratio > 2 and flat < 1e-12, f"GW max/min {ratio:.2f}, PB deviation {flat:.1e}"


CHECKS = [
    ("specfun", "laguerre recurrence", _laguerre_recurrence),
    ("specfun", "dilog anchor", _dilog_anchor),
    ("specfun", "dilog reflection vs quadrature", _dilog_reflection),
    ("specfun", "hyp2f1 rational oracle", _hyp2f1_rational),
    ("specfun", "erf monotone odd bounded", _erf_shape),
    ("states", "unit norm and tail", _unit_norm),
    ("states", "constructor degeneracies", _degeneracies),
    ("states", "cat normalization", _cat_norm),
    ("states", "finite-dimensional coherent states", _fd_distinct),
    ("phasedist", "normalization", _normalization),
    ("phasedist", "nonnegativity", _nonnegativity),
    ("phasedist", "husimi broadening", _husimi_broadening),
    ("phasedist", "G triple agreement", _g_triple),
    ("phasedist", "s-distribution vs radial integral", _sparam_oracle),
    ("phasedist", "coherent variance ordering", _variance_order),
    ("dynamics1", "anharmonic number distribution", _anharmonic_number),
    ("dynamics1", "anharmonic mirror symmetry", _anharmonic_mirror),
    ("dynamics1", "jcm series vs quadrature", _jcm_series),
    ("dynamics1", "jcm revivals at variance extrema", _jcm_revivals),
    ("twomode", "casting conserves probability", _casting_conserves),
    ("twomode", "uniform marginals", _uniform_marginals),
    ("twomode", "variance identity", _variance_identity),
    ("twomode", "C12 series vs quadrature", _c12_series),
    ("twomode", "kerr d=1/2 maximizes C12", _kerr_half),
    ("shgpdc", "unitarity parity energy", _block_checks),
    ("shgpdc", "series vs grid variances", _shg_series),
    ("shgpdc", "pdc vs ideal squeezing", _pdc_ideal),
    ("gwphase", "phi recursion vs partitions", _gw_phi),
    ("gwphase", "gamma vs quadrature", _gw_gamma),
    ("gwphase", "vacuum anisotropy", _gw_vacuum),
]


@contextlib.contextmanager
def mutated(name: str | None):
    """Deliberately break a constant to confirm the suite notices."""
    if name is None:
        yield
        return
    if name != "dilog":
        raise ValueError(f"unknown mutation {name!r}")
    saved = specfun.PI2_6
    specfun.PI2_6 = saved * (1 + 1e-6)
    try:
        yield
    finally:
        specfun.PI2_6 = saved


def run(options: SelftestOptions | None = None, mutate: str | None = None, only: list[str] | None = None
        ) -> list[CheckResult]:
    opt = options or SelftestOptions()
    out = []
    with mutated(mutate):
        for module, name, fn in CHECKS:
            if only and module not in only:
                continue
            t0 = time.perf_counter()
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    ok, detail = fn(opt)
            except Exception as exc:  # a crash or escalated warning is a failure, reported in the table
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            out.append(CheckResult(module, name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(results: list[CheckResult]) -> str:
    w1 = max(len(r.module) for r in results)
    w2 = max(len(r.name) for r in results)
    lines = [f"{'module':<{w1}}  {'check':<{w2}}  result  seconds  detail"]
    for r in results:
        lines.append(f"{r.module:<{w1}}  {r.name:<{w2}}  {'PASS' if r.passed else 'FAIL':<6}  "
                     f"{r.seconds:7.2f}  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} passed")
    return "\n".join(lines)
