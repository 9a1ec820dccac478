"""``phase`` command-line harness.

Each subcommand reproduces one family of results and writes CSV files plus a
``manifest.json`` into ``--out``.  A ``--config`` JSON document, validated
against the subcommand schema, overrides the flags.

Exit codes: 0 ok, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import dynamics1, gwphase, output, phasedist, selftest, shgpdc, states, twomode
from .specfun import DomainError
from .tridiag import ConvergenceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


class NumericFailure(RuntimeError):
    pass


# name -> (json type, default, help); argparse flags and JSON schemas are both built from this table
_COMMON = {
    "out": ("string", None, "output directory (default phase_out/<command>)"),
}
_M = {"M": ("integer", phasedist.DEFAULT_M, "phase grid points")}
_SINGLE = {
    "nbar": ("number", 2.0, "mean photon number |alpha0|^2 of the displacement"),
    "phase": ("number", 0.0, "argument of alpha0"),
    "formalisms": ("string", "pb,s0,s-1", "comma list of pb and s<value>, e.g. pb,s0,s-1"),
    "theta0": ("number", None, "window start (default centred on the state's phase)"),
}
PARAMS: dict[str, dict] = {
    "dist": {**_SINGLE, **_M,
             "state": ("string", "coherent", "coherent|squeezed|displaced_number|number|cat"),
             "r": ("number", 0.0, "squeeze parameter"),
             "eta": ("number", 0.0, "squeeze direction"),
             "n0": ("integer", 0, "Fock index for displaced_number / number"),
             "gamma": ("number", 0.0, "relative cat phase")},
    "cat": {**_SINGLE, **_M, "gamma": ("number", 0.0, "relative phase of the cat components")},
    "squeezed": {**_SINGLE, **_M, "nbar": ("number", 0.0, "mean photon number of the displacement"),
                 "r_list": ("string", "0.5,1,2", "comma list of squeeze parameters"),
                 "eta": ("number", 0.0, "squeeze direction")},
    "jcm": {"nbar": ("number", 20.0, "initial coherent mean photon number"),
            "tmax": ("number", 2.0, "largest scaled time T"),
            "dt": ("number", 0.01, "scaled time step")},
    "kerr1": {"nbar": ("number", 4.0, "initial coherent mean photon number"),
              "steps": ("integer", 200, "tau samples on [0, 2 pi]"),
              "tau_list": ("string", "0.5,1.5707963267948966,3.141592653589793",
                           "tau values for distribution snapshots"),
              **_M},
    "kerr2": {"nbar1": ("number", 0.25, "mode 1 mean photon number"),
              "nbar2": ("number", 4.0, "mode 2 mean photon number"),
              "d": ("number", 0.5, "cross-Kerr ratio"),
              "steps": ("integer", 200, "tau samples on [0, 2 pi]")},
    "tmsv": {"r_list": ("string", "0.25,0.5,1,2", "comma list of squeeze parameters"),
             "M": ("integer", None, "joint grid points per axis (default from the truncation)")},
    "paircoh": {"zeta_list": ("string", "0.5,1,2,4", "comma list of |zeta|"),
                "q": ("integer", 0, "photon-number difference"),
                "M": ("integer", None, "joint grid points per axis (default from the truncation)")},
    "shg": {"nbar": ("number", 4.0, "fundamental mean photon number"),
            "gt_list": ("string", "0.5,1,2", "comma list of gt for joint matrices"),
            "tmax": ("number", 5.0, "largest gt of the variance trajectory"),
            "dt": ("number", 0.05, "gt step of the variance trajectory"),
            "M": ("integer", 128, "joint grid points per axis")},
    "pdc": {"nbar": ("number", 4.0, "pump mean photon number"),
            "gt_list": ("string", "0.3,1", "comma list of gt for joint matrices"),
            "tmax": ("number", 1.5, "largest gt of the variance trajectory"),
            "dt": ("number", 0.05, "gt step of the variance trajectory"),
            "ideal_rmax": ("number", 5.0, "largest squeeze parameter for the ideal-squeezing column (nan beyond)"),
            "M": ("integer", 128, "joint grid points per axis")},
    "gw": {"state": ("string", "number", "number|coherent"),
           "n0": ("integer", 0, "Fock index for number"),
           "nbar": ("number", 1.0, "mean photon number for coherent"),
           "theta0": ("number", -math.pi, "window start"),
           "M": ("integer", 1024, "phase grid points")},
    "fdcoh": {"nbar_list": ("string", "1,4", "comma list of |alpha|^2"),
              "sigma_list": ("string", "1,2,5,10,20,30,44", "comma list of truncation dimensions sigma")},
    "selftest": {"M": ("integer", phasedist.DEFAULT_M, "grid used by the normalization check"),
                 "mutate": ("string", None, "deliberately break a constant (dilog)"),
                 "only": ("string", None, "comma list of modules to run")},
}


def schema_for(command: str) -> dict:
    props = {}
    for name, (typ, _default, _help) in {**_COMMON, **PARAMS[command]}.items():
        props[name] = {"type": [typ, "null"]}
    return {"type": "object", "properties": props, "additionalProperties": False}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phase", description="Quantum phase distribution experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    pytype = {"string": str, "number": float, "integer": int}
    for cmd, params in PARAMS.items():
        sp = sub.add_parser(cmd, help=f"run the {cmd} job")
        sp.add_argument("--config", type=Path, help="JSON config; its values override flags")
        for name, (typ, default, help_) in {**_COMMON, **params}.items():
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=pytype[typ], default=default, help=help_)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = {name: getattr(args, name) for name in {**_COMMON, **PARAMS[cmd]}}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            jsonschema.validate(doc, schema_for(cmd))
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config rejected: {exc.message}") from exc
        cfg.update(doc)
    else:
        jsonschema.validate(cfg, schema_for(cmd))
    if cfg.get("out") is None:
        cfg["out"] = str(Path("phase_out") / cmd)
    return cfg


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from exc
    if not vals:
        raise ConfigError(f"{what} is empty")
    return vals


def _formalisms(text: str) -> list[tuple[str, float | None]]:
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok == "pb":
            out.append(("pb", None))
        elif tok.startswith("s"):
            try:
                s = float(tok[1:])
            except ValueError as exc:
                raise ConfigError(f"bad formalism {tok!r}") from exc
            if not -1.0 <= s < 1.0:
                raise ConfigError(f"s must lie in [-1, 1), got {s}")
            out.append((tok, s))
        else:
            raise ConfigError(f"unknown formalism {tok!r}")
    return out


def _alpha(cfg) -> complex:
    if cfg["nbar"] < 0:
        raise ConfigError("nbar must be non-negative")
    return math.sqrt(cfg["nbar"]) * complex(math.cos(cfg.get("phase", 0.0)), math.sin(cfg.get("phase", 0.0)))


def _distribution(st, form, s, theta0, M):
    if s is None:
        return phasedist.pb_distribution(st, theta0, M)
    return phasedist.sparam_distribution(st, s, theta0, M)


class Job:
    """Collects outputs, checks normalizations and writes the manifest."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.outdir = Path(cfg["out"])
        self.outputs: list[Path] = []
        self.summary: dict = {}
        self.failures: list[str] = []

    def csv(self, name, header, cols):
        self.outputs.append(output.write_csv(self.outdir / name, header, cols))

    def matrix(self, name, mat):
        self.outputs.append(output.write_matrix(self.outdir / name, mat))

    def check_norm(self, label, integral, tol=phasedist.NORM_TOL):
        if not abs(integral - 1.0) <= tol:
            self.failures.append(f"{label}: integral {integral:.12g} outside 1 +- {tol:g}")

    def finish(self) -> int:
        self.summary["failures"] = self.failures
        tol = {"norm": phasedist.NORM_TOL, "tail_eps": states.TAIL_EPS}
        self.outputs.append(output.write_manifest(self.outdir, self.command, self.cfg, tol, self.outputs, self.summary))
        for f in self.failures:
            print(f"numeric failure: {f}", file=sys.stderr)
        print(f"{self.command}: wrote {len(self.outputs)} files to {self.outdir}")
        return EXIT_NUMERIC if self.failures else EXIT_OK


def _single_dists(job: Job, st, cfg, name: str):
    forms = _formalisms(cfg["formalisms"])
    theta0 = cfg["theta0"] if cfg["theta0"] is not None else phasedist.default_theta0(st)
    cols, header = [], ["theta"]
    for form, s in forms:
        d = _distribution(st, form, s, theta0, cfg["M"])
        if not cols:
            cols.append(d.theta)
        cols.append(d.values)
        header.append(f"P_{form}")
        job.check_norm(form, d.integral())
        mean, var = d.mean_variance()
        job.summary[form] = {"mean": mean, "variance": var, "min": float(d.values.min())}
    job.csv(name, header, cols)


def run_dist(cfg, job):
    a0 = _alpha(cfg)
    kind = cfg["state"]
    if kind == "coherent":
        st = states.coherent(a0)
    elif kind == "squeezed":
        st = states.squeezed(a0, cfg["r"], cfg["eta"])
    elif kind == "displaced_number":
        st = states.displaced_number(a0, cfg["n0"])
    elif kind == "number":
        st = states.number(cfg["n0"])
    elif kind == "cat":
        st = states.cat(a0, cfg["gamma"])
    else:
        raise ConfigError(f"unknown state {kind!r}")
    _single_dists(job, st, cfg, "dist.csv")


def run_cat(cfg, job):
    _single_dists(job, states.cat(_alpha(cfg), cfg["gamma"]), cfg, "cat.csv")


def run_squeezed(cfg, job):
    a0 = _alpha(cfg)
    forms = _formalisms(cfg["formalisms"])
    cols, header = [], ["theta"]
    for r in _floats(cfg["r_list"], "r_list"):
        st = states.squeezed(a0, r, cfg["eta"])
        theta0 = cfg["theta0"] if cfg["theta0"] is not None else phasedist.default_theta0(st)
        for form, s in forms:
            d = _distribution(st, form, s, theta0, cfg["M"])
            if not cols:
                cols.append(d.theta)
            cols.append(d.values)
            header.append(f"P_{form}_r{r:g}")
            job.check_norm(f"{form} r={r:g}", d.integral())
            job.summary[f"{form}_r{r:g}"] = dict(zip(("mean", "variance"), d.mean_variance()))
    job.csv("squeezed.csv", header, cols)


def run_jcm(cfg, job):
    if cfg["dt"] <= 0 or cfg["tmax"] <= 0:
        raise ConfigError("tmax and dt must be positive")
    T = np.round(np.arange(0.0, cfg["tmax"] + 0.5 * cfg["dt"], cfg["dt"]), 12)
    traj = dynamics1.jcm_trajectory(_alpha({**cfg, "phase": 0.0}), T)
    job.csv("jcm.csv", ["T", "gt", "mean_n", "phase_variance", "envelope"],
            [traj.T, traj.gt, traj.mean_n, traj.phase_variance, traj.envelope])
    centers = dynamics1.revival_centers(traj, int(cfg["tmax"] + 0.5))
    job.summary["revival_centers"] = centers
    job.summary["nearest_variance_extrema"] = [dynamics1.nearest_variance_extremum(traj, c) for c in centers]


def run_kerr1(cfg, job):
    st = states.coherent(_alpha({**cfg, "phase": 0.0}))
    taus = np.linspace(0.0, 2 * math.pi, cfg["steps"] + 1)
    mv = np.array([dynamics1.anharmonic_mean_variance(st, t) for t in taus])
    job.csv("kerr1.csv", ["tau", "mean", "variance"], [taus, mv[:, 0], mv[:, 1]])
    cols, header = [], ["theta"]
    for tau in _floats(cfg["tau_list"], "tau_list"):
        d = dynamics1.anharmonic_pb_distribution(st, tau, -math.pi, cfg["M"])
        if not cols:
            cols.append(d.theta)
        cols.append(d.values)
        header.append(f"P_tau{tau:.6g}")
        job.check_norm(f"tau={tau:g}", d.integral())
    job.csv("kerr1_dist.csv", header, cols)


def run_kerr2(cfg, job):
    if cfg["nbar1"] < 0 or cfg["nbar2"] < 0:
        raise ConfigError("nbar1 and nbar2 must be non-negative")
    taus = np.linspace(0.0, 2 * math.pi, cfg["steps"] + 1)
    tr = twomode.kerr_trajectory(math.sqrt(cfg["nbar1"]), math.sqrt(cfg["nbar2"]), cfg["d"], taus)
    job.csv("kerr2.csv", ["tau", "C12", "var_diff"], [tr["tau"], tr["C12"], tr["var_diff"]])
    i = int(np.argmax(tr["C12"]))
    job.summary["max_C12"] = {"tau": float(tr["tau"][i]), "C12": float(tr["C12"][i])}


def _two_mode_rows(job, states_by_param, label, closed_c12):
    rows = {k: [] for k in (label, "C12", "C12_closed", "var_sum_2pi", "var_diff_2pi", "var_sum_4pi", "integral")}
    for p, st in states_by_param:
        rep = twomode.correlation_report(st, None, job.cfg.get("M"))
        joint = twomode.joint_pb(st, None, job.cfg.get("M"))
        job.check_norm(f"{label}={p:g}", joint.integral())
        rows[label].append(p)
        rows["C12"].append(rep.C12)
        rows["C12_closed"].append(closed_c12(p))
        rows["var_sum_2pi"].append(rep.var_sum_2pi)
        rows["var_diff_2pi"].append(rep.var_diff_2pi)
        rows["var_sum_4pi"].append(rep.var_sum_4pi)
        rows["integral"].append(joint.integral())
    return list(rows), list(rows.values())


def run_tmsv(cfg, job):
    rs = _floats(cfg["r_list"], "r_list")
    header, cols = _two_mode_rows(job, [(r, states.two_mode_squeezed_vacuum(r)) for r in rs], "r",
                                  lambda r: twomode.tmsv_closed_forms(r)["C12"])
    job.csv("tmsv.csv", header, cols)


def run_paircoh(cfg, job):
    zs = _floats(cfg["zeta_list"], "zeta_list")
    q = cfg["q"]
    header, cols = _two_mode_rows(job, [(z, states.pair_coherent(z, q)) for z in zs], "zeta",
                                  lambda z: twomode.pair_coherent_c12(z, q))
    job.csv("paircoh.csv", header, cols)


def _shgpdc(cfg, job, process):
    amp = math.sqrt(cfg["nbar"])
    if cfg["dt"] <= 0 or cfg["tmax"] < 0:
        raise ConfigError("tmax must be non-negative and dt positive")
    gts = np.round(np.arange(0.0, cfg["tmax"] + 0.5 * cfg["dt"], cfg["dt"]), 12)
    tr = shgpdc.variance_trajectory(process, amp, gts)
    header = ["gt", "var_a", "var_b", "mean_a", "mean_b"]
    cols = [tr["gt"], tr["var_a"], tr["var_b"], tr["mean_a"], tr["mean_b"]]
    if process == shgpdc.PDC:
        header.append("var_ideal_squeezed")
        # the ideal squeezed vacuum needs ~1e5 Fock terms near r = 5, so larger r is left blank
        rmax = cfg["ideal_rmax"]
        cols.append(np.array([shgpdc.ideal_squeezed_variance(2 * amp * g) if 2 * amp * g <= rmax else math.nan
                              for g in gts]))
    job.csv(f"{process}_variances.csv", header, cols)
    evolve = shgpdc.shg_evolve if process == shgpdc.SHG else shgpdc.pdc_evolve
    for k, gt in enumerate(_floats(cfg["gt_list"], "gt_list")):
        joint = shgpdc.joint_phase(evolve(amp, gt), None, cfg["M"])
        job.check_norm(f"joint gt={gt:g}", joint.integral())
        job.matrix(f"{process}_joint_{k}.csv", joint.values)
        job.summary[f"joint_{k}"] = {"gt": gt, "theta0_a": joint.theta0[0], "theta0_b": joint.theta0[1],
                                     "step": joint.step}


def run_shg(cfg, job):
    _shgpdc(cfg, job, shgpdc.SHG)


def run_pdc(cfg, job):
    _shgpdc(cfg, job, shgpdc.PDC)


def run_gw(cfg, job):
    if cfg["state"] == "number":
        st = states.number(cfg["n0"])
    elif cfg["state"] == "coherent":
        st = states.coherent(math.sqrt(cfg["nbar"]))
    else:
        raise ConfigError(f"unknown state {cfg['state']!r}")
    d = gwphase.gw_distribution(st, cfg["theta0"], cfg["M"])
    pb = phasedist.evaluate_series(phasedist.fourier_coefficients(st), d.theta)
    job.csv("gw.csv", ["theta", "P_gw", "P_pb"], [d.theta, d.values, pb])
    lhs, rhs = gwphase.gw_commutator_check(st, cfg["theta0"])
    job.summary.update({"raw_integral": d.meta["raw_integral"], "interior_max_min": gwphase.interior_ratio(d),
                        "commutator": lhs, "commutator_expected": rhs})


def run_fdcoh(cfg, job):
    rows = {k: [] for k in ("nbar", "sigma", "fidelity_truncated", "fidelity_displacement", "overlap")}
    for nb in _floats(cfg["nbar_list"], "nbar_list"):
        a = math.sqrt(nb)
        for sig in _floats(cfg["sigma_list"], "sigma_list"):
            sig = int(sig)
            t = states.fd_coherent_truncated(a, sig)
            dsp = states.fd_coherent_displacement(a, sig)
            rows["nbar"].append(nb)
            rows["sigma"].append(sig)
            rows["fidelity_truncated"].append(states.glauber_fidelity(t, a))
            rows["fidelity_displacement"].append(states.glauber_fidelity(dsp, a))
            rows["overlap"].append(abs(np.vdot(t.amplitudes, dsp.amplitudes)) ** 2)
    job.csv("fdcoh.csv", list(rows), list(rows.values()))


def run_selftest(cfg) -> int:
    only = [m.strip() for m in cfg["only"].split(",")] if cfg.get("only") else None
    if cfg.get("mutate") not in (None, "dilog"):
        raise ConfigError(f"unknown mutation {cfg['mutate']!r}")
    results = selftest.run(selftest.SelftestOptions(M=cfg["M"]), cfg.get("mutate"), only)
    print(selftest.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


RUNNERS = {
    "dist": run_dist, "cat": run_cat, "squeezed": run_squeezed, "jcm": run_jcm, "kerr1": run_kerr1,
    "kerr2": run_kerr2, "tmsv": run_tmsv, "paircoh": run_paircoh, "shg": run_shg, "pdc": run_pdc,
    "gw": run_gw, "fdcoh": run_fdcoh,
}

NUMERIC_ERRORS = (states.TruncationError, phasedist.CoverageError, phasedist.ExtrapolationError,
                  ConvergenceError, DomainError,
                  FloatingPointError, gwphase.CacheExhaustedError, NumericFailure)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "selftest":
            return run_selftest(cfg)
        job = Job(args.command, cfg)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            with np.errstate(invalid="raise", over="raise"):
                RUNNERS[args.command](cfg, job)
        for w in caught:
            job.summary.setdefault("warnings", []).append(f"{w.category.__name__}: {w.message}")
            if issubclass(w.category, phasedist.GridResolutionWarning):
                job.failures.append(str(w.message))
        return job.finish()
    except (ConfigError, states.StateError, jsonschema.ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
