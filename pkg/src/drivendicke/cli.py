"""Command-line interface: run, sweep, wigner, verify.

Configs are flat key = value files (a TOML-compatible subset: strings,
numbers, booleans, one-line arrays, # comments). All rates are angular
frequencies in rad/s, amplitudes in metres, times in seconds. Validation
failures name the offending field and its line in the file.

Artifacts written by ``run``:
  trajectory.csv   columns t, n, fano, z, s, re_x, im_x, E_N (blank where
                   a solver does not produce the quantity), 17 significant
                   digits so cross-implementation diffs are meaningful
  summary.json     burst summary + derived couplings + config echo +
                   artifact version + solver metadata
  wigner_<tag>.csv phase-space grids (# key=value header, then the matrix)
  snapshots.npz    optional tagged states: per-sector flat complex arrays
                   with a JSON block-index header (see save_states)

Exit codes: 0 success, 2 config error, 3 numerical abort, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:
    import tomli as _toml

from . import __version__
from . import cumulant, hp_model, observables
from .dynamics import LindbladSpec, evolve
from .errors import (
    ConfigError,
    DrivenDickeError,
    GoldenChecksumError,
    VerificationFailure,
)
from .operators import BlockDensityMatrix
from .params import DerivedCouplings, PhysicalParams, derive_couplings

SOLVERS = ("full_td", "rwa_block", "cumulant_third", "cumulant_fourth", "hp")
ENV_OUT = "DRIVENDICKE_OUT"
_FMT = "{:.16e}"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_KNOWN_KEYS = {
    "solver", "N", "gamma_c", "gamma_d", "lambda_eff",
    "omega_c", "omega_d0", "lambda0", "Omega_m", "A", "c_light", "phases",
    "Q_c", "L", "n_max", "t_final", "n_points", "rtol", "atol",
    "compute_entanglement", "entanglement_stride",
    "wigner_snapshots", "wigner_extent", "wigner_points",
    "save_states", "out_dir", "tag",
    "sweep_N", "sweep_N_min", "sweep_N_max", "sweep_N_points",
    "series_tol", "rwa_block_max_N",
}


@dataclass
class RunConfig:
    solver: str
    N: float
    gamma_c: float
    gamma_d: float
    lambda_eff: float | None = None
    physical: PhysicalParams | None = None
    derived: DerivedCouplings | None = None
    n_max: int = 0
    t_final: float = 0.0
    n_points: int = 2001
    rtol: float = 1e-8
    atol: float = 1e-10
    compute_entanglement: bool = False
    entanglement_stride: int = 10
    wigner_snapshots: object = None          # None | "fano" | list of times
    wigner_extent: float | None = None
    wigner_points: int = 101
    save_states: bool = False
    out_dir: str = "."
    tag: str = "run"
    sweep_N: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @property
    def effective_lambda(self) -> float:
        if self.lambda_eff is not None:
            return self.lambda_eff
        return self.derived.lambda_eff

    def n_crit(self) -> float:
        lam = self.effective_lambda
        if lam == 0.0:
            return math.inf
        return self.gamma_c * self.gamma_d / (4.0 * lam * lam)


def _key_line(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith(key) and stripped[len(key):].lstrip().startswith("="):
            return i
    return None


def parse_config(path: str) -> RunConfig:
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax error: {exc}")

    def fail(msg, key):
        raise ConfigError(msg, field=key, line=_key_line(text, key))

    for key in raw:
        if key not in _KNOWN_KEYS:
            fail(f"unknown key '{key}'", key)

    def need(key, types):
        if key not in raw:
            raise ConfigError("missing required key", field=key)
        val = raw[key]
        if not isinstance(val, types) or isinstance(val, bool) and bool not in (
                types if isinstance(types, tuple) else (types,)):
            fail(f"expected {types}, got {type(val).__name__}", key)
        return val

    def opt(key, types, default):
        if key not in raw:
            return default
        val = raw[key]
        ok_types = types if isinstance(types, tuple) else (types,)
        if isinstance(val, bool) and bool not in ok_types:
            fail(f"expected {types}, got bool", key)
        if not isinstance(val, ok_types):
            fail(f"expected {types}, got {type(val).__name__}", key)
        return val

    solver = need("solver", str)
    if solver not in SOLVERS:
        fail(f"solver must be one of {SOLVERS}", "solver")

    n_val = float(need("N", (int, float)))
    gamma_c = float(need("gamma_c", (int, float)))
    gamma_d = float(need("gamma_d", (int, float)))
    if gamma_c < 0 or gamma_d < 0:
        fail("damping rates must be non-negative", "gamma_c")

    physical = None
    derived = None
    lambda_eff = None
    if "lambda_eff" in raw:
        lambda_eff = float(opt("lambda_eff", (int, float), 0.0))
    if "omega_c" in raw or "lambda0" in raw:
        kw = dict(
            omega_c=float(need("omega_c", (int, float))),
            omega_d0=float(need("omega_d0", (int, float))),
            lambda0=float(need("lambda0", (int, float))),
            A=float(need("A", (int, float))),
            N=n_val, gamma_c=gamma_c, gamma_d=gamma_d,
        )
        if "c_light" in raw:
            kw["c_light"] = float(opt("c_light", (int, float), 0.0))
        if "Q_c" in raw:
            kw["Q_c"] = float(opt("Q_c", (int, float), 0.0))
        if "L" in raw:
            kw["L"] = float(opt("L", (int, float), 0.0))
        if "phases" in raw:
            kw["phases"] = tuple(float(v) for v in opt("phases", list, []))
        if "n_max" in raw:
            kw["n_max"] = int(opt("n_max", int, 4))
        if "Omega_m" in raw:
            kw["Omega_m"] = float(opt("Omega_m", (int, float), 0.0))
            try:
                physical = PhysicalParams(**kw)
            except (ValueError, DrivenDickeError) as exc:
                raise ConfigError(str(exc), field="omega_c",
                                  line=_key_line(text, "omega_c"))
            derived = derive_couplings(
                physical, tol=float(opt("series_tol", (int, float), 1e-12)))
        else:
            # resonance condition fixes Omega_m = omega_c + omega_d(xi);
            # xi depends on Omega_m only through A, so iterate once
            c_light = kw.get("c_light", PhysicalParams.__dataclass_fields__[
                "c_light"].default)
            om = kw["omega_c"] + kw["omega_d0"]
            for _ in range(80):
                trial = PhysicalParams(Omega_m=om, **kw)
                dc = derive_couplings(trial)
                om_new = kw["omega_c"] + dc.omega_d
                if abs(om_new - om) <= 1e-15 * om:
                    break
                om = om_new
            physical = PhysicalParams(Omega_m=om, **kw)
            derived = derive_couplings(physical)
        if lambda_eff is None:
            lambda_eff = None  # use derived value via effective_lambda
    elif lambda_eff is None and solver != "hp":
        raise ConfigError("either lambda_eff or the physical parameter set "
                          "(omega_c, omega_d0, lambda0, A, ...) is required",
                          field="lambda_eff")

    if solver == "hp" and lambda_eff is None and derived is None:
        raise ConfigError("hp solver needs lambda_eff or physical parameters",
                          field="lambda_eff")

    cfg = RunConfig(
        solver=solver, N=n_val, gamma_c=gamma_c, gamma_d=gamma_d,
        lambda_eff=lambda_eff, physical=physical, derived=derived,
        n_max=int(opt("n_max", int, 0)),
        t_final=float(opt("t_final", (int, float), 0.0)),
        n_points=int(opt("n_points", int, 2001)),
        rtol=float(opt("rtol", (int, float), 1e-8)),
        atol=float(opt("atol", (int, float), 1e-10)),
        compute_entanglement=bool(opt("compute_entanglement", bool, False)),
        entanglement_stride=int(opt("entanglement_stride", int, 10)),
        wigner_extent=opt("wigner_extent", (int, float), None),
        wigner_points=int(opt("wigner_points", int, 101)),
        save_states=bool(opt("save_states", bool, False)),
        out_dir=str(opt("out_dir", str, "")),
        tag=str(opt("tag", str, "run")),
        raw=raw,
    )
    ws = raw.get("wigner_snapshots")
    if ws is not None:
        if isinstance(ws, str):
            if ws not in ("fano", "none"):
                fail("wigner_snapshots must be 'fano', 'none', or a list "
                     "of times", "wigner_snapshots")
            cfg.wigner_snapshots = None if ws == "none" else ws
        elif isinstance(ws, list):
            cfg.wigner_snapshots = [float(v) for v in ws]
        else:
            fail("wigner_snapshots must be 'fano', 'none', or a list",
                 "wigner_snapshots")

    if "sweep_N" in raw:
        cfg.sweep_N = [float(v) for v in opt("sweep_N", list, [])]
        if not cfg.sweep_N:
            fail("sweep_N must be a non-empty list", "sweep_N")
    elif "sweep_N_min" in raw or "sweep_N_max" in raw:
        lo = float(need("sweep_N_min", (int, float)))
        hi = float(need("sweep_N_max", (int, float)))
        npts = int(opt("sweep_N_points", int, 9))
        if not (0 < lo < hi) or npts < 2:
            fail("need 0 < sweep_N_min < sweep_N_max and >= 2 points",
                 "sweep_N_min")
        cfg.sweep_N = list(np.logspace(math.log10(lo), math.log10(hi), npts))

    # solver/parameter compatibility
    if solver == "full_td":
        if cfg.physical is None:
            raise ConfigError("full_td requires the physical parameter set",
                              field="omega_c")
        if n_val != int(n_val) or int(n_val) > 4:
            fail("full_td requires integer N <= 4", "N")
    if solver == "rwa_block":
        cap = int(opt("rwa_block_max_N", int, 20))
        if n_val != int(n_val) or int(n_val) > cap:
            fail(f"rwa_block requires integer N <= {cap}", "N")
    if solver in ("cumulant_third", "cumulant_fourth", "hp"):
        if n_val > 1e21:
            fail("N beyond 1e21 exceeds the validated numeric range", "N")
    if solver in ("full_td", "rwa_block"):
        if cfg.n_max <= 0:
            if cfg.physical is not None and cfg.physical.n_max > 1:
                cfg.n_max = cfg.physical.n_max
            else:
                cfg.n_max = suggest_n_max(cfg)
    if cfg.t_final <= 0 and not cfg.sweep_N:
        raise ConfigError("t_final must be positive", field="t_final")
    return cfg


def suggest_n_max(cfg: RunConfig) -> int:
    """Default cavity truncation: 4x the expected steady photon number
    (floor of 8); the top-level population guard still protects the run."""
    lam = cfg.effective_lambda
    try:
        n_ss = cumulant.steady_state_third(cfg.N, cfg.gamma_c, cfg.gamma_d,
                                           cfg.n_crit())
    except DrivenDickeError:
        n_ss = 1.0
    if not math.isfinite(n_ss):
        n_ss = 1.0
    return max(8, int(math.ceil(4.0 * max(1.0, n_ss))))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _csv_cell(value) -> str:
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return ""
    return _FMT.format(v)


def write_trajectory_csv(path, t, columns: dict):
    names = ("n", "fano", "z", "s", "re_x", "im_x", "E_N")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for i, ti in enumerate(t):
            cells = [_FMT.format(ti)]
            for nm in names:
                col = columns.get(nm)
                cells.append(_csv_cell(col[i]) if col is not None else "")
            fh.write(",".join(cells) + "\n")


def read_trajectory_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        vals = [float(r[j]) if r[j] != "" else math.nan for r in rows]
        cols[name] = np.array(vals)
    return cols


def write_wigner_csv(path, grid: observables.WignerGrid, tag: str, time: float):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# tag={tag}\n")
        fh.write(f"# time={_FMT.format(time)}\n")
        fh.write(f"# re_min={_FMT.format(grid.re[0])}\n")
        fh.write(f"# re_max={_FMT.format(grid.re[-1])}\n")
        fh.write(f"# im_min={_FMT.format(grid.im[0])}\n")
        fh.write(f"# im_max={_FMT.format(grid.im[-1])}\n")
        fh.write(f"# points={len(grid.re)}\n")
        fh.write(f"# normalization={_FMT.format(grid.normalization)}\n")
        for row in grid.values:
            fh.write(",".join(_FMT.format(v) for v in row) + "\n")


def read_wigner_csv(path):
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, val = line[1:].strip().split("=", 1)
                meta[key.strip()] = val.strip()
            elif line.strip():
                rows.append([float(v) for v in line.split(",")])
    return meta, np.array(rows)


def save_block_states(path, tagged_states: dict):
    """Tagged BlockDensityMatrix states as flat complex arrays + header."""
    arrays = {}
    index = {}
    for tag, (time, state) in tagged_states.items():
        if hasattr(state, "to_block_density_matrix"):
            state = state.to_block_density_matrix()
        entry = {"time": time, "N": state.N, "n_max": state.n_max,
                 "js": list(state.js), "weights": list(state.weights),
                 "blocks": []}
        for bi, (j, blk) in enumerate(zip(state.js, state.blocks)):
            name = f"{tag}_block{bi}"
            arrays[name] = blk.reshape(-1)
            entry["blocks"].append({"array": name, "j": j,
                                    "dim": blk.shape[0]})
        index[tag] = entry
    arrays["__index__"] = np.frombuffer(
        json.dumps(index).encode("utf-8"), dtype=np.uint8)
    np.savez_compressed(path, **arrays)


def load_block_states(path) -> dict:
    with np.load(path) as data:
        index = json.loads(bytes(data["__index__"]).decode("utf-8"))
        out = {}
        for tag, entry in index.items():
            blocks = []
            for binfo in entry["blocks"]:
                d = binfo["dim"]
                blocks.append(data[binfo["array"]].reshape(d, d))
            bdm = BlockDensityMatrix(
                N=entry["N"], n_max=entry["n_max"], js=tuple(entry["js"]),
                blocks=blocks, weights=tuple(entry["weights"]),
            )
            out[tag] = (entry["time"], bdm)
    return out


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_summary(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


# ---------------------------------------------------------------------------
# run pipelines
# ---------------------------------------------------------------------------

def _resolve_out_dir(cfg_out: str, cli_out: str | None) -> str:
    out = cli_out or cfg_out or os.environ.get(ENV_OUT, ".")
    os.makedirs(out, exist_ok=True)
    return out


def run_single(cfg: RunConfig, out_dir: str) -> dict:
    t = np.linspace(0.0, cfg.t_final, cfg.n_points)
    lam = cfg.effective_lambda
    columns = {}
    summary = {
        "artifact_version": __version__,
        "solver": cfg.solver,
        "config": cfg.raw,
        "N": cfg.N,
        "N_crit": cfg.n_crit() if math.isfinite(cfg.n_crit()) else None,
        "lambda_eff": lam,
    }
    if cfg.derived is not None:
        summary["derived_couplings"] = cfg.derived.as_dict()
    wigner_tags = {}

    if cfg.solver in ("rwa_block", "full_td"):
        if cfg.solver == "rwa_block":
            spec = LindbladSpec.rwa(cfg.N, cfg.n_max, lam, cfg.gamma_c,
                                    cfg.gamma_d)
        else:
            spec = LindbladSpec.full_td(cfg.physical)
        stride = cfg.entanglement_stride if cfg.compute_entanglement else None
        want_wigner = cfg.wigner_snapshots is not None
        snap_stride = stride
        if want_wigner and snap_stride is None:
            snap_stride = max(1, cfg.n_points // 200)
        traj = evolve(spec, None, t, rtol=cfg.rtol, atol=cfg.atol,
                      snapshot_stride=snap_stride)
        columns["n"] = traj.n
        columns["fano"] = traj.fano
        columns["z"] = traj.real("z")
        columns["s"] = traj.real("s")
        columns["re_x"] = traj.data["x"].real
        columns["im_x"] = traj.data["x"].imag
        summary["solver_meta"] = {k: v for k, v in traj.meta.items()}
        summary["selection_rule_max"] = {
            nm: float(np.max(np.abs(traj.data[nm])))
            for nm in ("a", "aa", "a_jp") if nm in traj.data
        }
        if cfg.compute_entanglement:
            en = np.full(len(t), math.nan)
            for i, state in traj.snapshots.items():
                en[i] = observables.log_negativity(state)
            columns["E_N"] = en
        if want_wigner:
            wigner_tags = _wigner_snapshots(cfg, traj, out_dir)
            summary["wigner_snapshots"] = {
                tag: info for tag, (info, _) in wigner_tags.items()
            }
        if cfg.save_states:
            # keep the tagged instants only (plus endpoints), not the whole
            # entanglement stride: states are large
            snaps = sorted(traj.snapshots)
            keep = {"initial": snaps[0], "final": snaps[-1]}
            for tag, (info, _) in wigner_tags.items():
                i = min(snaps, key=lambda s: abs(t[s] - info["time"]))
                keep[tag] = i
            tagged = {tag: (float(t[i]), traj.snapshots[i])
                      for tag, i in keep.items()}
            save_block_states(os.path.join(out_dir, "snapshots.npz"), tagged)
    elif cfg.solver in ("cumulant_third", "cumulant_fourth"):
        closure = (cumulant.CLOSURE_THIRD if cfg.solver == "cumulant_third"
                   else cumulant.CLOSURE_FOURTH)
        p = cumulant.MomentParams(N=cfg.N, lam=lam, gamma_c=cfg.gamma_c,
                                  gamma_d=cfg.gamma_d)
        traj = cumulant.integrate_moments(
            cumulant.MomentState(), p, closure, t,
            rtol=min(cfg.rtol, 1e-8))
        columns["n"] = traj.n
        columns["z"] = traj.z
        columns["s"] = traj.s
        columns["re_x"] = traj.x.real
        columns["im_x"] = traj.x.imag
        summary["steady_state_third"] = cumulant.steady_state_third(
            cfg.N, cfg.gamma_c, cfg.gamma_d, cfg.n_crit())
        if cfg.solver == "cumulant_fourth":
            summary["steady_state_fourth"] = cumulant.steady_state_fourth(p)
    else:  # hp
        tr = hp_model.hp_dynamics(hp_model.GaussianState(), cfg.N, lam,
                                  cfg.gamma_c, cfg.gamma_d, t)
        n_a = tr.n_a
        n_b = tr.n_b
        columns["n"] = n_a
        columns["fano"] = n_a + 1.0          # reduced cavity state is thermal
        columns["z"] = -1.0 + 2.0 * n_b / cfg.N
        columns["s"] = n_b / cfg.N
        w = np.array([g.w for g in tr.states])
        columns["re_x"] = w.real / math.sqrt(cfg.N)
        columns["im_x"] = w.imag / math.sqrt(cfg.N)
        summary["above_threshold"] = bool(tr.above_threshold)
        ratio = hp_model.threshold_ratio(cfg.N, lam, cfg.gamma_c, cfg.gamma_d)
        summary["threshold_ratio"] = ratio
        if ratio < 1.0:
            summary["hp_steady_state"] = hp_model.hp_steady_state(
                cfg.N, lam, cfg.gamma_c, cfg.gamma_d)

    burst = observables.burst_summary(t, columns["n"])
    summary["burst"] = burst.as_dict()
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), t, columns)
    write_summary(os.path.join(out_dir, "summary.json"), summary)
    return summary


def _wigner_snapshots(cfg: RunConfig, traj, out_dir: str) -> dict:
    """Wigner grids at the configured instants (default: Fano peak, trough,
    final time)."""
    t = traj.t
    if cfg.wigner_snapshots == "fano":
        f = traj.fano
        i_peak = int(np.nanargmax(f))
        seg = f[i_peak:]
        i_trough = i_peak + int(np.nanargmin(seg))
        times = {"fano_peak": t[i_peak], "fano_trough": t[i_trough],
                 "final": t[-1]}
    else:
        times = {f"t{k}": float(ts)
                 for k, ts in enumerate(cfg.wigner_snapshots)}
    snaps = sorted(traj.snapshots)
    out = {}
    for tag, ts in times.items():
        i = min(snaps, key=lambda s: abs(t[s] - ts))
        state = traj.snapshots[i]
        rho_c = observables.reduced_cavity(state)
        extent = cfg.wigner_extent
        if extent is None:
            n_mean = observables.photon_number(rho_c)
            extent = max(3.0, 2.5 * math.sqrt(max(n_mean, 1.0)))
        grid = observables.wigner(rho_c, extent=extent,
                                  points=cfg.wigner_points)
        path = os.path.join(out_dir, f"wigner_{tag}.csv")
        write_wigner_csv(path, grid, tag, float(t[i]))
        out[tag] = ({"time": float(t[i]), "extent": extent,
                     "points": cfg.wigner_points,
                     "normalization": grid.normalization,
                     "file": os.path.basename(path)}, grid)
    return out


# ---------------------------------------------------------------------------
# sweep pipeline
# ---------------------------------------------------------------------------

def _sweep_entry(args):
    n_val, lam, gamma_c, gamma_d, rtol = args
    p = cumulant.MomentParams(N=n_val, lam=lam, gamma_c=gamma_c,
                              gamma_d=gamma_d)
    n_crit = p.n_crit
    ratio = n_val / n_crit
    row = {"N": n_val, "ratio": ratio}
    row["n_ss_third"] = cumulant.steady_state_third(n_val, gamma_c, gamma_d,
                                                    n_crit)
    row["n_ss_fourth"] = cumulant.steady_state_fourth(p)
    row["peak"] = None
    row["t_d"] = None
    if ratio > 1.5:
        t_max = 2000.0 / (gamma_d * (ratio - 1.0))
        for _ in range(6):
            grid = np.linspace(0.0, t_max, 3001)
            traj = cumulant.integrate_moments(
                cumulant.MomentState(), p, cumulant.CLOSURE_FOURTH, grid,
                rtol=rtol, dense=True)
            i = int(np.argmax(traj.n))
            if i < len(grid) - 30:
                break
            t_max *= 3.0
        from scipy.optimize import minimize_scalar
        i = max(1, min(i, len(grid) - 2))
        res = minimize_scalar(lambda tt: -traj.solution(tt)[0],
                              bracket=(grid[i - 1], grid[i], grid[i + 1]))
        row["peak"] = float(-res.fun)
        row["t_d"] = float(res.x)
    return row


def run_sweep(cfg: RunConfig, out_dir: str, threads: int = 1) -> dict:
    if cfg.solver not in ("cumulant_third", "cumulant_fourth"):
        raise ConfigError("sweep requires a cumulant solver", field="solver")
    if not cfg.sweep_N:
        raise ConfigError("sweep requires sweep_N or sweep_N_min/max",
                          field="sweep_N")
    lam = cfg.effective_lambda
    jobs = [(float(n), lam, cfg.gamma_c, cfg.gamma_d, min(cfg.rtol, 1e-10))
            for n in cfg.sweep_N]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_entry, jobs))
    else:
        rows = [_sweep_entry(j) for j in jobs]

    path = os.path.join(out_dir, "sweep.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("N,N_over_Ncrit,n_ss_third,n_ss_fourth,peak,t_d\n")
        for row in rows:
            fh.write(",".join([
                _FMT.format(row["N"]), _FMT.format(row["ratio"]),
                _FMT.format(row["n_ss_third"]), _FMT.format(row["n_ss_fourth"]),
                _csv_cell(row["peak"]), _csv_cell(row["t_d"]),
            ]) + "\n")

    summary = {
        "artifact_version": __version__,
        "solver": cfg.solver,
        "config": cfg.raw,
        "lambda_eff": lam,
        "N_crit": cfg.n_crit(),
        "rows": rows,
    }
    peaked = [r for r in rows if r["peak"] is not None]
    if len(peaked) >= 5:
        ns = np.array([r["N"] for r in peaked])
        if ns.max() >= 10.0 * ns.min():
            peaks = np.array([r["peak"] for r in peaked])
            tds = np.array([r["t_d"] for r in peaked])
            fit = observables.scaling_fit(ns, peaks, kind="power")
            lin = observables.scaling_fit(ns, 1.0 / tds, kind="linear")
            summary["peak_power_fit"] = {
                "alpha": fit.slope, "stderr": fit.stderr,
                "r_squared": fit.r_squared,
            }
            summary["inverse_delay_linear_fit"] = {
                "slope": lin.slope, "intercept": lin.intercept,
                "r_squared": lin.r_squared,
            }
    write_summary(os.path.join(out_dir, "summary.json"), summary)
    return summary


# ---------------------------------------------------------------------------
# golden data
# ---------------------------------------------------------------------------

def golden_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "golden")


def check_goldens(base_dir: str | None = None) -> list:
    """Verify shipped golden files against the recorded checksums."""
    base = base_dir or golden_dir()
    manifest_path = os.path.join(base, "manifest.json")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    checked = []
    for name, expected in manifest["sha256"].items():
        path = os.path.join(base, name)
        digest = hashlib.sha256(open(path, "rb").read()).hexdigest()
        if digest != expected:
            raise GoldenChecksumError(
                f"golden file {name}: checksum mismatch "
                f"(expected {expected[:12]}..., got {digest[:12]}...)"
            )
        checked.append(name)
    return checked


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="drivendicke",
        description="Photon production from vacuum in a parametrically "
                    "driven Dicke model: solvers, sweeps and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single trajectory run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_sweep = sub.add_parser("sweep", help="N sweep with the moment solver")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_wig = sub.add_parser("wigner", help="phase-space grid from saved states")
    p_wig.add_argument("--snapshots", required=True,
                       help="snapshots.npz written by run --save-states")
    p_wig.add_argument("--tag", required=True)
    p_wig.add_argument("--out", default=None)
    p_wig.add_argument("--extent", type=float, default=6.0)
    p_wig.add_argument("--points", type=int, default=101)
    p_ver = sub.add_parser("verify", help="run the acceptance cross-checks")
    p_ver.add_argument("--profile", choices=("default", "full"),
                       default="default")
    p_ver.add_argument("--skip-goldens", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            out = _resolve_out_dir(cfg.out_dir, args.out)
            summary = run_single(cfg, out)
            print(f"run complete: {out} "
                  f"(steady n = {summary['burst']['steady_value']:.6g})")
        elif args.command == "sweep":
            cfg = parse_config(args.config)
            out = _resolve_out_dir(cfg.out_dir, args.out)
            summary = run_sweep(cfg, out, threads=args.threads)
            n_rows = len(summary["rows"])
            print(f"sweep complete: {n_rows} entries -> {out}/sweep.csv")
        elif args.command == "wigner":
            out = _resolve_out_dir("", args.out)
            states = load_block_states(args.snapshots)
            if args.tag not in states:
                raise ConfigError(
                    f"tag '{args.tag}' not in snapshots "
                    f"(available: {sorted(states)})", field="tag")
            time_val, state = states[args.tag]
            grid = observables.wigner(state.reduced_cavity(),
                                      extent=args.extent, points=args.points)
            path = os.path.join(out, f"wigner_{args.tag}.csv")
            write_wigner_csv(path, grid, args.tag, time_val)
            print(f"wigner grid written: {path}")
        elif args.command == "verify":
            from . import verification
            if not args.skip_goldens:
                names = check_goldens()
                print(f"golden checksums OK ({len(names)} files)")
            results = verification.run_profile(args.profile)
            failed = verification.report(results, stream=sys.stdout)
            if failed:
                return EXIT_VERIFY
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GoldenChecksumError, VerificationFailure) as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DrivenDickeError as exc:
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
