"""Experiment harness: configs, reference optima, and result emission.

A YAML config names one problem, one feasible region, and a list of solver
entries. run_experiment builds everything, computes (or loads from cache) a
reference optimum so suboptimality columns are meaningful, runs every solver
for every seed of the sweep, and writes metrics.csv, plot.gp and meta.yaml
into the output directory. With the default deterministic timing policy the
written files are byte-for-byte reproducible.
"""

import csv
import hashlib
import io
import json
import math
import os
import tempfile

import numpy as np
import yaml
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from ._jit import HAVE_NUMBA
from .lmo import Box, L1Ball, NuclearBall, PowerIterConfig, lmo
from .oracles import OracleCounters, SmoothingConfig
from .problems import (
    LogisticProblem,
    MatrixCompletionProblem,
    QuadraticProblem,
    completion_data_from_grid,
    make_mask,
    parse_libsvm,
    read_csv_grid,
    read_pgm,
    synthetic_logistic_examples,
    synthetic_lowrank_matrix,
    synthetic_quadratic_problem,
)
from .records import MetricRow, RunRecord
from .solvers import (
    CgsOptions,
    RunOptions,
    ScgsOptions,
    StorcOptions,
    _linesearch_step,
    arcs_run,
    cg_run,
    cgs_run,
    scgs_run,
    storc_run,
)

SOLVER_NAMES = ("arcs", "cg", "cgs", "scgs", "storc")
CSV_HEADER = ("solver", "epoch", "t", "gqo", "fqo", "lo", "elapsed_ns", "objective", "subopt", "flag")


class ConfigError(ValueError):
    """Invalid experiment config; the message starts with the field path."""


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _as_mapping(v, path):
    if not isinstance(v, dict):
        _fail(path, f"expected a mapping, got {type(v).__name__}")
    return v


def _as_int(v, path, minimum=None):
    if type(v) is not int:
        _fail(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(path, f"must be >= {minimum}, got {v}")
    return v


def _as_float(v, path, positive=False):
    if type(v) is bool or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        _fail(path, f"must be positive, got {v}")
    return v


def _as_choice(v, path, choices):
    if v not in choices:
        _fail(path, f"must be one of {list(choices)}, got {v!r}")
    return v


def _no_extra_keys(d, path, allowed):
    for key in d:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown key")


def _norm_synthetic(d, path, family):
    d = _as_mapping(d, path)
    if family == "logistic":
        _no_extra_keys(d, path, {"n", "d", "seed"})
        return {
            "n": _as_int(d.get("n"), f"{path}.n", 1),
            "d": _as_int(d.get("d"), f"{path}.d", 1),
            "seed": _as_int(d.get("seed", 0), f"{path}.seed", 0),
        }
    if family == "quadratic":
        _no_extra_keys(d, path, {"n", "d", "seed", "tau0", "L0", "xstar_l1"})
        return {
            "n": _as_int(d.get("n"), f"{path}.n", 1),
            "d": _as_int(d.get("d"), f"{path}.d", 2),
            "seed": _as_int(d.get("seed", 0), f"{path}.seed", 0),
            "tau0": _as_float(d.get("tau0", 0.1), f"{path}.tau0", positive=True),
            "L0": _as_float(d.get("L0", 1.0), f"{path}.L0", positive=True),
            "xstar_l1": _as_float(d.get("xstar_l1", 1.0), f"{path}.xstar_l1", positive=True),
        }
    _no_extra_keys(d, path, {"d1", "d2", "seed", "rank"})
    return {
        "d1": _as_int(d.get("d1"), f"{path}.d1", 1),
        "d2": _as_int(d.get("d2"), f"{path}.d2", 1),
        "seed": _as_int(d.get("seed", 0), f"{path}.seed", 0),
        "rank": _as_int(d.get("rank", 3), f"{path}.rank", 1),
    }


def _norm_problem(d):
    d = _as_mapping(d, "problem")
    family = _as_choice(
        d.get("family"), "problem.family", ("logistic", "quadratic", "matrix_completion")
    )
    allowed = {"family", "dataset", "synthetic"}
    if family == "matrix_completion":
        allowed.add("mask")
    _no_extra_keys(d, "problem", allowed)
    dataset = d.get("dataset")
    synthetic = d.get("synthetic")
    if (dataset is None) == (synthetic is None):
        _fail("problem", "exactly one of 'dataset' and 'synthetic' is required")
    out = {"family": family, "dataset": None, "synthetic": None, "mask": None}
    if dataset is not None:
        if not isinstance(dataset, str):
            _fail("problem.dataset", f"expected a path string, got {dataset!r}")
        out["dataset"] = dataset
    else:
        out["synthetic"] = _norm_synthetic(synthetic, "problem.synthetic", family)
    if family == "matrix_completion":
        mask = _as_mapping(d.get("mask"), "problem.mask")
        _no_extra_keys(mask, "problem.mask", {"fraction", "seed"})
        fraction = _as_float(mask.get("fraction"), "problem.mask.fraction", positive=True)
        if fraction > 1.0:
            _fail("problem.mask.fraction", f"must be in (0, 1], got {fraction}")
        out["mask"] = {
            "fraction": fraction,
            "seed": _as_int(mask.get("seed", 0), "problem.mask.seed", 0),
        }
    return out


def _norm_bound(v, path):
    if isinstance(v, list):
        return [_as_float(x, f"{path}[{i}]") for i, x in enumerate(v)]
    return _as_float(v, path)


def _norm_region(d):
    d = _as_mapping(d, "region")
    kind = _as_choice(d.get("kind"), "region.kind", ("l1", "box", "nuclear"))
    if kind == "l1":
        _no_extra_keys(d, "region", {"kind", "radius"})
        return {"kind": kind, "radius": _as_float(d.get("radius"), "region.radius", positive=True)}
    if kind == "box":
        _no_extra_keys(d, "region", {"kind", "lo", "hi"})
        if "lo" not in d or "hi" not in d:
            _fail("region", "box needs 'lo' and 'hi'")
        return {
            "kind": kind,
            "lo": _norm_bound(d["lo"], "region.lo"),
            "hi": _norm_bound(d["hi"], "region.hi"),
        }
    _no_extra_keys(d, "region", {"kind", "radius", "power"})
    power = _as_mapping(d.get("power", {}), "region.power")
    _no_extra_keys(power, "region.power", {"max_iters", "tol", "seed"})
    return {
        "kind": kind,
        "radius": _as_float(d.get("radius"), "region.radius", positive=True),
        "power": {
            "max_iters": _as_int(power.get("max_iters", 200), "region.power.max_iters", 1),
            "tol": _as_float(power.get("tol", 1e-10), "region.power.tol", positive=True),
            "seed": _as_int(power.get("seed", 0), "region.power.seed", 0),
        },
    }


_SOLVER_SCHEMAS = {
    "arcs": {
        "mode": ("first_order", "zeroth_order"),
        "convexity": ("convex", "strongly_convex"),
        "epochs": 10,
        "batch": 256,
        "d0": None,
        "mu": None,
        "record_every": 0,
        "zo_gamma_rule": ("appendix", "main_text", "match_first_order"),
        "condg_max_iters": None,
    },
    "cg": {"steps": 10, "step_rule": ("classic", "line_search")},
    "cgs": {"steps": 10},
    "scgs": {"steps": 10, "batch_c": 1.0},
    "storc": {"epochs": 5, "variant": ("a", "c"), "rho": 1.0},
}


def _norm_solver(d, path):
    d = _as_mapping(d, path)
    name = _as_choice(d.get("name"), f"{path}.name", SOLVER_NAMES)
    schema = _SOLVER_SCHEMAS[name]
    _no_extra_keys(d, path, set(schema) | {"name"})
    out = {"name": name}
    if name == "arcs":
        out["mode"] = _as_choice(d.get("mode", "first_order"), f"{path}.mode", schema["mode"])
        out["convexity"] = _as_choice(
            d.get("convexity", "convex"), f"{path}.convexity", schema["convexity"]
        )
        out["epochs"] = _as_int(d.get("epochs", 10), f"{path}.epochs", 1)
        out["batch"] = _as_int(d.get("batch", 256), f"{path}.batch", 1)
        out["d0"] = None if d.get("d0") is None else _as_float(d["d0"], f"{path}.d0", positive=True)
        out["mu"] = None if d.get("mu") is None else _as_float(d["mu"], f"{path}.mu", positive=True)
        out["record_every"] = _as_int(d.get("record_every", 0), f"{path}.record_every", 0)
        out["zo_gamma_rule"] = _as_choice(
            d.get("zo_gamma_rule", "appendix"), f"{path}.zo_gamma_rule", schema["zo_gamma_rule"]
        )
        out["condg_max_iters"] = (
            None
            if d.get("condg_max_iters") is None
            else _as_int(d["condg_max_iters"], f"{path}.condg_max_iters", 1)
        )
    elif name == "cg":
        out["steps"] = _as_int(d.get("steps", 10), f"{path}.steps", 0)
        out["step_rule"] = _as_choice(
            d.get("step_rule", "classic"), f"{path}.step_rule", schema["step_rule"]
        )
    elif name == "cgs":
        out["steps"] = _as_int(d.get("steps", 10), f"{path}.steps", 0)
    elif name == "scgs":
        out["steps"] = _as_int(d.get("steps", 10), f"{path}.steps", 0)
        out["batch_c"] = _as_float(d.get("batch_c", 1.0), f"{path}.batch_c", positive=True)
    else:
        out["epochs"] = _as_int(d.get("epochs", 5), f"{path}.epochs", 0)
        out["variant"] = _as_choice(d.get("variant", "a"), f"{path}.variant", schema["variant"])
        out["rho"] = _as_float(d.get("rho", 1.0), f"{path}.rho", positive=True)
        if out["rho"] > 1.0:
            _fail(f"{path}.rho", f"must be in (0, 1], got {out['rho']}")
    return out


@dataclass
class ExperimentConfig:
    """Normalized experiment description; equal configs compare equal."""

    problem: dict
    region: dict
    solvers: list
    seed: int
    seeds: int
    out_dir: str
    timing: str
    reference: dict

    def to_dict(self):
        # dataset/synthetic/mask placeholders are None when unused and would
        # not parse back, so the emitted mapping drops them
        return {
            "problem": {k: v for k, v in self.problem.items() if v is not None},
            "region": self.region,
            "solvers": self.solvers,
            "seed": self.seed,
            "seeds": self.seeds,
            "out_dir": self.out_dir,
            "timing": self.timing,
            "reference": self.reference,
        }


def parse_config(text):
    """Parse and validate YAML config text into an ExperimentConfig."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config: invalid YAML ({err})") from None
    raw = _as_mapping(raw, "config")
    _no_extra_keys(
        raw, "config", {"problem", "region", "solvers", "seed", "seeds", "out_dir", "timing", "reference"}
    )
    if "problem" not in raw:
        _fail("problem", "missing required section")
    if "region" not in raw:
        _fail("region", "missing required section")
    solvers_raw = raw.get("solvers")
    if not isinstance(solvers_raw, list) or not solvers_raw:
        _fail("solvers", "expected a nonempty list")
    reference = _as_mapping(raw.get("reference", {}), "reference")
    _no_extra_keys(reference, "reference", {"gap_tol", "lo_budget", "value"})
    cfg = ExperimentConfig(
        problem=_norm_problem(raw["problem"]),
        region=_norm_region(raw["region"]),
        solvers=[_norm_solver(s, f"solvers[{i}]") for i, s in enumerate(solvers_raw)],
        seed=_as_int(raw.get("seed", 0), "seed", 0),
        seeds=_as_int(raw.get("seeds", 1), "seeds", 1),
        out_dir=str(raw.get("out_dir", "out")),
        timing=_as_choice(raw.get("timing", "deterministic"), "timing", ("deterministic", "real")),
        reference={
            "gap_tol": _as_float(reference.get("gap_tol", 1e-10), "reference.gap_tol", positive=True),
            "lo_budget": _as_int(reference.get("lo_budget", 10**6), "reference.lo_budget", 1),
            "value": (
                None
                if reference.get("value") is None
                else _as_float(reference["value"], "reference.value")
            ),
        },
    )
    if cfg.problem["family"] == "matrix_completion" and cfg.region["kind"] != "nuclear":
        _fail("region.kind", "matrix_completion runs need the nuclear region")
    if cfg.region["kind"] == "nuclear" and cfg.problem["family"] != "matrix_completion":
        _fail("region.kind", "the nuclear region is only wired to matrix_completion")
    return cfg


def serialize_config(cfg):
    """YAML text that parses back to an equal ExperimentConfig."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config: file not found: {path}")
    return parse_config(p.read_text())


def check_referenced_files(cfg, base_dir="."):
    """Existence check for dataset paths, relative to the config location."""
    ds = cfg.problem["dataset"]
    if ds is not None:
        p = Path(ds)
        if not p.is_absolute():
            p = Path(base_dir) / p
        if not p.is_file():
            _fail("problem.dataset", f"file not found: {p}")


def build_experiment(cfg, base_dir="."):
    """Materialize (problem, region) from a validated config."""
    pr = cfg.problem
    rg = cfg.region
    family = pr["family"]

    def _resolve(pathstr):
        p = Path(pathstr)
        return p if p.is_absolute() else Path(base_dir) / p

    if family == "logistic":
        if pr["dataset"] is not None:
            path = _resolve(pr["dataset"])
            examples, d = parse_libsvm(path.read_text())
        else:
            sy = pr["synthetic"]
            examples, d, _ = synthetic_logistic_examples(sy["n"], sy["d"], sy["seed"])
        problem = LogisticProblem(examples, d)
    elif family == "quadratic":
        if pr["dataset"] is not None:
            with np.load(_resolve(pr["dataset"])) as payload:
                problem = QuadraticProblem(payload["A"], payload["b"])
        else:
            sy = pr["synthetic"]
            problem, _ = synthetic_quadratic_problem(
                sy["n"], sy["d"], sy["seed"], sy["tau0"], sy["L0"], sy["xstar_l1"]
            )
    else:
        if pr["dataset"] is not None:
            path = _resolve(pr["dataset"])
            grid = read_pgm(path) if path.suffix.lower() == ".pgm" else read_csv_grid(path)
        else:
            sy = pr["synthetic"]
            grid = synthetic_lowrank_matrix(sy["d1"], sy["d2"], sy["seed"], sy["rank"])
        mask = make_mask(grid.shape, pr["mask"]["fraction"], pr["mask"]["seed"])
        data = completion_data_from_grid(grid, mask, rg["radius"])
        problem = MatrixCompletionProblem(data)

    if rg["kind"] == "l1":
        region = L1Ball(rg["radius"], problem.d)
    elif rg["kind"] == "box":
        lo, hi = rg["lo"], rg["hi"]
        lo = np.full(problem.d, lo) if not isinstance(lo, list) else np.asarray(lo, dtype=float)
        hi = np.full(problem.d, hi) if not isinstance(hi, list) else np.asarray(hi, dtype=float)
        if lo.shape != (problem.d,) or hi.shape != (problem.d,):
            _fail("region.lo", f"bounds must have length d={problem.d}")
        region = Box(lo, hi)
    else:
        pw = rg["power"]
        region = NuclearBall(
            rg["radius"],
            problem.data.d1,
            problem.data.d2,
            PowerIterConfig(max_iters=pw["max_iters"], tol=pw["tol"], seed=pw["seed"]),
        )
    return problem, region


@dataclass
class ReferenceInfo:
    value: float
    gap: float
    lo_calls: int
    converged: bool
    status: str = "certified"  # certified | stalled | budget


_STALL_WINDOW = 512


def _reference_details(problem, region, gap_tol, lo_budget):
    """Frank-Wolfe with line search until the gap certifies gap_tol.

    The gap <grad f(x), x - v> upper-bounds f(x) - f*, so on convergence the
    returned value is within gap_tol of the true optimum. No oracle counters
    are charged apart from the internal LO budget bookkeeping; computing a
    reference is instrumentation, not part of any measured run.

    Near an interior optimum with f* > 0 the gap bottoms out around
    sqrt(eps * f) * L * diameter, which can sit above gap_tol no matter how
    many steps run: double precision cannot place x any closer to the
    minimizer once f is flat to rounding. The loop therefore also stops when
    the objective has not improved beyond rounding scale for _STALL_WINDOW
    consecutive steps; at that point the value is as good as this arithmetic
    allows and further LO calls are pure waste.
    """
    counters = OracleCounters()
    all_idx = np.arange(problem.n, dtype=np.int64)
    x = region.initial_point()
    gap = math.inf
    best = math.inf
    flat_steps = 0
    status = "budget"
    while counters.lo < lo_budget:
        g = problem.batch_mean_gradient(all_idx, x)
        v = lmo(region, g, counters)
        gap = float(g @ (x - v))
        if gap <= gap_tol:
            return ReferenceInfo(
                value=problem.objective(x), gap=gap, lo_calls=counters.lo, converged=True
            )
        f_now = problem.objective(x)
        if best - f_now > 2.0**-44 * max(1.0, abs(f_now)):
            best = f_now
            flat_steps = 0
        else:
            flat_steps += 1
            if flat_steps >= _STALL_WINDOW:
                status = "stalled"
                break
        h = v - x
        gam = _linesearch_step(problem, x, g, h)
        x = x + gam * h
    return ReferenceInfo(
        value=problem.objective(x), gap=gap, lo_calls=counters.lo, converged=False, status=status
    )


def compute_reference_optimum(problem, region, gap_tol=1e-10, lo_budget=10**6):
    """Best objective value found by certified Frank-Wolfe; see _reference_details."""
    return _reference_details(problem, region, gap_tol, lo_budget).value


def problem_region_fingerprint(problem, region):
    """Content hash for the reference cache; None when not fingerprintable."""
    h = hashlib.sha256()
    h.update(f"{problem.kind}|{problem.n}|{problem.d}|".encode())
    if problem.kind == "logistic":
        for arr in (problem.indptr, problem.indices, problem.data, problem.labels):
            h.update(np.ascontiguousarray(arr).tobytes())
    elif problem.kind == "matrix_completion":
        h.update(f"{problem.data.d1}|{problem.data.d2}|{problem.data.radius}|".encode())
        for arr in (problem.data.rows, problem.data.cols, problem.data.values):
            h.update(np.ascontiguousarray(arr).tobytes())
    elif problem.kind == "quadratic":
        h.update(np.ascontiguousarray(problem.A).tobytes())
        h.update(np.ascontiguousarray(problem.b).tobytes())
    else:
        return None
    if isinstance(region, L1Ball):
        h.update(f"l1|{region.radius}|{region.dim}".encode())
    elif isinstance(region, Box):
        h.update(b"box|")
        h.update(region.lo.tobytes())
        h.update(region.hi.tobytes())
    elif isinstance(region, NuclearBall):
        pw = region.power
        h.update(
            f"nuclear|{region.radius}|{region.d1}|{region.d2}|{pw.max_iters}|{pw.tol}|{pw.seed}".encode()
        )
    else:
        return None
    return h.hexdigest()


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def reference_with_cache(problem, region, cache_dir, gap_tol=1e-10, lo_budget=10**6):
    """Compute or reload the reference optimum; returns (info, from_cache)."""
    key = problem_region_fingerprint(problem, region)
    cache_path = None
    if key is not None and cache_dir is not None:
        cache_path = Path(cache_dir) / f"{key}.json"
        if cache_path.is_file():
            try:
                payload = json.loads(cache_path.read_text())
                info = ReferenceInfo(
                    value=float(payload["value"]),
                    gap=float(payload["gap"]),
                    lo_calls=int(payload["lo_calls"]),
                    converged=bool(payload["converged"]),
                    status=str(payload["status"]),
                )
                return info, True
            except (KeyError, ValueError, json.JSONDecodeError):
                pass  # unreadable cache entries are recomputed
    info = _reference_details(problem, region, gap_tol, lo_budget)
    if cache_path is not None:
        payload = {
            "value": info.value,
            "gap": info.gap,
            "lo_calls": info.lo_calls,
            "converged": info.converged,
            "status": info.status,
        }
        _atomic_write(cache_path, json.dumps(payload, sort_keys=True))
    return info, False


def _format_field(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(records, path):
    """Write all rows sorted by (solver, epoch, t) as RFC-4180 CSV."""
    rows = [row for rec in records for row in rec.rows]
    rows.sort(key=lambda r: (r.solver, r.epoch, r.t))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.solver,
                r.epoch,
                r.t,
                r.gqo,
                r.fqo,
                r.lo,
                r.elapsed_ns,
                _format_field(r.objective),
                _format_field(r.subopt),
                r.flag,
            ]
        )
    _atomic_write(path, buf.getvalue())


def read_metrics_csv(path):
    """Parse a metrics.csv written by emit_csv back into MetricRow lists."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            rows.append(
                MetricRow(
                    solver=rec[0],
                    epoch=int(rec[1]),
                    t=int(rec[2]),
                    gqo=int(rec[3]),
                    fqo=int(rec[4]),
                    lo=int(rec[5]),
                    elapsed_ns=int(rec[6]),
                    objective=float(rec[7]),
                    subopt=float(rec[8]),
                    flag=int(rec[9]),
                )
            )
    return rows


def _axis_column(rec):
    """fqo for zeroth-order runs (no gradient calls), gqo otherwise."""
    last = rec.rows[-1] if rec.rows else None
    if last is not None and last.fqo > 0 and last.gqo == 0:
        return "fqo"
    return "gqo"


def emit_plot_script(records, path, csv_name="metrics.csv"):
    """Write a self-contained gnuplot script for suboptimality curves."""
    lines = [
        "# suboptimality against oracle cost; load from the run directory:",
        f"#   gnuplot -p {Path(path).name}",
        "set datafile separator ','",
        "set key top right",
        "set logscale y",
        "set xlabel 'oracle calls (gqo, or fqo for zeroth-order runs)'",
        "set ylabel 'suboptimality'",
    ]
    plots = []
    for rec in records:
        axis = _axis_column(rec)
        plots.append(
            f"  '{csv_name}' using (column('{axis}')):"
            f"(stringcolumn('solver') eq '{rec.solver}' ? column('subopt') : 1/0) "
            f"with linespoints title '{rec.solver}'"
        )
    lines.append("plot \\")
    lines.append(", \\\n".join(plots))
    _atomic_write(path, "\n".join(lines) + "\n")


def _run_one(problem, region, entry, seed, det_timing):
    name = entry["name"]
    if name == "arcs":
        opts = RunOptions(
            mode=entry["mode"],
            convexity=entry["convexity"],
            epochs=entry["epochs"],
            batch=entry["batch"],
            seed=seed,
            d0=entry["d0"],
            smoothing=None if entry["mu"] is None else SmoothingConfig(entry["mu"]),
            record_every=entry["record_every"],
            zo_gamma_rule=entry["zo_gamma_rule"],
            condg_max_iters=entry["condg_max_iters"],
            deterministic_timing=det_timing,
        )
        _, rec = arcs_run(problem, region, opts)
        return rec
    if name == "cg":
        return cg_run(
            problem,
            region,
            entry["steps"],
            entry["step_rule"],
            deterministic_timing=det_timing,
        )
    if name == "cgs":
        return cgs_run(
            problem, region, CgsOptions(steps=entry["steps"], deterministic_timing=det_timing)
        )
    if name == "scgs":
        return scgs_run(
            problem,
            region,
            ScgsOptions(
                steps=entry["steps"],
                batch_c=entry["batch_c"],
                seed=seed,
                deterministic_timing=det_timing,
            ),
        )
    return storc_run(
        problem,
        region,
        StorcOptions(
            epochs=entry["epochs"],
            variant=entry["variant"],
            rho=entry["rho"],
            seed=seed,
            deterministic_timing=det_timing,
        ),
    )


def _unique_ids(entries):
    seen = {}
    ids = []
    for entry in entries:
        name = entry["name"]
        seen[name] = seen.get(name, 0) + 1
        ids.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return ids


def run_experiment(config, out_dir=None, base_dir="."):
    """Run every (solver, seed) pair of the config and write the artifacts.

    Returns the list of RunRecords, one per pair, with suboptimality filled
    in against the shared reference optimum. Writes metrics.csv, plot.gp and
    meta.yaml (plus refcache/) under the output directory; out_dir overrides
    config.out_dir.
    """
    problem, region = build_experiment(config, base_dir)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ref_cfg = config.reference
    if ref_cfg["value"] is not None:
        info = ReferenceInfo(value=ref_cfg["value"], gap=0.0, lo_calls=0, converged=True)
        from_cache = False
    else:
        info, from_cache = reference_with_cache(
            problem, region, out / "refcache", ref_cfg["gap_tol"], ref_cfg["lo_budget"]
        )
    det = config.timing == "deterministic"
    records = []
    ids = _unique_ids(config.solvers)
    for entry, base_id in zip(config.solvers, ids):
        for k in range(config.seeds):
            seed = config.seed + k
            rec = _run_one(problem, region, entry, seed, det)
            solver_id = base_id if config.seeds == 1 else f"{base_id}@s{seed}"
            rec.solver = solver_id
            for row in rec.rows:
                row.solver = solver_id
                row.subopt = row.objective - info.value
            records.append(rec)
    emit_csv(records, out / "metrics.csv")
    emit_plot_script(records, out / "plot.gp")
    meta = {
        "package": {"name": "condgrad", "version": __version__},
        "backend": "numba" if HAVE_NUMBA else "numpy",
        "config": config.to_dict(),
        "reference": {
            "value": info.value,
            "gap": info.gap,
            "lo_calls": info.lo_calls,
            "converged": info.converged,
            "status": info.status,
            "from_cache": from_cache,
            "warning": None
            if info.converged
            else (
                "reference progress stalled at floating-point resolution; value is best-effort"
                if info.status == "stalled"
                else "reference budget exhausted; value is best-effort"
            ),
        },
    }
    _atomic_write(out / "meta.yaml", yaml.safe_dump(meta, sort_keys=True))
    return records
