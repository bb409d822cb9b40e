"""Command line front end.

Subcommands:
    run <config.yaml> [--seed N] [--out-dir DIR] [--epochs N] [--seeds K]
    validate <config.yaml>
    list-solvers
    gen-synthetic <family> <n> <d> <seed> <out>

Exit status: 0 on success, 1 on configuration or input errors (bad usage,
unparseable configs or datasets, missing files), 2 on runtime failures.
"""

import sys

import numpy as np
from pathlib import Path

from .harness import (
    SOLVER_NAMES,
    ConfigError,
    build_experiment,
    check_referenced_files,
    load_config,
    run_experiment,
)
from .problems import (
    LibsvmParseError,
    serialize_libsvm,
    synthetic_logistic_examples,
    synthetic_lowrank_matrix,
    synthetic_quadratic_problem,
)

USAGE = """\
usage: condgrad <command> [arguments]

commands:
  run <config.yaml> [--seed N] [--out-dir DIR] [--epochs N] [--seeds K]
      run every solver in the config; overrides replace the config values
      (--epochs rewrites each solver's epoch or step budget)
  validate <config.yaml>
      parse and check a config, including referenced files, without running
  list-solvers
      print the available solver names
  gen-synthetic <family> <n> <d> <seed> <out>
      write a synthetic dataset: 'logistic' emits LIBSVM text, 'quadratic'
      an .npz with arrays A and b, 'matrix' an n x d CSV grid
"""


class _UsageError(Exception):
    pass


def _parse_overrides(args):
    out = {}
    i = 0
    while i < len(args):
        flag = args[i]
        if flag not in ("--seed", "--out-dir", "--epochs", "--seeds"):
            raise _UsageError(f"unknown option {flag!r}")
        if i + 1 >= len(args):
            raise _UsageError(f"option {flag} needs a value")
        val = args[i + 1]
        if flag == "--out-dir":
            out["out_dir"] = val
        else:
            try:
                out[flag[2:]] = int(val)
            except ValueError:
                raise _UsageError(f"option {flag} needs an integer, got {val!r}") from None
        i += 2
    return out


def _apply_overrides(cfg, overrides):
    if "seed" in overrides:
        cfg.seed = overrides["seed"]
    if "seeds" in overrides:
        if overrides["seeds"] < 1:
            raise _UsageError("--seeds must be >= 1")
        cfg.seeds = overrides["seeds"]
    if "out_dir" in overrides:
        cfg.out_dir = overrides["out_dir"]
    if "epochs" in overrides:
        if overrides["epochs"] < 1:
            raise _UsageError("--epochs must be >= 1")
        for entry in cfg.solvers:
            if "epochs" in entry:
                entry["epochs"] = overrides["epochs"]
            else:
                entry["steps"] = overrides["epochs"]
    return cfg


def _cmd_run(args):
    if not args:
        raise _UsageError("run needs a config path")
    config_path, rest = args[0], args[1:]
    overrides = _parse_overrides(rest)
    cfg = load_config(config_path)
    _apply_overrides(cfg, overrides)
    base_dir = str(Path(config_path).parent)
    check_referenced_files(cfg, base_dir)
    try:
        build_experiment(cfg, base_dir)  # classify data problems as input errors
    except (ConfigError, LibsvmParseError, OSError, ValueError) as err:
        raise ConfigError(str(err)) from None
    try:
        run_experiment(cfg, base_dir=base_dir)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out = Path(cfg.out_dir)
    print(f"wrote {out / 'metrics.csv'}, {out / 'plot.gp'}, {out / 'meta.yaml'}")
    return 0


def _cmd_validate(args):
    if len(args) != 1:
        raise _UsageError("validate needs exactly one config path")
    cfg = load_config(args[0])
    check_referenced_files(cfg, str(Path(args[0]).parent))
    print("ok")
    return 0


def _cmd_list_solvers(args):
    if args:
        raise _UsageError("list-solvers takes no arguments")
    for name in SOLVER_NAMES:
        print(name)
    return 0


def _cmd_gen_synthetic(args):
    if len(args) != 5:
        raise _UsageError("gen-synthetic needs <family> <n> <d> <seed> <out>")
    family, n_s, d_s, seed_s, out = args
    try:
        n, d, seed = int(n_s), int(d_s), int(seed_s)
    except ValueError:
        raise _UsageError("n, d and seed must be integers") from None
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if family == "logistic":
        examples, _, _ = synthetic_logistic_examples(n, d, seed)
        out_path.write_text(serialize_libsvm(examples))
    elif family == "quadratic":
        problem, _ = synthetic_quadratic_problem(n, d, seed)
        with open(out_path, "wb") as fh:
            np.savez(fh, A=problem.A, b=problem.b)
    elif family == "matrix":
        grid = synthetic_lowrank_matrix(n, d, seed)
        np.savetxt(out_path, grid, delimiter=",", fmt="%.17g")
    else:
        raise _UsageError(f"unknown family {family!r} (logistic, quadratic, matrix)")
    print(f"wrote {out_path}")
    return 0


def main(argv=None):
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help", "help"):
        print(USAGE)
        return 0
    cmd, rest = args[0], args[1:]
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "list-solvers": _cmd_list_solvers,
        "gen-synthetic": _cmd_gen_synthetic,
    }
    handler = handlers.get(cmd)
    try:
        if handler is None:
            raise _UsageError(f"unknown command {cmd!r}")
        return handler(rest)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 1
    except (ConfigError, LibsvmParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # anything past validation is a runtime failure
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
