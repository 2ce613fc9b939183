"""Experiment runner: reproducible decomposition/completion runs from an INI
config, plus small utilities for inspecting models and cutting masks.

Subcommands::

    mtnr decompose     --config exp.ini [--out DIR] [--trials N] [--seed S]
    mtnr complete-als  --config exp.ini [--out DIR] [--trials N] [--seed S]
    mtnr complete-admm --config exp.ini [--out DIR] [--trials N] [--seed S]
    mtnr inspect MODEL.mtnr
    mtnr mask --pattern mar --rate 0.9 --dims 8 8 8 [--modes 0 1]
              [--seed S] --out MASK.msk

Each trial gets seed ``seed + trial`` and derives independent mask and
solver streams from it, so runs are reproducible entry for entry.  Artifacts
per run directory: ``trial_<k>.dnt`` (recovered tensor), ``trial_<k>.mtnr``
(fitted model), ``metrics.csv`` (one row per trial), ``summary.csv``
(best/mean/std per metric).  A config listing several missing rates writes
one subdirectory per rate plus a plot-ready ``series.tsv``.

Exit codes: 2 bad config or arguments, 3 unreadable input, 4 unwritable
output directory, 5 corrupt data file.  ``MTNR_LOG`` sets the log level.
"""

import argparse
import configparser
import csv
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import io, metrics
from .atl import AtlConfig, run_atl
from .completion import AdmmConfig, mtnr_admm_complete, mtnr_als_complete
from .data import (MissingPattern, detensorize_image, gen_mask, gen_rank1_sum,
                   gen_tt, tensorize_image)
from .io import FormatError
from .network import recover, recover_model

log = logging.getLogger("mtnr.cli")

EXIT_BAD_CONFIG = 2
EXIT_UNREADABLE_INPUT = 3
EXIT_UNWRITABLE_OUT = 4
EXIT_CORRUPT_FILE = 5

_TASKS = ("decompose", "complete-als", "complete-admm")
_INPUT_KINDS = ("rank1-sum", "tt", "tensor", "image")
_ATL_KEYS = ("epsilon", "delta", "max_sweeps", "gamma", "max_connections",
             "max_components")
_ADMM_KEYS = _ATL_KEYS + ("lam", "rho", "rho_max", "rho_growth")


class ConfigError(ValueError):
    """The config file (or CLI arguments) cannot be used as given."""


@dataclass
class ExperimentConfig:
    """Everything one experiment needs, resolved from INI + CLI overrides."""

    task: str
    out: str
    trials: int = 1
    seed: int = 0
    # input source
    kind: str = "rank1-sum"
    dims: tuple = ()
    terms: int = 1
    ranks: tuple = ()
    path: str | None = None
    target_dims: tuple | None = None
    # mask (completion tasks only)
    mask_kind: str = "mar"
    mask_rates: list = field(default_factory=list)
    mask_modes: tuple = (0, 1)
    mask_path: str | None = None
    solver: AtlConfig = field(default_factory=AtlConfig)


def _ints(text):
    return tuple(int(v) for v in text.split())


def _floats(text):
    return [float(v) for v in text.split()]


def parse_config(path, task, out=None, trials=None, seed=None):
    """Read and validate an experiment INI file; raises ConfigError."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    try:
        return _build_config(parser, task, out, trials, seed)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _build_config(parser, task, out, trials, seed):
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    if "task" in exp and exp["task"] != task:
        raise ConfigError(
            f"config says task={exp['task']} but the {task} subcommand "
            f"was invoked")
    cfg = ExperimentConfig(task=task, out=out or exp.get("out", ""))
    if not cfg.out:
        raise ConfigError("no output directory: set [experiment] out "
                          "or pass --out")
    cfg.trials = trials if trials is not None else int(exp.get("trials", 1))
    cfg.seed = seed if seed is not None else int(exp.get("seed", 0))
    if cfg.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {cfg.trials}")

    if not parser.has_section("input"):
        raise ConfigError("missing [input] section")
    src = parser["input"]
    cfg.kind = src.get("kind", "rank1-sum")
    if cfg.kind not in _INPUT_KINDS:
        raise ConfigError(f"unknown input kind {cfg.kind!r}, expected one "
                          f"of {_INPUT_KINDS}")
    if cfg.kind in ("rank1-sum", "tt"):
        if "dims" not in src:
            raise ConfigError(f"input kind {cfg.kind} needs dims")
        cfg.dims = _ints(src["dims"])
        cfg.terms = int(src.get("terms", 1))
        cfg.ranks = _ints(src["ranks"]) if "ranks" in src else ()
        if cfg.kind == "tt" and not cfg.ranks:
            raise ConfigError("input kind tt needs ranks")
    else:
        if "path" not in src:
            raise ConfigError(f"input kind {cfg.kind} needs path")
        cfg.path = src["path"]
        if "target_dims" in src:
            cfg.target_dims = _ints(src["target_dims"])
        elif cfg.kind == "image":
            raise ConfigError("input kind image needs target_dims")

    if task != "decompose":
        if not parser.has_section("mask"):
            raise ConfigError(f"task {task} needs a [mask] section")
        msk = parser["mask"]
        if "path" in msk:
            cfg.mask_path = msk["path"]
        else:
            cfg.mask_kind = msk.get("pattern", "mar")
            if "rate" not in msk:
                raise ConfigError("mask needs rate (or path)")
            cfg.mask_rates = _floats(msk["rate"])
            if "modes" in msk:
                cfg.mask_modes = _ints(msk["modes"])

    cfg.solver = _solver_config(parser, task)
    cfg.solver.validate()
    return cfg


def _solver_config(parser, task):
    values = dict(parser["solver"]) if parser.has_section("solver") else {}
    allowed = _ADMM_KEYS if task == "complete-admm" else _ATL_KEYS
    unknown = set(values) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown solver keys {sorted(unknown)}; "
                          f"allowed: {list(allowed)}")
    kwargs = {}
    for key in ("epsilon", "delta", "lam", "rho", "rho_max", "rho_growth"):
        if key in values:
            kwargs[key] = float(values[key])
    for key in ("max_sweeps", "max_connections", "max_components"):
        if key in values:
            kwargs[key] = int(values[key])
    if values.get("gamma", "").strip():
        kwargs["gamma"] = float(values["gamma"])
    cls = AdmmConfig if task == "complete-admm" else AtlConfig
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# running experiments
# ---------------------------------------------------------------------------

def _load_input(cfg):
    """Returns (truth tensor, image shape or None)."""
    if cfg.kind == "rank1-sum":
        rng = np.random.default_rng(cfg.seed)
        return gen_rank1_sum(cfg.dims, cfg.terms, rng), None
    if cfg.kind == "tt":
        rng = np.random.default_rng(cfg.seed)
        return gen_tt(cfg.dims, cfg.ranks, rng), None
    if cfg.kind == "tensor":
        t = io.read_dnt(cfg.path)
        if cfg.target_dims:
            t = tensorize_image(t, cfg.target_dims)
        return t, None
    img = io.read_png(cfg.path)
    return tensorize_image(img, cfg.target_dims), img.shape


def _trial_metrics(recovered, truth, image_shape):
    row = {"rse": metrics.rse(recovered, truth)}
    if image_shape is not None:
        x = detensorize_image(recovered, image_shape)
        y = detensorize_image(truth, image_shape)
        row["psnr"] = metrics.psnr(x, y)
        row["ssim"] = metrics.ssim(x, y)
    else:
        row["psnr"] = metrics.psnr(recovered, truth)
        row["ssim"] = ""
    return row


def _run_trial(cfg, truth, image_shape, rate, trial, outdir):
    trial_seed = cfg.seed + trial
    mask_ss, solver_ss = np.random.SeedSequence(trial_seed).spawn(2)
    solver_rng = np.random.default_rng(solver_ss)
    start = time.perf_counter()
    if cfg.task == "decompose":
        model = run_atl(truth, cfg.solver, solver_rng)
        recovered = recover_model(model)
    else:
        if cfg.mask_path is not None:
            mask = io.read_msk(cfg.mask_path)
            if mask.shape != truth.shape:
                raise ConfigError(f"mask shape {mask.shape} does not match "
                                  f"input shape {truth.shape}")
        else:
            pattern = MissingPattern(cfg.mask_kind, rate, seed=mask_ss,
                                     modes=cfg.mask_modes)
            mask = gen_mask(truth.shape, pattern)
        masked = np.where(mask, truth, 0.0)
        solve = mtnr_als_complete if cfg.task == "complete-als" \
            else mtnr_admm_complete
        recovered, model = solve(masked, mask, cfg.solver, solver_rng)
    wall_ms = (time.perf_counter() - start) * 1000.0
    io.write_dnt(os.path.join(outdir, f"trial_{trial}.dnt"), recovered)
    io.write_mtnr(os.path.join(outdir, f"trial_{trial}.mtnr"), model)
    row = {"trial": trial, "seed": trial_seed, "task": cfg.task}
    row.update(_trial_metrics(recovered, truth, image_shape))
    row["components"] = len(model.components)
    row["params"] = model.param_count()
    row["wall_ms"] = f"{wall_ms:.0f}"
    return row


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


_COLUMNS = ["trial", "seed", "task", "rse", "psnr", "ssim", "components",
            "params", "wall_ms"]


def _write_metrics(outdir, rows):
    with open(os.path.join(outdir, "metrics.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in _COLUMNS])


def _summarize(rows):
    """best/mean/std per metric; best is min for rse, max for psnr/ssim."""
    summary = []
    for name, best in (("rse", min), ("psnr", max), ("ssim", max)):
        values = [row[name] for row in rows if row[name] != ""]
        if not values:
            summary.append((name, "", "", ""))
            continue
        summary.append((name, best(values), float(np.mean(values)),
                        float(np.std(values))))
    return summary


def _write_summary(outdir, rows):
    with open(os.path.join(outdir, "summary.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "best", "mean", "std"])
        for name, best, mean, std in _summarize(rows):
            writer.writerow([name, _fmt(best), _fmt(mean), _fmt(std)])


def _prepare_outdir(path):
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise PermissionError(f"cannot write to {path}: {exc}") from exc


def run_experiment(cfg):
    """Run all trials (and rates), write artifacts; returns 0 on success."""
    _prepare_outdir(cfg.out)
    truth, image_shape = _load_input(cfg)
    sweep = cfg.task != "decompose" and len(cfg.mask_rates) > 1
    rates = cfg.mask_rates or [None]
    series = []
    for rate in rates:
        outdir = cfg.out if not sweep else \
            os.path.join(cfg.out, f"rate_{rate:g}")
        if sweep:
            _prepare_outdir(outdir)
        rows = []
        for trial in range(cfg.trials):
            row = _run_trial(cfg, truth, image_shape, rate, trial, outdir)
            rows.append(row)
            log.info("task=%s rate=%s trial=%d rse=%.6g components=%s",
                     cfg.task, rate, trial, row["rse"], row["components"])
        _write_metrics(outdir, rows)
        _write_summary(outdir, rows)
        if sweep:
            series.append((rate, _summarize(rows)))
    if sweep:
        with open(os.path.join(cfg.out, "series.tsv"), "w") as f:
            header = ["rate"]
            for name in ("rse", "psnr", "ssim"):
                header += [f"best_{name}", f"mean_{name}", f"std_{name}"]
            f.write("\t".join(header) + "\n")
            for rate, summary in series:
                cells = [f"{rate:g}"]
                for _, best, mean, std in summary:
                    cells += [_fmt(best), _fmt(mean), _fmt(std)]
                f.write("\t".join(cells) + "\n")
    return 0


# ---------------------------------------------------------------------------
# inspect & mask subcommands
# ---------------------------------------------------------------------------

def inspect_model(path, out=None):
    """Print a topology report for a saved model."""
    out = out if out is not None else sys.stdout
    model = io.read_mtnr(path)
    norms = [float(np.linalg.norm(recover(c))) for c in model.components]
    total = sum(norms) or 1.0
    print(f"model: {len(model.components)} component(s), "
          f"target dims {tuple(model.target_dims)}, "
          f"{model.param_count()} parameters", file=out)
    for k, (c, norm) in enumerate(zip(model.components, norms)):
        edges = c.ranks.edges()
        edge_text = ", ".join(f"{i}-{j}:{r}" for i, j, r in edges) or \
            "none (rank one)"
        print(f"component {k}: params={c.param_count()} "
              f"norm_share={norm / total:.3f} edges: {edge_text}", file=out)
        for line in str(c.ranks.table).splitlines():
            print(f"    {line}", file=out)
    return 0


def _cut_mask(args):
    pattern = MissingPattern(args.pattern, args.rate, seed=args.seed,
                             modes=tuple(args.modes))
    mask = gen_mask(tuple(args.dims), pattern)
    try:
        io.write_msk(args.out, mask)
    except OSError as exc:
        raise PermissionError(f"cannot write {args.out}: {exc}") from exc
    observed = int(mask.sum())
    print(f"wrote {args.out}: {observed}/{mask.size} observed")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mtnr", description="tensor decomposition and completion runs")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in _TASKS:
        p = sub.add_parser(task, help=f"run {task} trials from a config")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
    p = sub.add_parser("inspect", help="print a model topology report")
    p.add_argument("model")
    p = sub.add_parser("mask", help="generate and save an observation mask")
    p.add_argument("--pattern", default="mar")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--modes", type=int, nargs=2, default=(0, 1))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    level = os.environ.get("MTNR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command in _TASKS:
            cfg = parse_config(args.config, args.command, out=args.out,
                               trials=args.trials, seed=args.seed)
            return run_experiment(cfg)
        if args.command == "inspect":
            return inspect_model(args.model)
        return _cut_mask(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except FormatError as exc:
        print(f"error: corrupt file: {exc}", file=sys.stderr)
        return EXIT_CORRUPT_FILE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE_OUT
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE_INPUT


if __name__ == "__main__":
    sys.exit(main())
