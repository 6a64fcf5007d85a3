"""Command-line front end: ``mkmc mask``, ``mkmc complete``, ``mkmc evaluate``.

The CLI is a thin shell over the library; it performs file IO and argument
parsing only. Exit codes: 0 success, 2 IO/parse error, 3 dimension or
shape/mask mismatch, 4 a visible block is not positive definite.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import matrixio
from .engines import CompletionConfig, run_completion
from .errors import DimensionError, FormatError, NotPositiveDefiniteError
from .linalg import symmetrize
from .recovery import RecoveryReport, hidden_block_error
from .views import Fill, apply_mask, random_mask

log = logging.getLogger("mkmc")

EXIT_IO = 2
EXIT_DIM = 3
EXIT_NOT_PD = 4


def _fail(code: int, message: str):
    click.echo(f"mkmc: error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NotPositiveDefiniteError as exc:
            _fail(EXIT_NOT_PD, str(exc))
        except DimensionError as exc:
            _fail(EXIT_DIM, str(exc))
        except (FormatError, OSError) as exc:
            _fail(EXIT_IO, str(exc))

    return wrapper


@click.group()
def main():
    """Mutual completion of multiple incomplete kernel matrices."""
    level = os.environ.get("MKMC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _load_square_inputs(inputs) -> list[np.ndarray]:
    mats = [symmetrize(matrixio.read_matrix(p)) for p in inputs]
    ell = mats[0].shape[0]
    for p, m in zip(inputs, mats):
        if m.shape[0] != ell:
            raise DimensionError(f"{p}: dimension {m.shape[0]} differs from {ell}")
    return mats


@main.command("mask")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--fraction", type=float, required=True, help="Fraction of objects to hide per view.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--fill", type=click.Choice(["zero", "mean"]), default="zero", show_default=True)
@click.option("--correlated", is_flag=True, help="Hide the same objects in every view.")
@click.option("--out-dir", type=click.Path(), required=True)
@handle_errors
def cmd_mask(inputs, fraction, seed, fill, correlated, out_dir):
    """Hide random rows/columns of each input kernel and write masked copies."""
    mats = _load_square_inputs(inputs)
    ell = mats[0].shape[0]
    pattern = random_mask(ell, len(mats), fraction, seed, correlated=correlated)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrixio.write_mask(out / "mask.json", pattern)
    for path, mat, hidden in zip(inputs, mats, pattern.hidden):
        masked = apply_mask(mat, hidden, Fill(fill))
        matrixio.write_matrix(out / Path(path).name, masked)
    log.info("wrote mask and %d masked matrices to %s", len(mats), out)


def _resolve_config(config_path, method, rank, rank_criterion, tol, max_iters,
                    reg_epsilon, seed, threads, mask, output_dir, inputs):
    if config_path is not None:
        cfg_obj = matrixio.load_run_config(config_path)
        method = cfg_obj.get("method", method)
        raw_rank = cfg_obj.get("rank")
        if isinstance(raw_rank, dict):
            rank, rank_criterion = None, raw_rank["criterion"]
        elif raw_rank is not None:
            rank, rank_criterion = int(raw_rank), None
        tol = cfg_obj.get("tol", tol)
        max_iters = cfg_obj.get("max_iters", max_iters)
        reg_epsilon = cfg_obj.get("reg_epsilon", reg_epsilon)
        seed = cfg_obj.get("seed", seed)
        inputs = tuple(cfg_obj.get("inputs", inputs))
        mask = cfg_obj.get("mask", mask)
        output_dir = cfg_obj.get("output_dir", output_dir)
    if not inputs:
        raise click.UsageError("no input matrices given (arguments or config 'inputs')")
    if mask is None:
        raise click.UsageError("a mask file is required (--mask or config 'mask')")
    if output_dir is None:
        raise click.UsageError("an output directory is required (--output-dir or config 'output_dir')")
    cfg = CompletionConfig(
        method=method,
        rank=rank,
        rank_criterion=rank_criterion,
        tol=tol,
        max_iters=max_iters,
        reg_epsilon=reg_epsilon,
        seed=seed,
        threads=threads,
    )
    return cfg, inputs, mask, output_dir


@main.command("complete")
@click.argument("inputs", nargs=-1, type=click.Path())
@click.option("--method", type=click.Choice(["fc", "pca", "fa"]), default="fc", show_default=True)
@click.option("--rank", type=int, default=None, help="Explicit model rank q (pca/fa).")
@click.option("--rank-criterion", type=click.Choice(["gk", "kaiser"]), default=None,
              help="Pick q from the initial average kernel's spectrum.")
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iters", type=int, default=500, show_default=True)
@click.option("--reg-epsilon", type=float, default=1e-3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True,
              help="Parallel per-view imputation (results identical to sequential).")
@click.option("--mask", "mask_path", type=click.Path(), default=None)
@click.option("--output-dir", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Run-config JSON; overrides flags.")
@handle_errors
def cmd_complete(inputs, method, rank, rank_criterion, tol, max_iters, reg_epsilon,
                 seed, threads, mask_path, output_dir, config_path):
    """Complete the masked kernels and write them with a trace JSON."""
    cfg, inputs, mask_path, output_dir = _resolve_config(
        config_path, method, rank, rank_criterion, tol, max_iters,
        reg_epsilon, seed, threads, mask_path, output_dir, inputs,
    )
    pattern = matrixio.read_mask(mask_path)
    mats = _load_square_inputs(inputs)
    if mats[0].shape[0] != pattern.ell or len(mats) != pattern.n_views:
        raise DimensionError(
            f"mask describes {pattern.n_views} views of dim {pattern.ell}, "
            f"got {len(mats)} matrices of dim {mats[0].shape[0]}"
        )
    result = run_completion(mats, pattern, cfg)

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for path, mat in zip(inputs, result.completed):
        matrixio.write_matrix(out / Path(path).name, mat)
    trace_obj = {
        "objective": result.trace,
        "iterations": result.iterations,
        "converged": result.converged,
        "dof": result.dof,
        "rank": result.rank,
        "iter_ms": result.iter_ms,
    }
    (out / "trace.json").write_text(json.dumps(trace_obj, indent=2) + "\n")

    status = "converged" if result.converged else "stopped at max_iters"
    click.echo(
        f"method={cfg.method} views={pattern.n_views} dim={pattern.ell} "
        f"rank={result.rank} dof={result.dof} iterations={result.iterations} "
        f"objective={result.trace[-1]:.12g} ({status})"
    )


@main.command("evaluate")
@click.option("--mask", "mask_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_paths", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--completed", "completed_paths", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--name", default="method", show_default=True, help="Label for the completed set.")
@click.option("--trace", "trace_path", type=click.Path(exists=True), default=None,
              help="trace.json from the complete step, embedded in the report.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def cmd_evaluate(mask_path, truth_paths, completed_paths, name, trace_path, out_path):
    """Score hidden-block recovery of completed kernels against ground truth."""
    pattern = matrixio.read_mask(mask_path)
    truths = _load_square_inputs(truth_paths)
    completed = _load_square_inputs(completed_paths)
    if len(truths) != pattern.n_views or len(completed) != pattern.n_views:
        raise DimensionError(
            f"mask has {pattern.n_views} views, got {len(truths)} truth and "
            f"{len(completed)} completed matrices"
        )
    if truths[0].shape[0] != pattern.ell:
        raise DimensionError(
            f"mask dimension {pattern.ell} does not match matrices of dim {truths[0].shape[0]}"
        )

    errs = [
        hidden_block_error(t, c, h)
        for t, c, h in zip(truths, completed, pattern.hidden)
    ]
    zero_errs = [
        hidden_block_error(t, apply_mask(t, h, Fill.ZERO), h)
        for t, h in zip(truths, pattern.hidden)
    ]
    mean_errs = [
        hidden_block_error(t, apply_mask(t, h, Fill.MEAN), h)
        for t, h in zip(truths, pattern.hidden)
    ]

    trace_obj = {"objective": [], "iterations": 0, "converged": True}
    if trace_path is not None:
        trace_obj = json.loads(Path(trace_path).read_text())
    report = RecoveryReport(
        per_view_relative_error=errs,
        mean_relative_error=float(np.mean(errs)),
        baseline_errors={
            "zero": float(np.mean(zero_errs)),
            "mean": float(np.mean(mean_errs)),
        },
        objective_trace=list(trace_obj.get("objective", [])),
        iterations=int(trace_obj.get("iterations", 0)),
        converged=bool(trace_obj.get("converged", True)),
    )
    Path(out_path).write_text(
        json.dumps({"methods": {name: report.to_json_dict()}}, indent=2) + "\n"
    )
    click.echo(f"{name}: mean_relative_error={report.mean_relative_error:.17g}")


if __name__ == "__main__":
    main()
