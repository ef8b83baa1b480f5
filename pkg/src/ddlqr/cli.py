"""Command-line interface.

Subcommands: simulate | design | sweep | montecarlo | eval. Each takes an INI
config file (see config.py), writes its outputs atomically into the output
directory, and drops a ``config_echo.ini`` with every resolved value so the
run can be reproduced exactly from the echo.

Exit codes: 0 success, 1 numerical-stage failure, 2 input/parse failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import storage
from .config import ConfigError, RunConfig
from .experiments import (
    PipelineConfig,
    RegulationScenario,
    TrackingScenario,
    convergence_sweep,
    design_gain,
    evaluate_closed_loop,
    monte_carlo_obs,
)
from .plant_sim import generate_signal, simulate

OUTPUT_DIR_ENV = "DDLQR_OUTPUT_DIR"
FMT = "%.17g"


def _output_dir(args, cfg: RunConfig) -> Path:
    if args.output_dir:
        out = args.output_dir
    elif cfg.has("io", "output_dir"):
        out = cfg.get_str("io", "output_dir")
    else:
        out = os.environ.get(OUTPUT_DIR_ENV, ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_echo(cfg: RunConfig, outdir: Path) -> str:
    echo = cfg.echo()
    storage.write_text(outdir / "config_echo.ini", echo)
    return echo


def _load_or_simulate_dataset(cfg: RunConfig):
    """Dataset from [io] dataset path, or simulated from [model]+[signal]."""
    model = cfg.model()
    ts = model.sample_time if model.sample_time is not None else 1.0
    if cfg.has("io", "dataset") and Path(cfg.get_str("io", "dataset")).exists():
        data = storage.read_dataset(cfg.get_str("io", "dataset"), sample_time=ts)
        return model, data
    spec = cfg.signal(default_channels=model.n_inputs, default_ts=ts)
    u = generate_signal(spec)
    v = None
    mode = "process"
    if cfg.has("noise"):
        variance = cfg.get_float("noise", "variance", 0.0)
        seed = cfg.get_int("noise", "seed", 0)
        mode = cfg.get_str("noise", "mode", "process")
        if variance > 0:
            if model.E is None:
                raise ConfigError("[noise] requires the model to define E")
            rng = np.random.default_rng(seed)
            v = rng.normal(0.0, np.sqrt(variance), size=(spec.length, model.E.shape[1]))
    data = simulate(model, u, v=v, noise_mode=mode)
    return model, data


def _pipeline_config(cfg: RunConfig, model) -> PipelineConfig:
    depth = cfg.get_int("estimation", "depth", required=True)
    width = cfg.get_int("estimation", "width")
    horizon = cfg.get_int("lqr", "horizon", required=True)
    ts = model.sample_time if model.sample_time is not None else 1.0
    try:
        return PipelineConfig(
            weights=cfg.weights(),
            horizon=horizon,
            depth=depth,
            width=width,
            algorithm=cfg.get_str("estimation", "algorithm", "alg1"),
            imc=cfg.imc(default_ts=ts),
            markov_structure=cfg.get_str("estimation", "structure", "average"),
        )
    except ValueError as exc:
        raise ConfigError(f"pipeline configuration: {exc}") from exc


def cmd_simulate(cfg: RunConfig, outdir: Path) -> int:
    model, data = _load_or_simulate_dataset(cfg)
    target = cfg.get_str("io", "dataset", str(outdir / "dataset.csv"))
    storage.write_dataset(target, data)
    cfg.set_resolved("io", "dataset", target)
    _write_echo(cfg, outdir)
    print(f"wrote {data.n_samples} samples to {target}")
    return 0


def cmd_design(cfg: RunConfig, outdir: Path) -> int:
    model, data = _load_or_simulate_dataset(cfg)
    pipeline = _pipeline_config(cfg, model)
    if pipeline.width is None:
        pipeline.width = data.n_samples - 2 * pipeline.depth + 1
        cfg.set_resolved("estimation", "width", pipeline.width)
    design = design_gain(data, pipeline)
    storage.write_matrix(outdir / "gain.csv", design.K)
    echo = _write_echo(cfg, outdir)
    lines = [f"gain horizon: {design.horizon}"]
    lines += [f"{k}: {v}" for k, v in sorted(design.diagnostics.items())]
    lines += ["", "# resolved configuration", echo]
    storage.write_text(outdir / "design.txt", "\n".join(lines) + "\n")
    print(f"wrote gain to {outdir / 'gain.csv'}")
    return 0


def cmd_sweep(cfg: RunConfig, outdir: Path) -> int:
    model, data = _load_or_simulate_dataset(cfg)
    horizons = cfg.get("sweep", "horizons", required=True)
    if not isinstance(horizons, list) or not all(isinstance(h, int) for h in horizons):
        raise ConfigError("[sweep] horizons must be a list of integers")
    pipeline = _pipeline_config(cfg, model)
    rows = convergence_sweep(model, data, pipeline, horizons)
    lines = ["horizon,gain_error"] + [f"{n},{FMT % e}" for n, e in rows]
    storage.write_text(outdir / "sweep.csv", "\n".join(lines) + "\n")
    echo = _write_echo(cfg, outdir)
    storage.write_text(
        outdir / "sweep.txt",
        "\n".join(f"horizon {n}: max-entry gain error {e:.6e}" for n, e in rows)
        + "\n\n# resolved configuration\n" + echo,
    )
    print(f"wrote sweep table to {outdir / 'sweep.csv'}")
    return 0


def cmd_montecarlo(cfg: RunConfig, outdir: Path) -> int:
    model = cfg.model()
    ts = model.sample_time if model.sample_time is not None else 1.0
    spec = cfg.signal(default_channels=model.n_inputs, default_ts=ts)
    depth = cfg.get_int("estimation", "depth", required=True)
    width = cfg.get_int("estimation", "width")
    runs = cfg.get_int("montecarlo", "runs", required=True)
    reports = monte_carlo_obs(
        model,
        spec,
        depth,
        runs,
        noise_variance=cfg.get_float("montecarlo", "variance", required=True),
        base_seed=cfg.get_int("montecarlo", "seed", 0),
        width=width,
        noise_mode=cfg.get_str("montecarlo", "noise_mode", "measurement"),
        fixed_input=cfg.get_bool("montecarlo", "fixed_input", False),
        structure=cfg.get_str("estimation", "structure", "average"),
    )
    eig_lines = ["algorithm,quantity," + ",".join(
        f"value{i + 1}" for i in range(len(reports[0].covariance_eigenvalues)))]
    summary = []
    for rep in reports:
        storage.write_matrix(outdir / f"mc_{rep.algorithm}_mean.csv", rep.mean)
        storage.write_matrix(outdir / f"mc_{rep.algorithm}_covariance.csv", rep.covariance)
        storage.write_matrix(outdir / f"mc_{rep.algorithm}_mse.csv", rep.mse)
        storage.write_matrix(outdir / f"mc_{rep.algorithm}_second_moment.csv", rep.second_moment)
        for name, values in (
            ("covariance", rep.covariance_eigenvalues),
            ("mse", rep.mse_eigenvalues),
            ("second_moment", rep.second_moment_eigenvalues),
        ):
            eig_lines.append(f"{rep.algorithm},{name}," + ",".join(FMT % v for v in values))
        summary += [
            f"{rep.algorithm}: runs {rep.runs}, failures {rep.failures}",
            f"  mean                {np.array2string(rep.mean.ravel(), precision=6)}",
            f"  cov eigenvalues     {np.array2string(rep.covariance_eigenvalues, precision=6)}",
            f"  mse eigenvalues     {np.array2string(rep.mse_eigenvalues, precision=6)}",
            f"  2nd-moment eigvals  {np.array2string(rep.second_moment_eigenvalues, precision=6)}",
        ]
    storage.write_text(outdir / "mc_eigenvalues.csv", "\n".join(eig_lines) + "\n")
    echo = _write_echo(cfg, outdir)
    storage.write_text(
        outdir / "montecarlo.txt",
        "\n".join(summary) + "\n\n# resolved configuration\n" + echo,
    )
    print(f"wrote Monte Carlo reports to {outdir}")
    return 0


def cmd_eval(cfg: RunConfig, outdir: Path) -> int:
    model = cfg.model()
    ts = model.sample_time if model.sample_time is not None else 1.0
    gain_path = cfg.get_str("io", "gain", required=True)
    K = storage.read_matrix(gain_path)
    weights = cfg.weights()
    horizon = cfg.get_int("eval", "horizon", required=True)
    kind = cfg.get_str("eval", "scenario", required=True)
    from .lqr import LqrDesign

    design = LqrDesign(K=K, horizon=0, weights=weights)
    if kind == "regulation":
        x0 = cfg.get_matrix("eval", "x0", required=True).ravel()
        scenario = RegulationScenario(x0=x0)
    elif kind == "tracking":
        imc = cfg.imc(default_ts=ts)
        if imc is None:
            raise ConfigError("tracking scenario requires an [imc] section")
        if not cfg.has("reference", "length"):
            cfg.set_resolved("reference", "length", horizon)
        ref = cfg.signal(default_channels=model.n_outputs, default_ts=ts, section="reference")
        scenario = TrackingScenario(imc=imc, reference=ref)
    else:
        raise ConfigError(f"[eval] scenario must be 'regulation' or 'tracking', got {kind!r}")
    metrics = evaluate_closed_loop(model, design, scenario, horizon)
    rows = [
        ("cost", metrics.cost),
        ("spectral_radius", metrics.spectral_radius),
        ("steady_state_error", metrics.steady_state_error),
    ]
    if metrics.thd is not None:
        rows.append(("thd", metrics.thd))
    storage.write_text(
        outdir / "eval.csv",
        "metric,value\n" + "\n".join(f"{k},{FMT % v}" for k, v in rows) + "\n",
    )
    echo = _write_echo(cfg, outdir)
    storage.write_text(
        outdir / "eval.txt",
        "\n".join(f"{k}: {v:.9g}" for k, v in rows) + "\n\n# resolved configuration\n" + echo,
    )
    print(f"wrote metrics to {outdir / 'eval.csv'}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "design": cmd_design,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddlqr",
        description="Data-driven LQR design from input/state/output batches",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="INI configuration file")
    parser.add_argument("--output-dir", help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a scalar config key (repeatable)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.set)
        outdir = _output_dir(args, cfg)
        return COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
