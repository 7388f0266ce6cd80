"""
fluxfit command-line interface.

Usage:
    fluxfit simulate --ec 1.0 --el 1.0 --ej 4.0 --out spec.csv
    fluxfit gen-data --out data/pure --count 2048 --mode pure
    fluxfit train --data data/pure/manifest.json --out models/pretrained.fxnn
    fluxfit finetune --model models/pretrained.fxnn --data data/disp/manifest.json --out models/tuned.fxnn
    fluxfit predict --model models/tuned.fxnn --points spec.csv
    fluxfit preprocess --map map.csv --bias-zero 0 --bias-pi 1 --out points.csv
    fluxfit label --points points.csv --guess 1.3,0.7,7.0 --out labeled.csv
    fluxfit fit --points labeled.csv --guess 1.3,0.7,7.0 --out fit.json
    fluxfit compare --cases 10 --random-inits 64 --iters 5 --seed 7 --model models/tuned.fxnn
    fluxfit scan --truth 1.5,0.7,6.5 --axes e_l,e_j --x-grid 0.3:1.1:9 --y-grid 5:8:9 --fixed 1.28
    fluxfit characterize --map map.csv --model models/tuned.fxnn --bias-zero 0 --bias-pi 1
    fluxfit report --report run/report.json

Every subcommand is a thin adapter over the library; numeric modules are
imported inside the handlers. Exit status is the ErrorCode of the failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from . import config
from .errors import ConfigError, ErrorCode, FluxfitError, PipelineError

logger = logging.getLogger(__name__)


def _triple(text: str):
    from .core.params import QubitParams

    try:
        e_c, e_l, e_j = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"Expected 'E_C,E_L,E_J' in GHz, got '{text}'")
    return QubitParams(e_c, e_l, e_j)


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> List[float]:
    """'lo:hi:n' -> n evenly spaced values."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"Expected 'lo:hi:n', got '{text}'")
    if n < 2:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _widths(text: str) -> List[float]:
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return [float(w) for w in range(int(lo), int(hi) + 1)]
    return [float(v) for v in text.split(",")]


def _section(defaults: Dict[str, Dict[str, Any]], name: str, **overrides) -> Dict[str, Any]:
    """Config-file section with non-None CLI overrides applied on top."""
    merged = dict(defaults.get(name, {}))
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def _write_json(data: dict, path: Optional[str]):
    text = json.dumps(data, indent=2, sort_keys=True)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
        logger.info(f"Wrote {path}")
    else:
        print(text)


def _guess_of(args):
    if args.guess:
        return _triple(args.guess)
    if all(v is not None for v in (args.ec, args.el, args.ej)):
        from .core.params import QubitParams
        return QubitParams(args.ec, args.el, args.ej)
    raise ConfigError("Parameters required: --guess E_C,E_L,E_J or --ec/--el/--ej")


# ---------------------------------------------------------------- handlers


def cmd_simulate(args, defaults) -> int:
    from .core.params import QubitParams
    from .sim import (ReadoutConfig, SimConfig, dispersive_spectrum, perturb_spectrum,
                      pure_spectrum, render_magnitude_map, write_points)
    from .preprocess import write_magnitude_map

    params = QubitParams(args.ec, args.el, args.ej)
    sim = SimConfig(**_section(defaults, "simulation", flux_points=args.flux_points))
    if args.mode == "dispersive":
        points = dispersive_spectrum(params, sim, ReadoutConfig(**_section(defaults, "readout")))
    else:
        points = pure_spectrum(params, sim)
    if args.jitter or args.spurious:
        points = perturb_spectrum(points, args.jitter, args.spurious, args.seed, sim.f_min, sim.f_max)
    if args.map:
        write_magnitude_map(render_magnitude_map(points, seed=args.seed, resonator_ghz=args.resonator), args.out)
    else:
        write_points(points, args.out)
    logger.info(f"Wrote {len(points)} points for {params} to {args.out}")
    return 0


def cmd_gen_data(args, defaults) -> int:
    from .core.params import ParamRanges
    from .data import GridConfig, generate_dataset
    from .sim import Provenance, ReadoutConfig, SimConfig

    provenance = Provenance.SIMULATED_DISPERSIVE if args.mode == "dispersive" else Provenance.SIMULATED_PURE
    manifest = generate_dataset(
        args.out,
        args.count,
        provenance=provenance,
        ranges=ParamRanges(**_section(defaults, "ranges")),
        seed=args.seed,
        sim=SimConfig(**_section(defaults, "simulation")),
        readout=ReadoutConfig(**_section(defaults, "readout")),
        grid=GridConfig(**_section(defaults, "grid", n_flux_bins=args.flux_bins, n_freq_bins=args.freq_bins)),
        workers=args.workers,
    )
    logger.info(f"Dataset with {len(manifest.entries)} entries ready in {args.out}")
    return 0


def _train_config(args, defaults):
    from .model import TrainConfig

    overrides = dict(
        batch_size=args.batch_size, max_epochs=args.epochs, patience=args.patience,
        seed=args.seed, validation_fraction=args.validation_fraction,
    )
    if args.lr is not None:
        overrides.update(lr_policy="fixed", learning_rate=args.lr)
    if args.no_normalize:
        overrides["normalize_targets"] = False
    return TrainConfig(**_section(defaults, "training", **overrides))


def cmd_train(args, defaults) -> int:
    from .data import load_manifest
    from .model import ConvBlock, ModelConfig, persist_model, pretrain

    manifest = load_manifest(args.data)
    overrides: Dict[str, Any] = {"seed": args.model_seed,
                                 "input_dims": list(manifest.grid_config.shape)}
    if args.channels:
        overrides["conv_blocks"] = [ConvBlock(channels=c) for c in _int_list(args.channels)]
    if args.head is not None:
        overrides["head_widths"] = _int_list(args.head)
    cfg = ModelConfig(**_section(defaults, "model", **overrides))
    model = pretrain(cfg, args.data, _train_config(args, defaults))
    persist_model(model, args.out)
    return 0


def cmd_finetune(args, defaults) -> int:
    from .model import fine_tune, load_model, persist_model

    model = fine_tune(load_model(args.model), args.data, _train_config(args, defaults))
    persist_model(model, args.out)
    return 0


def cmd_predict(args, defaults) -> int:
    from .data import rasterize
    from .model import load_model, predict_detailed
    from .sim import read_points

    model = load_model(args.model)
    prediction = predict_detailed(model, rasterize(read_points(args.points), model.grid_config))
    _write_json(prediction.to_dict(), args.out)
    return 0


def _pipeline_config(args, defaults):
    from .fitting import FitConfig
    from .labeling import LabelConfig
    from .pipeline import PipelineConfig
    from .preprocess import FilterConfig, PeakConfig

    peaks = _section(defaults, "peaks", min_ridge_length=getattr(args, "min_ridge", None))
    if getattr(args, "widths", None):
        peaks["wavelet_widths"] = _widths(args.widths)
    return PipelineConfig(
        filter=FilterConfig(**_section(defaults, "filter", sigma_multiplier=getattr(args, "sigma", None),
                                       max_fraction=getattr(args, "max_fraction", None))),
        peaks=PeakConfig(**peaks),
        labeling=LabelConfig(**_section(defaults, "labeling", window=getattr(args, "window", None))),
        fit=FitConfig(**_section(defaults, "fit", max_iterations=getattr(args, "iters", None))),
        mirror_about_pi=bool(getattr(args, "mirror_about_pi", False)),
        decimate=getattr(args, "decimate", None) or 1,
        plots=not getattr(args, "no_plots", False),
    )


def cmd_preprocess(args, defaults) -> int:
    from .pipeline import preprocess_map
    from .preprocess import FluxMap, decimate_flux, load_magnitude_map, mirror_about_pi
    from .sim import write_points

    pcfg = _pipeline_config(args, defaults)
    points = preprocess_map(load_magnitude_map(args.map), FluxMap(args.bias_zero, args.bias_pi), pcfg)
    if args.mirror_about_pi:
        points = mirror_about_pi(points)
    if args.decimate and args.decimate > 1:
        points = decimate_flux(points, args.decimate)
    write_points(points, args.out)
    logger.info(f"Wrote {len(points)} measured points to {args.out}")
    return 0


def cmd_label(args, defaults) -> int:
    from .labeling import LabelConfig, label_points
    from .sim import read_points, write_points

    cfg = LabelConfig(**_section(defaults, "labeling", window=args.window))
    result = label_points(read_points(args.points), _guess_of(args), cfg)
    write_points(result.labeled, args.out)
    if args.outliers:
        write_points(result.outliers, args.outliers)
    logger.info(f"Label counts: {result.counts}")
    return 0


def cmd_fit(args, defaults) -> int:
    from .fitting import FitConfig, fit
    from .sim import read_points

    points = read_points(args.points)
    if not points.is_fully_labeled():
        raise PipelineError("fit", f"{args.points} contains unlabeled points",
                            hint="run `fluxfit label` first")
    cfg = FitConfig(**_section(defaults, "fit", max_iterations=args.iters))
    result = fit(points, _guess_of(args), cfg)
    _write_json(result.to_dict(), args.out)
    return 0


def cmd_compare(args, defaults) -> int:
    from .data import sample_params
    from .fitting import FitConfig, HarnessConfig, compare_random_vs_ml
    from .model import load_model

    cases = sample_params(args.cases, seed=args.seed)
    cfg = FitConfig(**_section(defaults, "fit", max_iterations=args.iters))
    hcfg = HarnessConfig(**_section(defaults, "harness", flux_points=args.flux_points, workers=args.workers))
    model = load_model(args.model) if args.model else None
    table = compare_random_vs_ml(cases, args.random_inits, cfg, model, seed=args.seed, hcfg=hcfg)
    if args.out:
        table.to_csv(args.out)
    _write_json({name: s.to_dict() for name, s in table.arms.items()}, args.summary)
    return 0


def cmd_scan(args, defaults) -> int:
    from .fitting import FitConfig, HarnessConfig, scan_initial_grid
    from .pipeline import plot_contours

    axes = tuple(a.strip() for a in args.axes.split(","))
    cfg = FitConfig(**_section(defaults, "fit", max_iterations=args.iters))
    hcfg = HarnessConfig(**_section(defaults, "harness", flux_points=args.flux_points, workers=args.workers))
    contour = scan_initial_grid(_triple(args.truth), axes, (_grid(args.x_grid), _grid(args.y_grid)),
                                args.fixed, cfg, hcfg)
    contour.to_csv(args.out)
    if args.plot:
        plot_contours(args.plot, contour)
    x, y = contour.argmin_error()
    logger.info(f"Lowest Error at {axes[0]}={x:g}, {axes[1]}={y:g}")
    return 0


def cmd_characterize(args, defaults) -> int:
    from .model import load_model
    from .pipeline import characterize_points, file_digest, run_characterize
    from .preprocess import FluxMap
    from .sim import read_points

    pcfg = _pipeline_config(args, defaults)
    guess = _triple(args.guess) if args.guess else None
    truth = _triple(args.truth) if args.truth else None
    if args.map:
        if args.bias_zero is None or args.bias_pi is None:
            raise PipelineError("load", "Map input needs a flux calibration", hint="pass --bias-zero and --bias-pi")
        report = run_characterize(args.map, args.model, FluxMap(args.bias_zero, args.bias_pi), pcfg,
                                  args.out, initial_guess=guess, truth=truth)
    else:
        inputs = {"points": file_digest(args.points)}
        model = None
        if args.model:
            model = load_model(args.model)
            inputs["model"] = file_digest(args.model)
        out = args.out or str(Path(args.points).with_suffix("")) + "_fluxfit"
        report = characterize_points(read_points(args.points), model, pcfg, guess, truth, out, inputs)
    logger.info(f"Fitted parameters: {report.fit.params}")
    return 0


def cmd_report(args, defaults) -> int:
    from .core.params import QubitParams
    from .pipeline import plot_spectrum_overlay
    from .sim import SpectrumPointSet, read_points

    path = Path(args.report)
    if not path.exists():
        raise ConfigError(f"Report not found: {path}")
    with open(path, "r") as f:
        report = json.load(f)
    fitted = QubitParams.from_dict(report["fit"]["params"])
    guess = QubitParams.from_dict(report["initial_guess"])
    lines = [
        f"{report['tool']['name']} {report['tool']['version']} ({report['timestamp']})",
        f"initial guess ({report['guess_source']}): {guess}",
        f"fitted: {fitted}",
        f"points {report['counts']['points']}: labeled {report['counts']['labeled']}, "
        f"outliers {report['counts']['outliers']}, ambiguous {report['counts']['ambiguous']}",
        f"fit: {report['fit']['n_iterations']} iterations, converged={report['fit']['converged']}, "
        f"rss={report['fit']['rss']:.4g} GHz^2",
    ]
    if report.get("metrics"):
        lines.append(f"vs truth: Error={report['metrics']['error']:.4g}, Cost={report['metrics']['cost']:.4g} GHz^2")
    print("\n".join(lines))

    if args.plot:
        artifacts = report.get("artifacts", {})
        labeled = read_points(path.parent / artifacts["labeled"]) if "labeled" in artifacts else SpectrumPointSet()
        outliers = read_points(path.parent / artifacts["outliers"]) if "outliers" in artifacts else None
        plot_spectrum_overlay(args.plot, fitted, labeled, outliers)
    return 0


# ---------------------------------------------------------------- parser


def _add_guess(p):
    p.add_argument("--guess", help="E_C,E_L,E_J in GHz")
    p.add_argument("--ec", type=float)
    p.add_argument("--el", type=float)
    p.add_argument("--ej", type=float)


def _add_training(p):
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--lr", type=float, help="Fixed learning rate (default: adaptive policy)")
    p.add_argument("--validation-fraction", type=float)
    p.add_argument("--no-normalize", action="store_true", help="Train on raw GHz targets")
    p.add_argument("--seed", type=int)


def _add_preprocess(p):
    p.add_argument("--bias-zero", type=float, help="Bias value at phi_ext = 0")
    p.add_argument("--bias-pi", type=float, help="Bias value at phi_ext = pi")
    p.add_argument("--sigma", type=float, help="Background sigma multiplier")
    p.add_argument("--max-fraction", type=float, help="Upper magnitude bound as fraction of the maximum")
    p.add_argument("--widths", help="Wavelet widths in bins, 'lo-hi' or comma list")
    p.add_argument("--min-ridge", type=int)
    p.add_argument("--mirror-about-pi", action="store_true", help="Symmetrize a half-period measurement")
    p.add_argument("--decimate", type=int, help="Keep every n-th flux column")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=config.TOOL_NAME, description="Fluxonium qubit characterization")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--config-dir", help=f"Directory holding {config.CONFIG_FILE_NAME}")
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Simulate a transition spectrum")
    p.add_argument("--ec", type=float, required=True)
    p.add_argument("--el", type=float, required=True)
    p.add_argument("--ej", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["pure", "dispersive"], default="pure")
    p.add_argument("--flux-points", type=int)
    p.add_argument("--jitter", type=float, default=0.0, help="Frequency jitter sigma (GHz)")
    p.add_argument("--spurious", type=float, default=0.0, help="Spurious point fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--map", action="store_true", help="Write a rendered magnitude map instead of points")
    p.add_argument("--resonator", type=float, help="Readout line frequency drawn into the map (GHz)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("gen-data", help="Generate a training dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=config.DESK_PURE_COUNT)
    p.add_argument("--mode", choices=["pure", "dispersive"], default="pure")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--flux-bins", type=int)
    p.add_argument("--freq-bins", type=int)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="Pretrain the regressor")
    p.add_argument("--data", required=True, help="Dataset manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--channels", help="Comma list of conv block channels")
    p.add_argument("--head", help="Comma list of hidden head widths")
    p.add_argument("--model-seed", type=int)
    _add_training(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("finetune", help="Fine-tune the final layer")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_training(p)
    p.set_defaults(handler=cmd_finetune)

    p = sub.add_parser("predict", help="Predict an initial guess from a point set")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("preprocess", help="Extract points from a magnitude map")
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    _add_preprocess(p)
    p.set_defaults(handler=cmd_preprocess)

    p = sub.add_parser("label", help="Assign transitions to measured points")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--outliers")
    p.add_argument("--window", type=float)
    _add_guess(p)
    p.set_defaults(handler=cmd_label)

    p = sub.add_parser("fit", help="Least-squares fit of labeled points")
    p.add_argument("--points", required=True)
    p.add_argument("--out")
    p.add_argument("--iters", type=int)
    _add_guess(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("compare", help="Random vs ML initial guesses")
    p.add_argument("--cases", type=int, default=10)
    p.add_argument("--random-inits", type=int, default=64)
    p.add_argument("--iters", type=int, default=config.STUDY_ITERATIONS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model")
    p.add_argument("--flux-points", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV table")
    p.add_argument("--summary", help="JSON summary (stdout when omitted)")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("scan", help="Error/Cost over a grid of initial values")
    p.add_argument("--truth", required=True, help="E_C,E_L,E_J in GHz")
    p.add_argument("--axes", default="e_l,e_j")
    p.add_argument("--x-grid", required=True, help="lo:hi:n")
    p.add_argument("--y-grid", required=True, help="lo:hi:n")
    p.add_argument("--fixed", type=float, required=True, help="Initial value of the third parameter")
    p.add_argument("--iters", type=int, default=config.STUDY_ITERATIONS)
    p.add_argument("--flux-points", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--plot", help="PNG output")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("characterize", help="Full pipeline on a map or point set")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--map")
    source.add_argument("--points")
    p.add_argument("--model")
    p.add_argument("--guess", help="Initial guess E_C,E_L,E_J (bypasses the model)")
    p.add_argument("--truth", help="Known E_C,E_L,E_J for metrics")
    p.add_argument("--out", help="Artifact directory")
    p.add_argument("--window", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--no-plots", action="store_true")
    _add_preprocess(p)
    p.set_defaults(handler=cmd_characterize)

    p = sub.add_parser("report", help="Summarize a report and render its overlay")
    p.add_argument("--report", required=True)
    p.add_argument("--plot", help="PNG output")
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    handler: Callable = args.handler
    try:
        defaults = config.load_defaults(Path(args.config_dir) if args.config_dir else None)
        return handler(args, defaults)
    except FluxfitError as e:
        logger.error(f"{args.command} failed: {e.message}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command}: invalid configuration: {e}")
        return ErrorCode.CONFIG.value
    except Exception:
        logger.exception(f"{args.command}: unexpected error")
        return ErrorCode.UNEXPECTED.value


if __name__ == "__main__":
    sys.exit(main())
