"""Command-line entry points.

Exit codes: 0 success, 2 configuration problems, 3 data problems,
4 training divergence, 1 any other toolkit error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .data import SplitSpec, apply_normalizer, fit_normalizer, invert_normalizer, save_csv, split
from .errors import ConfigError, DataError, DivergenceError, SoftaugError
from .harness import (ACQ_HEADER, AMOUNT_HEADER, ABLATE_HEADER, HYPER_HEADER,
                      QUALITY_COMMENT, QUALITY_HEADER, TIME_HEADER, TRACE_HEADER,
                      ExperimentConfig, RunManifest, _load_dataset, _select_train,
                      acquisition_rows, config_to_ini, parse_config, quality_rows,
                      run_ablation, run_pipeline, sweep_amount, sweep_hyper,
                      time_variants, trace_rows, write_csv, _write_manifest)
from .quality import select_best_batch
from .rgan import generate, load_checkpoint, save_checkpoint, train
from .rng import derive_seed


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softaug",
        description="Regression-aware data augmentation: train, generate, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, checkpoint=False, config=True):
        if config:
            p.add_argument("--config", help="INI config file (defaults used if omitted)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="output directory (overrides [run] out_dir)")
        p.add_argument("--workers", type=int, help="parallel arms for multi-run commands")
        if checkpoint:
            p.add_argument("--checkpoint", required=True, help="model checkpoint path")

    common(sub.add_parser("select", help="pick an informative training subset"))
    common(sub.add_parser("train", help="train the generator on the selected subset"))
    gen = sub.add_parser("generate", help="sample rows from a trained checkpoint")
    common(gen, checkpoint=True, config=False)
    gen.add_argument("--count", type=int, required=True, help="rows to generate")
    score = sub.add_parser("score", help="rank candidate batches from a checkpoint")
    common(score, checkpoint=True)
    common(sub.add_parser("pipeline", help="full run: select, train, generate, evaluate"))
    common(sub.add_parser("ablate", help="compare the full method against reduced variants"))
    amt = sub.add_parser("sweep-amount", help="vary how many generated rows are added")
    common(amt)
    amt.add_argument("--amounts", help="comma-separated row counts")
    common(sub.add_parser("sweep-hyper", help="vary one loss weight at a time"))
    common(sub.add_parser("time", help="wall-clock of full training vs plain WGAN-GP"))
    return parser


def _effective_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path | None:
    return Path(cfg.out_dir) if cfg.out_dir else None


def _print_rows(header, rows) -> None:
    print("  ".join(header))
    for row in rows:
        print("  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


def _cmd_select(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    manifest = RunManifest(seed=cfg.seed, seed_tag="", config_ini=config_to_ini(cfg))
    full = _load_dataset(cfg)
    pool, _ = split(full, SplitSpec(full.n_rows - cfg.test_count, cfg.test_count,
                                    derive_seed(cfg.seed, "split")))
    train_raw, acquisitions = _select_train(cfg, pool)
    manifest.dataset = {"rows": full.n_rows, "features": full.n_features}
    manifest.selection = {"method": "active" if cfg.active_enabled else "random",
                          "selected_rows": train_raw.n_rows}
    print(f"selected {train_raw.n_rows} of {pool.n_rows} pool rows")
    if out:
        save_csv(train_raw, out / "selected_train.csv")
        if acquisitions:
            write_csv(out / "acquisition.csv", ACQ_HEADER, acquisition_rows(acquisitions))
        (out / "config.echo.ini").write_text(manifest.config_ini)
        _write_manifest(manifest, out)
    return 0


def _cmd_train(cfg: ExperimentConfig) -> int:
    out = _out_dir(cfg)
    manifest = RunManifest(seed=cfg.seed, seed_tag="", config_ini=config_to_ini(cfg))
    full = _load_dataset(cfg)
    pool, _ = split(full, SplitSpec(full.n_rows - cfg.test_count, cfg.test_count,
                                    derive_seed(cfg.seed, "split")))
    train_raw, _ = _select_train(cfg, pool)
    normalizer = fit_normalizer(train_raw)
    train_n = apply_normalizer(train_raw, normalizer)
    model, trace = train(train_n, cfg.gan, derive_seed(cfg.seed, "gan"))
    last_w = trace.wasserstein[-1] if trace.wasserstein else float("nan")
    print(f"trained {cfg.gan.iterations} iterations; last wasserstein estimate {last_w:.6g}")
    manifest.gan = {"iterations": cfg.gan.iterations, "final_wasserstein": last_w}
    if out:
        write_csv(out / "trace.csv", TRACE_HEADER, trace_rows(trace))
        save_checkpoint(model, out / "checkpoint.bin",
                        extra={"normalizer": normalizer.to_dict(), "seed": cfg.seed,
                               "seed_tag": ""})
        (out / "config.echo.ini").write_text(manifest.config_ini)
        _write_manifest(manifest, out)
    return 0


def _cmd_generate(args) -> int:
    model, extra = load_checkpoint(args.checkpoint)
    seed = args.seed if args.seed is not None else 0
    batch = generate(model, args.count, derive_seed(seed, "gen:0"))
    if "normalizer" in extra:
        from .data import NormalizationSpec
        batch = invert_normalizer(batch, NormalizationSpec.from_dict(extra["normalizer"]))
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    save_csv(batch, out / "generated.csv")
    print(f"wrote {batch.n_rows} generated rows to {out / 'generated.csv'}")
    return 0


def _cmd_score(cfg: ExperimentConfig, checkpoint: str) -> int:
    out = _out_dir(cfg)
    model, extra = load_checkpoint(checkpoint)
    full = _load_dataset(cfg)
    pool, _ = split(full, SplitSpec(full.n_rows - cfg.test_count, cfg.test_count,
                                    derive_seed(cfg.seed, "split")))
    train_raw, _ = _select_train(cfg, pool)
    train_n = apply_normalizer(train_raw, fit_normalizer(train_raw))
    batches = [generate(model, cfg.generated_count, derive_seed(cfg.seed, f"gen:{i}"))
               for i in range(cfg.candidate_batches)]
    best, report = select_best_batch(train_n, batches, cfg.kernel_spec(), cfg.ds_folds,
                                     seed=derive_seed(cfg.seed, "quality"))
    print(f"best batch: {best} of {len(batches)}")
    _print_rows(QUALITY_HEADER, quality_rows(report))
    if out:
        write_csv(out / "quality.csv", QUALITY_HEADER, quality_rows(report),
                  comments=[QUALITY_COMMENT])
    return 0


def _cmd_pipeline(cfg: ExperimentConfig) -> int:
    result = run_pipeline(cfg, _out_dir(cfg))
    _print_rows(result.manifest.report_header, [tuple(r) for r in result.manifest.report])
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        cfg = _effective_config(args)
        if args.command == "select":
            return _cmd_select(cfg)
        if args.command == "train":
            return _cmd_train(cfg)
        if args.command == "score":
            return _cmd_score(cfg, args.checkpoint)
        if args.command == "pipeline":
            return _cmd_pipeline(cfg)
        if args.command == "ablate":
            rows = run_ablation(cfg, _out_dir(cfg))
            _print_rows(ABLATE_HEADER, rows)
            return 0
        if args.command == "sweep-amount":
            amounts = None
            if args.amounts:
                amounts = tuple(int(a) for a in args.amounts.split(",") if a.strip())
            rows = sweep_amount(cfg, amounts, _out_dir(cfg)) if amounts else \
                sweep_amount(cfg, out_dir=_out_dir(cfg))
            _print_rows(AMOUNT_HEADER, rows)
            return 0
        if args.command == "sweep-hyper":
            rows = sweep_hyper(cfg, out_dir=_out_dir(cfg))
            _print_rows(HYPER_HEADER, rows)
            return 0
        if args.command == "time":
            rows = time_variants(cfg, _out_dir(cfg))
            _print_rows(TIME_HEADER, rows)
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 3
    except DivergenceError as err:
        print(f"training diverged: {err}", file=sys.stderr)
        return 4
    except SoftaugError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
