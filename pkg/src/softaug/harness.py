"""Experiment harness: config files, the end-to-end pipeline, sweeps.

A run is pinned by (config, master seed). The master seed expands into
per-phase sub-seeds through `derive_seed`, so phases stay decoupled:
changing the GAN iteration count never changes the data split. All CSV
outputs print floats with %.17g, which makes byte-identical reruns a
testable contract; wall-clock lives only in manifest.json.
"""
from __future__ import annotations

import configparser
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .active import AcquisitionRecord, LabelBudget, run_active_selection
from .data import (NormalizationSpec, SplitSpec, TabularDataset,
                   apply_normalizer, concat, fit_normalizer, invert_normalizer,
                   load_csv, save_csv, split, synth_make)
from .errors import BudgetError, ConfigError, SoftaugError
from .quality import BatchQuality, KernelSpec, select_best_batch
from .regress import Metrics, RegressorSpec, evaluate, fit
from .rgan import GanConfig, RganModel, TrainTrace, generate, load_checkpoint, save_checkpoint, train
from .rng import SeededRng, derive_seed

# --------------------------------------------------------------- the config

@dataclass(frozen=True)
class ExperimentConfig:
    # dataset
    source: str = "synthetic"           # synthetic | csv
    dataset_name: str = "sinusoid-2d"
    dataset_n: int = 1000
    noise_sd: float = 0.0
    csv_path: str = ""
    label_column: str = "y"
    # split
    test_count: int = 200
    train_count: int = 50
    # active selection
    active_enabled: bool = True
    initial_count: int = 0              # 0 = pick by silhouette
    # gan
    gan: GanConfig = field(default_factory=GanConfig)
    # quality
    candidate_batches: int = 5
    generated_count: int = 500
    bandwidth: str = "median"           # "median" or a float literal
    ds_folds: int = 5
    select_best: bool = True
    # downstream
    models: tuple[str, ...] = ("kernel-ridge", "mlp")
    mlp_epochs: int = 500
    mlp_learning_rate: float = 1e-3
    mlp_hidden: tuple[int, ...] = (32, 16)
    ridge: float = 1e-3
    metrics_denormalized: bool = False
    # run
    seed: int = 0
    out_dir: str = ""
    workers: int = 1

    def __post_init__(self):
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"dataset source must be synthetic or csv, got {self.source!r}")
        if self.source == "csv" and not self.csv_path:
            raise ConfigError("csv source needs dataset.path")
        for name in ("test_count", "train_count", "candidate_batches", "ds_folds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.generated_count < 0:
            raise ConfigError("generated_count must be >= 0")
        if self.initial_count < 0:
            raise ConfigError("initial_count must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for m in self.models:
            if m not in ("kernel-ridge", "mlp"):
                raise ConfigError(f"unknown downstream model {m!r}")
        if self.bandwidth != "median":
            try:
                if float(self.bandwidth) <= 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(
                    f"bandwidth must be 'median' or a positive number, got {self.bandwidth!r}")

    def kernel_spec(self) -> KernelSpec:
        bw = "median" if self.bandwidth == "median" else float(self.bandwidth)
        return KernelSpec(bandwidth=bw)


def _bool(text: str, where: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def _int(text: str, where: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {text!r}") from None


def _float(text: str, where: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {text!r}") from None


def _int_tuple(text: str, where: str) -> tuple[int, ...]:
    items = [t for t in (p.strip() for p in text.split(",")) if t]
    if not items:
        raise ConfigError(f"{where}: expected a comma-separated list of integers")
    return tuple(_int(t, where) for t in items)


def _str_tuple(text: str, where: str) -> tuple[str, ...]:
    items = [t for t in (p.strip() for p in text.split(",")) if t]
    if not items:
        raise ConfigError(f"{where}: expected a comma-separated list")
    return tuple(items)


# section -> key -> (parser, config attribute path)
_SCHEMA = {
    "dataset": {
        "source": (str.strip, "source"),
        "name": (str.strip, "dataset_name"),
        "n": (_int, "dataset_n"),
        "noise_sd": (_float, "noise_sd"),
        "path": (str.strip, "csv_path"),
        "label_column": (str.strip, "label_column"),
    },
    "split": {
        "test_count": (_int, "test_count"),
        "train_count": (_int, "train_count"),
    },
    "active": {
        "enabled": (_bool, "active_enabled"),
        "initial_count": (_int, "initial_count"),
    },
    "gan": {
        "noise_dim": (_int, "gan.noise_dim"),
        "n_critic": (_int, "gan.n_critic"),
        "gp_weight": (_float, "gan.gp_weight"),
        "gen_reg_weight": (_float, "gan.gen_reg_weight"),
        "critic_reg_weight": (_float, "gan.critic_reg_weight"),
        "learning_rate": (_float, "gan.learning_rate"),
        "batch_size": (_int, "gan.batch_size"),
        "iterations": (_int, "gan.iterations"),
        "pretrain_epochs": (_int, "gan.pretrain_epochs"),
        "pretrain_lr": (_float, "gan.pretrain_lr"),
        "share_trunk": (_bool, "gan.share_trunk"),
        "generator_regression": (_bool, "gan.generator_regression"),
        "critic_regression": (_bool, "gan.critic_regression"),
        "trunk_width": (_int, "gan.trunk_width"),
        "gen_hidden": (_int_tuple, "gan.gen_hidden"),
        "critic_hidden": (_int, "gan.critic_hidden"),
        "regressor_hidden": (_int, "gan.regressor_hidden"),
        "adam_beta1": (_float, "gan.adam_beta1"),
        "adam_beta2": (_float, "gan.adam_beta2"),
        "adam_epsilon": (_float, "gan.adam_epsilon"),
        "slope": (_float, "gan.slope"),
    },
    "quality": {
        "candidate_batches": (_int, "candidate_batches"),
        "generated_count": (_int, "generated_count"),
        "bandwidth": (str.strip, "bandwidth"),
        "ds_folds": (_int, "ds_folds"),
        "select_best": (_bool, "select_best"),
    },
    "downstream": {
        "models": (_str_tuple, "models"),
        "mlp_epochs": (_int, "mlp_epochs"),
        "mlp_learning_rate": (_float, "mlp_learning_rate"),
        "mlp_hidden": (_int_tuple, "mlp_hidden"),
        "ridge": (_float, "ridge"),
        "metrics_denormalized": (_bool, "metrics_denormalized"),
    },
    "run": {
        "seed": (_int, "seed"),
        "out_dir": (str.strip, "out_dir"),
        "workers": (_int, "workers"),
    },
}


def parse_config(path_or_text) -> ExperimentConfig:
    """Read an INI-style config; every key must be known (fail-fast)."""
    parser = configparser.ConfigParser(interpolation=None)
    text = path_or_text if "\n" in str(path_or_text) else Path(path_or_text).read_text()
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config: {err}") from None
    plain: dict[str, object] = {}
    gan_kwargs: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            conv, target = _SCHEMA[section][key]
            where = f"[{section}] {key}"
            if raw.strip() == "" and target == "gan.pretrain_lr":
                value = None
            else:
                value = conv(raw, where) if conv in (_bool, _int, _float, _int_tuple, _str_tuple) else conv(raw)
            if target.startswith("gan."):
                gan_kwargs[target[4:]] = value
            else:
                plain[target] = value
    try:
        gan = GanConfig(**gan_kwargs)
        return ExperimentConfig(gan=gan, **plain)
    except TypeError as err:
        raise ConfigError(str(err)) from None


def config_to_ini(cfg: ExperimentConfig) -> str:
    """Serialize a config so parse_config reads it back equivalently."""
    def fmt(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, tuple):
            return ",".join(str(x) for x in v)
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.17g}"
        return str(v)

    out = io.StringIO()
    for section, keys in _SCHEMA.items():
        out.write(f"[{section}]\n")
        for key, (_, target) in keys.items():
            if target.startswith("gan."):
                value = getattr(cfg.gan, target[4:])
            else:
                value = getattr(cfg, target)
            out.write(f"{key} = {fmt(value)}\n")
        out.write("\n")
    return out.getvalue()


# ------------------------------------------------------------------ outputs

def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header: list[str], rows: list[tuple], comments: list[str] = ()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")


def trace_rows(trace: TrainTrace) -> list[tuple]:
    return trace.numeric_rows()


TRACE_HEADER = ["iteration", "critic_loss", "generator_loss",
                "regression_loss", "wasserstein"]
QUALITY_HEADER = ["batch", "mmd2", "ds", "mmd_rank", "ds_rank", "combined", "selected"]
ACQ_HEADER = ["step", "index", "d_x", "d_y", "r", "score"]
QUALITY_COMMENT = "mmd2 and ds are lower-is-better; ds is a cross-fit MAE surrogate"


def quality_rows(report: list[BatchQuality]) -> list[tuple]:
    return [(b.batch, b.mmd2, b.ds, b.mmd_rank, b.ds_rank, b.combined, b.selected)
            for b in report]


def acquisition_rows(records: list[AcquisitionRecord]) -> list[tuple]:
    return [(r.step, r.index, r.d_x, r.d_y, r.r, r.score) for r in records]


@dataclass
class RunManifest:
    seed: int
    seed_tag: str
    config_ini: str
    phases: list[dict] = field(default_factory=list)
    dataset: dict = field(default_factory=dict)
    selection: dict = field(default_factory=dict)
    gan: dict = field(default_factory=dict)
    quality: dict = field(default_factory=dict)
    report_header: list[str] = field(default_factory=list)
    report: list[list] = field(default_factory=list)
    error: dict | None = None
    toolkit_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default)


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON-serializable: {type(v)}")


def _write_manifest(manifest: RunManifest, out_dir: Path | None) -> None:
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(manifest.to_json())


# ----------------------------------------------------------------- pipeline

REPORT_HEADER = ["model", "condition", "mae", "rmse"]


@dataclass
class PipelineResult:
    manifest: RunManifest
    model: RganModel
    trace: TrainTrace
    train_set: TabularDataset          # normalized
    test_set: TabularDataset           # normalized
    normalizer: NormalizationSpec
    selected_batch: TabularDataset     # normalized
    quality_report: list[BatchQuality]
    metrics: dict[tuple[str, str], Metrics]


def _load_dataset(cfg: ExperimentConfig) -> TabularDataset:
    if cfg.source == "csv":
        return load_csv(cfg.csv_path, cfg.label_column)
    return synth_make(cfg.dataset_name, cfg.dataset_n, cfg.noise_sd,
                      derive_seed(cfg.seed, "data"))


def _select_train(cfg: ExperimentConfig, pool: TabularDataset):
    """Training rows from the pool: greedy acquisition or a random subset."""
    if cfg.train_count > pool.n_rows:
        raise BudgetError(
            f"train_count {cfg.train_count} exceeds pool of {pool.n_rows}")
    if cfg.active_enabled:
        budget = LabelBudget(initial=cfg.initial_count or None, total=cfg.train_count)
        spec = RegressorSpec(kind="kernel-ridge", ridge=cfg.ridge)
        return run_active_selection(pool, lambda i: float(pool.labels[i]), budget,
                                    derive_seed(cfg.seed, "active"), spec)
    rng = SeededRng(derive_seed(cfg.seed, "subset"))
    idx = rng.permutation(pool.n_rows)[:cfg.train_count]
    return pool.take(idx), []


def _downstream_spec(cfg: ExperimentConfig, kind: str) -> RegressorSpec:
    if kind == "kernel-ridge":
        return RegressorSpec(kind=kind, ridge=cfg.ridge)
    return RegressorSpec(kind="mlp", hidden=cfg.mlp_hidden, epochs=cfg.mlp_epochs,
                         learning_rate=cfg.mlp_learning_rate,
                         seed=derive_seed(cfg.seed, "downstream:mlp"))


def run_pipeline(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                 seed_tag: str = "") -> PipelineResult:
    """Data -> selection -> GAN -> generation -> quality -> downstream.

    Writes manifest.json, config.echo.ini, trace.csv, quality.csv,
    report.csv, acquisition.csv (when selecting actively), generated.csv
    (selected batch, de-normalized) and checkpoint.bin under out_dir. On a
    phase failure the manifest is still persisted, with the error recorded
    and all completed phases' timings.
    """
    out = Path(out_dir) if out_dir else None
    manifest = RunManifest(seed=cfg.seed, seed_tag=seed_tag,
                           config_ini=config_to_ini(cfg))
    gan_tag = f"gan:{seed_tag}" if seed_tag else "gan"

    def phase(name):
        return _PhaseTimer(manifest, name)

    try:
        with phase("data"):
            full = _load_dataset(cfg)
            manifest.dataset = {"rows": full.n_rows, "features": full.n_features,
                                "columns": list(full.columns)}
            pool_count = full.n_rows - cfg.test_count
            if pool_count < cfg.train_count:
                raise BudgetError(
                    f"dataset of {full.n_rows} rows leaves a pool of {pool_count} "
                    f"for a train budget of {cfg.train_count}")
            pool, test = split(full, SplitSpec(pool_count, cfg.test_count,
                                               derive_seed(cfg.seed, "split")))
        with phase("selection"):
            train_raw, acquisitions = _select_train(cfg, pool)
            manifest.selection = {
                "method": "active" if cfg.active_enabled else "random",
                "acquisitions": [asdict(r) for r in acquisitions],
            }
            if out and acquisitions:
                write_csv(out / "acquisition.csv", ACQ_HEADER,
                          acquisition_rows(acquisitions))
        with phase("normalize"):
            normalizer = fit_normalizer(train_raw)
            train_n = apply_normalizer(train_raw, normalizer)
            test_n = apply_normalizer(test, normalizer)
        with phase("gan"):
            model, trace = train(train_n, cfg.gan, derive_seed(cfg.seed, gan_tag))
            manifest.gan = {
                "iterations": cfg.gan.iterations,
                "pretrain_final_mse": trace.pretrain_mse[-1] if trace.pretrain_mse else None,
                "final_wasserstein": trace.wasserstein[-1] if trace.wasserstein else None,
            }
            if out:
                write_csv(out / "trace.csv", TRACE_HEADER, trace_rows(trace))
                save_checkpoint(model, out / "checkpoint.bin",
                                extra={"normalizer": normalizer.to_dict(),
                                       "seed": cfg.seed, "seed_tag": seed_tag})
        with phase("generate"):
            batches = [generate(model, cfg.generated_count,
                                derive_seed(cfg.seed, f"gen:{i}"))
                       for i in range(cfg.candidate_batches)]
        with phase("quality"):
            if cfg.generated_count == 0:
                best, q_report = 0, []
            elif cfg.select_best:
                best, q_report = select_best_batch(
                    train_n, batches, cfg.kernel_spec(), cfg.ds_folds,
                    seed=derive_seed(cfg.seed, "quality"))
            else:
                best, q_report = 0, []
            selected = batches[best]
            manifest.quality = {"selected_batch": best,
                                "batches": [asdict(b) for b in q_report]}
            if out and q_report:
                write_csv(out / "quality.csv", QUALITY_HEADER,
                          quality_rows(q_report), comments=[QUALITY_COMMENT])
            if out and selected.n_rows:
                save_csv(invert_normalizer(selected, normalizer), out / "generated.csv")
        with phase("downstream"):
            augmented = concat(train_n, selected)
            metrics: dict[tuple[str, str], Metrics] = {}
            rows = []
            for kind in cfg.models:
                spec = _downstream_spec(cfg, kind)
                for condition, ds in (("real-only", train_n), ("augmented", augmented)):
                    m = evaluate(fit(spec, ds), test_n)
                    if cfg.metrics_denormalized:
                        scale_width = normalizer.label_hi - normalizer.label_lo
                        m = Metrics(m.mae * scale_width, m.rmse * scale_width)
                    metrics[(kind, condition)] = m
                    rows.append((kind, condition, m.mae, m.rmse))
            manifest.report_header = list(REPORT_HEADER)
            manifest.report = [list(r) for r in rows]
            if out:
                write_csv(out / "report.csv", REPORT_HEADER, rows)
    except Exception as err:
        manifest.error = {"phase": manifest.phases[-1]["name"] if manifest.phases else None,
                          "type": type(err).__name__, "message": str(err)}
        _write_manifest(manifest, out)
        raise
    if out:
        (out / "config.echo.ini").write_text(manifest.config_ini)
    _write_manifest(manifest, out)
    return PipelineResult(manifest, model, trace, train_n, test_n, normalizer,
                          selected, q_report, metrics)


class _PhaseTimer:
    def __init__(self, manifest: RunManifest, name: str):
        self.manifest = manifest
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        self.manifest.phases.append({"name": self.name, "seconds": None})
        return self

    def __exit__(self, exc_type, exc, tb):
        self.manifest.phases[-1]["seconds"] = time.perf_counter() - self.t0
        return False


# -------------------------------------------------------------- multi - arm

ABLATION_VARIANTS = (
    ("full", {}),
    ("no-shared-trunk", {"share_trunk": False}),
    ("no-dual-eval", {"active_enabled": False, "select_best": False}),
    ("no-train-select", {"active_enabled": False}),
    ("no-batch-select", {"select_best": False}),
)

ABLATE_HEADER = ["variant", "model", "mae", "rmse", "status"]
AMOUNT_HEADER = ["amount", "model", "mae", "rmse", "status"]
HYPER_HEADER = ["parameter", "value", "model", "mae", "rmse", "status"]
TIME_HEADER = ["variant", "seconds", "ratio"]

SWEEP_AMOUNTS = (100, 200, 300, 400, 500, 1000)
SWEEP_VALUES = (0.01, 0.1, 1.0, 10.0, 100.0)
SWEEP_PARAMETERS = ("gen_reg_weight", "gp_weight", "critic_reg_weight")


def _variant_config(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    gan_over = {k: v for k, v in overrides.items() if hasattr(cfg.gan, k)}
    top_over = {k: v for k, v in overrides.items() if not hasattr(cfg.gan, k)}
    gan = replace(cfg.gan, **gan_over) if gan_over else cfg.gan
    return replace(cfg, gan=gan, **top_over)


def _run_arms(jobs, workers: int):
    """Run (label, callable) jobs, isolating failures per arm."""
    results = {}

    def run_one(label, fn):
        try:
            return label, ("ok", fn())
        except SoftaugError as err:
            return label, (f"failed:{type(err).__name__}", err)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for label, outcome in pool.map(lambda j: run_one(*j), jobs):
                results[label] = outcome
    else:
        for label, fn in jobs:
            results[label] = run_one(label, fn)[1]
    return results


def run_ablation(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> list[tuple]:
    """One pipeline per variant; arms share the split but not GAN noise."""
    out = Path(out_dir) if out_dir else None
    jobs = []
    for label, overrides in ABLATION_VARIANTS:
        arm_cfg = _variant_config(cfg, overrides)
        arm_out = out / label if out else None
        jobs.append((label, lambda c=arm_cfg, o=arm_out, t=label: run_pipeline(c, o, seed_tag=t)))
    results = _run_arms(jobs, cfg.workers)
    rows = []
    for label, _ in ABLATION_VARIANTS:
        status, payload = results[label]
        if status == "ok":
            for kind in cfg.models:
                m = payload.metrics[(kind, "augmented")]
                rows.append((label, kind, m.mae, m.rmse, "ok"))
        else:
            rows.append((label, "-", float("nan"), float("nan"), status))
    if out:
        write_csv(out / "report.csv", ABLATE_HEADER, rows)
    return rows


def sweep_amount(cfg: ExperimentConfig, amounts=SWEEP_AMOUNTS,
                 out_dir: str | Path | None = None) -> list[tuple]:
    """Reuse one trained GAN across generated-batch sizes.

    Generation seeds do not depend on the amount, so a larger batch extends
    a smaller one row-for-row (prefix sharing). Amount 0 reproduces the
    real-only baseline exactly.
    """
    out = Path(out_dir) if out_dir else None
    base = run_pipeline(cfg, out / "base" if out else None)
    rows = []
    for amount in amounts:
        try:
            rows.extend(_amount_rows(cfg, base, int(amount)))
        except SoftaugError as err:
            rows.append((int(amount), "-", float("nan"), float("nan"),
                         f"failed:{type(err).__name__}"))
    if out:
        write_csv(out / "report.csv", AMOUNT_HEADER, rows)
    return rows


def _amount_rows(cfg: ExperimentConfig, base: PipelineResult, amount: int) -> list[tuple]:
    if amount == 0:
        selected = TabularDataset(np.zeros((0, base.train_set.n_features)),
                                  np.zeros(0), base.train_set.columns,
                                  base.train_set.label_name, "generated")
    else:
        batches = [generate(base.model, amount, derive_seed(cfg.seed, f"gen:{i}"))
                   for i in range(cfg.candidate_batches)]
        if cfg.select_best:
            best, _ = select_best_batch(base.train_set, batches, cfg.kernel_spec(),
                                        cfg.ds_folds,
                                        seed=derive_seed(cfg.seed, "quality"))
        else:
            best = 0
        selected = batches[best]
    augmented = concat(base.train_set, selected)
    rows = []
    for kind in cfg.models:
        spec = _downstream_spec(cfg, kind)
        m = evaluate(fit(spec, augmented), base.test_set)
        rows.append((amount, kind, m.mae, m.rmse, "ok"))
    return rows


def sweep_hyper(cfg: ExperimentConfig, parameters=SWEEP_PARAMETERS,
                values=SWEEP_VALUES, out_dir: str | Path | None = None) -> list[tuple]:
    """Vary one loss weight at a time with the others pinned at 1."""
    out = Path(out_dir) if out_dir else None
    base_gan = replace(cfg.gan, gen_reg_weight=1.0, gp_weight=1.0, critic_reg_weight=1.0)
    jobs = []
    order = []
    for pname in parameters:
        if pname not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown sweep parameter {pname!r}")
        for value in values:
            label = f"{pname}={value:g}"
            arm_cfg = replace(cfg, gan=replace(base_gan, **{pname: float(value)}))
            arm_out = out / label.replace("=", "_") if out else None
            jobs.append((label, lambda c=arm_cfg, o=arm_out: run_pipeline(c, o)))
            order.append((pname, float(value), label))
    results = _run_arms(jobs, cfg.workers)
    rows = []
    for pname, value, label in order:
        status, payload = results[label]
        if status == "ok":
            for kind in cfg.models:
                m = payload.metrics[(kind, "augmented")]
                rows.append((pname, value, kind, m.mae, m.rmse, "ok"))
        else:
            rows.append((pname, value, "-", float("nan"), float("nan"), status))
    if out:
        write_csv(out / "report.csv", HYPER_HEADER, rows)
    return rows


def time_variants(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> list[tuple]:
    """Wall-clock of full training vs the WGAN-GP baseline, same data/seed."""
    out = Path(out_dir) if out_dir else None
    full = _load_dataset(cfg)
    pool_count = full.n_rows - cfg.test_count
    pool, _ = split(full, SplitSpec(pool_count, cfg.test_count,
                                    derive_seed(cfg.seed, "split")))
    train_raw, _ = _select_train(cfg, pool)
    normalizer = fit_normalizer(train_raw)
    train_n = apply_normalizer(train_raw, normalizer)
    timings = {}
    for label, gan_cfg in (("wgan-gp", cfg.gan.wgan_gp_mode()), ("full", cfg.gan)):
        t0 = time.perf_counter()
        train(train_n, gan_cfg, derive_seed(cfg.seed, "gan"))
        timings[label] = time.perf_counter() - t0
    ratio = timings["full"] / timings["wgan-gp"] if timings["wgan-gp"] > 0 else float("inf")
    rows = [("wgan-gp", timings["wgan-gp"], 1.0), ("full", timings["full"], ratio)]
    if out:
        write_csv(out / "report.csv", TIME_HEADER, rows)
    return rows
