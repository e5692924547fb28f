"""fairgen subcommands."""

import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
import numpy as np

from src import __version__
from src.bias import analyze as analyze_bias
from src.bias import histogram_csv_text
from src.bias.plots import render_svg
from src.cgan import (
    GanHyper,
    TrainingMode,
    generate as generate_rows,
    init_gan,
    load_gan,
    save_gan,
    train,
    write_trace_csv,
)
from src.classifier import (
    ClassifierConfig,
    EvalResult,
    comparison_csv_text,
    comparison_table,
    load_classifier,
    save_classifier,
    sweep_hidden_units,
    train_classifier,
)
from src.cli.context import RunContext, parse_groups
from src.dataset import (
    AugmentationPlan,
    DatasetTable,
    augment as augment_table,
    augmentation_count,
    enumerate_groups,
    load_csv,
    load_schema,
    split as split_table,
)
from src.exceptions import IngestionError
from src.utils.artifacts import read_json

logger = logging.getLogger(__name__)

existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
output_file = click.Path(dir_okay=False, path_type=Path)

F = TypeVar("F", bound=Callable[..., Any])


def seed_option(f: F) -> F:
    return click.option(
        "--seed", type=click.IntRange(min=0), default=None, help="Run seed (FAIRGEN_SEED fallback)"
    )(f)


def schema_option(f: F) -> F:
    return click.option("--schema", type=existing_file, required=True, help="Schema JSON")(f)


def classifier_options(f: F) -> F:
    options = [
        click.option("--hidden-units", type=click.IntRange(min=1), default=300, show_default=True),
        click.option("--epochs", type=click.IntRange(min=0), default=20, show_default=True),
        click.option("--lr", type=click.FloatRange(min=0), default=0.01, show_default=True),
        click.option("--momentum", type=click.FloatRange(0, 1), default=0.9, show_default=True),
        click.option("--batch-size", type=click.IntRange(min=1), default=64, show_default=True),
        click.option("--patience", type=click.IntRange(min=1), default=10, show_default=True),
        click.option(
            "--exclude-sensitive", is_flag=True, help="Drop sensitive columns from the input"
        ),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _classifier_config(seed: int, **options: Any) -> ClassifierConfig:
    return ClassifierConfig(
        hidden_units=int(options["hidden_units"]),
        epochs=int(options["epochs"]),
        learning_rate=float(options["lr"]),
        momentum=float(options["momentum"]),
        batch_size=int(options["batch_size"]),
        patience=int(options["patience"]),
        exclude_sensitive=bool(options["exclude_sensitive"]),
        seed=seed,
    )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="fairgen")
def cli() -> None:
    """Detect data-driven bias and mitigate it with cGAN augmentation."""


# ============ Data preparation ============


@cli.command()
@click.option("--data", type=existing_file, required=True)
@schema_option
@click.option("--test-fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              default=0.2, show_default=True)
@click.option("--validation-fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              default=None, help="Also hold out this share for early stopping")
@click.option("--train-out", type=output_file, required=True)
@click.option("--test-out", type=output_file, required=True)
@click.option("--validation-out", type=output_file, help="Validation rows")
@seed_option
@click.pass_context
def split(ctx: click.Context, data: Path, schema: Path, test_fraction: float,
          validation_fraction: float | None, train_out: Path, test_out: Path,
          validation_out: Path | None, seed: int | None) -> None:
    """Label-stratified train/test (and optional validation) split."""
    run = RunContext.from_click(ctx, seed)
    if (validation_fraction is None) != (validation_out is None):
        raise click.BadParameter(
            "--validation-fraction and --validation-out go together", param_hint="--validation-out"
        )
    held_out = test_fraction + (validation_fraction or 0.0)
    if held_out >= 1:
        raise click.BadParameter(
            f"test and validation fractions leave no training rows ({held_out})",
            param_hint="--test-fraction",
        )
    table = load_csv(data, load_schema(schema))
    if validation_fraction is None:
        train_part, test_part = split_table(table, [1 - test_fraction, test_fraction], run.rng())
    else:
        fractions = [1 - held_out, validation_fraction, test_fraction]
        train_part, validation_part, test_part = split_table(table, fractions, run.rng())
        assert validation_out is not None
        run.write_table(validation_out, validation_part)
    run.write_table(train_out, train_part)
    run.write_table(test_out, test_part)


# ============ Bias analysis ============


@cli.command()
@click.option("--data", type=existing_file, required=True, help="Classifier training rows")
@schema_option
@click.option("--test", type=existing_file, help="Rows to analyze (defaults to --data)")
@click.option("--classifier", type=existing_file, help="Trained classifier (skips training)")
@click.option("--group", "groups", multiple=True, help="Group predicate, e.g. Gender=female")
@click.option("--gap-threshold", type=click.FloatRange(min=0), default=None)
@click.option("--bins", type=click.IntRange(min=1), default=None)
@click.option("--out", type=output_file, required=True)
@click.option("--histograms", type=output_file, help="Histogram CSV")
@click.option("--plot", type=output_file, help="Histogram SVG")
@classifier_options
@seed_option
@click.pass_context
def analyze(ctx: click.Context, data: Path, schema: Path, test: Path | None,
            classifier: Path | None, groups: tuple[str, ...], gap_threshold: float | None,
            bins: int | None, out: Path, histograms: Path | None, plot: Path | None,
            seed: int | None, **clf_options: Any) -> None:
    """Per-group prediction distributions, accuracies and targeted-group flags."""
    run = RunContext.from_click(ctx, seed)
    table_schema = load_schema(schema)
    table = load_csv(data, table_schema)
    if classifier is not None:
        clf = load_classifier(classifier, table_schema)
    else:
        clf = train_classifier(table, _classifier_config(run.seed, **clf_options))
    scored = load_csv(test, table_schema) if test is not None else table

    report = analyze_bias(
        clf,
        scored,
        parse_groups(groups, table_schema) or None,
        gap_threshold if gap_threshold is not None else run.settings.gap_threshold,
        bins if bins is not None else run.settings.histogram_bins,
    )
    run.write_report(out, report.to_dict())
    if histograms is not None:
        run.write_text(histograms, histogram_csv_text(report, run.settings.float_digits))
    if plot is not None:
        run.write_text(plot, render_svg(report))
    click.echo(f"flagged: {', '.join(str(g) for g in report.flagged) or 'none'}")


# ============ cGAN ============


@cli.command("train-gan")
@click.option("--data", type=existing_file, required=True)
@schema_option
@click.option("--target", "targets", multiple=True, required=True,
              help="Targeted population group (repeatable)")
@click.option("--mode", type=click.Choice([m.value for m in TrainingMode]),
              default=TrainingMode.PRIMAL_DUAL.value, show_default=True)
@click.option("--rounds", type=click.IntRange(min=0), default=2000, show_default=True)
@click.option("--n1", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--n2", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--k-steps", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--beta", type=click.FloatRange(min=0, min_open=True), default=0.1,
              show_default=True)
@click.option("--sigma", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Kernel bandwidth (median heuristic when omitted)")
@click.option("--noise-dim", type=click.IntRange(min=1), default=32, show_default=True)
@click.option("--hidden-units", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--gen-lr", type=click.FloatRange(min=0), default=2e-3, show_default=True)
@click.option("--dis-lr", type=click.FloatRange(min=0), default=2e-3, show_default=True)
@click.option("--temperature", type=click.FloatRange(min=0, min_open=True), default=0.5,
              show_default=True)
@click.option("--out", type=output_file, required=True, help="GAN checkpoint JSON")
@click.option("--trace", type=output_file, help="Per-round training trace CSV")
@seed_option
@click.pass_context
def train_gan(ctx: click.Context, data: Path, schema: Path, targets: tuple[str, ...], mode: str,
              rounds: int, n1: int, n2: int, k_steps: int, beta: float, sigma: float | None,
              noise_dim: int, hidden_units: int, gen_lr: float, dis_lr: float,
              temperature: float, out: Path, trace: Path | None, seed: int | None) -> None:
    """Train a conditional GAN on the targeted groups."""
    run = RunContext.from_click(ctx, seed)
    table_schema = load_schema(schema)
    table = load_csv(data, table_schema)
    hyper = GanHyper(
        n1=n1, n2=n2, k_steps=k_steps, beta=beta, sigma=sigma, epsilon_rounds=rounds,
        noise_dim=noise_dim, hidden_units=hidden_units, gen_lr=gen_lr, dis_lr=dis_lr,
        temperature=temperature,
    )
    tpgs = parse_groups(targets, table_schema)
    rng = run.rng()
    state = init_gan(table, tpgs, hyper, rng)
    state, rounds_trace = train(state, table, tpgs, rng, TrainingMode(mode))
    save_gan(out, state, run.meta)
    if trace is not None:
        run.attach_meta(write_trace_csv(rounds_trace, trace, run.settings.float_digits))


@cli.command()
@click.option("--gan", type=existing_file, required=True, help="GAN checkpoint JSON")
@schema_option
@click.option("--group", required=True, help="Group to synthesize")
@click.option("--count", type=click.IntRange(min=1), required=True)
@click.option("--out", type=output_file, required=True)
@seed_option
@click.pass_context
def generate(ctx: click.Context, gan: Path, schema: Path, group: str, count: int,
             out: Path, seed: int | None) -> None:
    """Sample synthetic rows for one targeted group."""
    run = RunContext.from_click(ctx, seed)
    table_schema = load_schema(schema)
    state = load_gan(gan, table_schema)
    [tpg] = parse_groups((group,), table_schema)
    run.write_table(out, generate_rows(state, tpg, count, run.rng()))


@cli.command()
@click.option("--data", type=existing_file, required=True)
@schema_option
@click.option("--group", "groups", multiple=True,
              help="Group per --fraction, in order (omitted: the whole table)")
@click.option("--fraction", "fractions", type=click.FloatRange(min=0), multiple=True,
              required=True)
@click.option("--synthetic", type=existing_file, help="Synthetic pool CSV")
@click.option("--gan", type=existing_file, help="Generate the pool from this GAN checkpoint")
@click.option("--out", type=output_file, required=True)
@seed_option
@click.pass_context
def augment(ctx: click.Context, data: Path, schema: Path, groups: tuple[str, ...],
            fractions: tuple[float, ...], synthetic: Path | None, gan: Path | None,
            out: Path, seed: int | None) -> None:
    """Append synthetic rows to the targeted groups."""
    run = RunContext.from_click(ctx, seed)
    if synthetic is not None and gan is not None:
        raise click.BadParameter("use either --synthetic or --gan", param_hint="--synthetic")
    table_schema = load_schema(schema)
    table = load_csv(data, table_schema)

    predicates = parse_groups(groups or ("*",), table_schema)
    if len(predicates) != len(fractions):
        raise click.BadParameter(
            f"{len(predicates)} group(s) but {len(fractions)} fraction(s)", param_hint="--fraction"
        )
    plan = AugmentationPlan.from_pairs(list(zip(predicates, fractions, strict=True)))

    pool: DatasetTable = table.take(np.array([], dtype=np.int64))
    if synthetic is not None:
        pool = load_csv(synthetic, table_schema)
    elif gan is not None:
        state = load_gan(gan, table_schema)
        rng = run.rng()
        parts = []
        for entry in plan.entries:
            needed = augmentation_count(entry.fraction, table.group_count(entry.group, True))
            if needed > 0:
                parts.append(generate_rows(state, entry.group, needed, rng))
        if parts:
            pool = parts[0].concat(*parts[1:])

    run.write_table(out, augment_table(table, pool, plan))


# ============ Classifier ============


@cli.command("train-clf")
@click.option("--data", type=existing_file, required=True)
@schema_option
@click.option("--validation", type=existing_file, help="Early-stopping rows")
@classifier_options
@click.option("--out", type=output_file, required=True, help="Classifier checkpoint JSON")
@seed_option
@click.pass_context
def train_clf(ctx: click.Context, data: Path, schema: Path, validation: Path | None,
              out: Path, seed: int | None, **clf_options: Any) -> None:
    """Train the downstream classifier."""
    run = RunContext.from_click(ctx, seed)
    table_schema = load_schema(schema)
    table = load_csv(data, table_schema)
    held_out = load_csv(validation, table_schema) if validation is not None else None
    clf = train_classifier(table, _classifier_config(run.seed, **clf_options), held_out)
    save_classifier(out, clf, run.meta)


@cli.command()
@click.option("--train", type=existing_file, required=True)
@click.option("--test", type=existing_file, required=True)
@schema_option
@click.option("--validation", type=existing_file)
@click.option("--repeats", type=click.IntRange(min=2), default=None)
@click.option("--sweep", "sweep_units", type=click.IntRange(min=1), multiple=True,
              help="Hidden-unit counts to evaluate (default: --hidden-units only)")
@click.option("--group", "groups", multiple=True, help="Groups for the per-group breakdown")
@click.option("--workers", type=click.IntRange(min=1), default=None)
@classifier_options
@click.option("--out", type=output_file, required=True)
@seed_option
@click.pass_context
def evaluate(ctx: click.Context, train: Path, test: Path, schema: Path, validation: Path | None,
             repeats: int | None, sweep_units: tuple[int, ...], groups: tuple[str, ...],
             workers: int | None, out: Path, seed: int | None, **clf_options: Any) -> None:
    """Repeated seeded training with 95% confidence intervals."""
    run = RunContext.from_click(ctx, seed)
    table_schema = load_schema(schema)
    train_table = load_csv(train, table_schema)
    test_table = load_csv(test, table_schema)
    held_out = load_csv(validation, table_schema) if validation is not None else None
    config = _classifier_config(run.seed, **clf_options)
    predicates = parse_groups(groups, table_schema) or enumerate_groups(table_schema)

    results = sweep_hidden_units(
        train_table,
        test_table,
        config,
        repeats or run.settings.repeats,
        sweep_units or (config.hidden_units,),
        predicates,
        held_out,
        workers or run.settings.workers,
    )
    run.write_report(out, {"results": [r.to_dict() for r in results]})
    for r in results:
        click.echo(
            f"{r.hidden_units} HUs: {100 * r.overall.mean:.2f} ± {100 * r.overall.half_width:.2f}"
        )


@cli.command()
@click.option("--evaluation", "evaluations", multiple=True, required=True,
              help="NAME=eval.json, one per table row")
@click.option("--group", help="Report this group's accuracy instead of the overall one")
@click.option("--out", type=output_file, required=True)
@seed_option
@click.pass_context
def report(ctx: click.Context, evaluations: tuple[str, ...], group: str | None, out: Path,
           seed: int | None) -> None:
    """Comparison table across evaluated configurations."""
    run = RunContext.from_click(ctx, seed)
    rows: dict[str, list[EvalResult]] = {}
    for item in evaluations:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise click.BadParameter(
                f"expected NAME=PATH, got {item!r}", param_hint="--evaluation"
            )
        if not Path(path).is_file():
            raise click.BadParameter(f"file {path!r} does not exist", param_hint="--evaluation")
        document = read_json(path)
        try:
            rows[name] = [EvalResult.from_dict(r) for r in document["results"]]
        except (KeyError, TypeError) as e:
            raise IngestionError(f"{path}: not an evaluation report ({e!r})") from e
    table = comparison_table(rows, group)
    run.write_text(out, comparison_csv_text(table))
    click.echo(table.to_string(index=False))
