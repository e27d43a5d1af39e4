"""Command-line pipeline: vocab build, pairs extract, train, eval."""

from __future__ import annotations

import sys
import warnings

import click

from embda import corpus as corpus_mod
from embda import evaluate as eval_mod
from embda import model as model_mod
from embda import pairs as pairs_mod
from embda import trainer as trainer_mod


def _echo_config(name: str, items: dict, quiet: bool) -> None:
    """TSV config echo to stderr for experiment provenance."""
    if quiet:
        return
    for key, value in items.items():
        click.echo(f"#{name}\t{key}\t{value}", err=True)


def _write_or_stdout(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
@click.option("--seed", type=int, default=None, envvar="EMBDA_SEED",
              help="Global random seed (env fallback EMBDA_SEED; default 1).")
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker threads for training.")
@click.option("--quiet", is_flag=True, help="Suppress config echo and progress output.")
@click.pass_context
def main(ctx, seed, threads, quiet):
    """Domain-aware word embedding toolkit (sg, cbow, sg-di, cbow-da)."""
    ctx.obj = {"seed": seed if seed is not None else 1, "threads": threads, "quiet": quiet}


@main.group()
def vocab():
    """Vocabulary commands."""


@vocab.command("build")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Source corpus (UTF-8, one sentence per line).")
@click.option("--min-count", type=click.IntRange(min=1), default=5, show_default=True,
              help="Minimum token count to keep a word.")
@click.option("--output", required=True, type=click.Path(dir_okay=False),
              help="Vocabulary TSV to write.")
@click.option("--lowercase/--no-lowercase", default=True, show_default=True)
@click.pass_obj
def vocab_build(obj, input_path, min_count, output, lowercase):
    """Build the vocabulary file from the source corpus."""
    _echo_config("vocab", {"input": input_path, "min_count": min_count,
                           "output": output, "lowercase": lowercase}, obj["quiet"])
    try:
        voc = corpus_mod.build_vocab(
            corpus_mod.read_sentences(input_path, lowercase=lowercase), min_count)
    except (corpus_mod.EmptyCorpusError, corpus_mod.NoSurvivingTokensError) as exc:
        raise click.UsageError(f"{input_path}: {exc}")
    voc.save(output)
    if not obj["quiet"]:
        click.echo(f"#vocab\tsize\t{len(voc)}", err=True)
        click.echo(f"#vocab\ttotal_tokens\t{voc.total_tokens}", err=True)


@main.group()
def pairs():
    """Target-domain pair table commands."""


@pairs.command("extract")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Target-domain corpus.")
@click.option("--vocab", "vocab_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--window", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--output", required=True, type=click.Path(dir_okay=False))
@click.option("--lowercase/--no-lowercase", default=True, show_default=True)
@click.pass_obj
def pairs_extract(obj, input_path, vocab_path, window, output, lowercase):
    """Extract the co-occurrence pair table from the target corpus."""
    _echo_config("pairs", {"input": input_path, "vocab": vocab_path,
                           "window": window, "output": output}, obj["quiet"])
    voc = corpus_mod.Vocabulary.load(vocab_path)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table, stats = pairs_mod.extract_pairs(
            corpus_mod.read_sentences(input_path, lowercase=lowercase), voc, window)
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    table.save(output, voc)
    if not obj["quiet"]:
        click.echo(f"#pairs\tpair_count\t{stats.pair_count}", err=True)
        click.echo(f"#pairs\ttarget_tokens\t{stats.target_tokens}", err=True)
        click.echo(f"#pairs\tin_vocab_fraction\t{stats.coverage:.4f}", err=True)


@main.command("train")
@click.option("--mode", type=click.Choice(model_mod.MODES), default="sg", show_default=True)
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Source corpus to train on.")
@click.option("--vocab", "vocab_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False),
              help="Pair table (required for sg-di / cbow-da).")
@click.option("--output", required=True, type=click.Path(dir_okay=False),
              help="Input-vector file to write.")
@click.option("--dim", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--window", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--negatives", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--epochs", type=click.IntRange(min=0), default=5, show_default=True)
@click.option("--lr", type=float, default=None,
              help="Initial learning rate [default: 0.025 sg-family, 0.05 cbow-family].")
@click.option("--min-lr", type=float, default=None,
              help="Floor of the linear decay [default: 1e-4 * lr].")
@click.option("--indicator-weight", type=float, default=1.0, show_default=True,
              help="Weight of the sg-di indicator channel.")
@click.option("--ns-power", type=float, default=0.75, show_default=True,
              help="Negative-sampling distribution exponent.")
@click.option("--dynamic-window/--no-dynamic-window", default=False, show_default=True,
              help="Shrink the window radius uniformly per position.")
@click.option("--subsample", type=float, default=0.0, show_default=True,
              help="Frequent-word subsampling threshold (0 disables).")
@click.option("--sigmoid-table/--exact-sigmoid", default=False, show_default=True,
              help="Use a 1000-bin sigmoid lookup table instead of exact evaluation.")
@click.option("--lowercase/--no-lowercase", default=True, show_default=True)
@click.option("--save-output-vecs", type=click.Path(dir_okay=False),
              help="Also persist the output matrix.")
@click.option("--save-indicator", type=click.Path(dir_okay=False),
              help="Also persist the indicator matrix (sg-di only).")
@click.option("--full-precision", is_flag=True,
              help="Write vectors with 9 significant digits (exact float32 round trip).")
@click.pass_obj
def train_cmd(obj, mode, corpus_path, vocab_path, pairs_path, output, dim, window,
              negatives, epochs, lr, min_lr, indicator_weight, ns_power,
              dynamic_window, subsample, sigmoid_table, lowercase,
              save_output_vecs, save_indicator, full_precision):
    """Train embeddings in one of the four modes."""
    if mode in ("sg-di", "cbow-da") and not pairs_path:
        raise click.UsageError(f"mode {mode} requires --pairs")
    if mode in ("sg", "cbow") and pairs_path:
        click.echo(f"warning: --pairs is ignored in mode {mode}", err=True)
        pairs_path = None
    if save_indicator and mode != "sg-di":
        raise click.UsageError("--save-indicator only applies to mode sg-di")

    config = trainer_mod.TrainConfig(
        mode=mode, dim=dim, window=window, negatives=negatives, epochs=epochs,
        lr=lr, min_lr=min_lr, indicator_weight=indicator_weight,
        workers=obj["threads"], seed=obj["seed"], ns_power=ns_power,
        dynamic_window=dynamic_window, subsample=subsample,
        lowercase=lowercase, sigmoid_table=sigmoid_table,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    lr0, min_lr0 = config.resolved_lr()
    _echo_config("train", {
        "mode": mode, "corpus": corpus_path, "vocab": vocab_path,
        "pairs": pairs_path or "", "output": output, "dim": dim, "window": window,
        "negatives": negatives, "epochs": epochs, "lr": lr0, "min_lr": min_lr0,
        "indicator_weight": indicator_weight, "ns_power": ns_power,
        "dynamic_window": dynamic_window, "subsample": subsample,
        "sigmoid_table": sigmoid_table, "threads": obj["threads"], "seed": obj["seed"],
    }, obj["quiet"])

    voc = corpus_mod.Vocabulary.load(vocab_path)
    table = None
    if pairs_path:
        try:
            table = pairs_mod.PairTable.load(pairs_path, voc)
        except pairs_mod.PairTableMismatchError as exc:
            raise click.UsageError(str(exc))
    model = model_mod.init_model(voc, dim, mode, seed=obj["seed"])
    try:
        stats = trainer_mod.train(model, corpus_path, config, pair_table=table)
    except trainer_mod.TrainDivergedError as exc:
        raise click.ClickException(f"training diverged: {exc}")
    model_mod.save_vectors(model, "input", output, full_precision=full_precision)
    if save_output_vecs:
        model_mod.save_vectors(model, "output", save_output_vecs,
                               full_precision=full_precision)
    if save_indicator:
        model_mod.save_vectors(model, "indicator", save_indicator,
                               full_precision=full_precision)
    if not obj["quiet"]:
        click.echo(stats.to_tsv(), err=True, nl=False)


@main.group("eval")
def eval_group():
    """Analyses over trained vector files."""


@eval_group.command("shift")
@click.option("--source-vecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--adapted-vecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--source-corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target-corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False),
              help="Per-word TSV destination [default: stdout].")
@click.option("--bins", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--threshold", type=float, default=0.05, show_default=True,
              help="Dice threshold for the above/below mean-shift summary.")
@click.option("--lowercase/--no-lowercase", default=True, show_default=True)
def eval_shift(source_vecs, adapted_vecs, source_corpus, target_corpus, output,
               bins, threshold, lowercase):
    """Per-word embedding shift vs. Sorensen-Dice frequency, plus binned summary."""
    src = model_mod.load_vectors(source_vecs)
    adp = model_mod.load_vectors(adapted_vecs)
    common = [w for w in src.words if w in adp.id_of]
    freqs = pairs_mod.frequencies_from_files(common, source_corpus, target_corpus,
                                             lowercase=lowercase)
    try:
        report = eval_mod.shift_report(src, adp, freqs)
    except (eval_mod.NoCommonWordsError, ValueError) as exc:
        raise click.ClickException(str(exc))
    text = report.to_tsv()
    text += "#bin_lo\tbin_hi\tcount\tmean_shift\n"
    for lo, hi, count, mean in report.binned_summary(bins=bins):
        text += f"#{lo:.6g}\t{hi:.6g}\t{count}\t{mean:.6g}\n"
    above, below = report.threshold_summary(threshold)
    text += f"#threshold\t{threshold:.6g}\tmean_shift_above\t{above:.6g}\n"
    text += f"#threshold\t{threshold:.6g}\tmean_shift_below\t{below:.6g}\n"
    _write_or_stdout(text, output)


@eval_group.command("neighbors")
@click.option("--vecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--word", required=True)
@click.option("--k", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False))
def eval_neighbors(vecs, word, k, output):
    """Top-k nearest neighbors of a word by cosine similarity."""
    wv = model_mod.load_vectors(vecs)
    try:
        result = eval_mod.nearest_neighbors(wv, word, k)
    except (eval_mod.UnknownWordError, ValueError) as exc:
        raise click.UsageError(str(exc))
    text = "".join(f"{w}\t{sim:.6f}\n" for w, sim in result)
    _write_or_stdout(text, output)


@eval_group.command("cluster")
@click.option("--vecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--words", required=True,
              help="Comma-separated word list (e.g. spielberg,director,film,movie).")
def eval_cluster(vecs, words):
    """Mean pairwise cosine distance over a word set (cluster tightness)."""
    wv = model_mod.load_vectors(vecs)
    word_list = [w for w in words.split(",") if w]
    try:
        value = eval_mod.cluster_tightness(wv, word_list)
    except eval_mod.TooFewWordsError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"{value:.6f}")


@eval_group.command("pca")
@click.option("--vecs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--words", required=True, help="Comma-separated word list.")
@click.option("--output", type=click.Path(dir_okay=False))
def eval_pca(vecs, words, output):
    """Project selected words onto their top-2 principal components."""
    wv = model_mod.load_vectors(vecs)
    word_list = [w for w in words.split(",") if w]
    try:
        proj = eval_mod.pca_project(wv, word_list)
    except (eval_mod.TooFewWordsError, ValueError) as exc:
        raise click.UsageError(str(exc))
    _write_or_stdout(proj.to_tsv(), output)


if __name__ == "__main__":
    main()
