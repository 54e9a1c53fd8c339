"""``s3e`` command line: build-groups, embed, eval-sts, bench.

The RNG seed can also be set through the ``S3E_SEED`` environment variable;
an explicit ``--seed`` takes precedence over it.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .baselines import BaselineEmbedder, BaselineKind
from .bench import DEFAULT_BLOCK, DEFAULT_TRIALS, run_bench
from .core import EmbedMode, S3EEmbedder
from .grouping import DEFAULT_MAX_ITER, DEFAULT_TOL, build_groups, load_model, save_model
from .sts_eval import load_sts, parse_k_sweep, score_pairs, sweep_k, evaluate
from .text import tokenize
from .vectors_io import PreprocessMode, load_unigram, load_vector_files
from .weighting import DEFAULT_EPSILON, WeightConfig

log = logging.getLogger("s3e")

SEED_ENV = "S3E_SEED"
BASELINE_CHOICES = ("avg", "sif", "sif_pc")


@dataclass
class RunConfig:
    subcommand: str
    options: dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def echo(self) -> dict[str, Any]:
        out = {"subcommand": self.subcommand, "version": __version__}
        for key, val in sorted(self.options.items()):
            if isinstance(val, Path):
                val = str(val)
            elif isinstance(val, (list, tuple)):
                val = [str(v) if isinstance(v, Path) else v for v in val]
            out[key] = val
        return out


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _add_tables(p: argparse.ArgumentParser, freq_required: bool = True) -> None:
    g = p.add_argument_group("word vectors")
    g.add_argument("--vectors", nargs="+", action="extend", required=True, type=Path, metavar="PATH",
                   help="word-vector text file(s); several files are concatenated over their shared vocabulary")
    g.add_argument("--freq", type=Path, required=freq_required, metavar="PATH",
                   help="unigram counts, one 'word count' per line")
    g.add_argument("--preprocess", choices=[m.value for m in PreprocessMode], default=None,
                   help="vector preprocessing (default: none, or the mode recorded in --model)")
    g.add_argument("--epsilon", type=_positive_float, default=None,
                   help=f"weight parameter (default {DEFAULT_EPSILON:g}, or the value recorded in --model)")


def _add_cluster(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("clustering")
    g.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    g.add_argument("--max-iter", type=_positive_int, default=DEFAULT_MAX_ITER)
    g.add_argument("--tol", type=_nonneg_float, default=DEFAULT_TOL)
    g.add_argument("--top-n-vocab", type=_positive_int, default=None,
                   help="cluster only the N most frequent words")


def _add_text(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-lowercase", action="store_true", help="keep token case")
    p.add_argument("--mode", choices=[m.value for m in EmbedMode], default=EmbedMode.COV_PLUS_MEAN.value,
                   help="cov_only or covariance plus weighted-mean vector (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s3e", description="S3E sentence embeddings from static word vectors")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("build-groups", help="cluster the vocabulary into K semantic groups")
    _add_tables(p)
    p.add_argument("-k", type=_positive_int, required=True, help="number of groups")
    _add_cluster(p)
    p.add_argument("--out", type=Path, required=True, help="model file to write (.s3e)")
    p.add_argument("--figure", type=Path, default=None, help="optional inertia-per-iteration plot")

    p = sub.add_parser("embed", help="embed sentences, one per line")
    _add_tables(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--input", default="-", help="UTF-8 text, one sentence per line ('-' = stdin)")
    p.add_argument("--output", default="-", help="destination ('-' = stdout)")
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_text(p)

    p = sub.add_parser("eval-sts", help="Pearson correlation of cosine scores with gold similarity")
    p.add_argument("--data", type=Path, required=True, help="STS TSV (STS-Benchmark layout or score/s1/s2)")
    _add_tables(p, freq_required=False)
    p.add_argument("--model", type=Path, default=None, help="evaluate this S3E model")
    p.add_argument("--baseline", choices=BASELINE_CHOICES, default=None, help="evaluate an averaging baseline")
    p.add_argument("--k-sweep", default=None, metavar="START:STOP:STEP",
                   help="build and evaluate one model per K, e.g. 5:60:5")
    _add_cluster(p)
    _add_text(p)
    p.add_argument("--report", type=Path, required=True, help="JSON report path")
    p.add_argument("--figure", type=Path, default=None, help="figure path (default: report path with .png)")
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("bench", help="time batch-size-1 inference")
    p.add_argument("--data", type=Path, required=True,
                   help="sentences, one per line (.tsv/.csv files are read as STS pairs)")
    _add_tables(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    p.add_argument("--block", type=_positive_int, default=DEFAULT_BLOCK, help="sentences per timed block")
    _add_text(p)
    p.add_argument("--report", type=Path, required=True)
    p.add_argument("--figure", type=Path, default=None)
    p.add_argument("--no-figure", action="store_true")
    return parser


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    opts = vars(ns)
    cmd = opts.pop("subcommand")
    sub_parser = parser._subparsers._group_actions[0].choices[cmd]  # for subcommand-scoped errors

    if "seed" in opts:
        if opts["seed"] is None:
            env = os.environ.get(SEED_ENV)
            try:
                opts["seed"] = int(env) if env not in (None, "") else 0
            except ValueError:
                sub_parser.error(f"${SEED_ENV} must be an integer, got {env!r}")
    if cmd == "build-groups":
        opts["epsilon"] = opts["epsilon"] if opts["epsilon"] is not None else DEFAULT_EPSILON
        opts["preprocess"] = opts["preprocess"] or PreprocessMode.NONE.value
    if cmd == "eval-sts":
        chosen = [f for f in ("model", "baseline", "k_sweep") if opts[f] is not None]
        if len(chosen) > 1:
            flags = " and ".join("--" + f.replace("_", "-") for f in chosen)
            sub_parser.error(f"{flags} are mutually exclusive")
        if not chosen:
            sub_parser.error("one of --model, --baseline or --k-sweep is required")
        if opts["freq"] is None and opts["baseline"] != "avg":
            sub_parser.error("--freq is required unless --baseline avg")
        if opts["k_sweep"] is not None:
            try:
                opts["k_values"] = parse_k_sweep(opts["k_sweep"])
            except ValueError as exc:
                sub_parser.error(f"--k-sweep: {exc}")
            opts["epsilon"] = opts["epsilon"] if opts["epsilon"] is not None else DEFAULT_EPSILON
            opts["preprocess"] = opts["preprocess"] or PreprocessMode.NONE.value
        elif opts["baseline"] is not None:
            opts["epsilon"] = opts["epsilon"] if opts["epsilon"] is not None else DEFAULT_EPSILON
            opts["preprocess"] = opts["preprocess"] or PreprocessMode.NONE.value
    return RunConfig(cmd, opts)


# ---------------------------------------------------------------------------


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_tables(cfg: RunConfig, preprocess: str):
    t0 = time.perf_counter()
    vectors = load_vector_files(cfg.vectors, preprocess)
    unigram = load_unigram(cfg.freq) if cfg.freq is not None else None
    log.info("loaded %d word vectors (d=%d, preprocess=%s)%s in %.2fs", len(vectors), vectors.dim, preprocess,
             f" and {len(unigram)} frequency entries" if unigram is not None else "", time.perf_counter() - t0)
    return vectors, unigram


def _model_and_tables(cfg: RunConfig):
    model = load_model(cfg.model)
    if cfg.epsilon is not None and cfg.epsilon != model.epsilon:
        raise ValueError(f"--epsilon {cfg.epsilon:g} conflicts with the model's epsilon {model.epsilon:g}")
    if cfg.preprocess is not None and cfg.preprocess != model.preprocess_mode.value:
        raise ValueError(f"--preprocess {cfg.preprocess} conflicts with the model's {model.preprocess_mode.value}")
    vectors, unigram = _load_tables(cfg, model.preprocess_mode.value)
    if vectors.dim != model.dim:
        raise ValueError(f"vectors have d={vectors.dim} but the model was built with d={model.dim}")
    log.info("model: k=%d, %d words, epsilon=%g", model.k, len(model.words), model.epsilon)
    return model, vectors, unigram


def _log_oov(sentences, vectors) -> None:
    n = sum(len(s) for s in sentences)
    hit = sum(t in vectors.index for s in sentences for t in s)
    if n:
        log.info("%d sentences, %d tokens, OOV rate %.2f%%", len(sentences), n, 100.0 * (1 - hit / n))


def _figure_path(cfg: RunConfig) -> Path | None:
    if cfg.no_figure:
        return None
    return cfg.figure or cfg.report.with_suffix(".png")


def cmd_build_groups(cfg: RunConfig) -> int:
    vectors, unigram = _load_tables(cfg, cfg.preprocess)
    t0 = time.perf_counter()
    model, diag = build_groups(vectors, unigram, WeightConfig(cfg.epsilon), cfg.k, cfg.seed, cfg.max_iter, cfg.tol,
                               cfg.top_n_vocab)
    log.info("clustering took %.2fs", time.perf_counter() - t0)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, cfg.out)
    _write_json(cfg.out.with_name(cfg.out.name + ".json"), {
        "schema_version": 1,
        "config": cfg.echo(),
        "diagnostics": {
            "iterations": diag.iterations,
            "converged": diag.converged,
            "weighted_inertia": diag.weighted_inertia,
            "empty_group_events": diag.empty_group_events,
            "seed": diag.seed,
        },
        "group_sizes": np.bincount(model.labels, minlength=model.k).tolist(),
    })
    if cfg.figure is not None:
        from .plots import plot_inertia

        plot_inertia(diag.weighted_inertia, cfg.figure, title=f"K={model.k}, seed={model.seed}")
    log.info("wrote %s", cfg.out)
    return 0


def _read_lines(src: str) -> list[str]:
    if src == "-":
        return [line.rstrip("\r\n") for line in sys.stdin]
    with open(src, "r", encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh]


def cmd_embed(cfg: RunConfig) -> int:
    model, vectors, unigram = _model_and_tables(cfg)
    embedder = S3EEmbedder(model, vectors, unigram, mode=cfg.mode)
    texts = _read_lines(cfg.input)
    sentences = [tokenize(t, not cfg.no_lowercase) for t in texts]
    _log_oov(sentences, vectors)
    t0 = time.perf_counter()
    embs = embedder.batch(sentences, workers=cfg.workers)
    log.info("embedded %d sentences in %.3fs", len(embs), time.perf_counter() - t0)
    zero = sum(not e.norm_flag for e in embs)
    if zero:
        log.warning("%d sentences had no in-vocabulary tokens (zero embedding)", zero)
    out = sys.stdout if cfg.output == "-" else open(cfg.output, "w", encoding="utf-8")
    try:
        for text, e in zip(texts, embs):
            values = e.values.tolist()
            if cfg.format == "jsonl":
                out.write(json.dumps({"text": text, "dim": e.dim, "norm_flag": e.norm_flag, "embedding": values},
                                     ensure_ascii=False) + "\n")
            else:
                out.write(" ".join(repr(x) for x in values) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if cfg.output != "-":
        _write_json(Path(cfg.output + ".config.json"), {"schema_version": 1, "config": cfg.echo(),
                                                        "dim": embedder.dim, "n_sentences": len(embs),
                                                        "n_zero_embeddings": zero})
    return 0


def cmd_eval_sts(cfg: RunConfig) -> int:
    from . import plots

    pairs = load_sts(cfg.data, not cfg.no_lowercase)
    name = cfg.data.stem
    echo = cfg.echo()
    fig = _figure_path(cfg)
    if cfg.k_sweep is not None:
        vectors, unigram = _load_tables(cfg, cfg.preprocess)
        _log_oov([s for p in pairs for s in (p.sent_a, p.sent_b)], vectors)
        wcfg = WeightConfig(cfg.epsilon)

        def make(k):
            model, _ = build_groups(vectors, unigram, wcfg, k, cfg.seed, cfg.max_iter, cfg.tol, cfg.top_n_vocab)
            return S3EEmbedder(model, vectors, unigram, wcfg, cfg.mode)

        reports = sweep_k(pairs, cfg.k_values, make, name, echo)
        rs = [r.pearson for r in reports]
        payload = {"schema_version": 1, "dataset_name": name, "config_echo": echo,
                   "reports": [r.to_dict() for r in reports],
                   "pearson_spread": max(rs) - min(rs)}
        _write_json(cfg.report, payload)
        if fig:
            plots.plot_k_sweep(cfg.k_values, rs, fig, title=f"{name}: K sweep")
        for r in reports:
            print(f"{r.config_echo['k']}\t{r.pearson:.6f}")
        return 0

    if cfg.baseline is not None:
        vectors, unigram = _load_tables(cfg, cfg.preprocess)
        embedder = BaselineEmbedder(BaselineKind.from_cli(cfg.baseline), vectors, unigram, WeightConfig(cfg.epsilon))
    else:
        model, vectors, unigram = _model_and_tables(cfg)
        embedder = S3EEmbedder(model, vectors, unigram, mode=cfg.mode)
        echo["model_header"] = {"k": model.k, "dim": model.dim, "epsilon": model.epsilon,
                                "preprocess_mode": model.preprocess_mode.value, "seed": model.seed}
    _log_oov([s for p in pairs for s in (p.sent_a, p.sent_b)], vectors)
    report = evaluate(pairs, embedder, name, echo)
    _write_json(cfg.report, report.to_dict())
    if fig:
        scores, _ = score_pairs(pairs, embedder)
        plots.plot_scores(scores, [p.gold for p in pairs], fig, title=f"{name}: r = {report.pearson:.4f}")
    print(f"{name}\tpearson\t{report.pearson:.6f}\tpairs\t{report.n_pairs}\tzero\t{report.n_zero_embeddings}")
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    from . import plots

    lower = not cfg.no_lowercase
    if cfg.data.suffix.lower() in (".tsv", ".csv"):
        sentences = [s for p in load_sts(cfg.data, lower) for s in (p.sent_a, p.sent_b)]
    else:
        sentences = [tokenize(t, lower) for t in _read_lines(str(cfg.data)) if t.strip()]
    model, vectors, unigram = _model_and_tables(cfg)
    _log_oov(sentences, vectors)
    report = run_bench(sentences, model, vectors, unigram, trials=cfg.trials, mode=cfg.mode, block=cfg.block,
                       config_echo=cfg.echo())
    _write_json(cfg.report, report.to_dict())
    fig = _figure_path(cfg)
    if fig:
        plots.plot_bench(report.block_ms, report.per_sentence_ms["mean"], fig,
                         title=f"K={model.k}, d={model.dim}, {report.n_sentences} sentences x {report.n_trials}")
    ms = report.per_sentence_ms
    print(f"mean_ms\t{ms['mean']:.4f}\tmedian_ms\t{ms['median']:.4f}\tp95_ms\t{ms['p95']:.4f}\t"
          f"scaling_slope\t{report.scaling_slope:.3f}")
    return 0


COMMANDS = {
    "build-groups": cmd_build_groups,
    "embed": cmd_embed,
    "eval-sts": cmd_eval_sts,
    "bench": cmd_bench,
}


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except FileNotFoundError as exc:
        print(f"s3e {cfg.subcommand}: error: file not found: {exc.filename}", file=sys.stderr)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"s3e {cfg.subcommand}: error: {exc}", file=sys.stderr)
    return 1


def main(argv: Sequence[str] | None = None) -> int:
    cfg = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
