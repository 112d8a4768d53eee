"""Command-line entry point: ``revspam <stage> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unreadable corpus, missing or stale upstream artifacts), 3 training error
(at least one model failed; the others are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from revspam import pipeline
from revspam.evaluation import compare_models, format_table
from revspam.pipeline import ConfigError, DataError, PipelineConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAIN = 0, 1, 2, 3
STAGES = ("prepare", "train", "evaluate", "analyze", "report")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 means bad data here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--input", help="review corpus (JSON lines, optionally gzipped)")
    common.add_argument("--output", help="output directory for all stages")
    common.add_argument("--seed", type=int, help="seed for the split and every model")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--on-error", choices=("skip", "abort"),
                        help="what to do with malformed corpus lines")
    common.add_argument("--segment-bounds", metavar="A,B",
                        help="reviewer segments [1,A], (A,B], (B,inf); default 1,5")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="revspam", description="Spam review detection pipeline.")
    sub = parser.add_subparsers(dest="stage", required=True, parser_class=_Parser)
    helps = {
        "prepare": "clean and split the corpus",
        "train": "fit features and train the configured models",
        "evaluate": "score models on the held-out split",
        "analyze": "monthly series, reviewer segments and correlations",
        "report": "gather all stage outputs into report.json",
    }
    for stage in STAGES:
        sub.add_parser(stage, parents=[common], help=helps[stage])
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = pipeline.load_config(args.config) if args.config else PipelineConfig()
    if args.input is not None:
        cfg.input_path = args.input
    if args.output is not None:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.on_error is not None:
        cfg.on_error = args.on_error
    if args.segment_bounds is not None:
        parts = args.segment_bounds.split(",")
        try:
            a, b = (int(x) for x in parts)
        except ValueError:
            raise ConfigError(f"--segment-bounds wants two integers A,B, got {args.segment_bounds!r}")
        cfg.segment_bounds = (a, b)
    return cfg


def _run(stage: str, cfg: PipelineConfig) -> int:
    if stage == "prepare":
        stats = pipeline.run_prepare(cfg)
        print(f"kept {stats.kept} of {stats.total_read} lines "
              f"(null {stats.dropped_null}, duplicate {stats.dropped_duplicate}, "
              f"malformed {stats.dropped_malformed})")
    elif stage == "train":
        report = pipeline.run_train(cfg)
        print(f"trained: {', '.join(report['trained']) or 'none'}")
        for name, why in report["failed"].items():
            print(f"failed: {name}: {why}", file=sys.stderr)
        if report["failed"]:
            return EXIT_TRAIN
    elif stage == "evaluate":
        print(format_table(compare_models(pipeline.run_evaluate(cfg))))
    elif stage == "analyze":
        summary = pipeline.run_analyze(cfg)
        print(json.dumps(summary["segments"], indent=2, sort_keys=True))
    else:
        pipeline.run_report(cfg)
        print(cfg.out / "report.json")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return _run(args.stage, cfg)
    except ConfigError as exc:
        print(f"revspam: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"revspam: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"revspam: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
