"""Command-line interface.

Subcommands: build, label, eval-wsi, eval-rho, demo-select.  Every
subcommand takes --config plus per-field override flags (flags win).
Exit codes: 0 success, 1 input error, 2 internal error.
The SENSEFORGE_LOG environment variable sets the log level.
"""

import argparse
import logging
import os
import sys
import traceback

from . import pipeline

log = logging.getLogger("senseforge")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        sys.exit(1)


def _add_config_flags(parser):
    parser.add_argument("--config", help="TOML-style key=value config file")
    parser.add_argument("--inventory", help="sense inventory JSON Lines file")
    parser.add_argument("--embeddings", help="text embedding file")
    parser.add_argument("--stopwords", help="stopword file (default: packaged list)")
    parser.add_argument("--corpus", help="tagged corpus file")
    parser.add_argument("--models", help="model directory")
    parser.add_argument("--method", choices=pipeline.METHODS)
    parser.add_argument("--init-mode", dest="init_mode", choices=pipeline.INIT_MODES)
    parser.add_argument("--window", type=int)
    parser.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    parser.add_argument("--kmeans-max-iters", dest="kmeans_max_iters", type=int)
    parser.add_argument("--crp-lambda1", dest="crp_lambda1", type=float)
    parser.add_argument("--crp-lambda2", dest="crp_lambda2", type=float)
    parser.add_argument("--crp-gamma", dest="crp_gamma", type=float)
    parser.add_argument("--damping", type=float)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--selection", choices=pipeline.SELECTION_MODES)
    parser.add_argument("--attention-width", dest="attention_width", type=int)
    parser.add_argument("--seed", type=int)


def _config_from_args(args):
    overrides = {name: getattr(args, name) for name in pipeline._config_fields()
                 if hasattr(args, name)}
    return pipeline.load_config(args.config, overrides)


def build_parser():
    parser = _Parser(prog="senseforge",
                     description="Word sense induction and selection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[], help="cluster ambiguous word types")
    _add_config_flags(p)

    p = sub.add_parser("label", help="write a sense-labeled corpus")
    _add_config_flags(p)
    p.add_argument("--output", required=True, help="labeled corpus output path")

    p = sub.add_parser("eval-wsi", help="score a labeled corpus against gold labels")
    _add_config_flags(p)
    p.add_argument("--labeled", required=True, help="labeled corpus (4-field)")
    p.add_argument("--gold", required=True, help="gold labels TSV (id<TAB>label)")
    p.add_argument("--out-dir", required=True, help="report output directory")

    p = sub.add_parser("eval-rho", help="lexical-choice evaluation via word alignment")
    _add_config_flags(p)
    p.add_argument("--source", required=True, help="tagged source corpus")
    p.add_argument("--system", required=True, help="system translation (plain text)")
    p.add_argument("--baseline", required=True, help="baseline translation (plain text)")
    p.add_argument("--reference", required=True, help="reference translation (plain text)")
    p.add_argument("--system-align", required=True, help="source-system Pharaoh alignment")
    p.add_argument("--baseline-align", required=True, help="source-baseline Pharaoh alignment")
    p.add_argument("--reference-align", required=True, help="source-reference Pharaoh alignment")
    p.add_argument("--out-dir", required=True, help="report output directory")

    p = sub.add_parser("demo-select", help="trace per-token sense weights")
    _add_config_flags(p)
    p.add_argument("--output", required=True, help="trace TSV output path")
    return parser


def _run(args):
    cfg = _config_from_args(args)
    if args.command == "build":
        manifest = pipeline.cmd_build(cfg)
        log.info("built %d models (%d skipped)",
                 len(manifest["models"]), len(manifest["skipped"]))
        print("built %d models into %s" % (len(manifest["models"]), cfg.models))
    elif args.command == "label":
        stats = pipeline.cmd_label(cfg, args.output)
        print("labeled corpus written to %s (%s)" % (
            args.output, ", ".join("%s=%d" % kv for kv in sorted(stats.items()))))
    elif args.command == "eval-wsi":
        report = pipeline.cmd_eval_wsi(cfg, args.labeled, args.gold, args.out_dir)
        print("wsi report written to %s (average=%.4f, C=%.2f)"
              % (args.out_dir, report.all.average, report.mean_clusters))
    elif args.command == "eval-rho":
        rho_result, _ = pipeline.cmd_eval_rho(
            cfg, args.source, args.system, args.baseline, args.reference,
            args.system_align, args.baseline_align, args.reference_align, args.out_dir)
        print("lexical-choice report written to %s (rho=%.4f over %d tokens)"
              % (args.out_dir, rho_result.rho, rho_result.t))
    elif args.command == "demo-select":
        rows = pipeline.cmd_demo_select(cfg, args.output)
        print("weight trace written to %s (%d tokens)" % (args.output, rows))
    return 0


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("SENSEFORGE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ValueError, OSError, KeyError, IndexError) as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return 1
    except Exception:
        sys.stderr.write("internal error:\n%s" % traceback.format_exc())
        return 2


if __name__ == "__main__":
    sys.exit(main())
