#!/usr/bin/env python3
"""
Command-line interface for the DGA detector.

Results go to stdout; every diagnostic goes through logging to stderr.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from . import __version__
from .config import CONFIG_KEYS, PipelineConfig, load_config, parse_date
from .dataset import load_dataset
from .domain_parse import load_suffix_file, split_domain, tld_class_report
from .errors import DgaDetectorError
from .evaluation import roc_csv_name, run_experiment, write_report_table, write_roc_csv
from .logging_setup import configure_logging, get_logger
from .pipeline import load_pipeline, parse_domains, save_pipeline, score_domains, train_pipeline
from .sidefeatures import ingest_whois_snapshot
from .smashword import build_ngram_index, family_stats_table, load_wordlist
from .synth import FAMILIES, FIXTURE_REFERENCE_DATE, generate_fixture

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INTERRUPTED = 130


def _config(args) -> PipelineConfig:
    config = load_config(getattr(args, "config", None))
    return config.with_reference_date(getattr(args, "reference_date", None))


def cmd_parse(args) -> int:
    suffixes = load_suffix_file(args.suffix_list)
    parsed = split_domain(args.domain, suffixes)
    if parsed.is_empty:
        logger.error("❌ Empty domain name")
        return EXIT_ERROR
    print(f"sub={parsed.subdomain or '-'} dom={parsed.domain or '-'} tld={parsed.tld or '-'}")
    return EXIT_OK


def cmd_smashword(args) -> int:
    index = build_ngram_index(load_wordlist(args.wordlist))
    rows = load_dataset(args.domains)
    suffixes = load_suffix_file(args.suffix_list) if args.suffix_list else None
    pairs = [(row.domain, row.family) for row in rows]
    table = family_stats_table(pairs, index, suffixes)
    print("family\tn\tavg_length\tavg_entropy\tavg_smashword")
    for stats in table:
        print(
            f"{stats.name}\t{stats.n}\t{stats.avg_length:.3f}\t"
            f"{stats.avg_entropy:.3f}\t{stats.avg_smashword:.3f}"
        )
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config(args)
    rows = load_dataset(args.dataset)
    suffixes = load_suffix_file(args.suffix_list)
    snapshot = ingest_whois_snapshot(args.whois_snapshot)
    if config.evaluation.reference_date is None:
        logger.error("❌ A reference date is required (--reference-date or reference_date)")
        return EXIT_ERROR

    if args.wordlist:
        index = build_ngram_index(load_wordlist(args.wordlist))
        pairs = [(row.domain, row.family) for row in rows]
        for stats in family_stats_table(pairs, index, suffixes):
            logger.info(
                f"Family {stats.name}: n={stats.n} smashword={stats.avg_smashword:.3f} "
                f"entropy={stats.avg_entropy:.3f}"
            )

    pipeline, summary = train_pipeline(rows, suffixes, snapshot, config)
    save_pipeline(pipeline, args.out)
    for line in summary.lines():
        print(line)
    logger.info(f"✅ Model written to {args.out}")
    return EXIT_OK


def cmd_score(args) -> int:
    pipeline = load_pipeline(args.model)
    config = _config(args)
    snapshot = ingest_whois_snapshot(args.whois_snapshot) if args.whois_snapshot else None
    if snapshot is None:
        logger.info("No WHOIS snapshot given; WHOIS features are all zero")
    probabilities = score_domains(
        pipeline, args.domains, snapshot, config.evaluation.reference_date
    )
    for domain, probability in zip(args.domains, probabilities):
        print(f"{domain}\t{probability:.6f}")
    return EXIT_OK


def cmd_eval_loo(args) -> int:
    config = _config(args)
    rows = load_dataset(args.dataset)
    suffixes = load_suffix_file(args.suffix_list)
    snapshot = ingest_whois_snapshot(args.whois_snapshot) if args.whois_snapshot else None

    families = sorted({row.family for row in rows if row.is_dga})
    if args.family:
        families = [args.family]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    for family in families:
        report = run_experiment(rows, family, config, suffixes, snapshot)
        write_roc_csv(report.roc, out_dir / roc_csv_name(family))
        reports.append(report)

    report_path = out_dir / "report.tsv"
    write_report_table(reports, report_path)
    print(report_path.read_text(encoding="utf-8"), end="")
    logger.info(f"✅ {len(reports)} leave-one-out reports written to {out_dir}")
    return EXIT_OK


def cmd_tlds(args) -> int:
    rows = load_dataset(args.dataset)
    parsed = parse_domains([row.domain for row in rows], load_suffix_file(args.suffix_list))
    report = tld_class_report(parsed, [row.is_dga for row in rows], args.min_ratio)
    print("tld\tn_dga\tn_clean\tratio")
    for item in report:
        print(f"{item.tld}\t{item.n_dga}\t{item.n_clean}\t{item.ratio:.3f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    paths = generate_fixture(args.out_dir, args.n_dga, args.n_clean, args.seed, args.families)
    for path in paths:
        print(path)
    logger.info(f"Use --reference-date {FIXTURE_REFERENCE_DATE.isoformat()} with this snapshot")
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        help=f"key = value config file (keys: {', '.join(CONFIG_KEYS)})",
    )
    parser.add_argument(
        "--reference-date",
        type=parse_date,
        help="date WHOIS ages are measured from (YYYY-MM-DD)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dga_detect",
        description="Detect algorithmically generated domain names.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("parse", help="split a domain into subdomain, domain and TLD")
    p.add_argument("domain")
    p.add_argument("--suffix-list", required=True)
    p.set_defaults(handler=cmd_parse)

    p = commands.add_parser("smashword", help="per-family length, entropy and smashword table")
    p.add_argument("--wordlist", required=True)
    p.add_argument("--domains", required=True, help="labelled dataset TSV")
    p.add_argument("--suffix-list", help="strip the full public suffix (default: last label)")
    p.set_defaults(handler=cmd_smashword)

    p = commands.add_parser("train", help="train the stacked model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--suffix-list", required=True)
    p.add_argument("--wordlist", help="log per-family smashword statistics first")
    p.add_argument("--whois-snapshot", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser("score", help="P(malicious) for each domain")
    p.add_argument("--model", required=True)
    p.add_argument("--whois-snapshot")
    p.add_argument("domains", nargs="+")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_score)

    p = commands.add_parser("eval-loo", help="leave-one-family-out evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--suffix-list", required=True)
    p.add_argument("--whois-snapshot")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--family")
    group.add_argument("--all-families", action="store_true")
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)
    p.set_defaults(handler=cmd_eval_loo)

    p = commands.add_parser("tlds", help="TLDs where DGA names outnumber clean ones")
    p.add_argument("--dataset", required=True)
    p.add_argument("--suffix-list", required=True)
    p.add_argument("--min-ratio", type=float, default=3.0)
    p.set_defaults(handler=cmd_tlds)

    p = commands.add_parser("synth", help="write a synthetic fixture")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-dga", type=int, default=2000)
    p.add_argument("--n-clean", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--families", nargs="+", default=list(FAMILIES), choices=FAMILIES)
    p.set_defaults(handler=cmd_synth)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the dga_detect CLI."""
    # .env may carry DGA_* settings
    load_dotenv()

    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logger.warning("⚠️ Stopped by user")
        return EXIT_INTERRUPTED
    except (DgaDetectorError, OSError) as exc:
        logger.error(f"❌ {exc}")
        return EXIT_ERROR
    except Exception as exc:
        logger.error(f"❌ Fatal error: {exc}", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
