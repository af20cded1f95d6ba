import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from config import LOG_LEVEL, Bounds, configure_logging, default_bounds
from models.schemas import RunConfig
from services.dispatch import BAD_INPUT, render_text, run
from utils.serialization import canonical_json

logger = logging.getLogger(__name__)

# (flag, key, help) per subcommand; file inputs end up in RunConfig.inputs
FILE_INPUTS = {
    "validate": [
        ("--category", "category", "Category file."),
        ("--functor", "functor", "Functor file."),
        ("--group", "group", "Group file or catalog name."),
        ("--hom", "hom", "Homomorphism file."),
        ("--extension", "extension", "Crossed extension file."),
        ("--morphism", "morphism", "Extension morphism file."),
    ],
    "check-fibration": [("--functor", "functor", "Functor file.")],
    "check-regular-span": [("--span", "span", "Functor file into a product.")],
    "check-condition-c": [
        ("--triangle", "triangle", "Triangle directory (x.cat, m.cat, a.cat, p.fun, g.fun)."),
        ("--span", "span", "Span file; checked over its first projection."),
    ],
    "chevalley": [
        ("--functor", "functor", "Functor file, checked in CAT."),
        ("--triangle", "triangle", "Triangle directory, checked in CAT/A."),
    ],
    "factorize": [
        ("--triangle", "triangle", "Triangle directory."),
        ("--span", "span", "Span file; factorized over its first projection."),
    ],
    "classify": [
        ("--c", "c", "Group acting (file or catalog name)."),
        ("--b", "b", "Abelian group acted on, trivial action (file or catalog name)."),
        ("--module", "module", "Module file with an explicit action."),
    ],
    "pushforward": [
        ("--ext", "ext", "Extension file."),
        ("--beta", "beta", "Module map B -> B' as a homomorphism file."),
        ("--module", "module", "Target module file; trivial action if omitted."),
    ],
    "pullback": [
        ("--ext", "ext", "Extension file."),
        ("--gamma", "gamma", "Homomorphism into the extension's C."),
    ],
    "factorize-morphism": [("--mor", "mor", "Extension morphism file.")],
    "act": [("--span", "span", "Span file.")],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="fibcalc: fibrations of finite categories and crossed extensions")
    parser.add_argument("--format", choices=["text", "json"], default="text", help="Report format.")
    parser.add_argument("--out", default=None, help="Directory for report.json and emitted files.")
    parser.add_argument("--max-arrows", type=int, default=None, help="Arrow cap per category.")
    parser.add_argument("--max-group-order", type=int, default=None, help="Group order cap.")
    parser.add_argument("--enumeration-cap", type=int, default=None, help="Search node cap.")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Logging level.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command, inputs in FILE_INPUTS.items():
        sub = subparsers.add_parser(command)
        for flag, key, help_text in inputs:
            sub.add_argument(flag, dest=f"in_{key}", default=None, help=help_text)

    subparsers.choices["check-fibration"].add_argument(
        "--property", default="fibration",
        choices=["fibration", "opfibration", "discrete-fibration", "discrete-opfibration"],
    )
    subparsers.choices["check-regular-span"].add_argument("--two-sided", action="store_true",
                                                          help="Also check condition (C).")
    subparsers.choices["chevalley"].add_argument("--in-fibrations", dest="opt_in_fibrations", action="store_true",
                                                 help="Require L to be a cartesian functor.")
    subparsers.choices["factorize"].add_argument("--emit-bar", action="store_true",
                                                 help="Write X-bar, Q, F-bar, P-bar to --out.")
    subparsers.choices["factorize"].add_argument("--check-initial", action="store_true",
                                                 help="Search squares for the Q-initiality check.")
    subparsers.choices["classify"].add_argument("--n", type=int, default=1, choices=[1, 2])
    subparsers.choices["classify"].add_argument("--max-order", type=int, default=4,
                                                help="Largest middle group searched for n = 2.")
    subparsers.choices["pushforward"].add_argument("--verify", action="store_true",
                                                   help="Check the opcartesian property by search.")
    act = subparsers.choices["act"]
    act.add_argument("--class", dest="opt_class", required=True, help="Class name, e.g. [x].")
    act.add_argument("--alpha", default=None, help="Arrow of A to pull back along.")
    act.add_argument("--beta", default=None, help="Arrow of B to transport along.")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = vars(args)
    inputs = {k[3:]: v for k, v in values.items() if k.startswith("in_") and v is not None}
    skip = {"command", "format", "out", "max_arrows", "max_group_order", "enumeration_cap", "log_level"}
    options = {
        (k[4:] if k.startswith("opt_") else k): v
        for k, v in values.items()
        if not k.startswith("in_") and k not in skip and v is not None
    }
    overrides = {k: values[k] for k in ("max_arrows", "max_group_order", "enumeration_cap") if values[k] is not None}
    bounds = Bounds(**{**default_bounds().model_dump(), **overrides})
    return RunConfig(command=args.command, inputs=inputs, options=options, bounds=bounds,
                     out_dir=args.out, format=args.format)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level.upper())
    try:
        config = config_from_args(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e.errors()[0]['msg']}")
        return BAD_INPUT
    report = run(config)
    if config.format == "json":
        sys.stdout.write(canonical_json(report))
    else:
        print(render_text(report))
    return report.status


if __name__ == "__main__":
    sys.exit(main())
