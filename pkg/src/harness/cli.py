from dataclasses import dataclass
from pathlib import Path

import argparse
import logging
import sys
import time

from harness.checks import (
    CheckResult,
    CheckResult_ExampleFailed,
    CheckResult_Mismatch,
    CheckResult_Ok,
    VerifyEventHandlers,
    run_verification,
)
from harness.config import CONVERTERS, MODELS, ExpectedConfigKeyMissing, RunConfig, config_keys
from harness.data import RateTable
from harness.registry import SchemeMetadata, get_global_scheme_registry
from structcode.entropy import entropy_from_probabilities, rate_report
from structcode.figures import FIGURES, PANEL_COLUMNS, default_grid, figure_table, gain_table
from structcode.graphentropy import (
    HYBRID_VARIANTS,
    MAX_VERTICES,
    conditional_entropy_bound,
    conditional_graph_entropy,
    hybrid_graph,
    rate_km_or,
)
from structcode.kmcodec import SymbolModel, run_trials
from structcode.sources import (
    CrossPairedDSBS,
    CustomTable,
    JointSourceModel,
    ModelKind,
    PairedDSBS,
    SingleDSBS,
    TernaryCorrelated,
    build_model,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DEFAULT_P = 0.1


@dataclass
class SchemeRunInfo:
    start_time: float
    sweep_start_time: float | None = None


class TerminalVerifyEventHandlers(VerifyEventHandlers):
    runs: dict[str, SchemeRunInfo]

    def __init__(self) -> None:
        self.runs = dict()

    def on_start_scheme(self, metadata: SchemeMetadata, q: int, m: int, l: int):
        self.runs[metadata.name()] = SchemeRunInfo(time.time())
        print(f"🔎 Verifying {metadata.name()} ({metadata.title()}) with q={q}, m={m}, l={l}")

    def on_examples_pass(self, metadata: SchemeMetadata, count: int):
        if count > 0:
            print(f"👍 Tested the {count} examples for {metadata.name()}")

        # The exhaustive sweep starts right after this event.
        self.runs[metadata.name()].sweep_start_time = time.time()

    def on_finish_scheme(self, metadata: SchemeMetadata, result: CheckResult):
        if type(result) is CheckResult_ExampleFailed:
            print(
                f"👎 The example {result.example} of {metadata.name()} decoded to `{result.actual}`"
            )
            return

        run = self.runs[metadata.name()]
        started = run.sweep_start_time if run.sweep_start_time is not None else run.start_time
        logger.info(f"exhaustive sweep of {metadata.name()} took {time.time() - started:.2f}s")

        if type(result) is CheckResult_Ok:
            skipped = result.enumerated - result.passed
            line = f"✅ {metadata.name()}: {result.passed}/{result.passed} pass"

            if skipped > 0:
                line += f" ({skipped} of {result.enumerated} pairs are outside the scheme's domain)"

            print(line)
        elif type(result) is CheckResult_Mismatch:
            c = result.counterexample
            print(
                f"❌ {metadata.name()}: {result.checked - result.failures}/{result.checked} pass, "
                f"{result.failures} failed\n"
                f"       A: {c.a}\n"
                f"       B: {c.b}\n"
                f"       Expected: {c.expected}\n"
                f"         Actual: {c.actual}"
            )


class StructcodeUserException(ValueError):
    def __init__(self, *args: object) -> None:
        super().__init__(*args)


class SweepNeedsSingleModel(StructcodeUserException):
    def __init__(self) -> None:
        super().__init__("a custom table model has no p parameter, drop --p and --p-grid")


def model_kind(config: RunConfig, model: str, p: float | None) -> ModelKind:
    """The source family named by `model` at crossover `p`."""
    if model == "custom":
        return CustomTable(Path(str(config.require("table"))))

    if p is None:
        raise ExpectedConfigKeyMissing("p", config.config_path)

    if model == "crosspaired":
        return CrossPairedDSBS(config.m, p)
    elif model == "paired":
        return PairedDSBS(config.m, p)
    elif model == "dsbs":
        return SingleDSBS(p)
    elif model == "ternary":
        return TernaryCorrelated(config.m, config.epsilon, p)
    else:
        raise StructcodeUserException(f"unknown model `{model}`, expected one of {', '.join(MODELS)}")


def model_sweep(config: RunConfig, default_model: str) -> list[tuple[float | None, JointSourceModel]]:
    model = config.model if config.model is not None else default_model

    if model == "custom":
        if config.p is not None or config.p_grid is not None:
            raise SweepNeedsSingleModel()
        return [(None, build_model(model_kind(config, model, None)))]

    return [(p, build_model(model_kind(config, model, p))) for p in config.sweep([DEFAULT_P])]


def cmd_verify(config: RunConfig) -> int:
    metadata = get_global_scheme_registry().find_scheme(str(config.require("scheme")))
    result = run_verification(
        metadata,
        q=config.q,
        m=config.m,
        l=config.l,
        events=TerminalVerifyEventHandlers(),
        workers=config.workers,
    )

    return EXIT_OK if result.is_ok() else EXIT_FAILED


def cmd_rates(config: RunConfig) -> int:
    table = RateTable(PANEL_COLUMNS + ("gain",))

    for p, model in model_sweep(config, "crosspaired"):
        report = rate_report(model)
        hybrid = model.l == 1 and model.q**model.m <= MAX_VERTICES
        table.add_row(
            (
                p,
                report.r_sw,
                report.r_km,
                report.r_sv,
                report.r_s,
                rate_km_or(model, "km-or", seed=config.seed, workers=config.workers) if hybrid else None,
                rate_km_or(model, "side-b", seed=config.seed, workers=config.workers) if hybrid else None,
                report.h_inner,
                report.gain,
            )
        )

    table.write(config.out)
    return EXIT_OK


def cmd_gain(config: RunConfig) -> int:
    gain_table([config.m], config.sweep(default_grid())).write(config.out)
    return EXIT_OK


def cmd_figure(config: RunConfig) -> int:
    figure = str(config.require("figure"))
    ps = None if config.p_grid is None and config.p is None else config.sweep([])
    figure_table(figure, ps, workers=config.workers).write(config.out)
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    table = RateTable(
        ("p", "n", "k", "rate", "trials", "decode_errors", "error_rate", "function_error_rate")
    )

    if config.model is None:
        sources = [(p, SymbolModel.bernoulli(p)) for p in config.sweep([DEFAULT_P])]
    else:
        sources = model_sweep(config, config.model)

    for p, source in sources:
        for k in config.k:
            report = run_trials(source, config.n, k, config.trials, config.seed, workers=config.workers)
            table.add_row(
                (
                    p,
                    report.n,
                    report.k,
                    report.k / report.n,
                    report.trials,
                    report.decode_errors,
                    report.empirical_error_rate,
                    report.function_error_rate,
                )
            )

    table.write(config.out)
    return EXIT_OK


def cmd_graph_entropy(config: RunConfig) -> int:
    table = RateTable(("p", "variant", "h_graph", "h_conditional", "converged", "spread", "rate"))

    for p, model in model_sweep(config, "dsbs"):
        for variant in HYBRID_VARIANTS:
            graph = hybrid_graph(model, variant)
            result = conditional_graph_entropy(graph, seed=config.seed, workers=config.workers)
            h_y = entropy_from_probabilities(graph.joint.sum(axis=0))
            rate = (2 * h_y if variant == "km-or" else h_y) + result.value
            table.add_row(
                (
                    p,
                    variant,
                    result.value,
                    conditional_entropy_bound(graph),
                    result.converged,
                    result.spread,
                    rate,
                )
            )

    table.write(config.out)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "rates": cmd_rates,
    "gain": cmd_gain,
    "figure": cmd_figure,
    "simulate": cmd_simulate,
    "graph-entropy": cmd_graph_entropy,
}


def load_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the optional config file, which overrides the defaults."""
    base = RunConfig() if args.config is None else RunConfig.load_from_file(args.config)
    return base.with_overrides(
        subcommand=args.subparser_name,
        **{key: getattr(args, key, None) for key in config_keys()},
    )


def cli_main(argv: list[str] | None = None) -> int:
    parser = init_argparser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.loglevel)

    if args.subparser_name is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    started = time.time()

    try:
        config = load_config(args)
        code = COMMANDS[args.subparser_name](config)
    except ExpectedConfigKeyMissing as e:
        logger.debug(e, exc_info=True)

        print(f"The setting `{e.key}` was missing or empty", file=sys.stderr)

        if e.config_path is None:
            print(f"Pass `--{e.key.replace('_', '-')}` on the command line", file=sys.stderr)
        else:
            print(f"Fix the `{e.key} = ...` line in the file {e.config_path}", file=sys.stderr)

        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.debug(e, exc_info=True)
        print(f"🚫 {e}", file=sys.stderr)
        return EXIT_USAGE

    logger.info(f"{args.subparser_name} finished in {time.time() - started:.2f}s")
    return code


def _flag(key: str):
    """argparse `type` that converts a flag with the matching config file converter."""

    def convert(text: str):
        try:
            return CONVERTERS[key](text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid value `{text}`: {e}")

    return convert


def init_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structcode_cli",
        description="Structured distributed computation of inner and matrix products over F_q",
        epilog=f"config file keys (`key = value`): {', '.join(config_keys())}",
    )

    # Global arguments.
    parser.add_argument(
        "-d",
        "--debug",
        help="Print debug log entries",
        action="store_const",
        dest="loglevel",
        const=logging.DEBUG,
        default=logging.WARNING,
    )

    parser.add_argument(
        "-v",
        "--verbose",
        help="Print verbose (info) log entries",
        action="store_const",
        dest="loglevel",
        const=logging.INFO,
    )

    subparsers = parser.add_subparsers(title="subcommands", dest="subparser_name")

    verify_parser = subparsers.add_parser(
        "verify", help="exhaustively verify a scheme's decoder over F_q^{m×l}"
    )
    verify_parser.add_argument("--scheme", type=str, help="registered scheme name")
    add_common_args(verify_parser)

    rates_parser = subparsers.add_parser(
        "rates",
        help="enumerated sum rates of a source model",
        description=f"CSV columns: {', '.join(PANEL_COLUMNS + ('gain',))}",
    )
    add_model_args(rates_parser)
    add_common_args(rates_parser)

    gain_parser = subparsers.add_parser(
        "gain", help="gain R_SW / R_KM of the cross paired source", description="CSV columns: m, p, eta, eta_exact, eta_limit"
    )
    add_common_args(gain_parser)

    figure_parser = subparsers.add_parser(
        "figure", help="data behind one of the rate figures", description=f"figures: {', '.join(FIGURES)}"
    )
    figure_parser.add_argument("--figure", type=str, choices=list(FIGURES), help="figure id")
    add_common_args(figure_parser)

    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Monte-Carlo syndrome coding with ML decoding",
        description="CSV columns: p, n, k, rate, trials, decode_errors, error_rate, function_error_rate",
    )
    add_model_args(simulate_parser)
    add_common_args(simulate_parser)
    simulate_parser.add_argument("--trials", type=_flag("trials"), help="number of coding trials")
    simulate_parser.add_argument("--n", type=_flag("n"), help="block length")
    simulate_parser.add_argument("--k", type=int, nargs="+", help="code dimensions, one row each")

    graph_parser = subparsers.add_parser(
        "graph-entropy",
        help="conditional graph entropy of the hybrid schemes",
        description="CSV columns: p, variant, h_graph, h_conditional, converged, spread, rate",
    )
    add_model_args(graph_parser)
    add_common_args(graph_parser)

    return parser


def add_model_args(parser: argparse.ArgumentParser):
    parser.add_argument("--model", type=_flag("model"), help=f"source model: {', '.join(MODELS)}")
    parser.add_argument("--table", type=str, help="joint PMF table file for the custom model")
    parser.add_argument("--epsilon", type=_flag("epsilon"), help="ternary model parameter")


def add_common_args(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, help="`key = value` run configuration file")
    parser.add_argument("--q", type=_flag("q"), help="field size")
    parser.add_argument("--m", type=_flag("m"), help="rows of A and B")
    parser.add_argument("--l", type=_flag("l"), help="columns of A and B")
    parser.add_argument("--p", type=_flag("p"), help="crossover probability")
    parser.add_argument("--p-grid", dest="p_grid", type=_flag("p_grid"), help="p sweep lo:hi:steps")
    parser.add_argument("--seed", type=_flag("seed"), help="seed of every random stream")
    parser.add_argument("--workers", type=_flag("workers"), help="worker threads")
    parser.add_argument("--out", type=str, help="CSV output path, standard output if omitted")
