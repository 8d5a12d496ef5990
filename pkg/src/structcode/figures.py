from collections.abc import Callable, Sequence

import logging
import math

from harness.data import RateTable
from structcode.entropy import (
    constrained_km_closed,
    constrained_sw_closed,
    cor1_gain,
    cor1_gain_limit,
    corq3_km_bound,
    corq3_sw_closed,
    rate_km_inner,
    rate_km_square,
    rate_report,
    rate_sw,
)
from structcode.graphentropy import rate_km_or
from structcode.sources import (
    CrossPairedDSBS,
    JointSourceModel,
    PairedDSBS,
    SingleDSBS,
    TernaryCorrelated,
)
from structcode.utils import parse_grid

logger = logging.getLogger(__name__)

DEFAULT_P_GRID = "0.05:0.95:19"
GAIN_LENGTHS = (2, 4, 8, 16, 32, 64)
CONSTRAINED_LENGTHS = (2, 4, 6)
TERNARY_LENGTHS = (2, 3, 4)
TERNARY_EPSILON = 0.2

# Exact columns are only enumerated for supports up to this many outcomes.
ENUMERATION_CAP = 1 << 16

PANEL_COLUMNS = ("p", "r_sw", "r_km", "r_sv", "r_s", "r_km_or", "r_km_or_side_b", "h_inner")


class UnknownFigure(ValueError):
    def __init__(self, figure: str):
        super().__init__(f"unknown figure `{figure}`, expected one of {', '.join(FIGURES)}")
        self.figure = figure


def ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else math.inf


def default_grid() -> list[float]:
    return parse_grid(DEFAULT_P_GRID)


def gain_table(lengths: Sequence[int], ps: Sequence[float]) -> RateTable:
    """
    `η(m, p)` from the closed forms, the enumerated ratio where the support is
    small enough, and the large-m asymptote.
    """
    table = RateTable(("m", "p", "eta", "eta_exact", "eta_limit"))

    for m in lengths:
        for p in ps:
            model = CrossPairedDSBS(m, p).build()
            exact = None

            if model.support_size() <= ENUMERATION_CAP:
                exact = ratio(rate_sw(model), rate_km_inner(model))

            table.add_row((m, p, cor1_gain(m, p), exact, cor1_gain_limit(p)))

        logger.info(f"gain sweep finished for m={m}")

    return table


def rate_panel(build: Callable[[float], JointSourceModel], ps: Sequence[float], workers: int = 1) -> RateTable:
    """Every enumerated rate of the models `build(p)`, plus both hybrid variants."""
    table = RateTable(PANEL_COLUMNS)

    for p in ps:
        model = build(p)
        report = rate_report(model)
        table.add_row(
            (
                p,
                report.r_sw,
                report.r_km,
                report.r_sv,
                report.r_s,
                rate_km_or(model, "km-or", workers=workers),
                rate_km_or(model, "side-b", workers=workers),
                report.h_inner,
            )
        )
        logger.debug(f"panel point p={p:g} for {model.name} finished")

    return table


def constrained_table(lengths: Sequence[int], ps: Sequence[float]) -> RateTable:
    """Closed-form rates of the constrained binary symmetric scheme on m×m sources."""
    table = RateTable(("m", "p", "r_km", "r_sw", "gain"))

    for m in lengths:
        for p in ps:
            km, sw = constrained_km_closed(m, p), constrained_sw_closed(m, p)
            table.add_row((m, p, km, sw, ratio(sw, km)))

    return table


def ternary_table(lengths: Sequence[int], ps: Sequence[float], epsilon: float = TERNARY_EPSILON) -> RateTable:
    """Enumerated and closed-form rates for the q=3, l=2 correlated source."""
    table = RateTable(("m", "p", "r_sw", "r_sw_closed", "r_km", "r_km_bound", "gain"))

    for m in lengths:
        for p in ps:
            model = TernaryCorrelated(m, epsilon, p).build()
            sw, km = rate_sw(model), rate_km_square(model)
            table.add_row(
                (m, p, sw, corq3_sw_closed(m, epsilon, p), km, corq3_km_bound(m, epsilon, p), ratio(sw, km))
            )

        logger.info(f"ternary sweep finished for m={m}")

    return table


FIGURES: dict[str, Callable[[Sequence[float], int], RateTable]] = {
    "1": lambda ps, workers: gain_table(GAIN_LENGTHS, ps),
    "2l": lambda ps, workers: rate_panel(lambda p: CrossPairedDSBS(2, p).build(), ps, workers),
    "2m": lambda ps, workers: rate_panel(lambda p: SingleDSBS(p).build(), ps, workers),
    "2r": lambda ps, workers: rate_panel(lambda p: PairedDSBS(2, p).build(), ps, workers),
    "3l": lambda ps, workers: constrained_table(CONSTRAINED_LENGTHS, ps),
    "3r": lambda ps, workers: ternary_table(TERNARY_LENGTHS, ps),
}


def figure_table(figure: str, ps: Sequence[float] | None = None, workers: int = 1) -> RateTable:
    """Builds the data behind one figure over the p grid (the default grid if none is given)."""
    if figure not in FIGURES:
        raise UnknownFigure(figure)

    return FIGURES[figure](default_grid() if ps is None else ps, workers)
