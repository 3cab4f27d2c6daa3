import csv
from decimal import MAX_EMAX, MIN_EMIN, Decimal, localcontext
from fractions import Fraction
from typing import List, TextIO, Union

from homsolve.core.config import settings
from homsolve.models.scalar import Part, unlimited_int_digits
from homsolve.services.dynamics import Trajectory


def format_part(part: Part, digits: int, rational: bool = False) -> str:
    """One CSV cell: ``p/q`` when ``rational``, otherwise ``digits`` significant digits."""
    if isinstance(part, Fraction):
        if rational:
            with unlimited_int_digits():
                return str(part)
        return _decimal(part, digits)
    return format(part, f".{digits}g")


def _decimal(part: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.Emax, ctx.Emin = MAX_EMAX, MIN_EMIN
        value = Decimal(part.numerator) / Decimal(part.denominator)
    return format(value, f".{digits}g")


def header(n_vars: int) -> List[str]:
    columns = ["step"]
    for n in range(1, n_vars + 1):
        columns += [f"re_z{n}", f"im_z{n}"]
    return columns


def write_trajectory(
    stream: TextIO,
    trajectory: Trajectory,
    digits: Union[int, None] = None,
    rational: bool = False,
) -> int:
    """Write ``step,re_z1,im_z1,...`` rows; returns the number of data rows."""
    digits = settings.CSV_DIGITS if digits is None else digits
    if not trajectory.states:
        return 0
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header(trajectory.states[0].n_vars))
    for state in trajectory.states:
        row = [str(state.step)]
        for z in state:
            row += [format_part(z.re, digits, rational), format_part(z.im, digits, rational)]
        writer.writerow(row)
    return len(trajectory.states)
