"""Small shared numeric helpers."""

import math


def round_half_up(value: float) -> int:
    """Round to the nearest integer, ties away from zero-ward (0.5 -> 1).

    Used everywhere a ratio is turned into a pixel count so that results
    do not depend on the platform's banker's rounding.
    """
    return int(math.floor(value + 0.5))
