import math
from fractions import Fraction
from typing import Union


def generate_dagster_name(input_string) -> str:
    """
    Generate a dagster safe name (^[A-Za-z0-9_]+$.)
    """
    return (
        input_string.replace("-", "_")
        .replace(" ", "_")
        .replace(":", "_")
        .replace("=", "_")
        .replace(".", "_")
    )


def separator_quality(n: int) -> int:
    """The integer q-separator quality max(1, floor(sqrt(n) / (2 log2 n)))."""
    if n < 2:
        return 1
    return max(1, math.floor(math.sqrt(n) / (2 * math.log2(n))))


def format_fraction(value: Fraction) -> str:
    """Serialize an exact rational as 'p/q' (or 'p' for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def round_fraction(value: Union[Fraction, int], digits: int = 4) -> float:
    return round(float(value), digits)
