"""Provider-cost estimation for a batch run.

Per object the generation stage sends 30 images (6 views, 5
repetitions each), about 4,500 input tokens, and receives about
21,000 output tokens, so with per-image and per-thousand-token prices
the per-object cost is 30*C_i + 5*C_t_in + 21*C_t_out.
"""

import math

from .errors import NegativePrice

IMAGES_PER_OBJECT = 30
INPUT_TOKEN_KILOS = 5
OUTPUT_TOKEN_KILOS = 21


def estimate_cost(
    num_objects: int,
    price_image: float,
    price_input_per_1k: float,
    price_output_per_1k: float,
) -> float:
    """Total currency cost of annotating `num_objects` objects."""
    if num_objects < 0:
        raise NegativePrice(f"num_objects must be >= 0, got {num_objects}")
    for name, price in (
        ("price_image", price_image),
        ("price_input_per_1k", price_input_per_1k),
        ("price_output_per_1k", price_output_per_1k),
    ):
        if not math.isfinite(price) or price < 0:
            raise NegativePrice(f"{name} must be finite and >= 0, got {price!r}")
    per_object = (
        IMAGES_PER_OBJECT * price_image
        + INPUT_TOKEN_KILOS * price_input_per_1k
        + OUTPUT_TOKEN_KILOS * price_output_per_1k
    )
    return num_objects * per_object
