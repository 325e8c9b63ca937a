"""Data-driven reachability analysis and zonotopic predictive control.

Thin Python surface over the C++ core: zonotope algebra, the stirred-tank
reactor benchmark dynamics, and the two end-to-end pipelines (`run_reach`,
`run_closed_loop`) driven by the same JSON configs as the command-line tool.
"""

from ._core import (
    IntervalVector,
    Zonotope,
    cartesian_product,
    contains_point,
    cstr_step,
    from_interval,
    linear_map,
    minkowski_sum,
    reduce_order,
    run_closed_loop,
    run_reach,
    to_interval,
)

__all__ = [
    "IntervalVector",
    "Zonotope",
    "cartesian_product",
    "contains_point",
    "cstr_step",
    "from_interval",
    "linear_map",
    "minkowski_sum",
    "reduce_order",
    "run_closed_loop",
    "run_reach",
    "to_interval",
]
