from .analytic import FAMILIES, ProblemParams, claimed_support, make_problem
from .wells import (
    GridFormatError,
    GridStack,
    bilinear_interpolate,
    distinct_worst_scenarios,
    generate_synthetic_grids,
    load_grids,
    make_well_problem,
    save_grids,
    well_placement_eval,
    well_values,
    worst_scenario_map,
)
