"""Exact, numeric and rigorously bounded transmission probabilities for
one-dimensional scattering, parametric oscillators and Schwarzschild
greybody factors."""

from __future__ import annotations

from .bounds import (
    BoundResult,
    ConstantK,
    MaxClamp,
    PhaseEqualsK,
    PowerInterp,
    TimeProfile,
    UserFunction,
    bound_case1,
    bound_case2,
    bound_case3,
    bound_case4,
    companions,
    general_bound,
    time_domain_bounds,
    vartheta,
    vartheta_general,
)
from .comparison import (
    ReferenceSolution,
    ThetaBudget,
    bracket_transmission,
    compose_bogoliubov_bounds,
    perturbation_estimates,
    reference_solution,
    theta_bound,
)
from .errors import InputError, NumericalError, ScatterboundError
from .exact import ExactAmplitudes, exact_amplitudes, exact_reflection, exact_transmission, qnm, qnm_denominator
from .greybody import (
    GreybodyQuery,
    greybody_bound_1,
    greybody_bound_2,
    greybody_numeric,
    lambert_w0,
    radius_from_tortoise,
    regge_wheeler_potential,
    rw_peak,
    tortoise,
)
from .millergood import (
    Form1,
    Form2,
    Form3,
    delta_param_bound,
    improved_bound,
    low_energy_bound,
    mg_transform,
    schwarzian_bound,
    wkb_like_bound,
)
from .model import (
    DEFAULT_UNITS,
    AsymSquareWell,
    Delta,
    Dispersion,
    DoubleDelta,
    Eckart,
    Free,
    Hua,
    Hulthen,
    ManningRosen,
    Mobius,
    Morse,
    PoschlTeller,
    Potential,
    RosenMorse,
    Sampled,
    Sech2,
    Shifted,
    SquareBarrier,
    Step,
    Tanh,
    Tietz,
    UnitsConvention,
    build_dispersion,
    canonicalize_mobius,
    find_extrema,
    potential_from_dict,
    potential_to_dict,
)
from .registry import BOUND_IDS, evaluate_bound
from .solver import (
    ScatteringResult,
    SolverConfig,
    bogoliubov_from_monodromy,
    evolve_relative,
    monodromy_matrix,
    solve_scattering,
)

__version__ = "0.1.0"
