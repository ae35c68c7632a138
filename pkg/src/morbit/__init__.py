"""Periodic orbits of x'' + V_x(t, x) = 0 on the circle.

Finds periodic solutions in prescribed winding classes, computes their
Morse and Bott indices, Floquet multipliers, and twisting frequencies,
and checks the Morse-theoretic counting identities for subharmonics.
"""

from .counting import (
    ChiTable,
    MorsePolynomial,
    PredictionReport,
    build_chi,
    confront,
    morse_relation_check,
    predict,
)
from .dynamics import (
    CoefficientPath,
    MonodromyResult,
    State,
    classify_floquet,
    constant_path,
    flow,
    linearize_along,
    monodromy,
)
from .orbits import (
    DiscreteLoop,
    OrbitClass,
    PeriodicOrbit,
    SearchBudget,
    action,
    action_gradient,
    action_hessian,
    build_orbit,
    deduplicate,
    find_orbits,
    is_fundamental,
    shift_family,
)
from .potential import FourierTerm, PotentialSpec, eval_jet, forced_pendulum, parse_spec
from .spectral import (
    IndexReport,
    TwistedOperator,
    attach_indices,
    bott_index,
    morse_index,
    twisting_frequency,
    verify_index_properties,
)

__version__ = "0.1.0"
