"""Annular itineraries of transcendental entire functions: radial moduli,
annular partitions, covering certificates, chains of covering annuli,
itinerary synthesis and backward point construction."""

from .functions import EntireFunction, builtin_catalog, evaluate, get_function
from .numbers import ComplexPoint, ExtLogReal, ext, set_precision
from .moduli import circle_moduli, log_max_modulus, log_min_modulus, mu
from .partition import annulus_index, build_partition, compute_itinerary
from .covering import DESK_RELAXED, PAPER_STRICT, Annulus, verify_annulus_covering
from .annuli import AnnuliChain, align_partition, build_Bn_sequence
from .synthesis import TransitionSystem, count_admissible, prescribed_rate_plan
from .realize import RealizationResult, realize_itinerary, realize_prescribed, solve_preimage

__version__ = "0.1.0"
