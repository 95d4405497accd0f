"""Finite towers of branched abelian covers over Δ-complexes, with exact checks."""
from __future__ import annotations

from .complex import CellMap, DComplex, build_complex, simplex_boundary, standard_simplex
from .constructions import barycentric_subdivision, cone, orbit_quotient, pullback
from .covers import DeckGroup, build_cover, characteristic_cover, lemma1_cover
from .errors import BudgetExceeded, ConfigError, StageCheckFailure, TowerError
from .hat import HatResult, hat_complex, hat_simplex
from .hat_checks import CHECK_NAMES, verify_stage
from .homology import cohomology_mod_p, h1_basis, homology
from .sequences import SequenceCursor, parse_rule, star_subsequence
from .serialize import ComplexFile, ParseError, parse, serialize
from .snf import smith_normal_form
from .tower import TowerConfig, TowerResult, tower_build, verify_orbit
from .certificates import certificate_campaign, certify_extension, lemma2_sweep

__version__ = "0.1.0"

__all__ = [
    "CellMap",
    "DComplex",
    "build_complex",
    "simplex_boundary",
    "standard_simplex",
    "barycentric_subdivision",
    "cone",
    "orbit_quotient",
    "pullback",
    "DeckGroup",
    "build_cover",
    "characteristic_cover",
    "lemma1_cover",
    "BudgetExceeded",
    "ConfigError",
    "StageCheckFailure",
    "TowerError",
    "HatResult",
    "hat_complex",
    "hat_simplex",
    "CHECK_NAMES",
    "verify_stage",
    "cohomology_mod_p",
    "h1_basis",
    "homology",
    "SequenceCursor",
    "parse_rule",
    "star_subsequence",
    "ComplexFile",
    "ParseError",
    "parse",
    "serialize",
    "smith_normal_form",
    "TowerConfig",
    "TowerResult",
    "tower_build",
    "verify_orbit",
    "certificate_campaign",
    "certify_extension",
    "lemma2_sweep",
]
