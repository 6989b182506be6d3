"""phaselab: finite algebras with a monotone defect grading.

Build phases from the ``.phase`` DSL, compute their filtration, rigid core,
boundary and completion, enumerate morphisms, compare phases and run
theorem checks over an exhaustive catalogue of small phases.
"""
from __future__ import annotations

from .catalogue import CatalogueSpec, catalogue, enumerate_phases, random_phase, scramble, sweep_universe
from .dsl import load_phase, parse_phase, render_phase
from .equivalence import morita_profile, strong_equivalent, weak_equivalent
from .errors import BudgetExceeded, InputError, PhaseError
from .filtration import analysis_report, invariants, rigid_core, stratify
from .morphism import (PhaseMorphism, brute_force_homs, core_seeded_homs, enumerate_homs, is_morphism,
                       rigidity_check)
from .phase import BINARY, Phase, Signature, canonical_form, validate
from .quotient import (Congruence, boundary, collapse_stratum, completion, congruence_closure,
                       quotient_phase)
from .twocat import OrderedPhase, check_two_category_laws, two_cell
from .verifier import Verdict, run_check, search_counterexamples

__version__ = "0.1.0"

__all__ = [
    "BINARY", "BudgetExceeded", "CatalogueSpec", "Congruence", "InputError", "OrderedPhase", "Phase",
    "PhaseError", "PhaseMorphism", "Signature", "Verdict", "analysis_report", "boundary",
    "brute_force_homs", "canonical_form", "catalogue", "check_two_category_laws", "collapse_stratum",
    "completion", "congruence_closure", "core_seeded_homs", "enumerate_homs", "enumerate_phases",
    "invariants", "is_morphism", "load_phase", "morita_profile", "parse_phase", "quotient_phase",
    "random_phase", "render_phase", "rigid_core", "rigidity_check", "run_check", "scramble",
    "search_counterexamples", "strong_equivalent", "stratify", "sweep_universe", "two_cell", "validate",
    "weak_equivalent",
]
