"""Reversing steps in Petri nets and step transition systems."""

from .algebra import EMPTY, ActionName, Multiset, Vector, action, marking, step
from .constructions import (
    TransformReport,
    add_direction_mutexes,
    check_lift_preconditions,
    check_split_reverse_net,
    combine_reversal,
    lift_to_mixed,
    mix2set_transform,
    normalize_reverse_arcs,
    split_reverse_with_read_arcs,
)
from .errors import SteprevError
from .petri import PTNet, PTRNet, build_crg, check_reverse_structure, subnet
from .reversal import SplitReverseCandidate, noidx_system, reverse, reverse_multi, verify_split_reverse
from .sts import (
    StepTransitionSystem,
    check_inclusion,
    check_isomorphism,
    cycle_lattice,
    displacement,
    home_states,
    is_home_cover,
    restrict,
    successor,
    validate_cest,
)
from .synthesis import (
    decide_direct_reversibility_set,
    decide_mixed_reversibility,
    is_step_finite,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
