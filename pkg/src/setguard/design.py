"""Default lab-cart design and the offline set pipeline built from it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from setguard.invariant import AttenuationResult, InvariantResult, attenuate, compute_max_invariant
from setguard.lti import ContinuousLTI, DiscreteLTI, FeedbackGain, closed_loop, euler_discretize, place_poles
from setguard.polytope import HPolytope, box

TRACK_LIMIT = 0.4


@dataclass(frozen=True)
class CartDesign:
    """Continuous cart model, sample time, closed-loop poles and constraints."""

    a_c: Tuple[Tuple[float, ...], ...] = ((0.0, 1.0), (0.0, -7.2))
    b_c: Tuple[Tuple[float, ...], ...] = ((0.0,), (1.6,))
    dt: float = 0.002
    poles: Tuple[float, ...] = (0.99, 0.985)
    state_lower: Tuple[float, ...] = (-TRACK_LIMIT, -math.inf)
    state_upper: Tuple[float, ...] = (TRACK_LIMIT, math.inf)
    u_max: float = 12.0
    max_iter: int = 500
    # also require |K x| <= u_max, so the override law never saturates inside O_inf
    constrain_input: bool = False

    def continuous(self) -> ContinuousLTI:
        return ContinuousLTI(np.array(self.a_c), np.array(self.b_c))

    def constraint_set(self) -> HPolytope:
        return box(self.state_lower, self.state_upper)


@dataclass(frozen=True)
class SafetySets:
    plant: DiscreteLTI
    gain: FeedbackGain
    closed: DiscreteLTI
    x_set: HPolytope
    invariant: InvariantResult
    attenuation: AttenuationResult

    @property
    def o_inf(self) -> HPolytope:
        return self.invariant.o_inf

    @property
    def s_inf(self) -> HPolytope:
        return self.attenuation.s_inf


def with_input_limit(x_set: HPolytope, gain: FeedbackGain, u_max: float) -> HPolytope:
    """``x_set`` intersected with ``{x : |K x| <= u_max}`` (single input)."""
    k = gain.k[0]
    return HPolytope(np.vstack([x_set.h_matrix, k, -k]), np.concatenate([x_set.h_vector, [u_max, u_max]]))


# sets the bundled supervisor scenarios use
SUPERVISOR_DESIGN = CartDesign(constrain_input=True)


@lru_cache(maxsize=8)
def design_sets(design: CartDesign = CartDesign()) -> SafetySets:
    plant = euler_discretize(design.continuous(), design.dt)
    gain = place_poles(plant, design.poles)
    closed = closed_loop(plant, gain)
    x_set = design.constraint_set()
    if design.constrain_input:
        x_set = with_input_limit(x_set, gain, design.u_max)
    inv = compute_max_invariant(x_set, closed.a, design.max_iter)
    att = attenuate(inv.o_inf, plant, design.u_max)
    return SafetySets(plant, gain, closed, x_set, inv, att)
