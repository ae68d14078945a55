"""Hand-tuned feedforward steering baseline.

Steering is the sum of four terms: the kinematic angle a_y*L/v_x^2, an
understeer term (first-order filter on K_us*a_y), a load-transfer /
aerodynamic compensation (first-order filter on K_ax*a_x, scaled by a_y),
and a static offset. The filter state stored for the compensation term is
the filtered value *before* multiplication by a_y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ..errors import DomainError

VX_MIN = 5.0  # m/s


@dataclass(frozen=True)
class A2rlParams:
    K_us: float  # rad s^2 / m
    T_us: float  # s
    K_ax: float  # s^2 / m
    T_ax: float  # s
    delta_off: float  # rad
    dt: float = 0.05  # s
    wheelbase: float = 3.0  # m

    def __post_init__(self):
        if self.T_us <= 0.0 or self.T_ax <= 0.0:
            raise DomainError("filter time constants must be positive")
        if self.dt <= 0.0 or self.wheelbase <= 0.0:
            raise DomainError("dt and wheelbase must be positive")
        if self.dt > self.T_us or self.dt > self.T_ax:
            raise DomainError("dt must not exceed the filter time constants")


@dataclass
class A2rlState:
    """Filter memories; zero at the start of every sequence."""

    delta_us: float = 0.0
    ax_filter: float = 0.0


def a2rl_step(a_y: float, a_x: float, v_x: float, params: A2rlParams,
              state: A2rlState) -> tuple[float, A2rlState]:
    """One controller step; returns (steering angle [rad], new state)."""
    if v_x < VX_MIN:
        raise DomainError(f"v_x = {v_x} below minimum {VX_MIN}")
    delta_kin = a_y * params.wheelbase / v_x ** 2
    delta_us = (state.delta_us
                + (params.K_us * a_y - state.delta_us) * params.dt / params.T_us)
    ax_filter = (state.ax_filter
                 + (params.K_ax * a_x - state.ax_filter) * params.dt / params.T_ax)
    delta = delta_kin + delta_us + ax_filter * a_y + params.delta_off
    return delta, A2rlState(delta_us=delta_us, ax_filter=ax_filter)


def a2rl_sequence(ay, ax, vx, params: A2rlParams) -> np.ndarray:
    """Controller output over a whole contiguous sequence, state starting at 0.

    Vectorized with first-order IIR filters; step-for-step identical to
    iterating ``a2rl_step``.
    """
    ay = np.asarray(ay, dtype=np.float64)
    ax = np.asarray(ax, dtype=np.float64)
    vx = np.asarray(vx, dtype=np.float64)
    if np.any(vx < VX_MIN):
        raise DomainError("v_x below minimum in sequence")
    a_us = params.dt / params.T_us
    a_ax = params.dt / params.T_ax
    delta_us = lfilter([a_us], [1.0, -(1.0 - a_us)], params.K_us * ay)
    ax_filter = lfilter([a_ax], [1.0, -(1.0 - a_ax)], params.K_ax * ax)
    return (ay * params.wheelbase / vx ** 2 + delta_us + ax_filter * ay
            + params.delta_off)
