"""Normalized triangular membership (activation) functions.

Each axis carries strictly increasing centers; activations are piecewise
linear between adjacent centers, 1 at their own center, 0 at the neighbors,
and saturate to 1 beyond the outer centers. By construction they form an
exact partition of unity, which makes blended local models interpolate their
values at the centers. The lateral-acceleration axis evaluates on |a_y|
(odd symmetry is carried by the sign terms inside the local models), so its
centers are non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, NumericError


@dataclass(frozen=True)
class MembershipAxis:
    """Centers [axis units] plus whether inputs are rectified first."""

    centers: np.ndarray
    abs_input: bool = False

    def __post_init__(self):
        object.__setattr__(self, "centers",
                           np.array(self.centers, dtype=np.float64, copy=True))
        if self.centers.ndim != 1 or self.centers.size < 2:
            raise DataError("a membership axis needs at least 2 centers")
        if np.any(np.diff(self.centers) <= 0.0):
            raise DataError("membership centers must be strictly increasing")
        if self.abs_input and self.centers[0] < 0.0:
            raise DataError("centers on a rectified axis must be non-negative")

    @property
    def n(self) -> int:
        return self.centers.size

    @property
    def half_widths(self) -> np.ndarray:
        """Distance between adjacent centers; the support of each linear flank."""
        return np.diff(self.centers)


def membership_eval(axis: MembershipAxis, x) -> np.ndarray:
    """Activations of every center at ``x``; shape (n,) + x.shape.

    Saturates outside the outer centers, sums to 1 everywhere.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise NumericError("membership input contains NaN")
    if axis.abs_input:
        x = np.abs(x)
    c = axis.centers
    k = np.clip(np.searchsorted(c, x, side="right") - 1, 0, c.size - 2)
    w = np.clip((x - c[k]) / (c[k + 1] - c[k]), 0.0, 1.0)
    out = np.zeros((c.size,) + x.shape)
    grid = tuple(np.indices(x.shape))
    out[(k,) + grid] = 1.0 - w
    out[(k + 1,) + grid] += w
    return out


@dataclass(frozen=True)
class MembershipGrid:
    """Local-model centers for the |a_y|, a_x and v_x axes."""

    ay: MembershipAxis
    ax: MembershipAxis
    vx: MembershipAxis

    def __post_init__(self):
        if not self.ay.abs_input:
            raise DataError("the a_y axis must evaluate on |a_y|")

    @property
    def centers_ay(self) -> np.ndarray:
        return self.ay.centers

    @property
    def centers_ax(self) -> np.ndarray:
        return self.ax.centers

    @property
    def centers_vx(self) -> np.ndarray:
        return self.vx.centers

    @property
    def n_y(self) -> int:
        return self.ay.n

    @property
    def n_x(self) -> int:
        return self.ax.n

    @property
    def n_v(self) -> int:
        return self.vx.n

    @classmethod
    def from_centers(cls, centers_ay, centers_ax, centers_vx) -> "MembershipGrid":
        return cls(ay=MembershipAxis(centers_ay, abs_input=True),
                   ax=MembershipAxis(centers_ax),
                   vx=MembershipAxis(centers_vx))

    @classmethod
    def from_ranges(cls, ay_max: float, ax_range, vx_range,
                    n_y: int, n_x: int, n_v: int) -> "MembershipGrid":
        """Uniform centers: a_y on [0, ay_max], a_x and v_x on their ranges."""
        if ay_max <= 0.0:
            raise DataError("ay_max must be positive")
        return cls.from_centers(np.linspace(0.0, ay_max, n_y),
                                np.linspace(ax_range[0], ax_range[1], n_x),
                                np.linspace(vx_range[0], vx_range[1], n_v))

    @classmethod
    def from_records(cls, records, n_y: int, n_x: int, n_v: int) -> "MembershipGrid":
        """Uniform centers spanning the data ranges of a record list."""
        ay = np.array([r.a_y for r in records])
        ax = np.array([r.a_x for r in records])
        vx = np.array([r.v_x for r in records])
        return cls.from_ranges(float(np.max(np.abs(ay))),
                               (float(ax.min()), float(ax.max())),
                               (float(vx.min()), float(vx.max())),
                               n_y, n_x, n_v)
