"""Structured steering models built from blended local models.

Two variants share one skeleton. Each local model (i, l) predicts the
steering angle near an operating point (a_y0_i on the |a_y| axis, a_x0_l on
the a_x axis) as the kinematic angle a_y*L/v_x^2 plus learnable correction
terms; local models are blended by triangular memberships, and a final
mixing layer takes speed/longitudinal-acceleration-gated linear combinations
of the (q+1)-step window of blended predictions:

* ``base``  - per-i gains k_y1..k_y6 are constants.
* ``steer`` - k_y1 and k_y2 become polynomials in v_x (degrees n_p1, n_p2),
  which lets the model track speed-dependent handling.

Forward code is written once and runs either on a plain float64 parameter
vector or on an autodiff Node wrapping it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import autodiff as ad
from ..errors import DomainError, LayoutError
from .membership import MembershipGrid, membership_eval

VARIANTS = ("base", "steer")


@dataclass(frozen=True)
class MsNnConfig:
    variant: str
    q: int
    grid: MembershipGrid
    n_p1: int = 3  # degree of k_y1(v_x), steer only
    n_p2: int = 1  # degree of k_y2(v_x), steer only
    wheelbase: float = 3.0  # m
    sample_time: float = 0.05  # s
    vx_min: float = 5.0  # m/s

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise LayoutError(f"variant must be one of {VARIANTS}")
        if self.q < 1:
            raise LayoutError("q must be >= 1")
        if self.variant == "steer" and (self.n_p1 < 0 or self.n_p2 < 0):
            raise LayoutError("polynomial degrees must be >= 0")
        if self.wheelbase <= 0.0 or self.sample_time <= 0.0:
            raise LayoutError("wheelbase and sample_time must be positive")
        if self.vx_min <= 0.0:
            raise LayoutError("vx_min must be positive")

    @property
    def n_y(self) -> int:
        return self.grid.n_y

    @property
    def n_x(self) -> int:
        return self.grid.n_x

    @property
    def n_v(self) -> int:
        return self.grid.n_v

    @property
    def ay_block(self) -> int:
        """Learnable parameters per |a_y|-axis local model."""
        if self.variant == "steer":
            return (self.n_p1 + 1) + (self.n_p2 + 1) + 4
        return 6


def param_count(cfg: MsNnConfig) -> int:
    return (cfg.ay_block * cfg.n_y + 5 * cfg.n_x
            + (cfg.q + 1) * cfg.n_x * cfg.n_v)


def layout(cfg: MsNnConfig) -> tuple:
    """Named segments: per-i gain blocks, per-l gain blocks, per-(j,l) mixer rows.

    Within a steer ``ay_local_i`` block the order is c1[0..n_p1], c2[0..n_p2],
    k_y3..k_y6; a base block is k_y1..k_y6. An ``ax_local_l`` block is
    k_x1..k_x5. A ``mixer_j_l`` block holds the q+1 window weights.
    """
    segs = []
    pos = 0
    for i in range(cfg.n_y):
        segs.append((f"ay_local_{i}", pos, pos + cfg.ay_block))
        pos += cfg.ay_block
    for l in range(cfg.n_x):
        segs.append((f"ax_local_{l}", pos, pos + 5))
        pos += 5
    for j in range(cfg.n_v):
        for l in range(cfg.n_x):
            segs.append((f"mixer_{j}_{l}", pos, pos + cfg.q + 1))
            pos += cfg.q + 1
    return tuple(segs)


def init_params(cfg: MsNnConfig, seed: int, std: float) -> ad.ParamVector:
    """Zero gains; mixer weights 1/(q+1) + N(0, std^2).

    With zero gains every local model reduces to the kinematic steering
    angle, and uniform mixer weights average it over the window, so the
    untrained model already outputs a physically sensible steering command.
    """
    if std < 0.0:
        raise ValueError("std must be >= 0")
    values = np.zeros(param_count(cfg))
    n_f = (cfg.q + 1) * cfg.n_x * cfg.n_v
    rng = np.random.default_rng(seed)
    values[-n_f:] = 1.0 / (cfg.q + 1) + std * rng.standard_normal(n_f)
    return ad.ParamVector(values, layout(cfg))


def _gain_offsets(cfg: MsNnConfig):
    ay0 = 0
    ax0 = cfg.ay_block * cfg.n_y
    f0 = ax0 + 5 * cfg.n_x
    return ay0, ax0, f0


@dataclass(frozen=True)
class MsnnInputs:
    """Constant (parameter-independent) per-batch tensors, precomputed once.

    All tensors end in the sample and window axes (n, q+1); local-model axes
    come first so the forward pass runs as a handful of broadcasting ops over
    all (i, l) pairs at once. Only the learnable gains touch the tape, so
    everything here can be shared across training steps and sliced
    per mini-batch with :meth:`take`.
    """

    kin: np.ndarray          # (n, q+1): a_y * L / v_x^2
    s: np.ndarray            # (n, q+1): sign(a_y)
    ayc: np.ndarray          # (n_y, 1, n, q+1): a_y - a_y0_i * sign(a_y)
    axc: np.ndarray          # (1, n_x, n, q+1): a_x - a_x0_l
    axc2: np.ndarray         # axc**2
    axs: np.ndarray          # (1, n_x, n, q+1): a_x + a_x0_l
    cross: np.ndarray        # (n_y, n_x, n, q+1): ayc_i * axc_l
    phi_yx: np.ndarray       # (n_y, n_x, n, q+1): phi_i(|a_y|) * phi_l(a_x)
    phi_vx: np.ndarray       # (n_v * n_x, n, q+1): phi_j(v_x) * phi_l(a_x)
    vpow1: np.ndarray | None  # (n_p1 + 1, n, q+1): v_x ** s (steer only)
    vpow2: np.ndarray | None  # (n_p2 + 1, n, q+1)

    def take(self, idx) -> "MsnnInputs":
        """Sub-batch along the sample axis; ``idx`` is a slice or index array."""
        return MsnnInputs(
            self.kin[idx], self.s[idx], self.ayc[:, :, idx], self.axc[:, :, idx],
            self.axc2[:, :, idx], self.axs[:, :, idx], self.cross[:, :, idx],
            self.phi_yx[:, :, idx], self.phi_vx[:, idx],
            None if self.vpow1 is None else self.vpow1[:, idx],
            None if self.vpow2 is None else self.vpow2[:, idx])

    def __len__(self):
        return self.kin.shape[0]


def prepare(cfg: MsNnConfig, ay, ax, vx) -> MsnnInputs:
    ay = np.atleast_2d(np.asarray(ay, dtype=np.float64))
    ax = np.atleast_2d(np.asarray(ax, dtype=np.float64))
    vx = np.atleast_2d(np.asarray(vx, dtype=np.float64))
    if ay.shape != ax.shape or ay.shape != vx.shape:
        raise LayoutError("window arrays must share one shape")
    if ay.shape[1] != cfg.q + 1:
        raise LayoutError(f"windows have length {ay.shape[1]}, config wants {cfg.q + 1}")
    if np.any(vx < cfg.vx_min):
        k = np.argwhere(vx < cfg.vx_min)[0]
        raise DomainError(
            f"v_x = {vx[tuple(k)]:.3f} m/s at sample {k[0]} below "
            f"minimum {cfg.vx_min} m/s")
    s = np.sign(ay)
    kin = ay * (cfg.wheelbase / vx ** 2)
    cy = cfg.grid.centers_ay[:, None, None, None]
    cx = cfg.grid.centers_ax[None, :, None, None]
    ayc = ay[None, None] - cy * s[None, None]
    axc = ax[None, None] - cx
    phi_y = membership_eval(cfg.grid.ay, ay)
    phi_x = membership_eval(cfg.grid.ax, ax)
    phi_v = membership_eval(cfg.grid.vx, vx)
    phi_vx = (phi_v[:, None] * phi_x[None, :]).reshape(-1, *ay.shape)
    if cfg.variant == "steer":
        vpow1 = vx[None] ** np.arange(cfg.n_p1 + 1)[:, None, None]
        vpow2 = vx[None] ** np.arange(cfg.n_p2 + 1)[:, None, None]
    else:
        vpow1 = vpow2 = None
    return MsnnInputs(kin=kin, s=s, ayc=ayc, axc=axc, axc2=axc ** 2,
                      axs=ax[None, None] + cx, cross=ayc * axc,
                      phi_yx=phi_y[:, None] * phi_x[None, :],
                      phi_vx=phi_vx, vpow1=vpow1, vpow2=vpow2)


def _check_length(cfg: MsNnConfig, p) -> None:
    n = len(p)
    want = param_count(cfg)
    if n != want:
        raise LayoutError(f"parameter vector has {n} entries, "
                          f"{cfg.variant} layout wants {want}")


def _poly_gain(p, idx, vpow):
    """(n_y, 1, n, q+1) gain tensor sum_s c[i, s] * v_x**s for every i."""
    coeffs = p[idx]  # (n_y, deg+1)
    flat = ad.matmul(coeffs, vpow.reshape(vpow.shape[0], -1))
    return ad.reshape(flat, (idx.shape[0], 1) + vpow.shape[1:])


def _blend_window(p, prep: MsnnInputs, cfg: MsNnConfig):
    """Membership-blended local steering over the window; (n, q+1).

    All (i, l) local models evaluate at once: per-i gains are gathered into
    (n_y, 1, 1, 1) tensors, per-l gains into (1, n_x, 1, 1), and numpy
    broadcasting does the pairing.
    """
    _check_length(cfg, p)
    ay0, ax0, _ = _gain_offsets(cfg)
    block = cfg.ay_block
    rows = ay0 + block * np.arange(cfg.n_y)
    if cfg.variant == "steer":
        k1 = _poly_gain(p, rows[:, None] + np.arange(cfg.n_p1 + 1), prep.vpow1)
        k2 = _poly_gain(p, rows[:, None] + cfg.n_p1 + 1 + np.arange(cfg.n_p2 + 1),
                        prep.vpow2)
        o3 = rows.reshape(-1, 1, 1, 1) + block - 4
    else:
        o3 = rows.reshape(-1, 1, 1, 1) + 2
        k1, k2 = p[o3 - 2], p[o3 - 1]
    ky3, ky4, ky5, ky6 = p[o3], p[o3 + 1], p[o3 + 2], p[o3 + 3]
    cols = (ax0 + 5 * np.arange(cfg.n_x)).reshape(1, -1, 1, 1)
    kx1, kx2, kx3, kx4, kx5 = (p[cols + m] for m in range(5))
    lead = k1 * prep.s + k2 * prep.ayc
    dy = prep.ayc - ky4 * prep.s
    dxs = kx2 + prep.axs
    bracket = ((1.0 + kx3 * prep.axc + kx4 * prep.axc2) + ky5 * prep.ayc
               + (ky6 * kx5) * prep.cross)
    local = lead + (ky3 * kx1) * dy * dxs * bracket
    # Every local model shares the kinematic term; memberships are a
    # partition of unity, so it is added once after blending the rest.
    return ad.nsum(local * prep.phi_yx, axis=(0, 1)) + prep.kin


def predict_prepared(p, prep: MsnnInputs, cfg: MsNnConfig):
    """Steering angle per sample [rad]; p is an ndarray or autodiff Node."""
    g = _blend_window(p, prep, cfg)
    _, _, f0 = _gain_offsets(cfg)
    q1 = cfg.q + 1
    f = ad.reshape(p[f0:f0 + cfg.n_v * cfg.n_x * q1], (-1, 1, q1))
    mix = ad.nsum(prep.phi_vx * f, axis=0)
    return ad.nsum(g * mix, axis=1)


def predict(p, ay, ax, vx, cfg: MsNnConfig):
    """Convenience forward over raw window arrays."""
    return predict_prepared(p, prepare(cfg, ay, ax, vx), cfg)


def steady_state_window(inp, params: ad.ParamVector, cfg: MsNnConfig) -> np.ndarray:
    """The blended quasi-steady-state steering predictions, length q+1 [rad]."""
    prep = prepare(cfg, inp.ay_window, inp.ax_window, inp.vx_window)
    return _blend_window(params.values, prep, cfg)[0]


def forward(inp, params: ad.ParamVector, cfg: MsNnConfig) -> float:
    """Steering angle for one windowed input [rad]."""
    prep = prepare(cfg, inp.ay_window, inp.ax_window, inp.vx_window)
    return float(predict_prepared(params.values, prep, cfg)[0])


def local_steering(a_y: float, v_x: float, a_x: float, i: int, l: int,
                   params: ad.ParamVector, cfg: MsNnConfig) -> float:
    """One local model's steering angle [rad], written out term by term.

    Reference scalar path used by tests to pin down the vectorized forward.
    """
    if v_x < cfg.vx_min:
        raise DomainError(f"v_x = {v_x} below minimum {cfg.vx_min}")
    gy = params.segment(f"ay_local_{i}")
    kx1, kx2, kx3, kx4, kx5 = params.segment(f"ax_local_{l}")
    ay0 = cfg.grid.centers_ay[i]
    ax0 = cfg.grid.centers_ax[l]
    s = float(np.sign(a_y))
    if cfg.variant == "steer":
        c1 = gy[:cfg.n_p1 + 1]
        c2 = gy[cfg.n_p1 + 1:cfg.n_p1 + 1 + cfg.n_p2 + 1]
        ky1 = sum(c * v_x ** k for k, c in enumerate(c1))
        ky2 = sum(c * v_x ** k for k, c in enumerate(c2))
        ky3, ky4, ky5, ky6 = gy[-4:]
    else:
        ky1, ky2, ky3, ky4, ky5, ky6 = gy
    ayc = a_y - ay0 * s
    axc = a_x - ax0
    return (a_y * cfg.wheelbase / v_x ** 2
            + ky1 * s
            + ky2 * ayc
            + ky3 * kx1 * (a_y - (ay0 + ky4) * s) * (kx2 + a_x + ax0)
            * (1.0 + ky5 * ayc + kx3 * axc + kx4 * axc ** 2
               + ky6 * kx5 * ayc * axc))


def with_grid(cfg: MsNnConfig, grid: MembershipGrid) -> MsNnConfig:
    return replace(cfg, grid=grid)
