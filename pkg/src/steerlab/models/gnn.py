"""General-purpose two-layer benchmark network.

The three input windows are concatenated into one vector of length 3(q+1)
and passed through a dense layer with ELU activation, then a dense scalar
output layer. Sized so its parameter count roughly matches the structured
steering model it is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..errors import LayoutError


@dataclass(frozen=True)
class GnnConfig:
    q: int
    n_neur: int = 5

    def __post_init__(self):
        if self.q < 1 or self.n_neur < 1:
            raise LayoutError("q and n_neur must be >= 1")

    @property
    def n_inputs(self) -> int:
        return 3 * (self.q + 1)


def param_count(cfg: GnnConfig) -> int:
    return (cfg.n_inputs + 1) * cfg.n_neur + cfg.n_neur + 1


def layout(cfg: GnnConfig) -> tuple:
    d, n = cfg.n_inputs, cfg.n_neur
    return (("layer1_w", 0, d * n),
            ("layer1_b", d * n, d * n + n),
            ("layer2_w", d * n + n, d * n + 2 * n),
            ("layer2_b", d * n + 2 * n, d * n + 2 * n + 1))


def init_params(cfg: GnnConfig, seed: int, std: float) -> ad.ParamVector:
    """All weights and biases drawn from N(0, std^2)."""
    if std < 0.0:
        raise ValueError("std must be >= 0")
    rng = np.random.default_rng(seed)
    return ad.ParamVector(std * rng.standard_normal(param_count(cfg)),
                          layout(cfg))


@dataclass(frozen=True)
class GnnInputs:
    x: np.ndarray  # (n, 3(q+1)) concatenated windows

    def take(self, idx) -> "GnnInputs":
        return GnnInputs(self.x[idx])

    def __len__(self):
        return self.x.shape[0]


def prepare(cfg: GnnConfig, ay, ax, vx) -> GnnInputs:
    ay = np.atleast_2d(np.asarray(ay, dtype=np.float64))
    ax = np.atleast_2d(np.asarray(ax, dtype=np.float64))
    vx = np.atleast_2d(np.asarray(vx, dtype=np.float64))
    if ay.shape != ax.shape or ay.shape != vx.shape:
        raise LayoutError("window arrays must share one shape")
    if ay.shape[1] != cfg.q + 1:
        raise LayoutError(f"windows have length {ay.shape[1]}, config wants {cfg.q + 1}")
    return GnnInputs(np.concatenate([ay, ax, vx], axis=1))


def predict_prepared(p, prep: GnnInputs, cfg: GnnConfig):
    if len(p) != param_count(cfg):
        raise LayoutError(f"parameter vector has {len(p)} entries, "
                          f"layout wants {param_count(cfg)}")
    d, n = cfg.n_inputs, cfg.n_neur
    w1 = ad.reshape(p[:d * n], (d, n))
    b1 = p[d * n:d * n + n]
    w2 = p[d * n + n:d * n + 2 * n]
    b2 = p[d * n + 2 * n]
    hidden = ad.elu(ad.matmul(prep.x, w1) + b1)
    return ad.matmul(hidden, w2) + b2


def predict(p, ay, ax, vx, cfg: GnnConfig):
    return predict_prepared(p, prepare(cfg, ay, ax, vx), cfg)


def forward(inp, params: ad.ParamVector, cfg: GnnConfig) -> float:
    """Steering angle for one windowed input [rad]."""
    prep = prepare(cfg, inp.ay_window, inp.ax_window, inp.vx_window)
    return float(ad.value_of(predict_prepared(params.values, prep, cfg))[0])
