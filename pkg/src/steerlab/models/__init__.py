"""Steering controller models: structured local-model networks, a
general-purpose NN benchmark, and the filtered feedforward baseline."""

from __future__ import annotations

from dataclasses import dataclass

from ..autodiff import ParamVector
from ..errors import DataError
from . import a2rl as _a2rl
from . import gnn as _gnn
from . import msnn as _msnn
from .a2rl import A2rlParams, A2rlState, a2rl_sequence, a2rl_step
from .gnn import GnnConfig
from .io import (a2rl_from_dict, a2rl_to_dict, config_from_dict,
                 config_to_dict, grid_from_dict, grid_to_dict, load_model,
                 save_model)
from .gnn import param_count as gnn_param_count
from .membership import MembershipAxis, MembershipGrid, membership_eval
from .msnn import MsNnConfig, local_steering, steady_state_window
from .msnn import param_count as msnn_param_count

GRADIENT_KINDS = ("msnn-steer", "msnn-base", "gnn")


@dataclass(frozen=True)
class Model:
    """Uniform handle over the gradient-trained models.

    Bundles a kind string with its config and dispatches layout, init and
    the dual-mode (ndarray / autodiff Node) batched forward.
    """

    kind: str
    config: object

    def __post_init__(self):
        if self.kind not in GRADIENT_KINDS:
            raise DataError(f"unknown model kind {self.kind!r}")

    @property
    def _mod(self):
        return _gnn if self.kind == "gnn" else _msnn

    def param_count(self) -> int:
        return self._mod.param_count(self.config)

    def layout(self) -> tuple:
        return self._mod.layout(self.config)

    def init(self, seed: int, std: float) -> ParamVector:
        return self._mod.init_params(self.config, seed, std)

    def prepare(self, batch):
        """Precompute parameter-independent tensors for a WindowBatch."""
        return self._mod.prepare(self.config, batch.ay, batch.ax, batch.vx)

    def predict_prepared(self, p, prep):
        return self._mod.predict_prepared(p, prep, self.config)

    def predict_batch(self, values, batch):
        """Tape-free predictions (n,) for a WindowBatch."""
        return self._mod.predict_prepared(
            values, self._mod.prepare(self.config, batch.ay, batch.ax, batch.vx),
            self.config)

    def forward_fn(self):
        """(p, ay, ax, vx) -> predictions; the surface eval_loss_and_grad wants."""
        cfg, mod = self.config, self._mod
        return lambda p, ay, ax, vx: mod.predict_prepared(
            p, mod.prepare(cfg, ay, ax, vx), cfg)


def make_model(kind: str, config) -> Model:
    variant = {"msnn-steer": "steer", "msnn-base": "base"}.get(kind)
    if variant is not None and config.variant != variant:
        raise DataError(f"config variant {config.variant!r} does not match {kind!r}")
    return Model(kind=kind, config=config)


def msnn_kind(config: MsNnConfig) -> str:
    return "msnn-steer" if config.variant == "steer" else "msnn-base"
