"""JSON save/load for model configs and trained parameters.

Document schema::

    {"kind": "msnn-steer" | "msnn-base" | "gnn",
     "config": {...},
     "layout": [[name, start, stop], ...],
     "params": [...]}
"""

from __future__ import annotations

import json

from ..autodiff import ParamVector
from ..errors import DataError
from .membership import MembershipGrid
from .msnn import MsNnConfig
from .gnn import GnnConfig
from .a2rl import A2rlParams


def grid_to_dict(grid: MembershipGrid) -> dict:
    return {"centers_ay": grid.centers_ay.tolist(),
            "centers_ax": grid.centers_ax.tolist(),
            "centers_vx": grid.centers_vx.tolist()}


def grid_from_dict(d: dict) -> MembershipGrid:
    return MembershipGrid.from_centers(d["centers_ay"], d["centers_ax"],
                                       d["centers_vx"])


def config_to_dict(kind: str, config) -> dict:
    if kind in ("msnn-steer", "msnn-base"):
        return {"q": config.q, "n_p1": config.n_p1, "n_p2": config.n_p2,
                "wheelbase": config.wheelbase, "sample_time": config.sample_time,
                "vx_min": config.vx_min, "grid": grid_to_dict(config.grid)}
    if kind == "gnn":
        return {"q": config.q, "n_neur": config.n_neur}
    raise DataError(f"unknown model kind {kind!r}")


def config_from_dict(kind: str, d: dict):
    if kind in ("msnn-steer", "msnn-base"):
        return MsNnConfig(variant=kind.split("-")[1], q=d["q"],
                          grid=grid_from_dict(d["grid"]),
                          n_p1=d.get("n_p1", 3), n_p2=d.get("n_p2", 1),
                          wheelbase=d.get("wheelbase", 3.0),
                          sample_time=d.get("sample_time", 0.05),
                          vx_min=d.get("vx_min", 5.0))
    if kind == "gnn":
        return GnnConfig(q=d["q"], n_neur=d.get("n_neur", 5))
    raise DataError(f"unknown model kind {kind!r}")


def save_model(path, kind: str, config, params: ParamVector) -> None:
    doc = {"kind": kind,
           "config": config_to_dict(kind, config),
           "layout": [[name, start, stop] for name, start, stop in params.layout],
           "params": params.values.tolist()}
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Returns (kind, config, ParamVector)."""
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    kind = doc["kind"]
    config = config_from_dict(kind, doc["config"])
    layout = tuple((name, int(a), int(b)) for name, a, b in doc["layout"])
    params = ParamVector(doc["params"], layout)
    return kind, config, params


def a2rl_to_dict(params: A2rlParams) -> dict:
    return {"K_us": params.K_us, "T_us": params.T_us, "K_ax": params.K_ax,
            "T_ax": params.T_ax, "delta_off": params.delta_off,
            "dt": params.dt, "wheelbase": params.wheelbase}


def a2rl_from_dict(d: dict) -> A2rlParams:
    return A2rlParams(K_us=d["K_us"], T_us=d["T_us"], K_ax=d["K_ax"],
                      T_ax=d["T_ax"], delta_off=d["delta_off"],
                      dt=d.get("dt", 0.05), wheelbase=d.get("wheelbase", 3.0))
