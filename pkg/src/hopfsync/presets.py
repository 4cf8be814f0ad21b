"""Ready-made run configurations for the standard numerical experiments.

Each preset has a desk-scale form (coarse grids, fewer trials; minutes on a
laptop) and a full-fidelity form (dense grids, 200 trials per cell), chosen
with ``--full-fidelity``. Presets are partial configs merged under any config
file and flag overrides.
"""
from __future__ import annotations

import copy


def _noise_axes(lo, hi, num):
    return [
        {"param": "delta1", "min": lo, "max": hi, "num": num, "spacing": "log"},
        {"param": "delta2", "min": lo, "max": hi, "num": num, "spacing": "log"},
    ]


def _heatmap(d1, d2, num):
    return {
        "model": {"lambda0": -0.5, "d1": d1, "d2": d2},
        "sweep": {"axes": _noise_axes(0.01, 5.0, num)},
    }


DESK = {
    # single-oscillator SNR curve
    "snr-curve": {"model": {"lambda0": -0.5}, "snr": {"min": 0.01, "max": 5.0, "num": 15, "n_trials": 20}},
    # coherence-resonance curve in delta2
    "resonance-curve": {
        "model": {"lambda0": -0.5, "d1": 0.3, "d2": 0.01, "delta1": 0.05},
        "sweep": {"axes": [{"param": "delta2", "min": 0.01, "max": 5.0, "num": 15, "spacing": "log"}]},
    },
    # noise-plane heat maps, named by which coupling dominates
    "noise-plane-d1-strong": _heatmap(0.3, 0.01, 21),
    # delta2 curves for three lambda0 values
    "lambda-curves": {
        "model": {"d1": 0.3, "d2": 0.01, "delta1": 0.1},
        "sweep": {
            "axes": [
                {"param": "lambda0", "values": [-1.0, -0.5, -0.03]},
                {"param": "delta2", "min": 0.01, "max": 5.0, "num": 15, "spacing": "log"},
            ]
        },
    },
    # optimum over the noise plane as lambda0 approaches the threshold
    "lambda-optimum": {
        "model": {"d1": 0.3, "d2": 0.01},
        "sweep": {
            "axes": [{"param": "lambda0", "values": [-1.0, -0.75, -0.5, -0.3, -0.15, -0.05, -0.03]}],
            "inner": _noise_axes(0.01, 5.0, 9),
            "n_trials": 30,
        },
    },
    "noise-plane-d1-mid": _heatmap(0.2, 0.1, 21),
    "noise-plane-d2-strong": _heatmap(0.01, 0.3, 21),
    "noise-plane-d2-mid": _heatmap(0.1, 0.2, 21),
    # optimal noise ratio over the coupling plane
    "ratio-map": {
        "model": {"lambda0": -0.5},
        "sweep": {
            "axes": [
                {"param": "d1", "values": [0.01, 0.08, 0.155, 0.23, 0.3]},
                {"param": "d2", "values": [0.01, 0.08, 0.155, 0.23, 0.3]},
            ],
            "inner": _noise_axes(0.01, 0.3, 9),
            "n_trials": 30,
        },
    },
}

FULL_OVERRIDES = {
    "snr-curve": {"snr": {"num": 40, "n_trials": 200}},
    "resonance-curve": {"sweep": {"axes": [{"param": "delta2", "min": 0.01, "max": 5.0, "num": 60, "spacing": "log"}]}},
    "noise-plane-d1-strong": {"sweep": {"axes": _noise_axes(0.01, 5.0, 51)}},
    "lambda-curves": {
        "sweep": {
            "axes": [
                {"param": "lambda0", "values": [-1.0, -0.5, -0.03]},
                {"param": "delta2", "min": 0.01, "max": 5.0, "num": 60, "spacing": "log"},
            ]
        }
    },
    "lambda-optimum": {
        "sweep": {
            "axes": [{"param": "lambda0", "min": -1.0, "max": -0.01, "num": 25, "spacing": "linear"}],
            "inner": _noise_axes(0.01, 5.0, 31),
        }
    },
    "noise-plane-d1-mid": {"sweep": {"axes": _noise_axes(0.01, 5.0, 51)}},
    "noise-plane-d2-strong": {"sweep": {"axes": _noise_axes(0.01, 5.0, 51)}},
    "noise-plane-d2-mid": {"sweep": {"axes": _noise_axes(0.01, 5.0, 51)}},
    "ratio-map": {
        "sweep": {
            "axes": [
                {"param": "d1", "min": 0.01, "max": 0.3, "num": 30, "spacing": "linear"},
                {"param": "d2", "min": 0.01, "max": 0.3, "num": 30, "spacing": "linear"},
            ],
            "inner": _noise_axes(0.01, 0.3, 30),
        }
    },
}


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def get_preset(name: str, full: bool = False) -> dict:
    if name not in DESK:
        raise KeyError(name)
    cfg = copy.deepcopy(DESK[name])
    if full:
        cfg = deep_merge(cfg, FULL_OVERRIDES.get(name, {}))
        section = "snr" if "snr" in cfg else "sweep"
        cfg = deep_merge(cfg, {section: {"n_trials": 200}})
    return cfg


NAMES = tuple(DESK)
