"""Synthetic listener panels for demos and end-to-end checks.

Scores follow a plausible generative model (quality-monotone condition
means, per-listener offsets, rating noise) so the analysis stage has
realistic structure to chew on. Purely deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np

from .planning import HIDDEN_REFERENCE_LABEL, TrialPlan
from .stats import parse_quality_label


def _condition_mean(condition: str) -> float:
    if condition == HIDDEN_REFERENCE_LABEL:
        return 97.0
    if condition == "LP3500":
        return 30.0
    if condition == "LP7000":
        return 52.0
    if condition == "MONO":
        return 65.0
    kind, param, mode = parse_quality_label(condition)
    if kind == "QN":
        base = 38.0 + 2.3 * param          # 0 dB -> 38, 24 dB -> 93
    else:
        base = 86.0 - 0.88 * param         # 70% -> 24, 10% -> 77
    return base - (2.5 if mode == "MS" else 0.0)


def simulate_scores(plan: TrialPlan, num_listeners: int = 16, seed: int = 99) -> list[dict]:
    """Score rows (listener_id, item, series, condition, score) for a panel."""
    rng = np.random.default_rng(seed)
    rows = []
    for l in range(num_listeners):
        listener = f"listener{l + 1:02d}"
        offset = rng.normal(0.0, 4.0)
        for trial in plan.trials:
            for stim in trial.stimuli:
                noisy = _condition_mean(stim.condition) + offset + rng.normal(0.0, 6.0)
                rows.append(
                    {
                        "listener_id": listener,
                        "item": trial.item,
                        "series": trial.series,
                        "condition": stim.condition,
                        "score": int(np.clip(round(noisy), 0, 100)),
                    }
                )
    rows.sort(key=lambda r: (r["listener_id"], r["item"], r["series"], r["condition"]))
    return rows
