"""MUSHRA experiment design: trial series, condition lists, randomization.

Six trial series are defined. The separated series (SHLR, QNLR, SHMS, QNMS)
carry all five quality levels of one artifact through one stereo chain; the
mixed series (SHmix, QNmix) put LR and MS renditions of two quality levels
side by side and add a mono anchor. Every series also carries the two
lowpass anchors, for exactly seven rated conditions per trial, plus the
hidden reference as the eighth stimulus.

The full default design is 4 separated series x 4 items + 2 mixed series
x 4 items = 24 trials. The 22-screen reference design dropped two cells it
does not enumerate, so the planner emits all 24 by default, notes the
difference, and accepts per-series item lists to reproduce any subset.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .artifacts import condition_label
from .errors import ContractError, InputError

SERIES_NAMES = ("SHLR", "QNLR", "SHMS", "QNMS", "SHmix", "QNmix")

HIDDEN_REFERENCE_LABEL = "REF"

# Default item assignment: each artifact gets its solo instrument, its wide
# mix and the two hard-panned items.
DEFAULT_ITEMS_BY_ARTIFACT = {
    "SH": ("glock", "Pop", "panDialogM", "panDialogF"),
    "QN": ("violin", "RnB", "panDialogM", "panDialogF"),
}

_MIXED_QUALITIES = {"SHmix": ("Q3", "Q5"), "QNmix": ("Q2", "Q3")}


@dataclass(frozen=True)
class ConditionTemplate:
    label: str
    source: str                  # quality | lowpass | mono
    kind: str | None = None
    quality: str | None = None
    mode: str | None = None
    cutoff_hz: float | None = None


@dataclass(frozen=True)
class TrialSeries:
    name: str
    conditions: tuple[ConditionTemplate, ...]

    @property
    def artifact_kind(self) -> str:
        return self.name[:2]


def _lowpass_templates() -> list[ConditionTemplate]:
    return [
        ConditionTemplate("LP3500", "lowpass", cutoff_hz=3500.0),
        ConditionTemplate("LP7000", "lowpass", cutoff_hz=7000.0),
    ]


def build_series(name: str) -> TrialSeries:
    """Condition template of one trial series (always 7 conditions)."""
    if name not in SERIES_NAMES:
        raise InputError(f"unknown trial series {name!r}; expected one of {SERIES_NAMES}")
    kind = name[:2]
    conditions: list[ConditionTemplate] = []
    if name.endswith("mix"):
        for quality in _MIXED_QUALITIES[name]:
            for mode in ("LR", "MS"):
                conditions.append(
                    ConditionTemplate(
                        condition_label(kind, quality, mode), "quality",
                        kind=kind, quality=quality, mode=mode,
                    )
                )
        conditions.append(ConditionTemplate("MONO", "mono"))
    else:
        mode = name[2:]
        for quality in ("Q1", "Q2", "Q3", "Q4", "Q5"):
            conditions.append(
                ConditionTemplate(
                    condition_label(kind, quality, mode), "quality",
                    kind=kind, quality=quality, mode=mode,
                )
            )
    conditions.extend(_lowpass_templates())
    return TrialSeries(name, tuple(conditions))


@dataclass
class Stimulus:
    stimulus_id: str
    condition: str
    file: str
    sha256: str


@dataclass
class Trial:
    trial_id: str
    item: str
    series: str
    training: bool
    reference_file: str
    reference_sha256: str
    stimuli: list[Stimulus] = field(default_factory=list)

    @property
    def rated_conditions(self) -> list[str]:
        return [s.condition for s in self.stimuli]


@dataclass
class TrialPlan:
    seed: int
    manifest_digest: str
    trials: list[Trial]
    training_trials: list[Trial]
    notes: list[str] = field(default_factory=list)

    def all_trials(self) -> list[Trial]:
        return self.training_trials + self.trials

    def trial_by_id(self, trial_id: str) -> Trial:
        for trial in self.all_trials():
            if trial.trial_id == trial_id:
                return trial
        raise KeyError(trial_id)

    def listener_schedule(self, listener_key: int) -> list[tuple[str, list[int]]]:
        """Training trials first, then shuffled test trials; each with a
        shuffled stimulus order. Reproducible from (plan seed, listener_key)."""
        order = []
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(listener_key, 0))
        )
        trial_perm = rng.permutation(len(self.trials))
        sequence = self.training_trials + [self.trials[i] for i in trial_perm]
        for position, trial in enumerate(sequence):
            trial_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=self.seed, spawn_key=(listener_key, 1 + position))
            )
            stim_perm = trial_rng.permutation(len(trial.stimuli)).tolist()
            order.append((trial.trial_id, stim_perm))
        return order

    def to_json(self) -> str:
        payload = {
            "plan_version": 1,
            "seed": self.seed,
            "manifest_digest": self.manifest_digest,
            "notes": self.notes,
            "trials": [asdict(t) for t in self.trials],
            "training_trials": [asdict(t) for t in self.training_trials],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "TrialPlan":
        payload = json.loads(text)

        def trial(d):
            stimuli = [Stimulus(**s) for s in d.pop("stimuli")]
            return Trial(stimuli=stimuli, **d)

        return cls(
            seed=payload["seed"],
            manifest_digest=payload["manifest_digest"],
            trials=[trial(d) for d in payload["trials"]],
            training_trials=[trial(d) for d in payload["training_trials"]],
            notes=payload.get("notes", []),
        )

    @classmethod
    def load(cls, path) -> "TrialPlan":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def listener_key(listener_id: str) -> int:
    return zlib.crc32(listener_id.encode("utf-8"))


def manifest_digest(manifest_path) -> str:
    return hashlib.sha256(Path(manifest_path).read_bytes()).hexdigest()


def _index_manifest(rows: list[dict]) -> dict:
    index = {}
    for row in rows:
        item = row["item"]
        if row["kind"] in ("QN", "SH"):
            key = (item, row["kind"], row["quality"], row["mode"])
        elif row["kind"] == "LP":
            key = (item, "LP", int(row["parameter"]))
        else:
            key = (item, row["kind"])
        index[key] = row
    return index


def _stimulus_id(seed: int, trial_id: str, label: str) -> str:
    digest = hashlib.sha256(f"{seed}:{trial_id}:{label}".encode("utf-8")).hexdigest()
    return digest[:16]


def _bind_trial(series: TrialSeries, item: str, index: dict, seed: int, training: bool) -> Trial:
    trial_id = f"{series.name}_{item}"

    def lookup(key, what):
        row = index.get(key)
        if row is None:
            raise InputError(f"manifest is missing {what} for trial {trial_id}")
        return row

    reference = lookup((item, "REF"), "the reference")
    stimuli = []
    for template in series.conditions:
        if template.source == "quality":
            row = lookup(
                (item, template.kind, template.quality, template.mode),
                f"condition {template.label}",
            )
        elif template.source == "lowpass":
            row = lookup((item, "LP", int(template.cutoff_hz)), f"anchor {template.label}")
        else:
            row = lookup((item, "MONO"), "the mono anchor")
        stimuli.append(
            Stimulus(_stimulus_id(seed, trial_id, template.label),
                     template.label, row["file"], row["sha256"])
        )
    stimuli.append(
        Stimulus(_stimulus_id(seed, trial_id, HIDDEN_REFERENCE_LABEL),
                 HIDDEN_REFERENCE_LABEL, reference["file"], reference["sha256"])
    )
    return Trial(trial_id, item, series.name, training,
                 reference["file"], reference["sha256"], stimuli)


def build_plan(
    manifest_rows: list[dict],
    items_by_artifact: dict | None = None,
    series_names=SERIES_NAMES,
    seed: int = 0,
    training_items=(),
    series_items: dict | None = None,
    manifest_file_digest: str = "",
) -> TrialPlan:
    """Bind series templates to manifest rows into a full trial plan.

    `series_items` overrides the item list of individual series, which is
    how a 22-trial subset of the default 24 can be configured.
    """
    items_by_artifact = dict(items_by_artifact or DEFAULT_ITEMS_BY_ARTIFACT)
    series_items = dict(series_items or {})
    index = _index_manifest(manifest_rows)

    trials = []
    for name in series_names:
        series = build_series(name)
        items = series_items.get(name, items_by_artifact.get(series.artifact_kind, ()))
        for item in items:
            trials.append(_bind_trial(series, item, index, seed, training=False))

    training_trials = []
    for i, item in enumerate(training_items):
        series = build_series(series_names[i % len(series_names)])
        training_trials.append(_bind_trial(series, item, index, seed, training=True))

    notes = []
    if len(trials) != 22:
        notes.append(
            f"plan has {len(trials)} test trials; the reference design used 22 screens. "
            "Configure per-series item lists to reproduce a subset."
        )
    plan = TrialPlan(seed, manifest_file_digest, trials, training_trials, notes)
    validate_plan(plan)
    return plan


def validate_plan(plan: TrialPlan) -> None:
    """Contract checks: 7 rated conditions + 1 hidden reference per trial,
    hidden reference bit-identical to the open reference."""
    for trial in plan.all_trials():
        hidden = [s for s in trial.stimuli if s.condition == HIDDEN_REFERENCE_LABEL]
        rated = [s for s in trial.stimuli if s.condition != HIDDEN_REFERENCE_LABEL]
        if len(hidden) != 1 or len(rated) != 7:
            raise ContractError(
                f"trial {trial.trial_id} must have 7 conditions + hidden reference, "
                f"got {len(rated)} + {len(hidden)}"
            )
        if hidden[0].sha256 != trial.reference_sha256:
            raise ContractError(
                f"trial {trial.trial_id}: hidden reference differs from the open reference"
            )
        labels = [s.condition for s in trial.stimuli]
        if len(set(labels)) != len(labels):
            raise ContractError(f"trial {trial.trial_id} has duplicate condition labels")
