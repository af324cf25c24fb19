"""Multi-stage pretraining plans: validation and per-stage manifests.

A plan is a chain of training stages. The grammar is deliberately
narrow: a classification warm-up stage, then detection stages, each
initialized from its predecessor. A classification stage yields only a
backbone, so the stage after it can transfer nothing more; a detection
stage yields a full detector, and the stage after it continues from the
whole framework. Those two production rules admit exactly one 2-stage
chain (cls -> det via backbone) and one 3-stage chain
(cls -> det via backbone -> det via framework).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .errors import PlanError
from .fileio import atomic_write_text

TASKS = ("cls", "det")
INITS = ("random", "from_previous")
COMPONENTS = ("backbone", "framework")


@dataclass(frozen=True)
class Stage:
    task: str
    dataset_ref: str
    init: str
    transfer_component: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise PlanError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.init not in INITS:
            raise PlanError(f"unknown init {self.init!r}; expected one of {INITS}")
        if self.transfer_component is not None \
                and self.transfer_component not in COMPONENTS:
            raise PlanError(
                f"unknown transfer component {self.transfer_component!r}; "
                f"expected one of {COMPONENTS}")
        if not self.dataset_ref:
            raise PlanError("stage needs a dataset_ref")


@dataclass(frozen=True)
class StagePlan:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))


class ValidationReport(NamedTuple):
    ok: bool
    violations: tuple[str, ...]


def validate_plan(p: StagePlan) -> ValidationReport:
    """Check a plan against the chain grammar; violations are data."""
    violations: list[str] = []
    stages = p.stages
    if not stages:
        return ValidationReport(False, ("plan has no stages",))

    for k, stage in enumerate(stages):
        where = f"stage {k + 1}"
        if k == 0:
            if stage.init != "random":
                violations.append(f"{where}: first stage must declare init=random")
            if stage.task != "cls":
                violations.append(
                    f"{where}: chains start with a classification stage")
            if stage.transfer_component is not None:
                violations.append(
                    f"{where}: random init takes no transfer component")
            continue

        prev = stages[k - 1]
        if stage.init != "from_previous":
            violations.append(f"{where}: later stages must init from_previous")
        if stage.task != "det":
            violations.append(f"{where}: later stages must be detection stages")
        if stage.init == "from_previous" and stage.transfer_component is None:
            violations.append(
                f"{where}: from_previous requires a transfer component")
        if stage.transfer_component == "framework" and prev.task != "det":
            violations.append(
                f"{where}: framework transfer requires a detection predecessor "
                f"(a {prev.task} stage yields only a backbone)")
        if stage.transfer_component == "backbone" and prev.task != "cls":
            violations.append(
                f"{where}: a detection predecessor hands over its whole "
                f"framework; backbone transfer applies after classification")
    return ValidationReport(not violations, tuple(violations))


class StageDefaults(NamedTuple):
    optimizer: str
    batch_size: int
    learning_rate: float
    epochs: int


# Published training settings per (task, dataset); unseen det datasets
# fall back to the generic pretrain/finetune rows.
STAGE_DEFAULTS: dict[tuple[str, str], StageDefaults] = {
    ("cls", "ImageNet"): StageDefaults("AdamW", 512, 1e-8, 100),
    ("det", "DOTA"): StageDefaults("AdamW", 16, 1e-4, 12),
    ("det", "DIOR"): StageDefaults("AdamW", 16, 1e-4, 12),
    ("det", "SARDet-100k"): StageDefaults("AdamW", 16, 1e-4, 12),
    ("det", "SSDD"): StageDefaults("AdamW", 32, 2.5e-4, 12),
    ("det", "HRSID"): StageDefaults("AdamW", 32, 2.5e-4, 12),
}
_FALLBACK = {
    "cls": StageDefaults("AdamW", 512, 1e-8, 100),
    "det": StageDefaults("AdamW", 16, 1e-4, 12),
}


def stage_manifest(stage: Stage, index: int,
                   overrides: Mapping[str, object] | None = None) -> dict:
    """Inert per-stage config for an external trainer."""
    defaults = STAGE_DEFAULTS.get((stage.task, stage.dataset_ref),
                                  _FALLBACK[stage.task])
    manifest = {
        "stage": index,
        "task": stage.task,
        "dataset": stage.dataset_ref,
        "init": stage.init,
        "transfer_component": stage.transfer_component or "none",
        "optimizer": defaults.optimizer,
        "batch_size": defaults.batch_size,
        "learning_rate": defaults.learning_rate,
        "epochs": defaults.epochs,
    }
    for key, value in (overrides or {}).items():
        if key not in manifest:
            raise PlanError(f"unknown manifest override {key!r}")
        manifest[key] = value
    return manifest


def emit_stage_manifests(p: StagePlan, out_dir=None,
                         overrides: Mapping[str, object] | None = None) -> list[dict]:
    """One manifest per stage; written as key=value files under out_dir."""
    report = validate_plan(p)
    if not report.ok:
        raise PlanError("invalid plan: " + "; ".join(report.violations))
    manifests = [stage_manifest(stage, k + 1, overrides)
                 for k, stage in enumerate(p.stages)]
    if out_dir is not None:
        from pathlib import Path
        for m in manifests:
            lines = [f"{key}={m[key]}" for key in sorted(m)]
            atomic_write_text(Path(out_dir) / f"stage{m['stage']}.cfg",
                              "\n".join(lines) + "\n")
    return manifests


def plan_from_dicts(stages: Sequence[Mapping[str, object]]) -> StagePlan:
    """Build a plan from parsed JSON stage descriptions."""
    out = []
    for k, s in enumerate(stages):
        unknown = set(s) - {"task", "dataset", "init", "transfer_component"}
        if unknown:
            raise PlanError(f"stage {k + 1}: unknown fields {sorted(unknown)}")
        try:
            out.append(Stage(str(s["task"]), str(s["dataset"]), str(s["init"]),
                             s.get("transfer_component")))
        except KeyError as exc:
            raise PlanError(f"stage {k + 1}: missing field {exc.args[0]!r}") from None
    return StagePlan(tuple(out))
