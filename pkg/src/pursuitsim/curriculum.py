"""Dual curriculum driver: staged intrinsic parameters + an archive of
unsolved scenarios.

The intrinsic schedule starts from the easiest setting (capture radius equal
to the arena radius, stationary evader), ramps the evader speed to its target
in equal parts, then shrinks the capture radius the same way. A phase advances
only when the attached trainer's policy reaches the success threshold on
freshly sampled feasible scenarios.

The external generator draws layouts from the filtered random distribution,
keeps the ones the current policy failed (zero capture return) in a bounded
archive, and resamples from that archive with probability ``p`` so training
keeps revisiting unsolved scenarios. The archive is cleared on every phase
advancement.

Trainers are pluggable: anything with ``train_on(tasks) -> results`` and
``evaluate_policy(task) -> result`` works, including a learner attached over
the bridge. Scripted trainers for driving and testing the state machine ship
below.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .episode import EpisodeOptions, EpisodeResult, run_batch
from .feasibility import task_filter_sample
from .policies import PolicyConfig
from .world import ExternalParams, IntrinsicParams, RandomizationConfig, TaskParams

ValidSampler = Callable[[np.random.Generator], ExternalParams]


class Trainer(Protocol):
    """Contract the curriculum driver needs from a learner."""

    def train_on(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]: ...

    def evaluate_policy(self, task: TaskParams) -> EpisodeResult: ...


# --- intrinsic parameter schedule -------------------------------------------------


@dataclass
class PhaseSequence:
    """Ordered intrinsic-parameter phases plus the current phase index."""

    phases: tuple[IntrinsicParams, ...]
    index: int = 0

    def __len__(self) -> int:
        return len(self.phases)

    @property
    def current(self) -> IntrinsicParams:
        return self.phases[self.index]

    @property
    def at_final(self) -> bool:
        return self.index == len(self.phases) - 1

    def advance(self) -> None:
        self.index = min(self.index + 1, len(self.phases) - 1)


def get_order(
    capture_radius_init: float,
    evader_speed_init: float,
    capture_radius_target: float,
    evader_speed_target: float,
    parts: int = 10,
) -> PhaseSequence:
    """Phase schedule: speed ramps up first, then the capture radius shrinks.

    Each nonzero interval is divided into ``parts`` equal steps, giving
    ``2 * parts + 1`` phases when both intervals are nonzero. Endpoints are
    exact: the first phase is the init pair, the last is the target pair.
    """
    if not capture_radius_init >= capture_radius_target > 0:
        raise ValueError(
            f"capture radius must shrink toward a positive target "
            f"(init {capture_radius_init}, target {capture_radius_target})"
        )
    if not evader_speed_target >= evader_speed_init >= 0:
        raise ValueError(
            f"evader speed must grow from a nonnegative init "
            f"(init {evader_speed_init}, target {evader_speed_target})"
        )
    if parts < 1:
        raise ValueError("parts must be >= 1")

    phases = [IntrinsicParams(capture_radius_init, evader_speed_init)]
    if evader_speed_target > evader_speed_init:
        step = (evader_speed_target - evader_speed_init) / parts
        for k in range(1, parts + 1):
            speed = evader_speed_target if k == parts else evader_speed_init + k * step
            phases.append(IntrinsicParams(capture_radius_init, speed))
    if capture_radius_init > capture_radius_target:
        step = (capture_radius_init - capture_radius_target) / parts
        for k in range(1, parts + 1):
            radius = (
                capture_radius_target if k == parts else capture_radius_init - k * step
            )
            phases.append(IntrinsicParams(radius, evader_speed_target))
    return PhaseSequence(phases=tuple(phases))


# --- active archive ----------------------------------------------------------------


@dataclass
class ActiveArchive:
    """Bounded queue of external layouts the current policy has not solved.

    On overflow a uniformly random existing element is evicted so the size
    stays at capacity.
    """

    capacity: int = 1024
    items: list[ExternalParams] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def add(self, external: ExternalParams, rng: np.random.Generator) -> None:
        if len(self.items) >= self.capacity:
            evict = int(rng.integers(len(self.items)))
            self.items.pop(evict)
        self.items.append(external)

    def sample(self, rng: np.random.Generator) -> ExternalParams:
        return self.items[int(rng.integers(len(self.items)))]

    def clear(self) -> None:
        self.items.clear()


def update_active_archive(
    archive: ActiveArchive, batch: Sequence[EpisodeResult], rng: np.random.Generator
) -> ActiveArchive:
    """Append the externals of every episode with zero capture return."""
    for result in batch:
        if result.capture_return == 0:
            archive.add(result.task.external, rng)
    return archive


def select_external(
    archive: ActiveArchive,
    valid_sampler: ValidSampler,
    p: float,
    rng: np.random.Generator,
) -> ExternalParams:
    """Archive draw with probability ``p`` (when non-empty), else a fresh sample."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if len(archive) > 0 and rng.random() < p:
        return archive.sample(rng)
    return valid_sampler(rng)


# --- phase evaluation ----------------------------------------------------------------


def measure_phase(
    trainer: Trainer,
    intrinsic: IntrinsicParams,
    eval_episodes: int,
    valid_sampler: ValidSampler,
    rng: np.random.Generator,
    arena=None,
) -> float:
    """Capture rate over fresh feasible scenarios at the given intrinsic pair."""
    if eval_episodes < 1:
        raise ValueError("eval_episodes must be >= 1")
    from .world import ArenaSpec

    arena = arena or ArenaSpec()
    tasks = [
        TaskParams(intrinsic=intrinsic, external=valid_sampler(rng), arena=arena)
        for _ in range(eval_episodes)
    ]
    if hasattr(trainer, "evaluate_batch"):
        results = trainer.evaluate_batch(tasks)
    else:
        results = [trainer.evaluate_policy(task) for task in tasks]
    return float(np.mean([r.capture_return > 0 for r in results]))


def evaluate_phase(
    trainer: Trainer,
    intrinsic: IntrinsicParams,
    eval_episodes: int,
    threshold: float,
    valid_sampler: ValidSampler,
    rng: np.random.Generator,
    arena=None,
) -> bool:
    """True when the policy's capture rate reaches the success threshold."""
    return (
        measure_phase(trainer, intrinsic, eval_episodes, valid_sampler, rng, arena)
        >= threshold
    )


# --- driver ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurriculumConfig:
    """Inputs of the curriculum driver.

    ``discount`` is the return discount passed through to trainers that want
    it; the engine itself never discounts. The ablation flags reproduce the
    reduced variants: ``intrinsic_enabled=False`` pins the intrinsic pair at
    its target from the start, ``external_enabled=False`` disables archive
    resampling (every layout comes fresh from the filtered distribution).
    """

    batch_size: int = 16
    archive_probability: float = 0.7
    success_threshold: float = 0.98
    eval_episodes: int = 1000
    archive_capacity: int = 1024
    max_iterations: int = 500
    parts: int = 10
    intrinsic_target: IntrinsicParams = field(default_factory=IntrinsicParams)
    intrinsic_init: IntrinsicParams | None = None
    intrinsic_enabled: bool = True
    external_enabled: bool = True
    discount: float = 0.99
    randomization: RandomizationConfig = field(default_factory=RandomizationConfig)

    def validate(self) -> None:
        if not 0.0 <= self.archive_probability <= 1.0:
            raise ValueError("archive_probability must be in [0, 1]")
        if not 0.0 < self.success_threshold <= 1.0:
            raise ValueError("success_threshold must be in (0, 1]")
        if self.batch_size < 1 or self.eval_episodes < 1 or self.max_iterations < 1:
            raise ValueError("batch_size, eval_episodes, max_iterations must be >= 1")

    def build_sequence(self) -> PhaseSequence:
        if not self.intrinsic_enabled:
            return PhaseSequence(phases=(self.intrinsic_target,))
        init = self.intrinsic_init or IntrinsicParams(
            capture_radius=self.randomization.arena.radius, evader_speed=0.0
        )
        return get_order(
            init.capture_radius,
            init.evader_speed,
            self.intrinsic_target.capture_radius,
            self.intrinsic_target.evader_speed,
            parts=self.parts,
        )


@dataclass
class CurriculumReport:
    """Per-iteration records plus the final driver status."""

    records: list[dict] = field(default_factory=list)
    completed: bool = False
    final_phase: int = 0
    total_phases: int = 0

    def to_jsonl(self) -> str:
        import json

        lines = [json.dumps(r, separators=(",", ":")) for r in self.records]
        lines.append(
            json.dumps(
                {
                    "summary": True,
                    "completed": self.completed,
                    "iterations": len(self.records),
                    "final_phase": self.final_phase,
                    "total_phases": self.total_phases,
                },
                separators=(",", ":"),
            )
        )
        return "\n".join(lines) + "\n"


def run_dual_curriculum(
    trainer: Trainer,
    config: CurriculumConfig,
    rng: np.random.Generator,
    valid_sampler: ValidSampler | None = None,
) -> CurriculumReport:
    """Drive the full dual curriculum until the final phase passes or the
    iteration budget runs out (the report is then flagged incomplete).

    Per iteration: fix the phase's intrinsic pair, build a batch of tasks with
    externals selected from the archive/filtered distribution, hand the batch
    to the trainer, fold unsolved layouts into the archive, then evaluate the
    phase and advance (clearing the archive) on success.
    """
    config.validate()
    if valid_sampler is None:
        valid_sampler = lambda r: task_filter_sample(r, config.randomization)
    if hasattr(trainer, "discount"):
        trainer.discount = config.discount  # return discount is trainer-side
    sequence = config.build_sequence()
    archive = ActiveArchive(capacity=config.archive_capacity)
    p = config.archive_probability if config.external_enabled else 0.0
    arena = config.randomization.arena
    report = CurriculumReport(total_phases=len(sequence))

    for iteration in range(config.max_iterations):
        intrinsic = sequence.current
        externals = [
            select_external(archive, valid_sampler, p, rng)
            for _ in range(config.batch_size)
        ]
        tasks = [
            TaskParams(intrinsic=intrinsic, external=ext, arena=arena)
            for ext in externals
        ]
        results = trainer.train_on(tasks)
        update_active_archive(archive, results, rng)
        batch_rate = float(np.mean([r.capture_return > 0 for r in results]))

        eval_rate = measure_phase(
            trainer, intrinsic, config.eval_episodes, valid_sampler, rng, arena
        )
        passed = eval_rate >= config.success_threshold
        advanced = passed and not sequence.at_final
        report.records.append(
            {
                "iteration": iteration,
                "phase": sequence.index,
                "capture_radius": intrinsic.capture_radius,
                "evader_speed": intrinsic.evader_speed,
                "batch_capture_rate": batch_rate,
                "eval_capture_rate": eval_rate,
                "archive_size": len(archive),
                "advanced": advanced,
            }
        )
        if passed:
            if sequence.at_final:
                report.completed = True
                break
            sequence.advance()
            archive.clear()

    report.final_phase = sequence.index
    return report


# --- scripted trainers -----------------------------------------------------------------


class HeuristicTrainer:
    """A fixed heuristic policy standing in for a learner.

    Useful for exercising the full curriculum state machine: with a pursuit
    policy faster than the evader every phase is solvable, so the driver walks
    the whole schedule. Episode seeds advance deterministically with use.
    """

    def __init__(
        self,
        config: PolicyConfig,
        options: EpisodeOptions | None = None,
        seed_base: int = 0,
    ):
        self.config = config
        self.options = options or EpisodeOptions()
        self.seed_base = seed_base
        self.discount = None  # set by the curriculum driver; unused by heuristics
        self._episodes = 0

    def _seeds(self, count: int) -> list[int]:
        seeds = [self.seed_base + self._episodes + i for i in range(count)]
        self._episodes += count
        return seeds

    def train_on(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]:
        return run_batch(tasks, self.config, self._seeds(len(tasks)), self.options)

    def evaluate_batch(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]:
        return run_batch(tasks, self.config, self._seeds(len(tasks)), self.options)

    def evaluate_policy(self, task: TaskParams) -> EpisodeResult:
        return self.evaluate_batch([task])[0]


class _SyntheticTrainer:
    """Base for trainers that fabricate outcomes without running physics."""

    captured: bool

    def __init__(self, horizon: int = 800):
        self.horizon = horizon

    def _result(self, task: TaskParams) -> EpisodeResult:
        n = task.external.n_drones
        if self.captured:
            return EpisodeResult(
                captured=True,
                capture_timestep=0,
                per_drone_return=(10.0,) * n,
                capture_return=10.0,
                task=task,
                seed=0,
            )
        return EpisodeResult(
            captured=False,
            capture_timestep=self.horizon,
            per_drone_return=(0.0,) * n,
            capture_return=0.0,
            task=task,
            seed=0,
        )

    def train_on(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]:
        return [self._result(t) for t in tasks]

    def evaluate_batch(self, tasks: Sequence[TaskParams]) -> list[EpisodeResult]:
        return [self._result(t) for t in tasks]

    def evaluate_policy(self, task: TaskParams) -> EpisodeResult:
        return self._result(task)


class AlwaysCaptureTrainer(_SyntheticTrainer):
    """Reports every episode as an immediate capture (state-machine testing)."""

    captured = True


class AlwaysFailTrainer(_SyntheticTrainer):
    """Reports every episode as unsolved, so the archive fills and phases stall."""

    captured = False
