"""Replicable active learners built on randomized threshold grids.

Both learners keep every internal random choice on the shared random string,
under a fixed label inventory, so paired runs stay aligned no matter how
their data differs:

- "grid-origin", "grid-origin-final": uniform draws placing the grid origins;
- "grid-index": the selected threshold slot (reused by the final grid);
- "region-estimate-{r}" / "region-estimate-final": one grid offset per
  disagreement-mass query, keyed by round so runs that exit at different
  rounds still share every offset they both use;
- "final-order": one permutation of the class's distinct prediction
  signatures; the first surviving signature under it is returned.

Data randomness (which points are drawn, which labels flip) never touches the
shared string; it comes from the caller's numpy Generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .baselines import ROUND_CAP_FACTOR, Constants, RoundRecord, RunResult, _result
from .core import (
    PROB_TOL,
    DataModel,
    HypothesisClass,
    ParameterError,
    RoundCapExceededError,
    SampleCounters,
    VersionSpace,
    WrongSettingError,
    disagreement_coefficient,
    disagreement_mask,
    empirical_errors_from_counts,
    noise_rate,
    sample_labeled_counts,
)
from .randomness import RandomString
from .rstat import SQParams, required_sample_size, rstat_answer_from_mean

GRID_PHASES = ("realizable", "agnostic-loop", "agnostic-final")


@dataclass(frozen=True)
class ThresholdGrid:
    """A randomly placed uniform grid of candidate error thresholds.

    The usable error range [origin, origin + range_top) is split into
    count + 1 equal intervals; the selectable thresholds are the midpoints of
    intervals 1..count, and ``selected_index`` names the one in use.
    """

    origin: float
    spacing: float
    count: int
    selected_index: int
    range_top: float
    phase: str

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError("grid needs at least one selectable threshold")
        if not 0 <= self.selected_index < self.count:
            raise ParameterError(
                f"selected index {self.selected_index} out of range for count {self.count}"
            )
        if self.spacing <= 0.0:
            raise ParameterError("grid spacing must be positive")
        if abs(self.spacing * (self.count + 1) - self.range_top) > PROB_TOL:
            raise ParameterError("spacing must divide the range exactly")

    @property
    def threshold(self) -> float:
        """The error cutoff in use: midpoint of interval selected_index + 1."""
        return self.origin + (self.selected_index + 1.5) * self.spacing

    @property
    def n_intervals(self) -> int:
        return self.count + 1

    def selectable_thresholds(self) -> np.ndarray:
        return self.origin + (np.arange(self.count) + 1.5) * self.spacing

    def interval_edges(self) -> np.ndarray:
        """Edges of the n_intervals partition cells, length n_intervals + 1."""
        return self.origin + np.arange(self.n_intervals + 1) * self.spacing

    def interval_of(self, value: float) -> int:
        """Index of the partition cell containing ``value``, clamped to range."""
        raw = int(math.floor((value - self.origin) / self.spacing))
        return min(max(raw, 0), self.n_intervals - 1)


def grid_interval_count(class_size: int, rho: float, constants: Optional[Constants] = None) -> int:
    """Number of selectable thresholds; grows with log of the class size."""
    if class_size < 1:
        raise ParameterError("class size must be positive")
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"replicability budget must lie in (0, 1), got {rho}")
    constants = constants or Constants()
    return max(1, int(math.floor(constants.c_grid * math.log(class_size) / rho**2)))


def grid_range_top(
    theta: float, phase: str, eps: Optional[float] = None, nu: Optional[float] = None
) -> float:
    """Width of the threshold range for each phase of the two learners."""
    if theta <= 0.0:
        raise ParameterError("grid construction needs a positive disagreement coefficient")
    if phase == "realizable":
        return 1.0 / (8.0 * theta)
    if phase == "agnostic-loop":
        if nu is None or nu <= 0.0:
            raise ParameterError("agnostic grid phases need a positive noise rate")
        return 1.0 / (32.0 * theta)
    if phase == "agnostic-final":
        if nu is None or nu <= 0.0:
            raise ParameterError("agnostic grid phases need a positive noise rate")
        if eps is None or not 0.0 < eps < 1.0:
            raise ParameterError("final grid phase needs an accuracy target in (0, 1)")
        return eps / (64.0 * theta * nu)
    raise ParameterError(f"unknown grid phase {phase!r}; expected one of {GRID_PHASES}")


def build_grid(
    theta: float,
    rho: float,
    class_size: int,
    phase: str,
    rs: RandomString,
    eps: Optional[float] = None,
    nu: Optional[float] = None,
    constants: Optional[Constants] = None,
    reuse_index: Optional[int] = None,
) -> ThresholdGrid:
    """Draw a threshold grid for one learner phase from the shared string.

    The origin is uniform over [0, 2 * range_top), so thresholds can land
    anywhere in (0, 3 * range_top).  All phases share one interval count, so
    the final grid can reuse the loop grid's selected slot via
    ``reuse_index``.
    """
    top = float(grid_range_top(theta, phase, eps, nu))
    m = grid_interval_count(class_size, rho, constants)
    spacing = top / (m + 1)
    label = "grid-origin-final" if phase == "agnostic-final" else "grid-origin"
    origin = rs.derive_uniform(label) * 2.0 * top
    if reuse_index is None:
        index = rs.derive_choice("grid-index", m)
    else:
        if not 0 <= reuse_index < m:
            raise ParameterError(f"reused index {reuse_index} out of range for count {m}")
        index = reuse_index
    return ThresholdGrid(origin, spacing, m, index, top, phase)


# ---------------------------------------------------------------------------
# sample-size schedule


@dataclass(frozen=True)
class ScheduleParams:
    """Every deterministic size used by one replicable run.

    ``sq_loop`` is None when the loop phase is infeasible (the loop query
    tolerance 8 * theta * nu reaches 1); the learner then skips straight to
    the final phase.
    """

    setting: str
    n_max: int
    round_cap: int
    k: int
    k_err: int
    k_rep: int
    k_final: int
    t_unlabeled: int
    t_final: int
    sq_loop: Optional[SQParams]
    sq_final: Optional[SQParams]
    spacing_loop: float
    spacing_final: float
    interval_count: int


def _unlabeled_draws(sq: SQParams, constants: Constants) -> int:
    need = required_sample_size(sq)
    return max(need, int(math.ceil(constants.c_t * need / 2.0)))


def size_schedule(
    theta: float,
    eps: float,
    delta: float,
    rho: float,
    nu: float,
    class_size: int,
    setting: str,
    constants: Optional[Constants] = None,
) -> ScheduleParams:
    """Deterministic closed-form sizes for one replicable run.

    Raises ParameterError when any derived query margin is nonpositive, in
    particular whenever rho <= 2 * delta.
    """
    constants = constants or Constants()
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"accuracy target must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"failure budget must lie in (0, 1), got {delta}")
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"replicability budget must lie in (0, 1), got {rho}")
    if class_size < 1:
        raise ParameterError("class size must be positive")
    if theta <= 0.0:
        raise ParameterError("schedule needs a positive disagreement coefficient")
    if setting == "realizable":
        n_max = int(math.ceil(math.log2(2.0 / eps)))
        m = grid_interval_count(class_size, rho, constants)
        spacing = grid_range_top(theta, "realizable") / (m + 1)
        sq = SQParams(rho / (2.0 * n_max), eps / 2.0, delta / (2.0 * n_max))
        k_err = int(math.ceil(constants.c_k1 * theta * math.log(class_size * n_max / delta)))
        k_rep = int(
            math.ceil(constants.c_k2 * math.log(n_max / rho) / (theta * spacing**2))
        )
        return ScheduleParams(
            setting="realizable",
            n_max=n_max,
            round_cap=ROUND_CAP_FACTOR * n_max,
            k=max(k_err, k_rep),
            k_err=k_err,
            k_rep=k_rep,
            k_final=0,
            t_unlabeled=_unlabeled_draws(sq, constants),
            t_final=0,
            sq_loop=sq,
            sq_final=None,
            spacing_loop=spacing,
            spacing_final=0.0,
            interval_count=m,
        )
    if setting == "agnostic":
        if nu <= 0.0:
            raise ParameterError("agnostic schedule needs a positive noise rate")
        guard = 8.0 * theta * nu
        n_max = max(1, int(math.ceil(math.log2(1.0 / guard))) + 1) if guard < 1.0 else 1
        m = grid_interval_count(class_size, rho, constants)
        spacing = grid_range_top(theta, "agnostic-loop", eps, nu) / (m + 1)
        spacing_final = grid_range_top(theta, "agnostic-final", eps, nu) / (m + 1)
        budget = rho / (2.0 * (n_max + 1))
        fail = delta / (2.0 * (n_max + 1))
        sq_loop = SQParams(budget, guard, fail) if guard < 1.0 else None
        sq_final = SQParams(budget, eps / 2.0, fail)
        k_err = int(
            math.ceil(constants.c_k1 * theta**2 * math.log(class_size * n_max / delta))
        )
        k_rep = int(math.ceil(constants.c_k2 * math.log(n_max / rho) / spacing**2))
        k_final = max(
            int(
                math.ceil(
                    constants.c_k3 * theta**2 * (nu / eps) ** 2 * math.log(class_size / delta)
                )
            ),
            int(math.ceil(constants.c_k2 * math.log(n_max / rho) / spacing_final**2)),
        )
        return ScheduleParams(
            setting="agnostic",
            n_max=n_max,
            round_cap=ROUND_CAP_FACTOR * n_max,
            k=max(k_err, k_rep),
            k_err=k_err,
            k_rep=k_rep,
            k_final=k_final,
            t_unlabeled=_unlabeled_draws(sq_loop, constants) if sq_loop is not None else 0,
            t_final=_unlabeled_draws(sq_final, constants),
            sq_loop=sq_loop,
            sq_final=sq_final,
            spacing_loop=spacing,
            spacing_final=spacing_final,
            interval_count=m,
        )
    raise ParameterError(f"unknown setting {setting!r}; expected 'realizable' or 'agnostic'")


# ---------------------------------------------------------------------------
# shared pieces


def _replicable_region_estimate(
    hclass: HypothesisClass,
    model: DataModel,
    space: VersionSpace,
    sq: SQParams,
    t_draws: int,
    rs: RandomString,
    label: str,
    rng: np.random.Generator,
    counters: SampleCounters,
) -> float:
    """Replicable estimate of the disagreement mass from fresh unlabeled draws.

    The membership count of t_draws independent points is binomial in the
    exact region mass, so a single binomial draw reproduces the sample mean's
    law without materializing the points.
    """
    mask = disagreement_mask(hclass, space)
    mass = float(model.weights[mask].sum())
    counters.unlabeled += t_draws
    hits = int(rng.binomial(t_draws, min(mass, 1.0)))
    return rstat_answer_from_mean(sq, hits / t_draws, rs, label)


def _select_final(hclass: HypothesisClass, space: VersionSpace, rs: RandomString) -> int:
    """Shared-randomness pick among survivors, invariant to index accidents.

    The shared string fixes one random order over the distinct prediction
    signatures of the whole class (a data-independent list), and the first
    surviving signature under that order wins.  Because the order never
    depends on the data, two runs sharing the string disagree only when the
    top-ranked element of the union of their survivor sets falls in the
    symmetric difference, so the disagreement probability is at most the
    divergence |S1 xor S2| / |S1 or S2|.
    """
    class_sigs = sorted({hclass.signature(i) for i in range(hclass.n_hypotheses)})
    perm = rs.derive_permutation("final-order", len(class_sigs))
    surviving_by_sig: dict[bytes, int] = {}
    for i in space.indices():
        sig = hclass.signature(int(i))
        if sig not in surviving_by_sig:
            surviving_by_sig[sig] = int(i)
    for slot in perm:
        winner = surviving_by_sig.get(class_sigs[int(slot)])
        if winner is not None:
            return winner
    raise EmptyVersionSpaceError("no surviving signature to select")


# ---------------------------------------------------------------------------
# RepliCAL


def run_replical(
    hclass: HypothesisClass,
    model: DataModel,
    eps: float,
    delta: float,
    rho: float,
    rs: RandomString,
    rng: np.random.Generator,
    constants: Optional[Constants] = None,
    counters: Optional[SampleCounters] = None,
    theta_override: Optional[float] = None,
    stream_accounting: bool = False,
) -> RunResult:
    """Replicable consistency-style elimination for noiseless labels.

    Differs from the plain disagreement learner in three places: the loop is
    guarded by a replicable estimate of the disagreement mass instead of the
    exact value, elimination keeps hypotheses with conditional empirical
    error up to a shared randomly drawn threshold instead of exactly zero,
    and the returned survivor is picked by a shared random permutation.
    """
    constants = constants or Constants()
    counters = counters if counters is not None else SampleCounters()
    nu, center = noise_rate(hclass, model)
    if nu > PROB_TOL:
        raise WrongSettingError(
            f"this learner needs a zero-error hypothesis, best has error {nu}"
        )
    theta = disagreement_coefficient(hclass, model, center) if theta_override is None else theta_override
    if theta <= 0.0:
        theta = 1.0
    sched = size_schedule(theta, eps, delta, rho, 0.0, hclass.n_hypotheses, "realizable", constants)
    shared = rs.clone()
    grid = build_grid(theta, rho, hclass.n_hypotheses, "realizable", shared, constants=constants)
    v = grid.threshold
    space = VersionSpace.full(hclass.n_hypotheses)
    trace: list[RoundRecord] = []
    rounds = 0
    while True:
        est = _replicable_region_estimate(
            hclass,
            model,
            space,
            sched.sq_loop,
            sched.t_unlabeled,
            shared,
            f"region-estimate-{rounds}",
            rng,
            counters,
        )
        if est < eps / 2.0:
            break
        if rounds >= sched.round_cap:
            raise RoundCapExceededError(
                f"no exit after {rounds} rounds (bound {sched.n_max}); estimate still {est}"
            )
        count0, count1 = sample_labeled_counts(
            hclass, model, space, sched.k, rng, counters, stream_accounting
        )
        errs = empirical_errors_from_counts(hclass, count0, count1)
        trace.append(
            RoundRecord(rounds, est, space.size, threshold=v, labels_so_far=counters.labels)
        )
        space = VersionSpace(space.members & (errs <= v + PROB_TOL))
        rounds += 1
    chosen = _select_final(hclass, space, shared)
    return _result("replical", hclass, model, chosen, space, counters, rounds, est, trace)


# ---------------------------------------------------------------------------
# ReplicA-squared


def run_replica2(
    hclass: HypothesisClass,
    model: DataModel,
    eps: float,
    delta: float,
    rho: float,
    rs: RandomString,
    rng: np.random.Generator,
    constants: Optional[Constants] = None,
    counters: Optional[SampleCounters] = None,
    theta_override: Optional[float] = None,
    stream_accounting: bool = False,
) -> RunResult:
    """Replicable agnostic elimination, then a final noise-widened refit.

    Loop rounds keep hypotheses whose conditional empirical error stays under
    the shared threshold plus a noise allowance tied to the current estimated
    disagreement mass.  Once the estimate drops below 16 * theta * nu, a
    finer grid (same selected slot, fresh origin) and one larger sample make
    the final cut, and a shared permutation picks the winner.
    """
    constants = constants or Constants()
    counters = counters if counters is not None else SampleCounters()
    nu, center = noise_rate(hclass, model)
    theta = disagreement_coefficient(hclass, model, center) if theta_override is None else theta_override
    if theta <= 0.0:
        theta = 1.0
    # raises ParameterError when nu is 0: the noise-scaled grids are undefined
    sched = size_schedule(theta, eps, delta, rho, nu, hclass.n_hypotheses, "agnostic", constants)
    shared = rs.clone()
    grid = build_grid(
        theta, rho, hclass.n_hypotheses, "agnostic-loop", shared, eps, nu, constants
    )
    v = grid.threshold
    space = VersionSpace.full(hclass.n_hypotheses)
    trace: list[RoundRecord] = []
    flags: list[str] = []
    rounds = 0
    guard = 16.0 * theta * nu
    if guard >= 1.0 or sched.sq_loop is None:
        # the loop can never run its guard meaningfully at this noise level;
        # fall through to the final phase alone
        flags.append("loop-guard-unsatisfiable")
    else:
        while True:
            est = _replicable_region_estimate(
                hclass,
                model,
                space,
                sched.sq_loop,
                sched.t_unlabeled,
                shared,
                f"region-estimate-{rounds}",
                rng,
                counters,
            )
            if est < guard:
                break
            if rounds >= sched.round_cap:
                raise RoundCapExceededError(
                    f"no exit after {rounds} rounds (bound {sched.n_max}); estimate still {est}"
                )
            slack = 2.0 * nu / est + 1.0 / (16.0 * theta)
            count0, count1 = sample_labeled_counts(
                hclass, model, space, sched.k, rng, counters, stream_accounting
            )
            errs = empirical_errors_from_counts(hclass, count0, count1)
            trace.append(
                RoundRecord(
                    rounds,
                    est,
                    space.size,
                    threshold=v,
                    slack=slack,
                    labels_so_far=counters.labels,
                )
            )
            space = VersionSpace(space.members & (errs <= v + slack + PROB_TOL))
            rounds += 1
    final_grid = build_grid(
        theta,
        rho,
        hclass.n_hypotheses,
        "agnostic-final",
        shared,
        eps,
        nu,
        constants,
        reuse_index=grid.selected_index,
    )
    v_final = final_grid.threshold
    est_final = _replicable_region_estimate(
        hclass,
        model,
        space,
        sched.sq_final,
        sched.t_final,
        shared,
        "region-estimate-final",
        rng,
        counters,
    )
    if est_final > PROB_TOL:
        slack_final = 2.0 * nu / est_final + eps / (16.0 * theta * nu)
    else:
        # a zero mass estimate leaves the noise allowance unbounded: no cut
        slack_final = math.inf
        flags.append("final-estimate-zero")
    pre_size = space.size
    mask = disagreement_mask(hclass, space)
    if float(model.weights[mask].sum()) > PROB_TOL:
        count0, count1 = sample_labeled_counts(
            hclass, model, space, sched.k_final, rng, counters, stream_accounting
        )
        errs = empirical_errors_from_counts(hclass, count0, count1)
        space = VersionSpace(space.members & (errs <= v_final + slack_final + PROB_TOL))
    else:
        flags.append("final-region-zero-mass")
    trace.append(
        RoundRecord(
            rounds,
            est_final,
            pre_size,
            threshold=v_final,
            slack=slack_final,
            labels_so_far=counters.labels,
        )
    )
    chosen = _select_final(hclass, space, shared)
    return _result(
        "replica2",
        hclass,
        model,
        chosen,
        space,
        counters,
        rounds,
        est_final,
        trace,
        flags=tuple(flags),
    )
