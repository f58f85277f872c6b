"""Reference learners without replicability: passive ERM, CAL, and the
agnostic LB/UB elimination learner A².

These set the accuracy and label-complexity baselines the replicable learners
are compared against.  Loop guards use the exact disagreement mass (the
simulator knows the distribution); sample sizes follow the standard finite
class bounds with configurable leading constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional

import numpy as np

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
    disagreement_mass,
    empirical_errors_from_counts,
    noise_rate,
    sample_labeled_counts,
    true_error,
)

# divergent configurations abort after this many times the nominal round bound
ROUND_CAP_FACTOR = 4


@dataclass(frozen=True)
class Constants:
    """Leading constants for every sample-size formula, all config-exposed.

    c_pass scales the passive ERM sample; c_cal / c_a2 / c_a2_final the CAL
    and A² rounds; c_k1 / c_k2 / c_k3 the replicable learners' accuracy,
    agreement, and final sample legs; c_grid the threshold-grid interval
    count; c_t the unlabeled estimation sample.
    """

    c_pass: float = 2.0
    c_cal: float = 2.0
    c_a2: float = 1.0
    c_a2_final: float = 1.0
    c_k1: float = 2.0
    c_k2: float = 1.0
    c_k3: float = 1.0
    c_grid: float = 1.0
    c_t: float = 2.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"constant {f.name} must be a positive number, got {v!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "Constants":
        """Build from a name/value mapping; unknown names are an error."""
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ParameterError(f"unknown constants: {sorted(unknown)} (known: {sorted(known)})")
        return cls(**{k: float(v) for k, v in mapping.items()})

    def updated(self, mapping: Mapping[str, float]) -> "Constants":
        known = {f.name for f in fields(self)}
        unknown = set(mapping) - known
        if unknown:
            raise ParameterError(f"unknown constants: {sorted(unknown)} (known: {sorted(known)})")
        return replace(self, **{k: float(v) for k, v in mapping.items()})


@dataclass(frozen=True)
class RoundRecord:
    """State of one elimination round, captured before the update.

    ``disagreement`` is the exact mass for baselines and the replicable
    estimate for the replicable learners; ``threshold`` is the error cutoff
    applied this round when the learner uses one; ``slack`` is the additive
    widening on top of the base threshold (Hoeffding radius or noise term).
    """

    round: int
    disagreement: float
    version_size: int
    threshold: Optional[float] = None
    slack: Optional[float] = None
    labels_so_far: int = 0


@dataclass(frozen=True)
class RunResult:
    """Outcome of one learner execution.

    Contains no arrays, so two results compare equal exactly when every
    field, including the returned signature and the full trace, is identical.
    """

    algo: str
    hypothesis_index: int
    signature: bytes
    signature_hash: str
    labels_used: int
    unlabeled_used: int
    rounds: int
    final_disagreement_estimate: float
    error: float
    survivors: tuple[int, ...]
    trace: tuple[RoundRecord, ...]
    flags: tuple[str, ...] = ()

    def to_jsonable(self) -> dict:
        return {
            "algo": self.algo,
            "hypothesis_index": self.hypothesis_index,
            "signature": self.signature.hex(),
            "signature_hash": self.signature_hash,
            "labels_used": self.labels_used,
            "unlabeled_used": self.unlabeled_used,
            "rounds": self.rounds,
            "final_disagreement_estimate": self.final_disagreement_estimate,
            "error": self.error,
            "survivors": list(self.survivors),
            "trace": [
                {
                    "round": r.round,
                    "disagreement": r.disagreement,
                    "version_size": r.version_size,
                    "threshold": r.threshold,
                    "slack": r.slack,
                    "labels_so_far": r.labels_so_far,
                }
                for r in self.trace
            ],
            "flags": list(self.flags),
        }


def _check_accuracy_params(eps: float, delta: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"accuracy target must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"failure budget must lie in (0, 1), got {delta}")


def _sizing_theta(theta: float) -> float:
    # theta is 0 only when every hypothesis duplicates the center; any
    # positive stand-in keeps the sizing formulas defined in that corner
    return theta if theta > 0.0 else 1.0


def _result(
    algo: str,
    hclass: HypothesisClass,
    model: DataModel,
    chosen: int,
    space: VersionSpace,
    counters: SampleCounters,
    rounds: int,
    final_estimate: float,
    trace: list[RoundRecord],
    flags: tuple[str, ...] = (),
) -> RunResult:
    sig = hclass.signature(chosen)
    return RunResult(
        algo=algo,
        hypothesis_index=chosen,
        signature=sig,
        signature_hash=hclass.signature_hash(chosen),
        labels_used=counters.labels,
        unlabeled_used=counters.unlabeled,
        rounds=rounds,
        final_disagreement_estimate=final_estimate,
        error=true_error(hclass, model, chosen),
        survivors=tuple(int(i) for i in space.indices()),
        trace=tuple(trace),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# passive ERM


def erm_sample_size(n_hypotheses: int, eps: float, delta: float, constants: Constants) -> int:
    return int(math.ceil(constants.c_pass * (1.0 / eps) * math.log(n_hypotheses / delta)))


def run_passive_erm(
    hclass: HypothesisClass,
    model: DataModel,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    constants: Optional[Constants] = None,
    counters: Optional[SampleCounters] = None,
) -> RunResult:
    """Draw one unconditional labeled sample and return its empirical minimizer."""
    _check_accuracy_params(eps, delta)
    constants = constants or Constants()
    counters = counters if counters is not None else SampleCounters()
    m = erm_sample_size(hclass.n_hypotheses, eps, delta, constants)
    # full version space: labels come from D itself, not a conditional region
    counters.labels += m
    point_counts = rng.multinomial(m, model.weights / model.weights.sum())
    ones = rng.binomial(point_counts, model.label_one_probabilities())
    errs = empirical_errors_from_counts(
        hclass, (point_counts - ones).astype(np.int64), ones.astype(np.int64)
    )
    best = int(np.argmin(errs))
    return _result(
        "erm",
        hclass,
        model,
        best,
        VersionSpace.from_indices([best], hclass.n_hypotheses),
        counters,
        rounds=0,
        final_estimate=0.0,
        trace=[],
    )


# ---------------------------------------------------------------------------
# CAL


def cal_round_bound(eps: float) -> int:
    return int(math.ceil(math.log2(2.0 / eps)))


def cal_sample_size(
    n_hypotheses: int, theta: float, eps: float, delta: float, constants: Constants
) -> int:
    n_max = cal_round_bound(eps)
    return int(
        math.ceil(constants.c_cal * _sizing_theta(theta) * math.log(n_hypotheses * n_max / delta))
    )


def run_cal(
    hclass: HypothesisClass,
    model: DataModel,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    constants: Optional[Constants] = None,
    counters: Optional[SampleCounters] = None,
    theta_override: Optional[float] = None,
    stream_accounting: bool = False,
) -> RunResult:
    """Disagreement-region consistency elimination for noiseless labels.

    Each round queries a fixed-size labeled sample from the current
    disagreement region and keeps exactly the hypotheses consistent with
    every label.  The loop exits once the exact disagreement mass is at most
    the accuracy target.
    """
    _check_accuracy_params(eps, delta)
    constants = constants or Constants()
    counters = counters if counters is not None else SampleCounters()
    nu, center = noise_rate(hclass, model)
    if nu > PROB_TOL:
        raise WrongSettingError(
            f"consistency elimination needs a zero-error hypothesis, best has error {nu}"
        )
    theta = disagreement_coefficient(hclass, model, center) if theta_override is None else theta_override
    n_max = cal_round_bound(eps)
    k = cal_sample_size(hclass.n_hypotheses, theta, eps, delta, constants)
    space = VersionSpace.full(hclass.n_hypotheses)
    trace: list[RoundRecord] = []
    rounds = 0
    while True:
        dmass = disagreement_mass(hclass, model, space)
        if dmass <= eps + PROB_TOL:
            break
        if rounds >= ROUND_CAP_FACTOR * n_max:
            raise RoundCapExceededError(
                f"no exit after {rounds} rounds (bound {n_max}); disagreement still {dmass}"
            )
        trace.append(
            RoundRecord(rounds, dmass, space.size, threshold=0.0, labels_so_far=counters.labels)
        )
        count0, count1 = sample_labeled_counts(
            hclass, model, space, k, rng, counters, stream_accounting
        )
        errs = empirical_errors_from_counts(hclass, count0, count1)
        # mistakes are integer counts, so any inconsistency puts the error at >= 1/k
        space = VersionSpace(space.members & (errs <= PROB_TOL))
        rounds += 1
    chosen = int(space.indices()[0])
    return _result(
        "cal", hclass, model, chosen, space, counters, rounds, dmass, trace
    )


# ---------------------------------------------------------------------------
# A-squared


def a2_round_bound(theta: float, nu: float, eps: float) -> int:
    """Nominal elimination-round bound before the final estimation step."""
    t = _sizing_theta(theta)
    if nu > PROB_TOL:
        if 8.0 * t * nu >= 1.0:
            return 1
        return max(1, int(math.ceil(math.log2(1.0 / (8.0 * t * nu)))))
    return cal_round_bound(eps)


def run_a2(
    hclass: HypothesisClass,
    model: DataModel,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    constants: Optional[Constants] = None,
    counters: Optional[SampleCounters] = None,
    theta_override: Optional[float] = None,
    stream_accounting: bool = False,
) -> RunResult:
    """Agnostic elimination by confidence intervals, then a final refit.

    Each round keeps every hypothesis whose error lower bound does not exceed
    the smallest upper bound; the loop runs while the exact disagreement mass
    is at least 8 * theta * nu, and a last conditional sample picks the
    empirical minimizer among the survivors.
    """
    _check_accuracy_params(eps, delta)
    constants = constants or Constants()
    counters = counters if counters is not None else SampleCounters()
    nu, center = noise_rate(hclass, model)
    theta = disagreement_coefficient(hclass, model, center) if theta_override is None else theta_override
    t_size = _sizing_theta(theta)
    n_loop = a2_round_bound(theta, nu, eps)
    delta_round = delta / (1.0 + n_loop)
    n_c = hclass.n_hypotheses
    k = int(math.ceil(constants.c_a2 * t_size**2 * math.log(n_c * n_loop / delta_round)))
    radius = math.sqrt(math.log(2.0 * n_c / delta_round) / (2.0 * k))
    space = VersionSpace.full(n_c)
    trace: list[RoundRecord] = []
    rounds = 0
    noisy = nu > PROB_TOL
    while True:
        dmass = disagreement_mass(hclass, model, space)
        if dmass <= PROB_TOL:
            break
        if noisy and dmass < 8.0 * t_size * nu:
            break
        if not noisy and rounds >= n_loop:
            break
        if rounds >= ROUND_CAP_FACTOR * n_loop:
            raise RoundCapExceededError(
                f"no exit after {rounds} rounds (bound {n_loop}); disagreement still {dmass}"
            )
        count0, count1 = sample_labeled_counts(
            hclass, model, space, k, rng, counters, stream_accounting
        )
        errs = empirical_errors_from_counts(hclass, count0, count1)
        floor_err = float(errs[space.members].min())
        cutoff = floor_err + 2.0 * radius
        trace.append(
            RoundRecord(
                rounds,
                dmass,
                space.size,
                threshold=cutoff,
                slack=radius,
                labels_so_far=counters.labels,
            )
        )
        # keep h iff its lower bound stays within the best upper bound; the
        # round's empirical minimizer always satisfies this, so V stays nonempty
        space = VersionSpace(space.members & (errs <= cutoff + PROB_TOL))
        rounds += 1
    k_final = int(math.ceil(constants.c_a2_final * t_size**2 * (nu / eps) ** 2 * math.log(n_c / delta)))
    if k_final > 0 and disagreement_mass(hclass, model, space) > PROB_TOL:
        count0, count1 = sample_labeled_counts(
            hclass, model, space, k_final, rng, counters, stream_accounting
        )
        errs = empirical_errors_from_counts(hclass, count0, count1)
        chosen = int(np.argmin(np.where(space.members, errs, np.inf)))
    else:
        chosen = int(space.indices()[0])
    return _result(
        "a2", hclass, model, chosen, space, counters, rounds, dmass, trace
    )
