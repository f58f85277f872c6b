"""Monte-Carlo experiment engine.

Configs are plain JSON documents validated against a published schema.  Every
random stream in a batch is derived from two seeds: the shared-string seed
(internal choices) and the data seed (sample draws), with per-trial and
per-side derivations, so any run can be replayed exactly from its config and
batches give identical totals regardless of execution order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover - declared dependency
    jsonschema = None

from .baselines import Constants, RunResult, run_a2, run_cal, run_passive_erm
from .core import (
    DataModel,
    HypothesisClass,
    ParameterError,
    disagreement_coefficient,
    explicit,
    intervals,
    noise_rate,
    thresholds,
    worst_case,
)
from .randomness import RandomString
from .replicable import run_replica2, run_replical

ALGORITHMS = ("erm", "cal", "a2", "replical", "replica2")
GENERATORS = ("thresholds", "intervals", "worst_case", "explicit")

_SEED_PATTERN = "^(0x)?[0-9a-fA-F]+$"

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "class": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "generator": {"enum": list(GENERATORS)},
                "size": {"type": "integer", "minimum": 1},
                "matrix": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}},
                },
                "weights": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number", "minimum": 0},
                },
                "target": {"type": ["integer", "null"], "minimum": 0},
                "eta": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "algo": {"enum": list(ALGORITHMS)},
        "algos": {"type": "array", "items": {"enum": list(ALGORITHMS)}, "minItems": 1},
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "rho": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "b_seed": {"type": "string", "pattern": _SEED_PATTERN},
        "data_seed": {"type": "string", "pattern": _SEED_PATTERN},
        "b_policy": {"enum": ["per-trial", "fixed"]},
        "constants": {"type": "object", "additionalProperties": {"type": "number"}},
        "theta_override": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "stream_accounting": {"type": "boolean"},
        "identical_sides": {"type": "boolean"},
    },
}

CSV_COLUMNS = (
    "trial",
    "algo",
    "epsilon",
    "delta",
    "rho",
    "nu",
    "theta",
    "labels_used",
    "unlabeled_used",
    "rounds",
    "err_final",
    "signature_hash",
    "b_seed",
    "data_seed",
    "agreed",
)

SWEEP_COLUMNS = (
    "algo",
    "epsilon",
    "trials",
    "labels_mean",
    "labels_max",
    "unlabeled_mean",
    "error_mean",
    "within_target_fraction",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment batch."""

    class_name: str = "thresholds"
    domain_size: int = 16
    matrix: Optional[tuple[tuple[int, ...], ...]] = None
    weights: Optional[tuple[float, ...]] = None
    target: Optional[int] = None
    eta: float = 0.0
    algo: str = "cal"
    algos: tuple[str, ...] = ()
    eps: float = 0.05
    delta: float = 0.05
    rho: float = 0.1
    trials: int = 10
    b_seed: str = "01"
    data_seed: str = "02"
    b_policy: str = "per-trial"
    constants: Constants = field(default_factory=Constants)
    theta_override: Optional[float] = None
    stream_accounting: bool = False
    identical_sides: bool = False

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algo!r}; expected one of {ALGORITHMS}")
        for a in self.algos:
            if a not in ALGORITHMS:
                raise ParameterError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        if self.class_name not in GENERATORS:
            raise ParameterError(
                f"unknown class generator {self.class_name!r}; expected one of {GENERATORS}"
            )
        if self.b_policy not in ("per-trial", "fixed"):
            raise ParameterError(f"b_policy must be 'per-trial' or 'fixed', got {self.b_policy!r}")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        for name, value in (("epsilon", self.eps), ("delta", self.delta), ("rho", self.rho)):
            if not 0.0 < value < 1.0:
                raise ParameterError(f"{name} must lie in (0, 1), got {value}")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0, 1], got {self.eta}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        """Build from a schema-validated JSON document."""
        if jsonschema is not None:
            try:
                jsonschema.validate(doc, CONFIG_SCHEMA)
            except jsonschema.ValidationError as e:
                raise ParameterError(f"config does not match the schema: {e.message}") from e
        cspec = doc.get("class", {})
        matrix = cspec.get("matrix")
        weights = cspec.get("weights")
        kwargs = dict(
            class_name=cspec.get("generator", "thresholds"),
            domain_size=cspec.get("size", 16),
            matrix=tuple(tuple(row) for row in matrix) if matrix is not None else None,
            weights=tuple(weights) if weights is not None else None,
            target=cspec.get("target"),
            eta=cspec.get("eta", 0.0),
            algo=doc.get("algo", "cal"),
            algos=tuple(doc.get("algos", ())),
            eps=doc.get("epsilon", 0.05),
            delta=doc.get("delta", 0.05),
            rho=doc.get("rho", 0.1),
            trials=doc.get("trials", 10),
            b_seed=doc.get("b_seed", "01"),
            data_seed=doc.get("data_seed", "02"),
            b_policy=doc.get("b_policy", "per-trial"),
            constants=Constants.from_mapping(doc.get("constants", {})),
            theta_override=doc.get("theta_override"),
            stream_accounting=doc.get("stream_accounting", False),
            identical_sides=doc.get("identical_sides", False),
        )
        return cls(**kwargs)

    def to_dict(self) -> dict:
        cspec: dict = {"generator": self.class_name, "size": self.domain_size, "eta": self.eta}
        if self.matrix is not None:
            cspec["matrix"] = [list(r) for r in self.matrix]
        if self.weights is not None:
            cspec["weights"] = list(self.weights)
        if self.target is not None:
            cspec["target"] = self.target
        doc = {
            "class": cspec,
            "algo": self.algo,
            "epsilon": self.eps,
            "delta": self.delta,
            "rho": self.rho,
            "trials": self.trials,
            "b_seed": self.b_seed,
            "data_seed": self.data_seed,
            "b_policy": self.b_policy,
            "stream_accounting": self.stream_accounting,
            "identical_sides": self.identical_sides,
        }
        if self.algos:
            doc["algos"] = list(self.algos)
        if self.theta_override is not None:
            doc["theta_override"] = self.theta_override
        overrides = {
            f.name: getattr(self.constants, f.name)
            for f in fields(self.constants)
            if getattr(self.constants, f.name) != f.default
        }
        if overrides:
            doc["constants"] = overrides
        return doc


def build_problem(cfg: ExperimentConfig) -> tuple[HypothesisClass, DataModel]:
    """Materialize the hypothesis class and label model a config describes."""
    if cfg.class_name == "thresholds":
        hclass = thresholds(cfg.domain_size)
    elif cfg.class_name == "intervals":
        hclass = intervals(cfg.domain_size)
    elif cfg.class_name == "worst_case":
        hclass = worst_case(cfg.domain_size)
    else:
        if cfg.matrix is None:
            raise ParameterError("explicit class needs a prediction matrix")
        hclass = explicit(np.asarray(cfg.matrix, dtype=np.uint8))
    if cfg.target is not None:
        base = cfg.target
        if not 0 <= base < hclass.n_hypotheses:
            raise ParameterError(f"target index {base} out of range")
    else:
        # the single-flip construction's zero row is its natural center; for
        # ordered classes the middle hypothesis keeps both labels present
        base = 0 if cfg.class_name == "worst_case" else hclass.n_hypotheses // 2
    weights = np.asarray(cfg.weights, dtype=np.float64) if cfg.weights is not None else None
    if cfg.eta > 0.0:
        model = DataModel.agnostic(hclass, base, cfg.eta, weights)
    else:
        model = DataModel.realizable(hclass, base, weights)
    return hclass, model


def problem_stats(
    hclass: HypothesisClass, model: DataModel, cfg: ExperimentConfig
) -> tuple[float, float, int]:
    """(theta, nu, best-index) for reporting; honors the theta override."""
    nu, center = noise_rate(hclass, model)
    if cfg.theta_override is not None:
        return float(cfg.theta_override), nu, center
    return disagreement_coefficient(hclass, model, center), nu, center


def run_single(
    hclass: HypothesisClass,
    model: DataModel,
    cfg: ExperimentConfig,
    algo: str,
    shared: RandomString,
    rng: np.random.Generator,
) -> RunResult:
    """Execute one algorithm once under a config's parameters."""
    common = dict(constants=cfg.constants)
    if algo == "erm":
        return run_passive_erm(hclass, model, cfg.eps, cfg.delta, rng, **common)
    if algo == "cal":
        return run_cal(
            hclass,
            model,
            cfg.eps,
            cfg.delta,
            rng,
            theta_override=cfg.theta_override,
            stream_accounting=cfg.stream_accounting,
            **common,
        )
    if algo == "a2":
        return run_a2(
            hclass,
            model,
            cfg.eps,
            cfg.delta,
            rng,
            theta_override=cfg.theta_override,
            stream_accounting=cfg.stream_accounting,
            **common,
        )
    if algo == "replical":
        return run_replical(
            hclass,
            model,
            cfg.eps,
            cfg.delta,
            cfg.rho,
            shared,
            rng,
            theta_override=cfg.theta_override,
            stream_accounting=cfg.stream_accounting,
            **common,
        )
    if algo == "replica2":
        return run_replica2(
            hclass,
            model,
            cfg.eps,
            cfg.delta,
            cfg.rho,
            shared,
            rng,
            theta_override=cfg.theta_override,
            stream_accounting=cfg.stream_accounting,
            **common,
        )
    raise ParameterError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


def data_stream(data_seed: str, *key: int) -> np.random.Generator:
    """Per-trial data randomness, derived only from the seed and the key."""
    entropy = int(data_seed, 16)
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# paired trials


@dataclass(frozen=True)
class PairOutcome:
    """Both sides of one paired run, or the failures that replaced them."""

    pair_index: int
    b_hex: str
    data_seed_first: str
    data_seed_second: str
    result_first: Optional[RunResult]
    result_second: Optional[RunResult]
    failure_first: Optional[str]
    failure_second: Optional[str]
    agreed: bool


@dataclass(frozen=True)
class TrialRow:
    """One CSV row: one side of one paired trial."""

    trial: int
    algo: str
    epsilon: float
    delta: float
    rho: float
    nu: float
    theta: float
    labels_used: int
    unlabeled_used: int
    rounds: int
    err_final: float
    signature_hash: str
    b_seed: str
    data_seed: str
    agreed: bool


@dataclass(frozen=True)
class ReplicabilityReport:
    """Aggregate statistics over a batch of paired runs."""

    algo: str
    pairs: int
    agreements: int
    agreement_rate: float
    wilson_low: float
    wilson_high: float
    error_mean: float
    error_max: float
    labels_mean: float
    labels_max: int
    unlabeled_mean: float
    unlabeled_max: int
    halving_frequency: float
    failure_counts: tuple[tuple[str, int], ...]
    rows: tuple[TrialRow, ...]

    def to_jsonable(self) -> dict:
        return {
            "algo": self.algo,
            "pairs": self.pairs,
            "agreements": self.agreements,
            "agreement_rate": self.agreement_rate,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
            "error_mean": self.error_mean,
            "error_max": self.error_max,
            "labels_mean": self.labels_mean,
            "labels_max": self.labels_max,
            "unlabeled_mean": self.unlabeled_mean,
            "unlabeled_max": self.unlabeled_max,
            "halving_frequency": self.halving_frequency,
            "failure_counts": {name: n for name, n in self.failure_counts},
            "rows": [{col: getattr(r, col) for col in CSV_COLUMNS} for r in self.rows],
        }


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Score confidence interval for a binomial proportion."""
    if n <= 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z**2 / (4.0 * n**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def halving_fraction(traces: Iterable[Sequence]) -> float:
    """Fraction of consecutive round transitions where the recorded
    disagreement dropped to half or less."""
    halved = 0
    total = 0
    for trace in traces:
        for a, b in zip(trace, trace[1:]):
            total += 1
            if b.disagreement <= a.disagreement / 2.0 + 1e-12:
                halved += 1
    return halved / total if total else 0.0


def iter_paired_runs(
    cfg: ExperimentConfig,
    hclass: Optional[HypothesisClass] = None,
    model: Optional[DataModel] = None,
) -> Iterator[PairOutcome]:
    """Run the config's paired trials one at a time.

    Each pair derives one shared string from the master seed and the pair
    index; the two sides draw data from independent streams (or the same
    stream when the config pins identical sides for smoke testing).  A
    failing side is recorded by exception type instead of aborting the batch.
    """
    if hclass is None or model is None:
        hclass, model = build_problem(cfg)
    master = RandomString(cfg.b_seed)
    for i in range(cfg.trials):
        b = master if cfg.b_policy == "fixed" else master.spawn(f"pair/{i}")
        sides: list[Optional[RunResult]] = []
        failures: list[Optional[str]] = []
        seeds: list[str] = []
        for side in (0, 1):
            side_key = 0 if cfg.identical_sides else side
            rng = data_stream(cfg.data_seed, i, side_key)
            seeds.append(f"{cfg.data_seed}:{i}:{side_key}")
            try:
                sides.append(run_single(hclass, model, cfg, cfg.algo, b, rng))
                failures.append(None)
            except (ParameterError, RuntimeError) as e:
                sides.append(None)
                failures.append(type(e).__name__)
        agreed = (
            sides[0] is not None
            and sides[1] is not None
            and sides[0].signature == sides[1].signature
        )
        yield PairOutcome(
            pair_index=i,
            b_hex=b.seed_hex,
            data_seed_first=seeds[0],
            data_seed_second=seeds[1],
            result_first=sides[0],
            result_second=sides[1],
            failure_first=failures[0],
            failure_second=failures[1],
            agreed=agreed,
        )


def summarize_pairs(
    cfg: ExperimentConfig,
    outcomes: Sequence[PairOutcome],
    theta: float,
    nu: float,
) -> ReplicabilityReport:
    """Aggregate a batch of paired outcomes; insensitive to their order."""
    outcomes = sorted(outcomes, key=lambda o: o.pair_index)
    agreements = sum(1 for o in outcomes if o.agreed)
    pairs = len(outcomes)
    rows: list[TrialRow] = []
    errors: list[float] = []
    labels: list[int] = []
    unlabeled: list[int] = []
    failures: dict[str, int] = {}
    traces = []
    for o in outcomes:
        for result, failure, seed in (
            (o.result_first, o.failure_first, o.data_seed_first),
            (o.result_second, o.failure_second, o.data_seed_second),
        ):
            if result is None:
                failures[failure] = failures.get(failure, 0) + 1
                continue
            errors.append(result.error)
            labels.append(result.labels_used)
            unlabeled.append(result.unlabeled_used)
            traces.append(result.trace)
            rows.append(
                TrialRow(
                    trial=o.pair_index,
                    algo=cfg.algo,
                    epsilon=cfg.eps,
                    delta=cfg.delta,
                    rho=cfg.rho,
                    nu=nu,
                    theta=theta,
                    labels_used=result.labels_used,
                    unlabeled_used=result.unlabeled_used,
                    rounds=result.rounds,
                    err_final=result.error,
                    signature_hash=result.signature_hash,
                    b_seed=o.b_hex,
                    data_seed=seed,
                    agreed=o.agreed,
                )
            )
    low, high = wilson_interval(agreements, pairs)
    return ReplicabilityReport(
        algo=cfg.algo,
        pairs=pairs,
        agreements=agreements,
        agreement_rate=agreements / pairs if pairs else 0.0,
        wilson_low=low,
        wilson_high=high,
        error_mean=float(np.mean(errors)) if errors else 0.0,
        error_max=float(np.max(errors)) if errors else 0.0,
        labels_mean=float(np.mean(labels)) if labels else 0.0,
        labels_max=int(np.max(labels)) if labels else 0,
        unlabeled_mean=float(np.mean(unlabeled)) if unlabeled else 0.0,
        unlabeled_max=int(np.max(unlabeled)) if unlabeled else 0,
        halving_frequency=halving_fraction(traces),
        failure_counts=tuple(sorted(failures.items())),
        rows=tuple(rows),
    )


def run_paired_trials(cfg: ExperimentConfig) -> ReplicabilityReport:
    """Full paired-replicability experiment for one config."""
    hclass, model = build_problem(cfg)
    theta, nu, _ = problem_stats(hclass, model, cfg)
    outcomes = list(iter_paired_runs(cfg, hclass, model))
    return summarize_pairs(cfg, outcomes, theta, nu)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    algo: str
    epsilon: float
    trials: int
    labels_mean: float
    labels_max: int
    unlabeled_mean: float
    error_mean: float
    within_target_fraction: float


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    def to_jsonable(self) -> dict:
        return {"rows": [{col: getattr(r, col) for col in SWEEP_COLUMNS} for r in self.rows]}


def label_complexity_sweep(cfg: ExperimentConfig, eps_list: Sequence[float]) -> SweepTable:
    """Mean label usage per accuracy target per algorithm, over single runs.

    The within-target fraction compares each run's exact error against the
    best-in-class error plus the accuracy target, which reduces to the plain
    target when labels are noiseless.
    """
    if not eps_list:
        raise ParameterError("sweep needs at least one accuracy target")
    hclass, model = build_problem(cfg)
    _, nu, _ = problem_stats(hclass, model, cfg)
    algos = cfg.algos or (cfg.algo,)
    master = RandomString(cfg.b_seed)
    rows: list[SweepRow] = []
    for ai, algo in enumerate(algos):
        for ei, eps in enumerate(eps_list):
            sub = replace(cfg, eps=float(eps))
            labels: list[int] = []
            unlabeled: list[int] = []
            errors: list[float] = []
            for t in range(cfg.trials):
                b = master.spawn(f"sweep/{algo}/{ei}/{t}")
                rng = data_stream(cfg.data_seed, ai, ei, t)
                result = run_single(hclass, model, sub, algo, b, rng)
                labels.append(result.labels_used)
                unlabeled.append(result.unlabeled_used)
                errors.append(result.error)
            within = sum(1 for e in errors if e <= nu + eps + 1e-12) / len(errors)
            rows.append(
                SweepRow(
                    algo=algo,
                    epsilon=float(eps),
                    trials=cfg.trials,
                    labels_mean=float(np.mean(labels)),
                    labels_max=int(np.max(labels)),
                    unlabeled_mean=float(np.mean(unlabeled)),
                    error_mean=float(np.mean(errors)),
                    within_target_fraction=within,
                )
            )
    return SweepTable(tuple(rows))


# ---------------------------------------------------------------------------
# serialization


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def report_csv(report: ReplicabilityReport) -> str:
    return _csv_text(
        CSV_COLUMNS,
        ([getattr(r, col) for col in CSV_COLUMNS] for r in report.rows),
    )


def sweep_csv(table: SweepTable) -> str:
    return _csv_text(
        SWEEP_COLUMNS,
        ([getattr(r, col) for col in SWEEP_COLUMNS] for r in table.rows),
    )


def export(obj, path: str, fmt: str) -> None:
    """Write a report or sweep table to disk, bit-stably."""
    if fmt == "csv":
        if isinstance(obj, ReplicabilityReport):
            text = report_csv(obj)
        elif isinstance(obj, SweepTable):
            text = sweep_csv(obj)
        else:
            raise ParameterError(f"cannot serialize {type(obj).__name__} as CSV")
        with open(path, "w", newline="") as f:
            f.write(text)
        return
    if fmt == "json":
        payload = obj.to_jsonable() if hasattr(obj, "to_jsonable") else obj
        with open(path, "w") as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write("\n")
        return
    raise ParameterError(f"unknown export format {fmt!r}; expected 'csv' or 'json'")
