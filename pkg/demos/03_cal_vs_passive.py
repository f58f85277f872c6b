#!/usr/bin/env python3
"""
Label cost of active elimination versus passive sampling.

Sweeps the accuracy target for a consistency-based active learner and a
passive empirical risk minimizer on the same threshold class.  The passive
learner pays for every draw; the active one only pays for points where the
surviving hypotheses still disagree, so its cost grows with the logarithm
of the target while the passive cost grows polynomially.
"""

from ralearn.harness import ExperimentConfig, label_complexity_sweep

TARGETS = [0.16, 0.08, 0.04, 0.02, 0.01]

cfg = ExperimentConfig(
    domain_size=128,
    algos=("cal", "erm"),
    delta=0.05,
    trials=30,
    b_seed="31",
    data_seed="13",
)

table = label_complexity_sweep(cfg, TARGETS)

print(f"{'algo':>6} {'target':>8} {'labels':>10} {'unlabeled':>11} {'err':>8} {'ok':>6}")
for row in table.rows:
    print(
        f"{row.algo:>6} {row.epsilon:8.3f} {row.labels_mean:10.1f} "
        f"{row.unlabeled_mean:11.1f} {row.error_mean:8.4f} {row.within_target_fraction:6.2f}"
    )

by = {(r.algo, r.epsilon): r.labels_mean for r in table.rows}
print()
print("label growth from the loosest to the tightest target:")
print(f"  active  x{by[('cal', TARGETS[-1])] / by[('cal', TARGETS[0])]:.1f}")
print(f"  passive x{by[('erm', TARGETS[-1])] / by[('erm', TARGETS[0])]:.1f}")
