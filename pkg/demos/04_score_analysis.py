#!/usr/bin/env python3
"""Walkthrough: score analysis from a simulated 16-listener panel.

Simulates ratings for the full default design, then produces the summary
statistics, the LR-vs-MS significance table and the figure-ready CSVs.
"""

from pathlib import Path

from stereoqa import build_plan, compare_lr_ms, export_figure_data, ingest_scores, summarize
from stereoqa.simulate import simulate_scores
from stereoqa.stats import POINT_COLUMNS, SIGNIFICANCE_COLUMNS, write_table_csv

import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from test_planning import fake_manifest  # synthetic manifest, no audio needed

OUT = Path(__file__).parent / "output" / "04_analysis"
OUT.mkdir(parents=True, exist_ok=True)

plan = build_plan(fake_manifest(), seed=1)
rows = simulate_scores(plan, num_listeners=16, seed=99)
dataset = ingest_scores(rows)
print(f"simulated {len(dataset)} ratings "
      f"({len(dataset.listeners)} listeners x {len(plan.trials)} trials x 8 stimuli)")

# --- pooled summary, separated series ----------------------------------------
pooled = summarize(dataset, "pooled", bootstrap_b=4000, seed=0)
print("\npooled means and 95% bootstrap CIs (separated series):")
print("  series condition      n   mean   [ci_low, ci_high]")
for s in pooled:
    if not s.series.endswith("mix"):
        print(f"  {s.series:6s} {s.condition:12s} {s.n:2d}  {s.mean:5.1f}  "
              f"[{s.ci_low:5.1f}, {s.ci_high:5.1f}]")

# --- LR vs MS significance -----------------------------------------------------
comparisons = compare_lr_ms(dataset)
print("\nLR vs MS (pooled rows), Wilcoxon signed-rank:")
print("  context    pair                 mean(MS-LR)      p  stars")
for c in comparisons:
    if c.item == "pooled":
        print(f"  {c.context:9s} {c.lr_condition:9s}vs {c.ms_condition:9s} "
              f"{c.mean_diff:+7.2f}  {c.p_value:9.2e}  {c.stars}")

# --- figure tables ---------------------------------------------------------------
by_item = summarize(dataset, "by_item", bootstrap_b=4000, seed=0)
for layout in ("overall", "mixed", "itemwise"):
    tables = export_figure_data(by_item + pooled, comparisons, layout)
    write_table_csv(tables["points"], POINT_COLUMNS, OUT / f"figure_{layout}_points.csv")
    write_table_csv(tables["significance"], SIGNIFICANCE_COLUMNS,
                    OUT / f"figure_{layout}_significance.csv")
    print(f"wrote figure_{layout}_points.csv "
          f"({len(tables['points'])} points, {len(tables['significance'])} marks)")
