"""
A miniature tuning campaign
===========================

``configs/smoke.config`` is a scaled-down copy of the full ELEC2 experiment:
600 rows, 3-fold CV, tiny budgets and two repetitions per strategy. Running
it end to end shows the on-disk layout the ``tune`` command produces and
how to read it back.
"""

import json
import tempfile
from pathlib import Path

from hpotune.core import read_trials
from hpotune.experiment import ExperimentConfig, load_campaign, render_report, run_experiment, strip_timing

ROOT = Path(__file__).resolve().parents[1]
config = ExperimentConfig.from_file(ROOT / "configs" / "smoke.config")
print([(s.key, s.budget) for s in config.strategies], "repetitions:", config.repetitions)

# %%
# Run every strategy x repetition. Each repetition writes its trial log as
# it goes and a ``result.json`` at the end; an interrupted run resumes from
# the last finished repetition.

out = Path(tempfile.mkdtemp()) / "smoke"
run_experiment(config, out)
print(sorted(p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file())[:8], "...")

# %%
# One line per objective call.

trials = read_trials(out / "pso" / "0" / "trials.jsonl")
for t in trials[:3]:
    print(t.index, t.config, round(t.score, 4))

# %%
# The report has a per-class table for each strategy's best repetition and
# a per-strategy summary of mean accuracies.

report = render_report(load_campaign(out))
print(report["markdown"])

# %%
# Everything except wall-clock fields is a function of the config and seed.

out2 = Path(tempfile.mkdtemp()) / "smoke"
run_experiment(config, out2)
a, b = (json.loads((d / "summary.json").read_text()) for d in (out, out2))
print("identical rerun:", strip_timing(a) == strip_timing(b))
