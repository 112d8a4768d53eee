"""
The staged pipeline, driven the way the command line drives it
==============================================================

Each stage leaves its outputs on disk next to a manifest; later stages
check the manifest against their own configuration before reading.
The same run from a shell:

    revspam prepare  --config run.ini
    revspam train    --config run.ini
    revspam evaluate --config run.ini
    revspam analyze  --config run.ini
    revspam report   --config run.ini
"""

import json
import tempfile
from pathlib import Path

from revspam.cli import main
from revspam.synthetic import SyntheticSpec, generate, write_corpus

work = Path(tempfile.mkdtemp(prefix="revspam-"))
write_corpus(generate(SyntheticSpec(n_reviews=3000, seed=9)), work / "reviews.jsonl.gz",
             extra_lines=[(17, '{"reviewerID": "broken"')])

(work / "run.ini").write_text("""\
[pipeline]
input = reviews.jsonl.gz
output = out
seed = 42
selection_k = 500
models = lr, dt, rf

[model.rf]
n_trees = 30
""")

for stage in ("prepare", "train", "evaluate", "analyze", "report"):
    code = main([stage, "--config", str(work / "run.ini")])
    print(f"-- {stage} exited with {code}")

report = json.loads((work / "out" / "report.json").read_text())
print(json.dumps(report["corpus"], indent=2))

# changing the seed changes the split, so the trained models no longer apply
print("stale evaluate exits with", main(["evaluate", "--config", str(work / "run.ini"), "--seed", "1"]))
print("outputs in", work)
