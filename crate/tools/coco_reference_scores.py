"""Scores a caption fixture with the reference COCO caption toolkit scorers.

Usage: python coco_reference_scores.py <path-to-pycocoevalcap-parent> <fixture.jsonl>
The fixture is pre-tokenized, so the Java PTB tokenizer step is skipped.
"""
import json
import sys

sys.path.insert(0, sys.argv[1])
from pycocoevalcap.bleu.bleu import Bleu  # noqa: E402
from pycocoevalcap.cider.cider import Cider  # noqa: E402
from pycocoevalcap.rouge.rouge import Rouge  # noqa: E402

gts, res = {}, {}
with open(sys.argv[2]) as f:
    for line in f:
        r = json.loads(line)
        gts[r["id"]] = [r["reference"]]
        res[r["id"]] = [r["candidate"]]

bleu, _ = Bleu(4).compute_score(gts, res)
rouge, _ = Rouge().compute_score(gts, res)
cider, per_doc = Cider().compute_score(gts, res)
print(json.dumps({"bleu": bleu, "rouge_l": float(rouge), "cider": float(cider),
                  "cider_first5": [float(x) for x in per_doc[:5]]}, indent=1))
