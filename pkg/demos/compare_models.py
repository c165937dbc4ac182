"""Structured model against the fully connected baseline on a small corpus.

    python3 demos/compare_models.py [strokes_per_family]

Generates a noisy corpus over all twelve shape families, fragments it with
both models and prints the per-family false positive and false negative
rates side by side.
"""
import sys

from strokehmm import build_ergodic_baseline, build_structured_model
from strokehmm.evaluation import compare_models, format_table
from strokehmm.synth import FAMILIES, CorpusSpec, corpus


def main(per_family=10):
    data = corpus(CorpusSpec(counts={f: per_family for f in FAMILIES}, jitter_sigma=0.1, seed=11))
    cmp = compare_models(data, build_structured_model(), build_ergodic_baseline())
    print(format_table(cmp.structured, cmp.baseline))


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:2]))
