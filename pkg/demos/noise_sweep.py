"""How error rates move with sensor jitter.

    python3 demos/noise_sweep.py

Fragments the same 240 shapes at several jitter levels (in resampling
steps) and prints corpus-level rates and mean decode time for each.
"""
from strokehmm import build_structured_model
from strokehmm.evaluation import EvalConfig, evaluate
from strokehmm.synth import FAMILIES, CorpusSpec, corpus


def main():
    model = build_structured_model()
    print(f"{'jitter':>7} {'FP':>7} {'FN':>7} {'ms':>6}")
    for sigma in (0.0, 0.05, 0.1, 0.2):
        data = corpus(CorpusSpec(counts={f: 20 for f in FAMILIES}, jitter_sigma=sigma, seed=5))
        rep, _ = evaluate(data, model, EvalConfig())
        print(f"{sigma:7.2f} {100 * rep.false_positive_rate:6.2f}% {100 * rep.false_negative_rate:6.2f}% "
              f"{rep.mean_ms:6.2f}")


if __name__ == "__main__":
    main()
