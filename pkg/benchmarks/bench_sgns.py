"""Compare SGNS training throughput of the numba kernel and the numpy fallback.

    python3 benchmarks/bench_sgns.py [--sentences N] [--dim D] [--repeat R]

The numba path is compiled once before timing. Both paths consume the same
random stream, so the final vectors are also compared.
"""
import argparse
import time

import numpy as np

from driftlab import corpus, sgns, synth


def build_corpus(n_sentences):
    spec = synth.make_spec(3, vocab_size=500, n_periods=1, sentences_per_period=n_sentences, schedule=[0.5])
    (c,), _ = corpus.ingest(synth.records(spec), spec.periods())
    return c


def bench(c, hp, use_numba, repeat):
    best = float("inf")
    space = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        space = sgns.train(c, hp, use_numba=use_numba)
        best = min(best, time.perf_counter() - t0)
    return best, space


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sentences", type=int, default=5000)
    ap.add_argument("--dim", type=int, default=50)
    ap.add_argument("--epochs", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    c = build_corpus(args.sentences)
    hp = sgns.Hyperparams(vector_size=args.dim, epochs=args.epochs, sample=0, seed=1)
    words = len(c.tokens) * args.epochs

    # warm-up: trigger JIT compilation outside the timed region
    sgns.train(build_corpus(10), hp.replace(epochs=1), use_numba=True)

    t_jit, fast = bench(c, hp, True, args.repeat)
    t_np, slow = bench(c, hp, False, 1)
    diff = float(np.max(np.abs(np.asarray(fast.input_vectors) - np.asarray(slow.input_vectors))))

    print(f"tokens x epochs : {words}")
    print(f"numba           : {t_jit:8.3f} s  {words / t_jit:12,.0f} words/s")
    print(f"numpy           : {t_np:8.3f} s  {words / t_np:12,.0f} words/s")
    print(f"speedup         : {t_np / t_jit:8.1f}x")
    print(f"max |diff|      : {diff:.2e}")


if __name__ == "__main__":
    main()
