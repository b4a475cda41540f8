"""Compare the compiled and numpy run loops on identical inputs.

    python3 benchmarks/bench_kernel.py --dims 2,3,5,8 --runs 20000
"""
import argparse
import time

import numpy as np

from dqkd import ProtocolConfig, field_of_order
from dqkd.kernel import available_backends, simulate_runs
from dqkd.protocol import NSLOTS, STRATEGIES, ProtocolContext


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="2,3,5,8")
    ap.add_argument("--runs", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--attacks", default=",".join(STRATEGIES))
    args = ap.parse_args(argv)

    backends = available_backends()
    print(f"backends: {', '.join(backends)}; {args.runs} runs, best of {args.repeat}")
    print(f"{'d':>3} {'attack':>17} " + " ".join(f"{b + ' (s)':>12}" for b in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for d in (int(x) for x in args.dims.split(",")):
        for attack in args.attacks.split(","):
            ctx = ProtocolContext(ProtocolConfig(field_of_order(d), eve=attack))
            u = np.random.default_rng(0).random((args.runs, NSLOTS))
            results = {b: best_of(lambda b=b: simulate_runs(ctx, u, backend=b), args.repeat)
                       for b in backends}
            outs = [r[1] for r in results.values()]
            if not all(np.array_equal(outs[0], o) for o in outs[1:]):
                raise SystemExit(f"backends disagree at d={d}, {attack}")
            line = f"{d:>3} {attack:>17} " + " ".join(f"{results[b][0]:>12.4f}" for b in backends)
            if len(backends) == 2:
                line += f" {results['python'][0] / results['cython'][0]:>10.1f}x"
            print(line)


if __name__ == "__main__":
    main()
