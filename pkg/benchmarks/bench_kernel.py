"""Compare the compiled and pure-Python kernels on identical workloads.

    python3 benchmarks/bench_kernel.py [--neurons 4096] [--synapses 16384] [--repeat 3]

Both kernels run the same programs on copies of the same arrays; the script
also checks that their outputs agree before reporting timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from darwinsim.core import kernel
from darwinsim.core.costs import decode_table
from darwinsim.core.neuron_core import default_exp_lut, params_array
from darwinsim.mapper.quantize import quantize_params
from darwinsim.models.templates import get_template

FRAC = 8


def _bank(*names):
    values = {}
    for n in names:
        values.update(get_template(n).resolve({"bias": 0.3} if get_template(n).kind == "neuron" else {}))
    raw, _ = quantize_params({k: v for k, v in values.items() if not k.startswith(("TR", "LS", "v_th"))}, FRAC)
    return params_array(raw)


def inference_case(impl, model, n, rng_seed=0):
    rng = np.random.default_rng(rng_seed)
    table, costs = decode_table(get_template(model).words())
    nrec = np.zeros((n, 14), np.int32)
    nrec[:, 5] = 256
    nrec[:, 0] = rng.integers(-128, 128, n)
    pending = rng.integers(-64, 192, n).astype(np.int64)
    fired = np.zeros(n, np.uint8)
    counters = np.zeros(4, np.int64)
    fault = np.zeros(4, np.int64)
    lut = default_exp_lut(FRAC)
    t = time.perf_counter()
    impl.run_inference(table, costs, nrec, _bank(model), pending, 1, FRAC, lut, -1024, 1024,
                       np.zeros(32, np.int32), 256, fired, counters, fault)
    return time.perf_counter() - t, (nrec.copy(), fired.copy(), counters.copy())


def learning_case(impl, model, m, n=256, rng_seed=0):
    rng = np.random.default_rng(rng_seed)
    table, costs = decode_table(get_template(model).words())
    nrec = np.zeros((n, 14), np.int32)
    syn_ls = rng.integers(0, 256, (m, 10)).astype(np.int32)
    syn_w = rng.integers(-512, 512, m).astype(np.int32)
    post = rng.integers(0, n, m).astype(np.int32)
    pre = (rng.random(m) < 0.3).astype(np.uint8)
    fired = (rng.random(n) < 0.3).astype(np.uint8)
    counters = np.zeros(4, np.int64)
    fault = np.zeros(4, np.int64)
    t = time.perf_counter()
    impl.run_learning(table, costs, nrec, _bank(model), syn_ls, syn_w, post, pre, fired, 64, FRAC,
                      default_exp_lut(FRAC), -1024, 1024, np.zeros(32, np.int32), 256, counters, fault)
    return time.perf_counter() - t, (syn_ls.copy(), syn_w.copy(), counters.copy())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--neurons", type=int, default=4096)
    ap.add_argument("--synapses", type=int, default=16384)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = kernel.implementations()
    if "compiled" not in impls:
        print("compiled kernel not built; only the Python kernel is available")
    cases = [(f"inference {m} x{args.neurons}", lambda i, m=m: inference_case(i, m, args.neurons))
             for m in ("lif", "izhikevich", "expif")]
    cases += [(f"learning {m} x{args.synapses}", lambda i, m=m: learning_case(i, m, args.synapses))
              for m in ("stdp", "triplet_stdp")]
    print(f"{'case':32s} " + " ".join(f"{name:>12s}" for name in impls) + "   speedup")
    for label, fn in cases:
        times, outputs = {}, {}
        for name, impl in impls.items():
            best = float("inf")
            for _ in range(args.repeat):
                dt, out = fn(impl)
                best = min(best, dt)
            times[name], outputs[name] = best, out
        ref = outputs["python"]
        for name, out in outputs.items():
            if not all(np.array_equal(a, b) for a, b in zip(ref, out)):
                raise SystemExit(f"{label}: {name} kernel disagrees with the Python kernel")
        speed = times["python"] / times["compiled"] if "compiled" in times and times["compiled"] else float("nan")
        print(f"{label:32s} " + " ".join(f"{times[n] * 1e3:10.2f}ms" for n in impls) + f"   {speed:7.1f}x")


if __name__ == "__main__":
    main()
