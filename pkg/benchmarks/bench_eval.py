#!/usr/bin/env python3
"""Benchmark the compiled tape kernel against the pure-Python fallback.

Evaluates the bundled-corpus expressions (plus a symbol-sized derivative
tape) at many random jet points, scalar and batch, and prints per-call
timings with the speedup.  Usage:

    python benchmarks/bench_eval.py [--points N] [--repeats R]
"""

import argparse
import json
import time

import numpy as np

import cepde
from cepde import _evalpure
from cepde._tape import compile_expr
from cepde.expr import differentiate, parse, variable_layout

try:
    from cepde import _evalcore
except ImportError:
    _evalcore = None


def bench_scalar(impl, tape, varmat, repeats):
    regs = np.empty(len(tape))
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for row in varmat:
            impl.eval_scalar(tape.codes, tape.a, tape.b, tape.consts, row, regs)
        best = min(best, time.perf_counter() - t0)
    return best / len(varmat)


def bench_batch(impl, tape, varmat, repeats):
    out = np.empty(varmat.shape[0])
    errs = np.empty(varmat.shape[0], dtype=np.int32)
    regs = np.empty(len(tape))
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.eval_batch(tape.codes, tape.a, tape.b, tape.consts, varmat,
                        out, errs, regs)
        best = min(best, time.perf_counter() - t0)
    return best / varmat.shape[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _evalcore is None:
        print("compiled kernel not available; showing pure-Python timings only")

    entries = json.load(open(cepde.bundled_corpus_path()))
    cases = [(e["name"], parse(e["expression"], e["n"])) for e in entries]
    # a second-symbol-sized workload: iterated derivative of the cubic
    cubic = parse("u11 - u22^3/3 - u22", 2)
    cases.append(("d2(cubic)/du22^2", differentiate(differentiate(cubic, "u22"), "u22")))

    rng = np.random.default_rng(0)
    nvars = len(variable_layout(2))
    varmat = np.ascontiguousarray(rng.uniform(-2, 2, size=(args.points, nvars)))

    header = f"{'expression':24s} {'len':>4s} {'pure us':>9s}"
    if _evalcore is not None:
        header += f" {'cython us':>10s} {'speedup':>8s}"
    print(header + "   (scalar / batch)")
    for name, expr in cases:
        tape = compile_expr(expr, 2)
        p_s = bench_scalar(_evalpure, tape, varmat[:2000], args.repeats) * 1e6
        p_b = bench_batch(_evalpure, tape, varmat, args.repeats) * 1e6
        line = f"{name:24s} {len(tape):4d} {p_s:6.2f}/{p_b:6.2f}"
        if _evalcore is not None:
            c_s = bench_scalar(_evalcore, tape, varmat[:2000], args.repeats) * 1e6
            c_b = bench_batch(_evalcore, tape, varmat, args.repeats) * 1e6
            line += f" {c_s:6.2f}/{c_b:6.3f} {p_s / c_s:5.1f}x/{p_b / c_b:5.1f}x"
        print(line)


if __name__ == "__main__":
    main()
