"""Pure-Python tape executor: the import-time fallback for `_evalcore`.

Semantics (including the integer-power loop, so results agree bit for bit
with the compiled kernel) must match `_evalcore.pyx` exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ._tape import (OP_ADD, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_LOG, OP_MUL,
                    OP_NEG, OP_SIN, OP_SQRT, OP_SUB, OP_TANH, OP_VAR)

COMPILED = False


def _run(codes, a, b, consts, xvars, regs) -> int:
    """Execute one tape; returns -1 on success or the failing instruction."""
    for i in range(len(codes)):
        op = codes[i]
        if op == OP_CONST:
            regs[i] = consts[a[i]]
        elif op == OP_VAR:
            regs[i] = xvars[a[i]]
        elif op == OP_ADD:
            regs[i] = regs[a[i]] + regs[b[i]]
        elif op == OP_SUB:
            regs[i] = regs[a[i]] - regs[b[i]]
        elif op == OP_MUL:
            regs[i] = regs[a[i]] * regs[b[i]]
        elif op == OP_DIV:
            den = regs[b[i]]
            if den == 0.0:
                return i
            regs[i] = regs[a[i]] / den
        elif op == OP_NEG:
            regs[i] = -regs[a[i]]
        elif op == OP_SIN:
            regs[i] = math.sin(regs[a[i]])
        elif op == OP_COS:
            regs[i] = math.cos(regs[a[i]])
        elif op == OP_EXP:
            v = regs[a[i]]
            regs[i] = math.exp(v) if v < 709.0 else math.inf
        elif op == OP_LOG:
            v = regs[a[i]]
            if v <= 0.0:
                return i
            regs[i] = math.log(v)
        elif op == OP_SQRT:
            v = regs[a[i]]
            if v < 0.0:
                return i
            regs[i] = math.sqrt(v)
        elif op == OP_TANH:
            regs[i] = math.tanh(regs[a[i]])
        else:  # OP_POWI
            base = regs[a[i]]
            k = b[i]
            acc = 1.0
            while k > 0:
                if k & 1:
                    acc *= base
                base *= base
                k >>= 1
            regs[i] = acc
    return -1


def eval_scalar(codes, a, b, consts, xvars, regs):
    """Returns (value, err_instruction); err < 0 means success."""
    err = _run(codes, a, b, consts, xvars, regs)
    if err >= 0:
        return (math.nan, err)
    return (regs[len(codes) - 1], -1)


def eval_batch(codes, a, b, consts, varmat, out, errs, regs):
    """Row-wise evaluation; fills out (nan on error) and errs (-1 ok)."""
    m = len(codes)
    for r in range(varmat.shape[0]):
        err = _run(codes, a, b, consts, varmat[r], regs)
        errs[r] = err
        out[r] = regs[m - 1] if err < 0 else np.nan
