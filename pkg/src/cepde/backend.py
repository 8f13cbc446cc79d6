"""Evaluator backend selection and the cached compile/eval entry points.

The compiled Cython kernel is preferred; the pure-Python twin is used when
the extension is unavailable or when CEPDE_PURE is set in the environment.
`benchmarks/bench_eval.py` compares the two.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from ._tape import ERROR_MESSAGES, Tape, compile_expr
from .expr import EvaluationDomainError, Expr, JetPoint

if os.environ.get("CEPDE_PURE"):
    from . import _evalpure as _impl
else:
    try:
        from . import _evalcore as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _evalpure as _impl  # type: ignore[no-redef]

USING_COMPILED: bool = bool(_impl.COMPILED)


@lru_cache(maxsize=4096)
def compiled_tape(e: Expr, n: int) -> Tape:
    return compile_expr(e, n)


def _raise_domain_error(tape: Tape, instr: int):
    kind = ERROR_MESSAGES.get(int(tape.codes[instr]), "domain error")
    raise EvaluationDomainError(kind, tape.nodes[instr])


def eval_vector(e: Expr, n: int, vec: np.ndarray) -> float:
    """Evaluate at a raw variable vector in variable_layout(n) order."""
    tape = compiled_tape(e, n)
    regs = np.empty(len(tape), dtype=np.float64)
    value, err = _impl.eval_scalar(tape.codes, tape.a, tape.b, tape.consts,
                                   np.ascontiguousarray(vec, dtype=np.float64),
                                   regs)
    if err >= 0:
        _raise_domain_error(tape, err)
    return float(value)


def eval_vector_or_nan(e: Expr, n: int, vec: np.ndarray) -> float:
    """Like eval_vector but returns nan instead of raising on domain errors."""
    tape = compiled_tape(e, n)
    regs = np.empty(len(tape), dtype=np.float64)
    value, _err = _impl.eval_scalar(tape.codes, tape.a, tape.b, tape.consts,
                                    np.ascontiguousarray(vec, dtype=np.float64),
                                    regs)
    return float(value)


def eval_expr(e: Expr, pt: JetPoint) -> float:
    return eval_vector(e, pt.n, pt.to_vector())


def eval_batch(e: Expr, n: int, varmat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate at many variable vectors (rows of varmat).

    Returns (values, errs): values[i] is nan where errs[i] >= 0 (the failing
    instruction index); errs[i] == -1 on success.
    """
    tape = compiled_tape(e, n)
    varmat = np.ascontiguousarray(varmat, dtype=np.float64)
    out = np.empty(varmat.shape[0], dtype=np.float64)
    errs = np.empty(varmat.shape[0], dtype=np.int32)
    regs = np.empty(len(tape), dtype=np.float64)
    _impl.eval_batch(tape.codes, tape.a, tape.b, tape.consts, varmat, out,
                     errs, regs)
    return out, errs
