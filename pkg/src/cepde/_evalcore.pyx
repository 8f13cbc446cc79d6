# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tape executor: the hot kernel behind expression evaluation.

Opcode numbering and semantics must match `_tape.py` / `_evalpure.py`.
"""

from libc.math cimport NAN, cos, exp, log, sin, sqrt, tanh

COMPILED = True

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_NEG = 2
DEF OP_SIN = 3
DEF OP_COS = 4
DEF OP_EXP = 5
DEF OP_LOG = 6
DEF OP_SQRT = 7
DEF OP_TANH = 8
DEF OP_ADD = 9
DEF OP_SUB = 10
DEF OP_MUL = 11
DEF OP_DIV = 12
DEF OP_POWI = 13


cdef int _run(const int* codes, const int* a, const int* b, const double* consts,
              const double* xvars, double* regs, int m) noexcept nogil:
    cdef int i, op, k
    cdef double v, base, acc
    for i in range(m):
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
            v = regs[b[i]]
            if v == 0.0:
                return i
            regs[i] = regs[a[i]] / v
        elif op == OP_NEG:
            regs[i] = -regs[a[i]]
        elif op == OP_SIN:
            regs[i] = sin(regs[a[i]])
        elif op == OP_COS:
            regs[i] = cos(regs[a[i]])
        elif op == OP_EXP:
            regs[i] = exp(regs[a[i]])
        elif op == OP_LOG:
            v = regs[a[i]]
            if v <= 0.0:
                return i
            regs[i] = log(v)
        elif op == OP_SQRT:
            v = regs[a[i]]
            if v < 0.0:
                return i
            regs[i] = sqrt(v)
        elif op == OP_TANH:
            regs[i] = tanh(regs[a[i]])
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


def eval_scalar(const int[::1] codes, const int[::1] a, const int[::1] b,
                const double[::1] consts, const double[::1] xvars,
                double[::1] regs):
    """Returns (value, err_instruction); err < 0 means success."""
    cdef int m = codes.shape[0]
    cdef const double* cptr = &consts[0] if consts.shape[0] > 0 else NULL
    cdef int err = _run(&codes[0], &a[0], &b[0], cptr, &xvars[0], &regs[0], m)
    if err >= 0:
        return (NAN, err)
    return (regs[m - 1], -1)


def eval_batch(const int[::1] codes, const int[::1] a, const int[::1] b,
               const double[::1] consts, const double[:, ::1] varmat,
               double[::1] out, int[::1] errs, double[::1] regs):
    """Row-wise evaluation; fills out (nan on error) and errs (-1 ok)."""
    cdef int m = codes.shape[0]
    cdef Py_ssize_t r, rows = varmat.shape[0]
    cdef int err
    cdef const double* cptr = &consts[0] if consts.shape[0] > 0 else NULL
    with nogil:
        for r in range(rows):
            err = _run(&codes[0], &a[0], &b[0], cptr, &varmat[r, 0], &regs[0], m)
            errs[r] = err
            out[r] = regs[m - 1] if err < 0 else NAN
