"""Extended-precision arithmetic kernel: precision control, dense determinants,
minors, and stable log-sum-exp accumulation.

All real arithmetic in this package runs on mpmath ``mpf`` values; the working
significand width is a process-global setting (default 256 bits) that callers
may raise temporarily with :func:`working_precision`.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
from mpmath import mp, mpf

DEFAULT_PRECISION_BITS = 256

mp.prec = DEFAULT_PRECISION_BITS


class DimensionError(ValueError):
    """Raised for non-square matrices or mismatched index-set sizes."""


class DomainError(ValueError):
    """Raised when an operation is evaluated outside its domain."""


def set_precision(bits: int) -> None:
    """Set the global significand width in bits."""
    if bits < 8:
        raise DomainError(f"precision must be at least 8 bits, got {bits}")
    mp.prec = bits


def get_precision() -> int:
    return mp.prec


@contextmanager
def working_precision(bits: int):
    """Temporarily run at `bits` of precision."""
    old = mp.prec
    mp.prec = bits
    try:
        yield
    finally:
        mp.prec = old


def real(x) -> mpf:
    """Convert to mpf. Strings are preferred for non-representable decimals."""
    if isinstance(x, mpf):
        return x
    return mpf(x)


def decimal_digits(bits: int | None = None) -> int:
    """Decimal digits sufficient to round-trip the given binary precision."""
    if bits is None:
        bits = mp.prec
    return int(math.ceil(bits * math.log10(2))) + 2


def format_real(x, digits: int | None = None) -> str:
    """Full-precision decimal serialization (deterministic)."""
    if digits is None:
        digits = decimal_digits()
    return mpmath.nstr(real(x), digits)


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

def _check_square(matrix: Sequence[Sequence]) -> int:
    n = len(matrix)
    if n == 0:
        raise DimensionError("empty matrix")
    for row in matrix:
        if len(row) != n:
            raise DimensionError(f"matrix is not square: {n} rows, row of length {len(row)}")
    return n


def det_dense(matrix: Sequence[Sequence]) -> mpf:
    """Determinant by partially pivoted Gaussian elimination at working precision."""
    n = _check_square(matrix)
    a = [[real(x) for x in row] for row in matrix]
    sign = 1
    det = mpf(1)
    for col in range(n):
        # partial pivot on magnitude
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return mpf(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        pivot = a[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = a[r][col] / pivot
            if factor == 0:
                continue
            arow, crow = a[r], a[col]
            for c in range(col + 1, n):
                arow[c] -= factor * crow[c]
    return sign * det


def det_cofactor(matrix: Sequence[Sequence]) -> mpf:
    """Cofactor-expansion determinant; oracle for det_dense on small matrices."""
    n = _check_square(matrix)
    a = [[real(x) for x in row] for row in matrix]

    def rec(rows: list[int], cols: list[int]) -> mpf:
        if not rows:
            return mpf(1)
        r = rows[0]
        total = mpf(0)
        for pos, c in enumerate(cols):
            sub = rec(rows[1:], cols[:pos] + cols[pos + 1:])
            term = a[r][c] * sub
            total += term if pos % 2 == 0 else -term
        return total

    return rec(list(range(n)), list(range(n)))


def minor(matrix: Sequence[Sequence], rows: Iterable[int], cols: Iterable[int]) -> mpf:
    """Determinant of the submatrix after deleting `rows` and `cols` (1-based).

    Deleting all rows returns 1 (empty-determinant convention). Follows the
    D(i;k), D(i,j;k,l) notation of the Jacobi identity.
    """
    rows = set(rows)
    cols = set(cols)
    if len(rows) != len(cols):
        raise DimensionError(f"must delete equally many rows and columns, got {len(rows)} vs {len(cols)}")
    n = _check_square(matrix)
    for idx in rows | cols:
        if not 1 <= idx <= n:
            raise DimensionError(f"index {idx} out of range for size-{n} matrix")
    keep_r = [i for i in range(n) if i + 1 not in rows]
    keep_c = [j for j in range(n) if j + 1 not in cols]
    if not keep_r:
        return mpf(1)
    sub = [[matrix[i][j] for j in keep_c] for i in keep_r]
    return det_dense(sub)


# ---------------------------------------------------------------------------
# log-sum-exp
# ---------------------------------------------------------------------------

@dataclass
class LogSumAccumulator:
    """Terms of a sum of exponentials, kept as (log-magnitude, payloads).

    Payloads ride along for softmax-weighted averaging: each payload tuple is
    averaged with weights e^{l_j} / sum_k e^{l_k}.
    """

    terms: list[tuple[mpf, tuple[mpf, ...]]] = field(default_factory=list)

    def add(self, log_magnitude, payload: Sequence = ()) -> None:
        self.terms.append((real(log_magnitude), tuple(real(p) for p in payload)))

    def __len__(self) -> int:
        return len(self.terms)


def log_sum_exp(acc: LogSumAccumulator) -> tuple[mpf, list[mpf]]:
    """Return (log sum_j e^{l_j}, softmax-weighted payload means), max-shifted."""
    if not acc.terms:
        raise DomainError("log_sum_exp of an empty accumulator")
    npay = len(acc.terms[0][1])
    for l, p in acc.terms:
        if len(p) != npay:
            raise DomainError("inconsistent payload lengths in accumulator")
    lmax = max(l for l, _ in acc.terms)
    total = mpf(0)
    means = [mpf(0)] * npay
    for l, payload in acc.terms:
        w = mpmath.exp(l - lmax)
        total += w
        for k, p in enumerate(payload):
            means[k] += w * p
    log_total = lmax + mpmath.log(total)
    means = [m / total for m in means]
    return log_total, means
