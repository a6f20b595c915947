"""Non-binary LDPC codes over Z_q: parity-check matrices, alist I/O, encoding.

Codewords use the systematic layout ``[info | parity]``: the first
``B = N - M`` positions carry the information symbols and the last ``M``
columns of H form the (invertible) parity submatrix.

Non-binary alist layout (positions 1-indexed)::

    N M [q]
    max_col_degree max_row_degree
    col_degree_1 ... col_degree_N
    row_degree_1 ... row_degree_M
    <N lines>  row value row value ...     (one line per column)
    <M lines>  col value col value ...     (one line per row, optional)

``0 0`` pairs are accepted as padding.  When the per-row section is present
it must describe the same entries as the per-column section.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from .field import FieldElement, PrimeField


class AlistError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Sparse M x N matrix over Z_q; entries are sorted by (row, col)."""

    M: int
    N: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    field: PrimeField

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=np.int64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and vals must be equal-length 1-D arrays")
        if rows.size and (rows.min() < 0 or rows.max() >= self.M):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= self.N):
            raise ValueError("column index out of range")
        if vals.size and (vals.min() < 1 or vals.max() >= self.field.q):
            raise ValueError(f"entries must lie in [1, {self.field.q - 1}]")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1 and np.any((np.diff(rows) == 0) & (np.diff(cols) == 0)):
            raise ValueError("duplicate entry in parity-check matrix")
        for name, arr in (("rows", rows), ("cols", cols), ("vals", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        empty_rows = np.setdiff1d(np.arange(self.M), rows)
        if empty_rows.size:
            raise ValueError(f"row {empty_rows[0]} has no entries")
        empty_cols = np.setdiff1d(np.arange(self.N), cols)
        if empty_cols.size:
            raise ValueError(f"column {empty_cols[0]} has no entries")

    @classmethod
    def from_entries(
        cls, M: int, N: int, entries: Iterable[tuple[int, int, int]], field: PrimeField
    ) -> "ParityCheckMatrix":
        entries = list(entries)
        if not entries:
            return cls(M, N, np.zeros(0), np.zeros(0), np.zeros(0), field)
        r, c, v = zip(*entries)
        return cls(M, N, np.array(r), np.array(c), np.array([int(x) for x in v]), field)

    @classmethod
    def from_dense(cls, H, field: PrimeField) -> "ParityCheckMatrix":
        H = np.asarray(H, dtype=np.int64) % field.q
        r, c = np.nonzero(H)
        return cls(H.shape[0], H.shape[1], r, c, H[r, c], field)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def B(self) -> int:
        return self.N - self.M

    @property
    def n_edges(self) -> int:
        return int(self.rows.size)

    def entries(self) -> list[tuple[int, int, FieldElement]]:
        return [
            (int(r), int(c), self.field(int(v)))
            for r, c, v in zip(self.rows, self.cols, self.vals)
        ]

    @cached_property
    def dense(self) -> np.ndarray:
        H = np.zeros((self.M, self.N), dtype=np.int64)
        H[self.rows, self.cols] = self.vals
        H.setflags(write=False)
        return H

    @cached_property
    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.M)

    @cached_property
    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.N)

    def row_edges(self, m: int) -> np.ndarray:
        """Edge indices of row m, ordered by ascending column."""
        return np.flatnonzero(self.rows == m)

    def col_edges(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.cols == n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (
            self.M == other.M
            and self.N == other.N
            and self.field == other.field
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = object.__hash__


# ---------------------------------------------------------------------------
# alist I/O
# ---------------------------------------------------------------------------


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistError(f"non-integer token in {line.strip()!r}", lineno) from None


def load_alist(source: str | TextIO, field: PrimeField) -> ParityCheckMatrix:
    """Parse non-binary alist text (a string or an open text stream)."""
    text = source if isinstance(source, str) else source.read()
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if len(lines) < 4:
        raise AlistError("truncated header (need 4 header lines)", lines[-1][0] if lines else 1)

    lineno, hdr = lines[0][0], _ints(lines[0][1], lines[0][0])
    if len(hdr) not in (2, 3):
        raise AlistError("header must be 'N M' or 'N M q'", lineno)
    N, M = hdr[0], hdr[1]
    if N <= 0 or M <= 0:
        raise AlistError("N and M must be positive", lineno)
    if len(hdr) == 3 and hdr[2] != field.q:
        raise AlistError(f"file declares q={hdr[2]} but field is Z_{field.q}", lineno)

    lineno, maxdeg = lines[1][0], _ints(lines[1][1], lines[1][0])
    if len(maxdeg) != 2:
        raise AlistError("expected 'max_col_degree max_row_degree'", lineno)
    lineno, col_deg = lines[2][0], _ints(lines[2][1], lines[2][0])
    if len(col_deg) != N:
        raise AlistError(f"expected {N} column degrees, got {len(col_deg)}", lineno)
    lineno, row_deg = lines[3][0], _ints(lines[3][1], lines[3][0])
    if len(row_deg) != M:
        raise AlistError(f"expected {M} row degrees, got {len(row_deg)}", lineno)
    if max(col_deg) > maxdeg[0] or max(row_deg) > maxdeg[1]:
        raise AlistError("degree exceeds declared maximum", lines[1][0])
    if sum(col_deg) != sum(row_deg):
        raise AlistError("column and row degree totals differ", lines[3][0])

    body = lines[4:]
    if len(body) < N:
        raise AlistError(f"expected {N} column lines, found {len(body)}", body[-1][0] if body else lines[3][0])

    def pairs(lineno: int, line: str, expected: int, limit: int, what: str):
        toks = _ints(line, lineno)
        if len(toks) % 2:
            raise AlistError("odd number of tokens in position/value list", lineno)
        out = []
        for pos, val in zip(toks[::2], toks[1::2]):
            if pos == 0 and val == 0:
                continue
            if not 1 <= pos <= limit:
                raise AlistError(f"{what} position {pos} outside [1, {limit}]", lineno)
            if val == 0:
                raise AlistError("explicit zero entry", lineno)
            if not 1 <= val < field.q:
                raise AlistError(f"entry value {val} outside [1, {field.q - 1}]", lineno)
            out.append((pos - 1, val))
        if len(out) != expected:
            raise AlistError(f"declared degree {expected} but {len(out)} entries listed", lineno)
        return out

    entries: dict[tuple[int, int], int] = {}
    for n in range(N):
        lineno, line = body[n]
        for r, v in pairs(lineno, line, col_deg[n], M, "row"):
            if (r, n) in entries:
                raise AlistError(f"duplicate entry at row {r + 1}", lineno)
            entries[(r, n)] = v

    rest = body[N:]
    if rest:
        if len(rest) != M:
            raise AlistError(f"expected {M} row lines, found {len(rest)}", rest[0][0])
        seen = {}
        for m in range(M):
            lineno, line = rest[m]
            for c, v in pairs(lineno, line, row_deg[m], N, "column"):
                if entries.get((m, c)) != v:
                    raise AlistError(f"row section disagrees with column section at ({m + 1}, {c + 1})", lineno)
                seen[(m, c)] = v
        if len(seen) != len(entries):
            raise AlistError("row section omits entries listed per column", rest[-1][0])

    counts = np.bincount([r for r, _ in entries], minlength=M)
    for m in range(M):
        if counts[m] != row_deg[m]:
            raise AlistError(f"row {m} degree {row_deg[m]} but {counts[m]} entries", lines[3][0])
        if counts[m] == 0:
            raise AlistError(f"row {m} has no entries", lines[3][0])
    for n in range(N):
        if col_deg[n] == 0:
            raise AlistError(f"column {n} has no entries", lines[2][0])

    return ParityCheckMatrix.from_entries(M, N, ((r, c, v) for (r, c), v in entries.items()), field)


def dump_alist(H: ParityCheckMatrix, include_q: bool = False) -> str:
    col_deg, row_deg = H.col_degrees, H.row_degrees
    header = f"{H.N} {H.M}" + (f" {H.q}" if include_q else "")
    lines = [
        header,
        f"{int(col_deg.max())} {int(row_deg.max())}",
        " ".join(str(int(d)) for d in col_deg),
        " ".join(str(int(d)) for d in row_deg),
    ]
    for n in range(H.N):
        e = H.col_edges(n)
        lines.append(" ".join(f"{H.rows[i] + 1} {H.vals[i]}" for i in e))
    for m in range(H.M):
        e = H.row_edges(m)
        lines.append(" ".join(f"{H.cols[i] + 1} {H.vals[i]}" for i in e))
    return "\n".join(lines) + "\n"


def read_alist_file(path, field: PrimeField) -> ParityCheckMatrix:
    with open(path, encoding="ascii") as fh:
        return load_alist(fh, field)


# ---------------------------------------------------------------------------
# linear algebra over Z_q
# ---------------------------------------------------------------------------


def inverse_mod(A: np.ndarray, q: int) -> np.ndarray:
    """Gauss-Jordan inverse of a square matrix over Z_q (q prime)."""
    A = np.asarray(A, dtype=np.int64) % q
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        nz = np.flatnonzero(aug[col:, col])
        if nz.size == 0:
            raise SingularMatrixError(f"matrix singular over Z_{q} (column {col})")
        piv = col + nz[0]
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] * pow(int(aug[col, col]), q - 2, q) % q
        factors = aug[:, col].copy()
        factors[col] = 0
        aug = (aug - np.outer(factors, aug[col])) % q
    return aug[:, n:]


def rank_mod(A: np.ndarray, q: int) -> int:
    A = np.asarray(A, dtype=np.int64) % q
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), q - 2, q) % q
        factors = A[:, c].copy()
        factors[r] = 0
        A = (A - np.outer(factors, A[r])) % q
        r += 1
    return r


# ---------------------------------------------------------------------------
# construction and encoding
# ---------------------------------------------------------------------------


def random_code(
    M: int,
    N: int,
    column_weight: int,
    field: PrimeField,
    seed: int = 0,
    max_value_draws: int = 16,
    max_structures: int = 64,
) -> ParityCheckMatrix:
    """Random column-regular code with an invertible parity submatrix.

    Each column picks ``column_weight`` distinct rows among the currently
    lightest ones (random tie-break), which keeps row weights within one of
    each other.  Non-zero values are i.i.d. uniform on [1, q-1].  Short cycles
    are not removed.
    """
    if not 0 < M < N:
        raise ValueError(f"need 0 < M < N, got M={M}, N={N}")
    if not 2 <= column_weight <= M:
        raise ValueError(f"column weight must be in [2, M], got {column_weight}")
    if N * column_weight < 2 * M:
        raise ValueError("too few edges for every row to reach degree 2")
    q = field.q
    rng = np.random.default_rng(seed)
    for _ in range(max_structures):
        degree = np.zeros(M, dtype=np.int64)
        rows = np.empty((N, column_weight), dtype=np.int64)
        for n in range(N):
            order = np.lexsort((rng.random(M), degree))
            chosen = np.sort(order[:column_weight])
            rows[n] = chosen
            degree[chosen] += 1
        cols = np.repeat(np.arange(N), column_weight)
        flat_rows = rows.ravel()
        for _ in range(max_value_draws):
            vals = rng.integers(1, q, size=flat_rows.size)
            Hd = np.zeros((M, N), dtype=np.int64)
            Hd[flat_rows, cols] = vals
            if rank_mod(Hd[:, N - M :], q) == M:
                return ParityCheckMatrix(M, N, flat_rows, cols, vals, field)
    raise SingularMatrixError(
        f"no invertible parity submatrix after {max_structures * max_value_draws} draws"
    )


@dataclass(frozen=True)
class Codeword:
    symbols: np.ndarray
    B: int

    @property
    def info(self) -> np.ndarray:
        return self.symbols[: self.B]

    @property
    def parity(self) -> np.ndarray:
        return self.symbols[self.B :]


@dataclass(frozen=True, eq=False)
class Encoder:
    """Systematic encoder: parity = -(H_p^-1 H_s) info  (mod q)."""

    H: ParityCheckMatrix
    parity_map: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        H, q = self.H, self.H.q
        dense = H.dense
        try:
            hp_inv = inverse_mod(dense[:, H.B :], q)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"parity submatrix not invertible: {exc}") from None
        P = (-(hp_inv @ dense[:, : H.B])) % q
        P.setflags(write=False)
        object.__setattr__(self, "parity_map", P)

    @property
    def B(self) -> int:
        return self.H.B

    def encode_array(self, info: np.ndarray) -> np.ndarray:
        """Batch encode: ``info`` has shape (..., B); returns (..., N)."""
        info = np.asarray(info, dtype=np.int64)
        if info.shape[-1] != self.B:
            raise ValueError(f"info length {info.shape[-1]} != B = {self.B}")
        parity = (info @ self.parity_map.T) % self.H.q
        return np.concatenate([info % self.H.q, parity], axis=-1)


def encode(enc: Encoder, info) -> Codeword:
    info = np.asarray([int(v) for v in info], dtype=np.int64)
    if info.size and (info.min() < 0 or info.max() >= enc.H.q):
        raise ValueError("info symbols must be field elements")
    return Codeword(enc.encode_array(info), enc.B)


def syndrome(H: ParityCheckMatrix, c) -> np.ndarray:
    """H c over Z_q.  ``c`` may carry leading batch dimensions."""
    c = np.asarray(c.symbols if isinstance(c, Codeword) else c, dtype=np.int64)
    if c.shape[-1] != H.N:
        raise ValueError(f"codeword length {c.shape[-1]} != N = {H.N}")
    return (c @ H.dense.T) % H.q
