"""Dense tensor kernels and the plain-text matrix/tensor formats.

Tensors are numpy arrays. Unfoldings follow the usual convention in which
the mode-``n`` fibres become columns, ordered with the remaining indices in
column-major order (first index fastest).

File formats
------------
Matrix: first line ``rows cols``, then the values row by row.
Tensor: first line ``N d_1 ... d_N``, then the values in column-major order.
Lines starting with ``#`` are comments and may precede the header.
"""

import numpy as np

from .exceptions import DimensionMismatch, FormatError


def unfold(T, mode):
    """Mode-``mode`` matricization, shape ``(T.shape[mode], prod(others))``."""
    T = np.asarray(T)
    return np.reshape(np.moveaxis(T, mode, 0), (T.shape[mode], -1), order="F")


def fold(mat, mode, shape):
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    shape = tuple(shape)
    moved = (shape[mode],) + shape[:mode] + shape[mode + 1:]
    return np.moveaxis(np.reshape(mat, moved, order="F"), 0, mode)


def mode_product(T, A, mode):
    """``T x_mode A``: multiply every mode-``mode`` fibre of ``T`` by ``A``."""
    T = np.asarray(T, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != T.shape[mode]:
        raise DimensionMismatch(
            f"mode-{mode} product needs {T.shape[mode]} columns, got shape {A.shape}")
    shape = list(T.shape)
    shape[mode] = A.shape[0]
    return fold(A @ unfold(T, mode), mode, shape)


def multi_mode_product(T, mats, skip=None, transpose=False):
    """Apply ``mats[n]`` along every mode ``n`` (except ``skip``)."""
    for n, A in enumerate(mats):
        if n == skip:
            continue
        T = mode_product(T, A.T if transpose else A, n)
    return T


def tucker_to_tensor(core, factors):
    """``core x_1 A_1 x_2 ... x_N A_N``."""
    return multi_mode_product(core, factors)


# -- text formats ------------------------------------------------------------------


def _header_lines(comment):
    if not comment:
        return []
    return ["# " + line for line in str(comment).splitlines()]


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def write_matrix(path, M, comment=None):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatch("write_matrix needs a 2-D array")
    lines = _header_lines(comment) + [f"{M.shape[0]} {M.shape[1]}"]
    lines += [_fmt(row) for row in M]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_tensor(path, T, comment=None):
    T = np.asarray(T, dtype=float)
    lines = _header_lines(comment) + [" ".join(str(d) for d in (T.ndim,) + T.shape)]
    flat = T.ravel(order="F")
    step = T.shape[0] if T.ndim else 1
    lines += [_fmt(flat[k:k + step]) for k in range(0, flat.size, max(step, 1))]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_tokens(path):
    with open(path) as fh:
        text = fh.read()
    comments, tokens = [], []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            comments.append(stripped[1:].strip())
        elif stripped:
            tokens.append(stripped.split())
    if not tokens:
        raise FormatError(f"{path}: no header line")
    return comments, tokens[0], [t for row in tokens[1:] for t in row]


def _to_floats(path, values, count):
    if len(values) != count:
        raise FormatError(f"{path}: expected {count} values, found {len(values)}")
    try:
        data = np.array([float(v) for v in values])
    except ValueError as err:
        raise FormatError(f"{path}: {err}") from None
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite entries")
    return data


def _to_ints(path, header):
    try:
        dims = [int(h) for h in header]
    except ValueError:
        raise FormatError(f"{path}: bad header {' '.join(header)!r}") from None
    if any(d <= 0 for d in dims):
        raise FormatError(f"{path}: dimensions must be positive")
    return dims


def read_matrix(path, with_comments=False):
    comments, header, values = _read_tokens(path)
    dims = _to_ints(path, header)
    if len(dims) != 2:
        raise FormatError(f"{path}: matrix header needs 'rows cols'")
    M = _to_floats(path, values, dims[0] * dims[1]).reshape(dims)
    return (M, comments) if with_comments else M


def read_tensor(path, with_comments=False):
    comments, header, values = _read_tokens(path)
    dims = _to_ints(path, header)
    if len(dims) < 1 or dims[0] != len(dims) - 1:
        raise FormatError(f"{path}: tensor header needs 'N d_1 ... d_N'")
    shape = tuple(dims[1:])
    T = _to_floats(path, values, int(np.prod(shape))).reshape(shape, order="F")
    return (T, comments) if with_comments else T
