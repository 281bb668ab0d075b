"""Complex linear-algebra kernels shared by the rest of the package.

Provides the unitary discrete Fourier transform (radix-2 fast path for
power-of-two lengths, direct evaluation otherwise), row orthonormalization
with a fixed sign convention, seeded matrix sampling, and small vector
helpers with strict shape checking.

Randomness policy: every sampler takes an unsigned 64-bit seed and feeds it
to numpy's default PCG64 generator via :func:`rng_from_seed`.  The generator
family is part of the contract, so identical (seed, shape) calls return
bit-identical results across runs and platforms.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, InvalidParams, RankDeficient

_RANK_TOL = 1e-12
# bound the scratch used by the direct O(N^2) transform
_DIRECT_CHUNK = 1 << 21


def rng_from_seed(seed: int) -> np.random.Generator:
    """Deterministic PCG64 generator for an unsigned 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InvalidParams(f"seed must fit in 64 unsigned bits, got {seed}")
    return np.random.default_rng(seed)


def as_vector(x) -> np.ndarray:
    """Coerce ``x`` to a nonempty, finite complex128 1-d array."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionMismatch(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidParams("vector contains NaN or Inf entries")
    return v


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a nonempty, finite complex128 2-d array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or min(a.shape) < 1:
        raise DimensionMismatch(f"expected a nonempty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParams("matrix contains NaN or Inf entries")
    return a


def _is_pow2(n: int) -> bool:
    return n & (n - 1) == 0


def _bit_reversal(n: int) -> np.ndarray:
    """Bit-reversed index permutation for n = 2**k."""
    stages = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros_like(idx)
    for _ in range(stages):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time transform, no normalization."""
    n = x.shape[0]
    if n == 1:
        return x.copy()
    out = x[_bit_reversal(n)]
    half = 1
    while half < n:
        twiddle = np.exp((-1j * np.pi / half) * np.arange(half))
        blocks = out.reshape(-1, 2 * half)
        even = blocks[:, :half]
        odd = blocks[:, half:] * twiddle
        out = np.hstack((even + odd, even - odd)).reshape(-1)
        half *= 2
    return out


def _dft_direct(x: np.ndarray, sign: float) -> np.ndarray:
    """Dense O(N^2) transform, evaluated in row chunks to bound memory."""
    n = x.shape[0]
    cols = np.arange(n)
    out = np.empty(n, dtype=np.complex128)
    step = max(1, _DIRECT_CHUNK // n)
    for lo in range(0, n, step):
        rows = np.arange(lo, min(lo + step, n))
        out[lo : lo + rows.shape[0]] = (
            np.exp((sign * 2j * np.pi / n) * np.outer(rows, cols)) @ x
        )
    return out


def dft(x) -> np.ndarray:
    """Unitary discrete Fourier transform.

    Entry ``j`` of the result equals ``sum_k x_k exp(-2 pi i j k / N) /
    sqrt(N)``.  Power-of-two lengths take the radix-2 fast path; every other
    length falls back to the direct dense evaluation.
    """
    v = as_vector(x)
    n = v.shape[0]
    y = _fft_pow2(v) if _is_pow2(n) else _dft_direct(v, -1.0)
    return y / np.sqrt(n)


def idft(y) -> np.ndarray:
    """Inverse unitary transform, the exact adjoint of :func:`dft`."""
    v = as_vector(y)
    n = v.shape[0]
    if _is_pow2(n):
        out = np.conj(_fft_pow2(np.conj(v)))
    else:
        out = _dft_direct(v, +1.0)
    return out / np.sqrt(n)


def qr_orthonormalize_rows(m) -> np.ndarray:
    """Orthonormal rows spanning the same row space as ``m`` (rows <= cols).

    Computed as the thin QR factorization of the conjugate transpose with
    the triangular factor's diagonal rotated to be real positive.  The sign
    convention makes the output unique, and it is exactly the convention
    under which iid Gaussian input rows become uniformly (Haar) distributed
    orthonormal rows.

    Raises
    ------
    RankDeficient
        when any pivot magnitude falls below 1e-12 times the largest input
        row norm.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if rows > cols:
        raise DimensionMismatch(f"need rows <= cols to orthonormalize, got {rows}x{cols}")
    q, r = np.linalg.qr(a.conj().T, mode="reduced")
    diag = np.diagonal(r)
    pivots = np.abs(diag)
    tol = _RANK_TOL * float(np.linalg.norm(a, axis=1).max())
    if np.any(pivots < tol):
        raise RankDeficient(
            f"numerical rank below {rows}: pivot {pivots.min():.3e} under tolerance {tol:.3e}"
        )
    phase = diag / pivots
    return (q * phase).conj().T


def _check_sample_shape(rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise InvalidParams(f"sample shape must be positive, got {rows}x{cols}")


def sample_gaussian(rows: int, cols: int, seed: int) -> np.ndarray:
    """Matrix of iid real N(0, 1) entries in complex storage."""
    _check_sample_shape(rows, cols)
    g = rng_from_seed(seed)
    return g.standard_normal((rows, cols)).astype(np.complex128)


def sample_bernoulli(rows: int, cols: int, seed: int) -> np.ndarray:
    """Matrix of iid symmetric +/-1 entries in complex storage."""
    _check_sample_shape(rows, cols)
    g = rng_from_seed(seed)
    signs = g.integers(0, 2, size=(rows, cols)).astype(np.float64)
    return (2.0 * signs - 1.0).astype(np.complex128)


def matvec(m, x) -> np.ndarray:
    a = as_matrix(m)
    v = as_vector(x)
    if a.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {a.shape} to a length-{v.shape[0]} vector")
    return a @ v


def adjoint_matvec(m, y) -> np.ndarray:
    a = as_matrix(m)
    v = as_vector(y)
    if a.shape[0] != v.shape[0]:
        raise DimensionMismatch(
            f"cannot apply the adjoint of {a.shape} to a length-{v.shape[0]} vector"
        )
    return a.conj().T @ v


def norm2(x) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(as_vector(x)))


def inner(x, y) -> complex:
    """Inner product ``sum_i x_i * conj(y_i)`` (conjugation on the second slot)."""
    a = as_vector(x)
    b = as_vector(y)
    if a.shape != b.shape:
        raise DimensionMismatch("inner product needs equal-length vectors")
    return complex(np.vdot(b, a))
