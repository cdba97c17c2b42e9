"""Linear mixing model: NNLS unmixing, reconstruction and scene error.

Spectra are plain 1-D float arrays of length ``d``. A :class:`SpectralLibrary`
holds endmember candidates as the columns of a ``(d, K)`` matrix, so
``library.matrix @ abundances`` is the reconstructed pixel.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, IterationLimit, NonFinite

IN_SITU = "in-situ"
REMOTE = "remote"

# Lawson-Hanson step below this is treated as leaving the passive set.
_ZERO = 1e-15


def as_spectrum(values) -> np.ndarray:
    """Validate and return ``values`` as a finite 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatch(f"spectrum must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("spectrum contains NaN or Inf")
    return arr


class SpectralLibrary:
    """Ordered collection of spectra used as unmixing endmembers.

    Parameters
    ----------
    columns : sequence of array_like or 2-D array
        The spectra. A 2-D array is read as ``(K, d)``, one spectrum per row,
        matching how spectra are usually stacked.
    provenance : sequence of str, optional
        Per-column tag, ``"in-situ"`` or ``"remote"``. Defaults to in-situ.
    """

    __slots__ = ("_matrix", "provenance")

    def __init__(self, columns, provenance: Sequence[str] | None = None):
        rows = np.asarray(columns, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :] if rows.size else rows.reshape(0, 0)
        if rows.ndim != 2:
            raise DimensionMismatch(f"library columns must stack to 2-D, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise NonFinite("library contains NaN or Inf")
        self._matrix = np.ascontiguousarray(rows.T)
        self._matrix.flags.writeable = False
        if provenance is None:
            provenance = (IN_SITU,) * rows.shape[0]
        provenance = tuple(provenance)
        if len(provenance) != rows.shape[0]:
            raise DimensionMismatch("provenance length must equal the number of columns")
        self.provenance = provenance

    @classmethod
    def from_matrix(cls, matrix, provenance=None) -> "SpectralLibrary":
        """Build from a ``(d, K)`` matrix whose columns are the spectra."""
        return cls(np.asarray(matrix, dtype=np.float64).T, provenance)

    @property
    def matrix(self) -> np.ndarray:
        """Read-only ``(d, K)`` endmember matrix."""
        return self._matrix

    @property
    def n_bands(self) -> int:
        return self._matrix.shape[0]

    def __len__(self) -> int:
        return self._matrix.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self._matrix[:, i]

    def concat(self, other: "SpectralLibrary") -> "SpectralLibrary":
        if len(self) and len(other) and self.n_bands != other.n_bands:
            raise DimensionMismatch(f"cannot join libraries with {self.n_bands} and {other.n_bands} bands")
        cols = [c for c in (self._matrix.T, other.matrix.T) if c.size]
        stacked = np.vstack(cols) if cols else np.zeros((0, 0))
        return SpectralLibrary(stacked, self.provenance + other.provenance)

    def __eq__(self, other):
        if not isinstance(other, SpectralLibrary):
            return NotImplemented
        return self.provenance == other.provenance and np.array_equal(self._matrix, other._matrix)

    def __repr__(self):
        return f"SpectralLibrary(K={len(self)}, d={self.n_bands if len(self) else 0})"


@dataclass(frozen=True)
class SolverOptions:
    """Settings for :func:`nnls_solve`.

    ``tolerance`` bounds the KKT dual check: a zero coefficient whose
    descent direction exceeds it is released into the passive set.
    """

    tolerance: float = 1e-8
    sum_to_one: bool = False
    asc_weight: float = 10.0
    max_iter_factor: int = 3


@dataclass(frozen=True)
class UnmixResult:
    abundances: np.ndarray
    residual: float
    iterations: int = field(default=0, compare=False)


def _library_matrix(library) -> np.ndarray:
    if isinstance(library, SpectralLibrary):
        A = library.matrix
    else:
        A = np.asarray(library, dtype=np.float64)
        if A.ndim == 1:
            A = A[:, None]
        if not np.all(np.isfinite(A)):
            raise NonFinite("library contains NaN or Inf")
    if A.ndim != 2 or A.shape[1] == 0 or A.shape[0] == 0:
        raise DimensionMismatch("library must be a non-empty (d, K) matrix")
    return A


def _lawson_hanson(A, b, tol, max_iter):
    """Active-set NNLS. Returns (x, outer_iterations)."""
    n = A.shape[1]
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    w = A.T @ b
    outer = 0
    while True:
        free = ~passive & ~blocked
        if not free.any():
            break
        masked = np.where(free, w, -np.inf)
        j = int(np.argmax(masked))  # lowest index wins ties
        if masked[j] <= tol:
            break
        outer += 1
        if outer > max_iter:
            raise IterationLimit(f"NNLS did not converge in {max_iter} iterations")
        passive[j] = True
        first = True
        for _ in range(n + 1):
            idx = np.flatnonzero(passive)
            z = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
            if np.all(z > _ZERO):
                x[:] = 0.0
                x[idx] = z
                break
            if first and z[np.searchsorted(idx, j)] <= _ZERO:
                # numerically the new column cannot help; undo and skip it
                passive[j] = False
                blocked[j] = True
                break
            first = False
            xp = x[idx]
            neg = z <= _ZERO
            ratios = xp[neg] / (xp[neg] - z[neg])
            k = int(np.argmin(ratios))
            alpha = ratios[k]
            x[idx] = xp + alpha * (z - xp)
            x[idx[np.flatnonzero(neg)[k]]] = 0.0
            leaving = idx[x[idx] <= _ZERO]
            x[leaving] = 0.0
            passive[leaving] = False
        else:  # pragma: no cover - guarded by finite passive-set shrinkage
            raise IterationLimit("NNLS inner loop failed to terminate")
        if not blocked[j]:
            blocked[:] = False
        w = A.T @ (b - A @ x)
    return x, outer


def nnls_solve(library, pixel, opts: SolverOptions | None = None) -> UnmixResult:
    """Non-negative least-squares unmixing of one pixel.

    Solves ``min ||Y a - x||_2`` subject to ``a >= 0`` with the
    Lawson-Hanson active-set method. With ``opts.sum_to_one`` the
    constraint ``sum(a) = 1`` is imposed softly by appending the row
    ``asc_weight * 1`` to ``Y`` and ``asc_weight`` to ``x``; the reported
    residual is always measured on the original bands.

    Parameters
    ----------
    library : SpectralLibrary or array_like, shape (d, K)
    pixel : array_like, shape (d,)
    opts : SolverOptions, optional

    Returns
    -------
    UnmixResult
    """
    opts = opts or SolverOptions()
    if not opts.tolerance > 0:
        raise ValueError("solver tolerance must be positive")
    A = _library_matrix(library)
    x = as_spectrum(pixel)
    if x.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"pixel has {x.shape[0]} bands, library has {A.shape[0]}")
    K = A.shape[1]
    if opts.sum_to_one:
        A_solve = np.vstack([A, np.full((1, K), opts.asc_weight)])
        b_solve = np.append(x, opts.asc_weight)
    else:
        A_solve, b_solve = A, x
    a, it = _lawson_hanson(A_solve, b_solve, opts.tolerance, opts.max_iter_factor * K)
    a = np.maximum(a, 0.0)
    residual = float(np.linalg.norm(A @ a - x))
    return UnmixResult(a, residual, it)


def reconstruct(library, abundances) -> np.ndarray:
    """Mixed spectrum ``sum_i a_i * y_i``."""
    A = _library_matrix(library)
    a = np.asarray(abundances, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{a.shape} abundances for a library of {A.shape[1]} columns")
    return A @ a


def image_pixels(image) -> np.ndarray:
    """Flatten an image (or anything exposing ``.data``) to ``(n_pixels, d)``."""
    data = np.asarray(getattr(image, "data", image), dtype=np.float64)
    if data.ndim == 1:
        data = data[None, :]
    return data.reshape(-1, data.shape[-1])


def scene_reconstruction_error(library, image, opts: SolverOptions | None = None) -> float:
    """Sum over image pixels of the NNLS residual against ``library``."""
    A = _library_matrix(library)
    pixels = image_pixels(image)
    if pixels.shape[0] == 0:
        raise DimensionMismatch("image has no pixels")
    if pixels.shape[1] != A.shape[0]:
        raise DimensionMismatch(f"image has {pixels.shape[1]} bands, library has {A.shape[0]}")
    return float(sum(nnls_solve(A, px, opts).residual for px in pixels))
