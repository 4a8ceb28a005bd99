"""Symmetric eigendecomposition, spectral embeddings, and the heat kernel.

Everything downstream (spectral clustering, kernel k-means, both SOM variants)
runs on the two objects defined here: an eigendecomposition with a fixed sign
convention, and a kernel matrix obtained by exponentiating a graph Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericalError

__all__ = [
    "EigenDecomposition",
    "KernelMatrix",
    "eigendecompose_symmetric",
    "heat_kernel",
    "spectral_embedding",
    "kernel_feature_coordinates",
]

# relative asymmetry accepted before a matrix is rejected as non-symmetric
_SYMMETRY_RTOL = 1e-12


def _checked_symmetric(m, what: str) -> np.ndarray:
    """Validate and exactly symmetrize a square matrix."""
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError(f"{what} must have order >= 1")
    if not np.isfinite(a).all():
        raise ValueError(f"{what} has non-finite entries")
    scale = max(float(np.abs(a).max()), 1.0)
    if np.abs(a - a.T).max() > _SYMMETRY_RTOL * scale:
        raise ValueError(f"{what} is not symmetric")
    return (a + a.T) / 2.0


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix, ascending, with deterministic signs.

    ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``. In each column the
    entry of largest absolute value is nonnegative (ties broken by lowest
    index), which pins the otherwise arbitrary sign and keeps every downstream
    result reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=np.float64)
        vecs = np.array(self.eigenvectors, dtype=np.float64)
        n = vals.size
        if vals.ndim != 1 or vecs.shape != (n, n):
            raise ValueError("eigenvalues must be length n, eigenvectors n x n")
        if n > 1 and (np.diff(vals) < 0).any():
            raise ValueError("eigenvalues must be sorted ascending")
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @property
    def order(self) -> int:
        return int(self.eigenvalues.size)

    def reconstruct(self) -> np.ndarray:
        """V diag(lambda) V^T, the matrix the decomposition came from."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # argmax returns the first occurrence, which is the tie rule we want
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose_symmetric(m) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Eigenvalues come back ascending; eigenvector signs follow the
    largest-absolute-entry convention so repeated calls on equal input give
    byte-identical output.
    """
    a = _checked_symmetric(m, "matrix")
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        off = a - np.diag(np.diagonal(a))
        residual = float(np.linalg.norm(off))
        raise NumericalError(
            f"eigendecomposition failed to converge "
            f"(off-diagonal Frobenius norm {residual:.6e}): {exc}") from exc
    return EigenDecomposition(vals, _fix_signs(vecs))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Symmetric similarity matrix, optionally tagged with the beta it came from.

    Positive semi-definiteness is a property of how the matrix was built (exact
    for heat kernels, near-exact for Gram matrices) and is checked where it
    matters, in :func:`kernel_feature_coordinates`, not at construction.
    """

    matrix: np.ndarray
    beta: float | None = None

    def __post_init__(self):
        a = _checked_symmetric(self.matrix, "kernel matrix")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        if self.beta is not None:
            b = float(self.beta)
            if not (b >= 0.0 and np.isfinite(b)):
                raise ValueError(f"beta must be a finite nonnegative real, got {self.beta!r}")
            object.__setattr__(self, "beta", b)

    @property
    def order(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def diagonal(self) -> np.ndarray:
        d = np.diagonal(self.matrix).copy()
        d.setflags(write=False)
        return d

    def trace(self) -> float:
        return float(self.diagonal.sum())


def heat_kernel(laplacian, beta: float) -> KernelMatrix:
    """Diffusion kernel exp(-beta * L) of a graph Laplacian.

    Computed through the full eigendecomposition, exponentiating the spectrum,
    then explicitly symmetrized. Because L annihilates the constant vector,
    every row of the result sums to 1; because the exponentiated spectrum is
    positive, the result is positive semi-definite by construction.
    """
    b = float(beta)
    if not np.isfinite(b) or b < 0:
        raise ValueError(f"beta must be a finite nonnegative real, got {beta!r}")
    lap = _checked_symmetric(laplacian, "laplacian")
    if b == 0.0:
        return KernelMatrix(np.eye(lap.shape[0]), beta=0.0)
    decomp = eigendecompose_symmetric(lap)
    damped = np.exp(-b * decomp.eigenvalues)
    v = decomp.eigenvectors
    k = (v * damped) @ v.T
    return KernelMatrix((k + k.T) / 2.0, beta=b)


def spectral_embedding(laplacian, p: int) -> np.ndarray:
    """Map vertices to p-space using the eigenvectors of the p smallest eigenvalues.

    Row i is vertex i's coordinate vector. All p eigenvectors enter with equal
    weight. Accepts either the Laplacian itself or an already-computed
    :class:`EigenDecomposition` of it.
    """
    if isinstance(laplacian, EigenDecomposition):
        decomp = laplacian
    else:
        decomp = eigendecompose_symmetric(laplacian)
    n = decomp.order
    if not 1 <= p <= n:
        raise ValueError(f"p must be in 1..{n}, got {p}")
    return decomp.eigenvectors[:, :p].copy()


def kernel_feature_coordinates(kernel) -> np.ndarray:
    """Explicit coordinates X with X X^T equal to the kernel matrix.

    Realizes the feature map behind the kernel trick: row i is a concrete
    vector whose inner products reproduce the kernel entries. Columns follow
    the ascending eigenvalue order; negative eigenvalues within the PSD
    tolerance are clamped to zero before the square root.
    """
    k = kernel.matrix if isinstance(kernel, KernelMatrix) else \
        _checked_symmetric(kernel, "kernel matrix")
    decomp = eigendecompose_symmetric(k)
    vals = decomp.eigenvalues
    largest = float(vals[-1])
    if float(vals[0]) < -1e-8 * max(largest, 0.0):
        raise NumericalError(
            f"kernel matrix is not positive semi-definite within tolerance "
            f"(eigenvalue range [{vals[0]:.6e}, {largest:.6e}])")
    return decomp.eigenvectors * np.sqrt(np.maximum(vals, 0.0))
