"""Dense complex-matrix kernel and uniformly sampled matrix functions.

Everything downstream works with plain ``numpy.ndarray`` matrices
(complex128) and `GridFunction`, a stack of samples on the uniform grid
t_j = j/N, j = 0..N.  Endpoint samples are exact by construction, which is
what makes all boundary-condition checks zero-tolerance.

Values are treated as immutable after construction; grid-pointwise
operations are pure and safe to evaluate in parallel.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian

__all__ = [
    "GridFunction",
    "herm_spectrum",
    "scalar_calculus",
    "matrix_function",
    "sup_norm",
    "spectral_norm",
    "stack_spectral_max",
    "frobenius",
    "stack_frobenius_max",
    "stack_unitarity_defect",
    "direct_sum",
    "random_hermitian",
]


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return m


class GridFunction:
    """Samples of a function [0,1] -> M_d (or -> R) on a uniform grid.

    samples has shape (N+1, d, d) complex for the matrix variant or (N+1,)
    float for the scalar variant.  t_0 = 0 and t_N = 1 are exact samples.
    """

    __slots__ = ("samples",)

    def __init__(self, samples):
        samples = np.asarray(samples)
        if samples.ndim == 1:
            samples = samples.astype(np.float64, copy=False)
        elif samples.ndim == 3:
            if samples.shape[1] != samples.shape[2]:
                raise DimensionMismatch(
                    f"matrix samples must be square, got shape {samples.shape}"
                )
            samples = samples.astype(np.complex128, copy=False)
        else:
            raise DimensionMismatch(
                f"samples must have shape (N+1,) or (N+1, d, d), got {samples.shape}"
            )
        if samples.shape[0] < 2:
            raise DimensionMismatch("need at least two samples (t=0 and t=1)")
        self.samples = samples

    @property
    def grid_size(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def dim(self):
        """Matrix dimension, or None for the scalar variant."""
        return self.samples.shape[1] if self.samples.ndim == 3 else None

    @property
    def is_matrix(self) -> bool:
        return self.samples.ndim == 3

    @classmethod
    def from_callable(cls, fn: Callable[[float], object], grid_size: int) -> "GridFunction":
        ts = [j / grid_size for j in range(grid_size + 1)]
        return cls(np.asarray([fn(t) for t in ts]))

    def grid(self) -> np.ndarray:
        n = self.grid_size
        return np.arange(n + 1, dtype=np.float64) / n

    def at(self, t: float):
        """Value at t: the sample when t is a grid point, else linear interpolation."""
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t = {t} outside [0, 1]")
        x = t * self.grid_size
        j = int(round(x))
        if x == j:
            return self.samples[j]
        lo = int(np.floor(x))
        w = x - lo
        return (1.0 - w) * self.samples[lo] + w * self.samples[lo + 1]

    def pointwise(self, other: "GridFunction") -> "GridFunction":
        """Pointwise (matrix) product sample-by-sample."""
        if self.grid_size != other.grid_size:
            raise DimensionMismatch("grid sizes differ")
        if self.is_matrix and other.is_matrix:
            return GridFunction(self.samples @ other.samples)
        return GridFunction(self.samples * other.samples)

    def adjoint(self) -> "GridFunction":
        if not self.is_matrix:
            return GridFunction(self.samples.copy())
        return GridFunction(self.samples.conj().transpose(0, 2, 1))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.samples - other.samples)

    def __mul__(self, scalar) -> "GridFunction":
        return GridFunction(self.samples * scalar)

    __rmul__ = __mul__


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def spectral_norm(m) -> float:
    """Operator norm (largest singular value)."""
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def stack_frobenius_max(stack: np.ndarray) -> float:
    return float(np.sqrt((np.abs(stack) ** 2).sum(axis=(1, 2)).max()))


def stack_spectral_max(stack: np.ndarray) -> float:
    """max_k ||stack[k]||_2, screening with Frobenius norms.

    ||.||_2 <= ||.||_F, so any slice whose Frobenius norm is below the best
    spectral norm found so far cannot win and is skipped.
    """
    stack = np.asarray(stack)
    if stack.size == 0:
        return 0.0
    fro = np.sqrt((np.abs(stack) ** 2).sum(axis=(1, 2)))
    order = np.argsort(fro)[::-1]
    best = 0.0
    for k in order:
        if fro[k] <= best:
            break
        best = max(best, float(np.linalg.svd(stack[k], compute_uv=False)[0]))
    return best


def stack_unitarity_defect(stack: np.ndarray) -> float:
    """max_k ||u_k u_k* - I||_F (an upper bound on the operator-norm defect)."""
    stack = np.asarray(stack, dtype=np.complex128)
    eye = np.eye(stack.shape[1])
    return stack_frobenius_max(stack @ stack.conj().transpose(0, 2, 1) - eye)


def herm_spectrum(m, tol: float = 1e-10):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Raises NotHermitian when ||m - m*||_F > tol.  The decomposition is of the
    Hermitian part (m + m*)/2, so the reconstruction error is bounded by
    tol plus solver rounding (well inside the documented 10*tol*dim).
    """
    m = _as_square(m)
    dev = frobenius(m - m.conj().T)
    if dev > tol:
        raise NotHermitian(f"||m - m*|| = {dev:.3e} exceeds tolerance {tol:.3e}")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    return w, v


def matrix_function(m, g: Callable[[np.ndarray], np.ndarray], tol: float = 1e-10) -> np.ndarray:
    """g applied to a single Hermitian matrix through its eigendecomposition."""
    w, v = herm_spectrum(m, tol)
    return (v * np.asarray(g(w), dtype=np.float64)) @ v.conj().T


def scalar_calculus(f: GridFunction, g: Callable[[np.ndarray], np.ndarray],
                    tol: float = 1e-10) -> GridFunction:
    """Pointwise functional calculus on a Hermitian-valued grid function.

    g must be defined on the union of the sample spectra; it receives the
    eigenvalue vector of each sample and must return real values of the same
    shape.  Output samples are Hermitian by construction.
    """
    if not f.is_matrix:
        return GridFunction(np.asarray(g(f.samples), dtype=np.float64))
    stack = f.samples
    dev = stack_frobenius_max(stack - stack.conj().transpose(0, 2, 1))
    if dev > tol:
        raise NotHermitian(f"samples deviate from Hermitian by {dev:.3e} > {tol:.3e}")
    w, v = np.linalg.eigh((stack + stack.conj().transpose(0, 2, 1)) / 2.0)
    gw = np.asarray(g(w), dtype=np.float64)
    if gw.shape != w.shape:
        raise ValueError("scalar map must preserve the eigenvalue array shape")
    out = (v * gw[:, None, :]) @ v.conj().transpose(0, 2, 1)
    return GridFunction(out)


def sup_norm(f: GridFunction) -> float:
    """max over grid points of the operator norm.

    This is a lower bound for the true sup norm of the sampled function;
    the two agree for the piecewise-structured elements used here.
    """
    if f.is_matrix:
        return stack_spectral_max(f.samples)
    return float(np.abs(f.samples).max())


def direct_sum(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal sum of square matrices."""
    blocks = [np.asarray(b, dtype=np.complex128) for b in blocks]
    dim = sum(b.shape[0] for b in blocks)
    out = np.zeros((dim, dim), dtype=np.complex128)
    at = 0
    for b in blocks:
        d = b.shape[0]
        out[at:at + d, at:at + d] = b
        at += d
    return out


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (m + m.conj().T) / 2.0
