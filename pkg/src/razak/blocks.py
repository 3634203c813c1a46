"""Building blocks A(n, (a+1)n) and their elements.

An element is a sampled matrix function f on [0,1] together with its exact
boundary matrix c in M_n; the endpoint samples are synthesized from c, so

    f(0) = diag(c, ..., c, 0_n)   (a copies of c)
    f(1) = diag(c, ..., c)        (a+1 copies)

hold with zero tolerance at the stored endpoint samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernel
from .errors import DimensionMismatch, NotHermitian, NotInCone, NotSelfAdjoint
from .kernel import GridFunction

__all__ = [
    "BuildingBlock",
    "BlockElement",
    "ProjectionVerdict",
    "boundary_pattern",
    "validate_element",
    "canonical_h",
    "evaluate",
    "psi_embed",
    "scalar_transform",
    "certify_no_projection",
    "random_element",
]


@dataclass(frozen=True)
class BuildingBlock:
    """Parameters (n, a) of A(n, n') with n' = (a+1)n."""

    n: int
    a: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.a < 1:
            raise ValueError(f"a must be >= 1, got {self.a}")

    @property
    def nprime(self) -> int:
        return (self.a + 1) * self.n

    def __str__(self) -> str:
        return f"A({self.n},{self.nprime})"


def boundary_pattern(block: BuildingBlock, c: np.ndarray, endpoint: int) -> np.ndarray:
    """The required value at t=0 (a copies of c plus 0_n) or t=1 (a+1 copies)."""
    c = np.asarray(c, dtype=np.complex128)
    if c.shape != (block.n, block.n):
        raise DimensionMismatch(f"c must be {block.n}x{block.n}, got {c.shape}")
    if endpoint == 0:
        return kernel.direct_sum([c] * block.a + [np.zeros((block.n, block.n))])
    if endpoint == 1:
        return kernel.direct_sum([c] * (block.a + 1))
    raise ValueError("endpoint must be 0 or 1")


@dataclass(eq=False)
class BlockElement:
    """A sampled element of a building block with exact boundary datum c."""

    block: BuildingBlock
    f: GridFunction
    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.complex128)
        if self.c.shape != (self.block.n, self.block.n):
            raise DimensionMismatch(
                f"boundary datum must be {self.block.n}x{self.block.n}, got {self.c.shape}"
            )
        if not self.f.is_matrix or self.f.dim != self.block.nprime:
            raise DimensionMismatch(
                f"samples must be {self.block.nprime}x{self.block.nprime} matrices"
            )

    @property
    def grid_size(self) -> int:
        return self.f.grid_size


def validate_element(e: BlockElement, tol: float = 1e-9) -> float:
    """Max operator-norm residual of the two endpoint boundary conditions.

    The element is acceptable iff the returned defect is <= tol; the caller
    decides.  Elements built by this package have defect exactly 0.
    """
    r0 = e.f.samples[0] - boundary_pattern(e.block, e.c, 0)
    r1 = e.f.samples[-1] - boundary_pattern(e.block, e.c, 1)
    return max(kernel.spectral_norm(r0), kernel.spectral_norm(r1))


def canonical_h(block: BuildingBlock, grid_size: int = 256) -> BlockElement:
    """The positive element h(t) = diag(1_n x a, t*1_n), boundary datum 1_n.

    h is self-adjoint with sup norm exactly 1 and spectrum {1, t} at t.
    """
    n, a = block.n, block.a
    ts = np.arange(grid_size + 1, dtype=np.float64) / grid_size
    diag = np.ones((grid_size + 1, block.nprime))
    diag[:, a * n:] = ts[:, None]
    samples = np.zeros((grid_size + 1, block.nprime, block.nprime), dtype=np.complex128)
    idx = np.arange(block.nprime)
    samples[:, idx, idx] = diag
    return BlockElement(block, GridFunction(samples), np.eye(n, dtype=np.complex128))


def evaluate(e: BlockElement, where) -> np.ndarray:
    """Point evaluation: a fibre sample for s in [0,1], or the boundary
    datum c for the fibre at infinity (pass math.inf)."""
    if where == math.inf:
        return e.c.copy()
    return np.asarray(e.f.at(float(where)))


def psi_embed(block: BuildingBlock, g: GridFunction, tol: float = 1e-9) -> BlockElement:
    """Embed a scalar function with g(0) = a/(a+1) g(1) as a self-adjoint element.

    The image e satisfies tr (x) delta_t(e) = g(t) at every grid point, making
    the embedding a right inverse to the tracial-affine map.  Raises NotInCone
    when the boundary relation fails beyond tol.
    """
    if g.is_matrix:
        raise DimensionMismatch("psi_embed expects a scalar grid function")
    n, a = block.n, block.a
    g0, g1 = float(g.samples[0]), float(g.samples[-1])
    defect = abs(g0 - a / (a + 1) * g1)
    if defect > tol:
        raise NotInCone(
            f"g(0) = {g0!r} vs a/(a+1)*g(1) = {a / (a + 1) * g1!r} (defect {defect:.3e})"
        )
    N = g.grid_size
    ts = np.arange(N + 1, dtype=np.float64) / N
    scale = (a + 1) / (a + ts)
    diag = np.empty((N + 1, block.nprime))
    diag[:, : a * n] = (scale * g.samples)[:, None]
    diag[:, a * n:] = (scale * ts * g.samples)[:, None]
    samples = np.zeros((N + 1, block.nprime, block.nprime), dtype=np.complex128)
    idx = np.arange(block.nprime)
    samples[:, idx, idx] = diag
    # Endpoint samples synthesized from c = g(1)*1_n; within tol of the raw
    # formula, and exactly the boundary pattern.
    c = g1 * np.eye(n, dtype=np.complex128)
    samples[0] = boundary_pattern(block, c, 0)
    samples[-1] = boundary_pattern(block, c, 1)
    return BlockElement(block, GridFunction(samples), c)


def scalar_transform(e: BlockElement, g: Callable[[np.ndarray], np.ndarray],
                     tol: float = 1e-10) -> BlockElement:
    """Apply a scalar map with g(0) = 0 to a self-adjoint element.

    g(0) = 0 keeps the zero corner at t=0 intact, so the image is again a
    valid element, with boundary datum g(c).
    """
    g0 = float(np.asarray(g(np.zeros(1)))[0])
    if abs(g0) > tol:
        raise ValueError(f"scalar map must send 0 to 0 (got {g0!r})")
    out = kernel.scalar_calculus(e.f, g, tol=max(tol, 1e-9))
    c = kernel.matrix_function(e.c, g, tol=max(tol, 1e-9))
    samples = out.samples.copy()
    samples[0] = boundary_pattern(e.block, c, 0)
    samples[-1] = boundary_pattern(e.block, c, 1)
    return BlockElement(e.block, GridFunction(samples), c)


@dataclass(frozen=True)
class ProjectionVerdict:
    """Outcome of the almost-projection certifier.

    kind is "not_almost_projection" or "near_zero"; for near_zero, bound is a
    certified upper bound on the sup norm of the input.
    """

    kind: str
    bound: float
    reason: str = ""

    @property
    def is_near_zero(self) -> bool:
        return self.kind == "near_zero"


def certify_no_projection(e: BlockElement, eps: float) -> ProjectionVerdict:
    """Decide that a would-be projection is either not one or is near zero.

    The spectral count r(t) = #{eigenvalues > 1/2} must be constant in t for
    an almost-projection; at the endpoints r(0) = a*r_inf and r(1) = (a+1)*r_inf
    with r_inf the count for the boundary datum, so constancy forces r_inf = 0
    and every eigenvalue sits below 1/2, i.e. within O(eps) of 0.
    """
    stack = e.f.samples
    sa_defect = kernel.stack_spectral_max(stack - stack.conj().transpose(0, 2, 1))
    if sa_defect > eps:
        return ProjectionVerdict(
            "not_almost_projection", sa_defect,
            f"self-adjointness defect {sa_defect:.3e} > {eps:.3e}")
    herm = (stack + stack.conj().transpose(0, 2, 1)) / 2.0
    eigs = np.linalg.eigvalsh(herm)
    sq_defect = kernel.stack_spectral_max(stack @ stack - stack)
    if sq_defect > eps:
        return ProjectionVerdict(
            "not_almost_projection", sq_defect,
            f"projection defect ||e^2 - e|| = {sq_defect:.3e} > {eps:.3e}")
    # Ties at the spectral cut are rejected rather than resolved.
    if np.any(np.abs(eigs - 0.5) <= eps):
        return ProjectionVerdict(
            "not_almost_projection", sq_defect,
            f"eigenvalue within {eps:.3e} of the spectral cut 1/2")
    ranks = (eigs > 0.5).sum(axis=1)
    if ranks.min() != ranks.max():
        j = int(np.nonzero(np.diff(ranks))[0][0])
        n = e.grid_size
        return ProjectionVerdict(
            "not_almost_projection", sq_defect,
            f"rank jump {ranks[j]} -> {ranks[j + 1]} between t={j}/{n} and t={j + 1}/{n}"
            f" (endpoint counts {ranks[0]} vs {ranks[-1]})")
    # r constant; the endpoint multiplicities force r = 0, so the spectrum
    # lies in the lower almost-projection branch around 0.
    r_inf = int((np.linalg.eigvalsh((e.c + e.c.conj().T) / 2.0) > 0.5).sum())
    if ranks[0] != 0 or r_inf != 0:
        return ProjectionVerdict(
            "not_almost_projection", sq_defect,
            f"constant count {int(ranks[0])} inconsistent with boundary multiplicities"
            f" a*{r_inf} vs (a+1)*{r_inf}")
    bound = float(np.abs(eigs).max()) + sa_defect
    return ProjectionVerdict("near_zero", bound, "all eigenvalues below the cut")


def random_element(block: BuildingBlock, grid_size: int, rng: np.random.Generator,
                   scale: float = 1.0, hermitian: bool = False) -> BlockElement:
    """Seeded valid element: endpoint patterns exact, smooth random interior."""
    n, npr = block.n, block.nprime
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if hermitian:
        c = (c + c.conj().T) / 2.0
    ts = np.arange(grid_size + 1, dtype=np.float64) / grid_size
    f0 = boundary_pattern(block, c, 0)
    f1 = boundary_pattern(block, c, 1)
    samples = (1.0 - ts)[:, None, None] * f0 + ts[:, None, None] * f1
    for r in range(1, 4):
        bump = np.sin(np.pi * r * ts)
        bump[0] = 0.0
        bump[-1] = 0.0  # exact zeros: endpoint samples stay exact patterns
        b = rng.standard_normal((npr, npr)) + 1j * rng.standard_normal((npr, npr))
        if hermitian:
            b = (b + b.conj().T) / 2.0
        samples = samples + bump[:, None, None] * b
    e = BlockElement(block, GridFunction(samples), c)
    s = kernel.sup_norm(e.f)
    if s > 0:
        e = BlockElement(block, GridFunction(samples * (scale / s)), c * (scale / s))
    return e
