"""Asymptotically central embeddings at finite tensor truncations.

The infinite tensor factor is truncated to finitely many matrix factors
q_1, ..., q_m; the truncated algebra is realized concretely as grid-sampled
matrices of dimension n' * q_1 * ... * q_m, with the unitization's unit acting
as the pointwise identity.  Embeddings into a single factor commute exactly
(in floating point, not just approximately) with anything supported on the
other factors, which is the finite-stage shadow of asymptotic centrality.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import List, Optional, Sequence

import numpy as np

from . import kernel
from .blocks import BlockElement, BuildingBlock
from .errors import (ContextMismatch, DimensionMismatch, NoUnitalEmbedding,
                     ResourceLimit)
from .tower import Tower, stage_map
from .homs import apply_map

__all__ = [
    "TensorTruncation",
    "TruncElement",
    "simple_tensor",
    "mu_embed",
    "product_trace",
    "SigmaStage",
    "sigma_stage",
]

DIM_CAP = 10_000


@dataclass(frozen=True)
class TensorTruncation:
    """Finitely many unital matrix factors attached to a building block."""

    block: BuildingBlock
    factors: tuple
    grid_size: int = 256

    def __post_init__(self):
        if not self.factors or any(q < 1 for q in self.factors):
            raise ValueError("factors must be positive integers")
        if self.total_dim > DIM_CAP:
            raise ResourceLimit(
                f"truncation dimension {self.total_dim} exceeds {DIM_CAP}")

    @property
    def factor_dim(self) -> int:
        return prod(self.factors)

    @property
    def total_dim(self) -> int:
        return self.block.nprime * prod(self.factors)


@dataclass(eq=False)
class TruncElement:
    """Grid-sampled element of the truncated algebra."""

    trunc: TensorTruncation
    samples: np.ndarray

    def __post_init__(self):
        d = self.trunc.total_dim
        if self.samples.shape[1:] != (d, d):
            raise DimensionMismatch(
                f"samples must be {d}x{d}, got {self.samples.shape[1:]}")

    def norm(self) -> float:
        return kernel.stack_spectral_max(self.samples)

    def __matmul__(self, other: "TruncElement") -> "TruncElement":
        return TruncElement(self.trunc, self.samples @ other.samples)

    def __sub__(self, other: "TruncElement") -> "TruncElement":
        return TruncElement(self.trunc, self.samples - other.samples)

    def commutator(self, other: "TruncElement") -> "TruncElement":
        return TruncElement(self.trunc,
                            self.samples @ other.samples
                            - other.samples @ self.samples)


def simple_tensor(trunc: TensorTruncation, e: Optional[BlockElement],
                  mats: Sequence[Optional[np.ndarray]]) -> TruncElement:
    """e (x) m_1 (x) ... (x) m_k, with None meaning the unit of that factor
    (and None for e meaning the unit of the unitized block algebra)."""
    if len(mats) != len(trunc.factors):
        raise DimensionMismatch(
            f"expected {len(trunc.factors)} factor matrices, got {len(mats)}")
    n = trunc.grid_size
    npr = trunc.block.nprime
    if e is None:
        base = np.broadcast_to(np.eye(npr, dtype=np.complex128),
                               (n + 1, npr, npr))
    else:
        if e.block != trunc.block or e.grid_size != n:
            raise ContextMismatch("block element does not match the truncation")
        base = e.f.samples
    tail = np.eye(1, dtype=np.complex128)
    for q, mat in zip(trunc.factors, mats):
        factor = np.eye(q, dtype=np.complex128) if mat is None else np.asarray(
            mat, dtype=np.complex128)
        if factor.shape != (q, q):
            raise DimensionMismatch(f"factor matrix must be {q}x{q}")
        tail = np.kron(tail, factor)
    out = np.empty((n + 1, trunc.total_dim, trunc.total_dim), dtype=np.complex128)
    for j in range(n + 1):
        out[j] = np.kron(base[j], tail)
    return TruncElement(trunc, out)


def mu_embed(trunc: TensorTruncation, k: int, m: int):
    """Unital embedding of M_k into tensor factor m (1-based).

    The factor embedding is a -> a (x) 1_{q_m/k}, so k must divide q_m.
    Returns a callable M_k -> TruncElement acting only on that factor; it
    commutes exactly with anything supported on the other factors.
    """
    if not 1 <= m <= len(trunc.factors):
        raise DimensionMismatch(f"factor position {m} out of range")
    q = trunc.factors[m - 1]
    if q % k:
        raise NoUnitalEmbedding(f"no unital embedding of M_{k} into M_{q}")

    def embed(a: np.ndarray) -> TruncElement:
        a = np.asarray(a, dtype=np.complex128)
        if a.shape != (k, k):
            raise DimensionMismatch(f"argument must be {k}x{k}")
        mats: List[Optional[np.ndarray]] = [None] * len(trunc.factors)
        mats[m - 1] = np.kron(a, np.eye(q // k, dtype=np.complex128))
        return simple_tensor(trunc, None, mats)

    return embed


def product_trace(element: TruncElement, atoms=((1.0, 1.0),)) -> float:
    """Product tracial functional: sum_j w_j tr(element(t_j)) with the
    normalized trace of the full truncated fibre."""
    d = element.trunc.total_dim
    n = element.trunc.grid_size
    total = 0.0
    for t, w in atoms:
        j = t * n
        if j != int(j):
            raise ValueError("atom must sit on the truncation grid")
        total += w * float(np.trace(element.samples[int(j)]).real) / d
    return total


@dataclass(eq=False)
class SigmaStage:
    """sigma(f) = mu_{n_i, m}(ev_inf(f)): the stage-i fibre at infinity pushed
    into tensor factor m, with its finite-stage metrics."""

    tower: Tower
    i: int
    trunc: TensorTruncation
    m: int

    def __post_init__(self):
        self._mu = mu_embed(self.trunc, self.tower.stage(self.i).n, self.m)

    def apply(self, f: BlockElement) -> TruncElement:
        if f.block != self.tower.stage(self.i):
            raise ContextMismatch(
                f"expected a stage-{self.i} element of {self.tower.stage(self.i)}")
        return self._mu(f.c)

    def commutator_metric(self, a: BlockElement, tests: Sequence[TruncElement]) -> float:
        """max ||[sigma(a), b]|| over test elements supported away from factor m.

        Exactly zero at finite truncation for disjointly supported tests.
        """
        sa = self.apply(a)
        return max((sa.commutator(b).norm() for b in tests), default=0.0)

    def norm_defect(self, a: BlockElement, b: TruncElement) -> float:
        """| ||sigma(a) b|| - ||ev_inf(a)|| ||b|| |."""
        sa = self.apply(a)
        return abs((sa @ b).norm() - kernel.spectral_norm(a.c) * b.norm())

    def _image_datum(self, a: BlockElement, j: int) -> np.ndarray:
        if j == self.i:
            return a.c
        phi = stage_map(self.tower, self.i, j)
        return apply_map(phi, a).c

    def norm_recovery(self, a: BlockElement, j: int) -> float:
        """||pi_j(phi_ij(a))||: the norm seen by the fibre at infinity at stage j."""
        return kernel.spectral_norm(self._image_datum(a, j))

    def trace_match(self, a: BlockElement, j: int) -> float:
        """tr_{n_j}(pi_j(phi_ij(a))): converges to the tracial value of a."""
        c = self._image_datum(a, j)
        return float(np.trace(c).real) / c.shape[0]


def sigma_stage(tower: Tower, i: int, trunc: TensorTruncation, m: int) -> SigmaStage:
    return SigmaStage(tower, i, trunc, m)
