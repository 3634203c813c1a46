"""Traces tr (x) mu for finitely-atomic measures mu on [0,1].

A trace evaluates an element as sum_j w_j * tr(f(t_j)) with tr the normalized
matrix trace.  Atoms at t = 0 are admitted: evaluation there needs no special
case (the boundary pattern makes tr(f(0)) = a/(a+1) * tr_n(c) an identity),
and only the norm weight nu(0) = a/(a+1) records the identification of the
fibre at 0 with a copies of the fibre at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import kernel
from .blocks import BlockElement, BuildingBlock, canonical_h, scalar_transform
from .errors import ContextMismatch, DimensionMismatch, NotSelfAdjoint
from .kernel import GridFunction

__all__ = [
    "Trace",
    "point_trace",
    "eval_trace",
    "pushforward_trace",
    "trace_norm",
    "trace_norm_limit",
    "affine_image",
    "oscillation_gap",
]


@dataclass(eq=False)
class Trace:
    """Finitely-atomic positive measure paired with normalized matrix traces."""

    atoms: List[Tuple[float, float]]
    block: BuildingBlock

    def __post_init__(self):
        for t, w in self.atoms:
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"atom location {t} outside [0,1]")
            if not w > 0.0 or not np.isfinite(w):
                raise ValueError(f"atom weight {w} must be positive and finite")

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, w in self.atoms))


def point_trace(block: BuildingBlock, t: float, weight: float = 1.0) -> Trace:
    """tr (x) delta_t, scaled."""
    return Trace([(float(t), float(weight))], block)


def eval_trace(tau: Trace, e: BlockElement) -> float:
    """sum_j w_j tr(f(t_j)), interpolating at non-grid atom locations."""
    if tau.block != e.block:
        raise ContextMismatch(f"trace on {tau.block}, element of {e.block}")
    npr = e.block.nprime
    return float(sum(w * np.trace(e.f.at(t)).real / npr for t, w in tau.atoms))


def pushforward_trace(phi, tau: Trace) -> Trace:
    """Dual map: a trace on the target pulled back along phi.

    Each atom (x, w) scatters to the branch values xi_k(x) with uniform weight
    w/m; coinciding dyadic locations merge exactly (float equality is exact
    dyadic equality here since branch arithmetic is exact on dyadic inputs).
    """
    if tau.block != phi.target:
        raise ContextMismatch(f"trace on {tau.block}, map into {phi.target}")
    m = phi.m
    merged = {}
    for x, w in tau.atoms:
        for xi in phi.branches:
            loc = float(xi(x))
            merged[loc] = merged.get(loc, 0.0) + w / m
    atoms = sorted(merged.items())
    return Trace(atoms, phi.source)


def trace_norm(tau: Trace) -> float:
    """Functional norm: sum_j w_j nu(t_j) with nu(0) = a/(a+1), nu(t) = 1 else."""
    a = tau.block.a
    return float(sum(w * (a / (a + 1) if t == 0.0 else 1.0) for t, w in tau.atoms))


def trace_norm_limit(tau: Trace, log2_n: int = 10, grid_size: int = 256) -> float:
    """Numeric cross-check of trace_norm: eval on h^{1/n} at n = 2^log2_n.

    Converges to the norm from below as n grows; used as a test oracle.
    """
    h = canonical_h(tau.block, grid_size)
    root = scalar_transform(h, lambda w: w ** (1.0 / 2 ** log2_n))
    return eval_trace(tau, root)


def affine_image(e: BlockElement, tol: float = 1e-10) -> GridFunction:
    """g(t) = tr(f(t)) for a self-adjoint element; lands in the cone
    {g : g(0) = a/(a+1) g(1)} up to rounding."""
    dev = kernel.stack_frobenius_max(e.f.samples - e.f.adjoint().samples)
    if dev > tol:
        raise NotSelfAdjoint(f"||f - f*|| = {dev:.3e} > {tol:.3e}")
    npr = e.block.nprime
    return GridFunction(np.trace(e.f.samples, axis1=1, axis2=2).real / npr)


def _window_modulus(values: np.ndarray, window: int) -> float:
    """max |g_i - g_j| over grid pairs with |i - j| <= window."""
    if window >= len(values):
        return float(values.max() - values.min())
    sw = np.lib.stride_tricks.sliding_window_view(values, window + 1)
    return float((sw.max(axis=1) - sw.min(axis=1)).max())


def oscillation_gap(tower, i: int, j: int, f: BlockElement):
    """Largest spread of x -> tr (x) delta_x(phi_ij(f)) over the grid, with the
    modulus-of-continuity bound it must respect.

    Returns (gap, bound) where bound = omega(2^{-(j-i)}) is the grid modulus of
    continuity of t -> tr(f(t)); the gap never exceeds it because every value
    pair entering the gap is a grid pair at distance <= 2^{-(j-i)}.
    """
    tower.check_stage_pair(i, j)
    ghat = affine_image(f, tol=1e-8).samples
    depth = j - i
    step = 2 ** depth
    n_src = f.grid_size
    if n_src % step:
        raise DimensionMismatch(
            f"element grid {n_src} not divisible by 2^(j-i) = {step}")
    n_out = n_src // step
    counter = tower.branch_structure(i, j)
    total = sum(counter.values())
    ks = np.arange(n_out + 1)
    acc = np.zeros(n_out + 1)
    for xi, mult in counter.items():
        acc += mult * ghat[xi.source_index(ks, n_out)]
    values = acc / total
    gap = float(values.max() - values.min())
    bound = _window_modulus(ghat, n_out)
    return gap, bound
