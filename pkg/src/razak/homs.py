"""Connecting *-homomorphisms between building blocks.

A connecting map is phi(f) = u(x) * diag(f(xi_1(x)), ..., f(xi_m(x))) * u(x)*
for dyadic branch maps xi_k and a continuous unitary path u.  Branch maps are
stored exactly as integer triples, so oscillation and covering tests are pure
integer arithmetic.  The unitary path joins two permutation matrices through
the principal logarithm of their quotient, computed cycle by cycle; endpoint
samples are the exact permutations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .blocks import BlockElement, BuildingBlock, canonical_h, validate_element
from .errors import (ChainMismatch, DimensionMismatch, LayoutMismatch,
                     NotUnitary, ZeroElement)
from .kernel import GridFunction

__all__ = [
    "BranchMap",
    "SlotLayout",
    "ConnectingMap",
    "UnitaryPath",
    "ComposedPath",
    "SampledPath",
    "match_permutation",
    "perm_matrix",
    "unitary_path",
    "build_successor",
    "identity_map",
    "apply_map",
    "compose_maps",
    "oscillation",
    "covers_interval",
    "hom_defect",
    "adjoint_defect",
    "approx_unit_defect",
    "MapMetrics",
    "map_metrics",
    "WitnessResult",
    "simplicity_witness",
]


@dataclass(frozen=True)
class BranchMap:
    """xi(x) = (x + l)/2^d, or the constant l/2^d.

    l and d are exact integers; the image is contained in [0,1].
    """

    l: int
    d: int
    constant: bool = False

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("denominator exponent must be >= 0")
        hi = self.l + (0 if self.constant else 1)
        if self.l < 0 or hi > 2 ** self.d:
            raise ValueError(f"image of (l={self.l}, d={self.d}) leaves [0,1]")

    def __call__(self, x):
        if self.constant:
            return self.l / 2.0 ** self.d + 0.0 * x
        return (x + self.l) / 2.0 ** self.d

    def value(self, x: Fraction) -> Fraction:
        base = Fraction(self.l, 2 ** self.d)
        return base if self.constant else base + Fraction(x, 2 ** self.d)

    def image(self):
        """Closed image as a pair of Fractions."""
        lo = Fraction(self.l, 2 ** self.d)
        return (lo, lo) if self.constant else (lo, lo + Fraction(1, 2 ** self.d))

    def after(self, other: "BranchMap") -> "BranchMap":
        """The composition self o other, again in exact dyadic form."""
        l = self.l * 2 ** other.d + (0 if self.constant else other.l)
        return BranchMap(l, self.d + other.d, self.constant or other.constant)

    def source_index(self, out_index, out_grid: int):
        """Exact source-grid index of xi(k/out_grid) on the grid out_grid*2^d."""
        if self.constant:
            return self.l * out_grid + 0 * out_index
        return out_index + self.l * out_grid


IDENTITY_BRANCH = BranchMap(0, 0, False)


@dataclass(frozen=True)
class SlotLayout:
    """Block-diagonal pattern: ordered (kind, size) slots, kind in {C, Zero, Mid}."""

    slots: tuple

    def __post_init__(self):
        for kind, size in self.slots:
            if kind not in ("C", "Zero", "Mid") or size < 1:
                raise LayoutMismatch(f"bad slot ({kind}, {size})")

    @property
    def total(self) -> int:
        return sum(size for _, size in self.slots)

    def ranges(self):
        """(kind, start, size) for each slot in order."""
        out, at = [], 0
        for kind, size in self.slots:
            out.append((kind, at, size))
            at += size
        return out

    def by_kind(self):
        out = {}
        for kind, start, size in self.ranges():
            out.setdefault(kind, []).append((start, size))
        return out


def match_permutation(source: SlotLayout, target: SlotLayout) -> np.ndarray:
    """Coordinate permutation p with (P M P*)[i, j] = M[p[i], p[j]].

    The i-th target slot of each kind receives the i-th source slot of that
    kind, intra-slot order preserved (deterministic first-fit).  Conjugation
    by perm_matrix(p) carries the source pattern to the target pattern for
    every filling of the slots.
    """
    if source.total != target.total:
        raise LayoutMismatch(
            f"layout sizes differ: {source.total} vs {target.total}")
    src, tgt = source.by_kind(), target.by_kind()
    if set(src) != set(tgt):
        raise LayoutMismatch(f"slot kinds differ: {sorted(src)} vs {sorted(tgt)}")
    p = np.empty(target.total, dtype=np.intp)
    for kind, tslots in tgt.items():
        sslots = src[kind]
        if len(sslots) != len(tslots):
            raise LayoutMismatch(
                f"{kind}-slot counts differ: {len(sslots)} vs {len(tslots)}")
        for (sstart, ssize), (tstart, tsize) in zip(sslots, tslots):
            if ssize != tsize:
                raise LayoutMismatch(
                    f"{kind}-slot sizes differ: {ssize} vs {tsize}")
            p[tstart:tstart + tsize] = np.arange(sstart, sstart + ssize)
    return p


def perm_matrix(p: np.ndarray) -> np.ndarray:
    """0/1 matrix P with P[i, p[i]] = 1."""
    dim = len(p)
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[np.arange(dim), p] = 1.0
    return out


def _perm_from_matrix(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    dim = u.shape[0]
    p = np.argmax(np.abs(u), axis=1)
    if (np.abs(u[np.arange(dim), p] - 1.0).max() > 1e-12
            or abs(np.abs(u).sum() - dim) > 1e-9
            or len(set(p.tolist())) != dim):
        raise NotUnitary("expected a permutation matrix")
    return p.astype(np.intp)


class UnitaryPath:
    """Path u(t) = exp(t log(u1 u0*)) u0 between permutation matrices.

    The logarithm is principal, assembled from the cycle decomposition of the
    permutation u1 u0* (each L-cycle contributes phases 2*pi*k/L in (-pi, pi]).
    u(0) and u(1) are returned as the exact permutation matrices; interior
    samples are unitary to machine precision.

    exp(t log(u1 u0*)) is block-diagonal over the cycles, so conjugation by
    u(t) factors into an exact index shuffle plus small per-cycle products;
    conjugate_at exploits this (and keeps endpoint conjugation an exact
    shuffle, which is what makes endpoint boundary checks zero-tolerance).
    """

    def __init__(self, p0: np.ndarray, p1: np.ndarray):
        p0 = np.asarray(p0, dtype=np.intp)
        p1 = np.asarray(p1, dtype=np.intp)
        if p0.shape != p1.shape:
            raise DimensionMismatch("permutation sizes differ")
        self.p0 = p0
        self.p1 = p1
        self.dim = len(p0)
        p0inv = np.empty_like(p0)
        p0inv[p0] = np.arange(self.dim)
        q = p0inv[p1]                       # u1 u0* = P_q
        beta = np.empty_like(q)             # basis map e_j -> e_beta[j]
        beta[q] = np.arange(self.dim)
        # Sort cycles by length so equal-length cycles are contiguous in the
        # reordered basis: exp(tH) has one block value per cycle LENGTH, and
        # equal-length cycles share a single broadcast product.
        cycles = sorted((np.asarray(c, dtype=np.intp) for c in _cycles_of(beta)),
                        key=len, reverse=True)
        self._cycles = cycles
        self._p0inv = p0inv
        order = np.concatenate(cycles)
        orderinv = np.empty_like(order)
        orderinv[order] = np.arange(self.dim)
        self._orderinv = orderinv
        self._gather = self.p0[order]
        groups, at = [], 0
        for cyc in cycles:
            L = len(cyc)
            if L > 1:
                if groups and groups[-1][2] == L:
                    start, count, _ = groups[-1]
                    groups[-1] = (start, count + 1, L)
                else:
                    groups.append((at, 1, L))
            at += L
        self._groups = groups
        self._memo = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_memo"] = {}
        return state

    def sample(self, t: float) -> np.ndarray:
        return self.samples_at(np.asarray([float(t)]))[0]

    def _block(self, ts: np.ndarray, L: int) -> np.ndarray:
        """exp(t log C_L) in cycle coordinates, shape (len(ts), L, L)."""
        key = ("block", ts.tobytes(), L)
        got = self._memo.get(key)
        if got is None:
            k = np.arange(L)
            phases = np.where(k < L / 2, -2 * np.pi * k / L, 2 * np.pi * (L - k) / L)
            # g[t, r] = (1/L) sum_k e^{i t phase_k} omega^{k r}
            omega = np.exp(2j * np.pi * np.outer(k, k % L) / L)
            g = np.exp(1j * np.outer(ts, phases)) @ omega / L
            qp = (k[:, None] - k[None, :]) % L
            got = self._memo[key] = g[:, qp]
        return got

    def samples_at(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        exp = np.zeros((len(ts), self.dim, self.dim), dtype=np.complex128)
        idx = np.arange(self.dim)
        exp[:, idx, idx] = 1.0
        for cyc in self._cycles:
            if len(cyc) > 1:
                exp[:, cyc[:, None], cyc[None, :]] = self._block(ts, len(cyc))
        # exp(tH) @ u0 is a column gather; force C layout so downstream
        # products stay on the BLAS fast path.
        u = np.ascontiguousarray(exp[:, :, self._p0inv])
        u[ts == 0.0] = perm_matrix(self.p0)
        u[ts == 1.0] = perm_matrix(self.p1)
        return u

    def conjugate_at(self, stack: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """u(t) stack[t] u(t)* per point, through the cycle structure.

        The shuffle part is an exact index gather; exp(tH) multiplies by
        contiguous cycle blocks in the reordered basis, grouped by cycle
        length.  Endpoint slices (t exactly 0 or 1) are exact permutation
        shuffles.
        """
        ts = np.asarray(ts, dtype=np.float64)
        nt, dim = len(ts), self.dim
        g = self._gather
        # gathers produce stride-permuted views; keep everything C-contiguous
        # so the block products and later consumers use fast BLAS paths
        m = np.ascontiguousarray(stack[:, g[:, None], g[None, :]])
        for start, count, L in self._groups:
            block = self._block(ts, L)
            seg = m[:, start:start + count * L, :].reshape(nt, count, L, dim)
            m[:, start:start + count * L, :] = (
                block[:, None] @ seg).reshape(nt, count * L, dim)
        for start, count, L in self._groups:
            blockh = self._block(ts, L).conj().transpose(0, 2, 1)
            seg = m[:, :, start:start + count * L].reshape(
                nt, dim, count, L).transpose(0, 2, 1, 3)
            res = seg @ blockh[:, None]
            m[:, :, start:start + count * L] = res.transpose(
                0, 2, 1, 3).reshape(nt, dim, count * L)
        oi = self._orderinv
        out = np.ascontiguousarray(m[:, oi[:, None], oi[None, :]])
        for mask, p in ((ts == 0.0, self.p0), (ts == 1.0, self.p1)):
            if mask.any():
                out[mask] = stack[mask][:, p[:, None], p[None, :]]
        return out

    def conjugate_block_diagonal(self, stack, ts):
        return self.conjugate_at(stack, ts)

    def grid_samples(self, grid_size: int) -> np.ndarray:
        got = self._memo.get(grid_size)
        if got is None:
            ts = np.arange(grid_size + 1, dtype=np.float64) / grid_size
            got = self._memo[grid_size] = self.samples_at(ts)
            got.setflags(write=False)
        return got


def _cycles_of(beta: np.ndarray):
    seen = np.zeros(len(beta), dtype=bool)
    cycles = []
    for start in range(len(beta)):
        if seen[start]:
            continue
        cyc, j = [], start
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = int(beta[j])
        cycles.append(cyc)
    return cycles


def unitary_path(u0, u1) -> UnitaryPath:
    """Path between two permutation unitaries given as matrices."""
    return UnitaryPath(_perm_from_matrix(u0), _perm_from_matrix(u1))


class ComposedPath:
    """Unitary path of a composed map, synthesized lazily per sample point:
    U(x) = u_outer(x) * blockdiag_l( u_inner(xi_l(x)) )."""

    def __init__(self, outer: "ConnectingMap", inner: "ConnectingMap"):
        self.outer = outer
        self.inner = inner
        self.dim = outer.target.nprime
        self._memo = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_memo"] = {}
        return state

    def sample(self, t: float) -> np.ndarray:
        return self.samples_at(np.asarray([float(t)]))[0]

    def samples_at(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        u_out = self.outer.path.samples_at(ts)
        s = self.inner.target.nprime
        inner_blocks = np.zeros((len(ts), self.dim, self.dim), dtype=np.complex128)
        for idx, xi in enumerate(self.outer.branches):
            sl = slice(idx * s, (idx + 1) * s)
            inner_blocks[:, sl, sl] = self.inner.path.samples_at(xi(ts))
        return u_out @ inner_blocks

    def conjugate_block_diagonal(self, stack: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """U(t) stack[t] U(t)* for stacks that are block diagonal at the
        granularity of the composed branch list (as in apply_map): the inner
        conjugations act block by block, then the outer path conjugates the
        still-block-diagonal result."""
        ts = np.asarray(ts, dtype=np.float64)
        s = self.inner.target.nprime
        mid = stack.copy()
        for idx, xi in enumerate(self.outer.branches):
            sl = slice(idx * s, (idx + 1) * s)
            mid[:, sl, sl] = self.inner.path.conjugate_block_diagonal(
                stack[:, sl, sl], xi(ts))
        return self.outer.path.conjugate_block_diagonal(mid, ts)

    def grid_samples(self, grid_size: int) -> np.ndarray:
        got = self._memo.get(grid_size)
        if got is None:
            ts = np.arange(grid_size + 1, dtype=np.float64) / grid_size
            got = self._memo[grid_size] = self.samples_at(ts)
            got.setflags(write=False)
        return got


class SampledPath:
    """Unitary path reconstructed from stored grid samples (deserialization)."""

    def __init__(self, samples: np.ndarray):
        samples = np.asarray(samples, dtype=np.complex128)
        self.dim = samples.shape[1]
        self._samples = samples

    @property
    def grid_size(self) -> int:
        return self._samples.shape[0] - 1

    def sample(self, t: float) -> np.ndarray:
        x = t * self.grid_size
        j = int(round(x))
        if x != j:
            raise ValueError("sampled path only supports its own grid points")
        return self._samples[j]

    def samples_at(self, ts: np.ndarray) -> np.ndarray:
        return np.stack([self.sample(float(t)) for t in np.asarray(ts)])

    def conjugate_block_diagonal(self, stack: np.ndarray, ts: np.ndarray) -> np.ndarray:
        u = self.samples_at(ts)
        return u @ stack @ u.conj().transpose(0, 2, 1)

    def grid_samples(self, grid_size: int) -> np.ndarray:
        if grid_size != self.grid_size:
            raise ValueError("sampled path only supports its own grid size")
        return self._samples


@dataclass(eq=False)
class ConnectingMap:
    """phi(f) = u (f o xi_1 + ... + f o xi_m) u* in diagonal form."""

    source: BuildingBlock
    target: BuildingBlock
    branches: list
    path: object
    depth: int
    grid_size: int = 256
    successor: bool = field(default=False, repr=False)

    def __post_init__(self):
        if len(self.branches) * self.source.nprime != self.target.nprime:
            raise DimensionMismatch(
                f"{len(self.branches)} branches of size {self.source.nprime} "
                f"do not fill {self.target.nprime}")
        if self.path.dim != self.target.nprime:
            raise DimensionMismatch("unitary path dimension mismatch")

    @property
    def m(self) -> int:
        return len(self.branches)

    def branch_counter(self) -> Counter:
        return Counter(self.branches)

    def unitary_stack(self, grid_size: Optional[int] = None) -> np.ndarray:
        return self.path.grid_samples(self.grid_size if grid_size is None else grid_size)


def identity_map(block: BuildingBlock, grid_size: int = 256) -> ConnectingMap:
    ident = np.arange(block.nprime, dtype=np.intp)
    return ConnectingMap(block, block, [IDENTITY_BRANCH],
                         UnitaryPath(ident, ident), depth=0, grid_size=grid_size)


def build_successor(b1: BuildingBlock, grid_size: int = 256):
    """Successor block and connecting map: b = 2a+1, n_2 = b n_1, m = 2b.

    Branches are x/2 (b copies), the constant 1/2, and (x+1)/2 (b-1 copies).
    The unitary path joins the two permutations that match the branch values
    at the endpoints to the boundary pattern of the successor block, whose
    boundary datum is d_f = diag(f(1/2), c, ..., c) (a copies of c).
    """
    n1, a = b1.n, b1.a
    b = 2 * a + 1
    b2 = BuildingBlock(b * n1, b)
    branches = ([BranchMap(0, 1, False)] * b
                + [BranchMap(1, 1, True)]
                + [BranchMap(1, 1, False)] * (b - 1))

    C, Z, Mid = ("C", n1), ("Zero", n1), ("Mid", b1.nprime)
    f0_slots = [C] * a + [Z]
    df_slots = [Mid] + [C] * a
    # t = 0: branch values are f(0) x b then f(1/2) x b; target diag(d_f x b, 0).
    src0 = SlotLayout(tuple(f0_slots * b + [Mid] * b))
    tgt0 = SlotLayout(tuple(df_slots * b + [Z] * b))
    # t = 1: branch values are f(1/2) x (b+1) then f(1) x (b-1); target diag(d_f x (b+1)).
    src1 = SlotLayout(tuple([Mid] * (b + 1) + [C] * (a + 1) * (b - 1)))
    tgt1 = SlotLayout(tuple(df_slots * (b + 1)))
    p0 = match_permutation(src0, tgt0)
    p1 = match_permutation(src1, tgt1)
    phi = ConnectingMap(b1, b2, branches, UnitaryPath(p0, p1),
                        depth=1, grid_size=grid_size, successor=True)
    return b2, phi


def apply_map(phi: ConnectingMap, e: BlockElement, tol: float = 1e-9) -> BlockElement:
    """Apply a connecting map to an element.

    The input grid must be divisible by 2^depth; the output lives on the grid
    coarsened by that factor, which puts every branch evaluation exactly on a
    stored input sample (no interpolation, so the homomorphism identities hold
    at grid points to rounding accuracy).
    """
    if e.block != phi.source:
        raise DimensionMismatch(f"element of {e.block} fed to map from {phi.source}")
    if validate_element(e) > tol:
        raise ValueError("input element violates its boundary conditions")
    step = 2 ** phi.depth
    n_src = e.grid_size
    if n_src % step:
        raise DimensionMismatch(
            f"input grid {n_src} not divisible by 2^depth = {step}; "
            f"sample the input on a {step}-times finer grid")
    n_out = n_src // step
    s = phi.source.nprime
    dim = phi.target.nprime
    ks = np.arange(n_out + 1)
    diag = np.zeros((n_out + 1, dim, dim), dtype=np.complex128)
    for idx, xi in enumerate(phi.branches):
        sl = slice(idx * s, (idx + 1) * s)
        diag[:, sl, sl] = e.f.samples[xi.source_index(ks, n_out)]
    ts = ks.astype(np.float64) / n_out
    out = phi.path.conjugate_block_diagonal(diag, ts)

    if phi.depth == 0:
        c = e.c.copy()
    elif phi.successor:
        c = kernel.direct_sum([e.f.samples[n_src // 2]] + [e.c] * phi.source.a)
    else:
        nt = phi.target.n
        c = out[-1][:nt, :nt].copy()
    return BlockElement(phi.target, GridFunction(out), c)


def compose_maps(outer: ConnectingMap, inner: ConnectingMap) -> ConnectingMap:
    """Composite map outer o inner with the exact composed branch list.

    Branch order is outer-major: block (l, k) holds xi^inner_k o xi^outer_l,
    matching the block structure of the composed unitary.
    """
    if inner.target != outer.source:
        raise ChainMismatch(
            f"inner target {inner.target} != outer source {outer.source}")
    if inner.depth == 0:
        return ConnectingMap(outer.source, outer.target, list(outer.branches),
                             outer.path, outer.depth, outer.grid_size,
                             successor=outer.successor)
    if outer.depth == 0:
        return ConnectingMap(inner.source, inner.target, list(inner.branches),
                             inner.path, inner.depth, inner.grid_size,
                             successor=inner.successor)
    branches = [bk.after(bl) for bl in outer.branches for bk in inner.branches]
    return ConnectingMap(inner.source, outer.target, branches,
                         ComposedPath(outer, inner),
                         outer.depth + inner.depth, outer.grid_size)


def oscillation(branches) -> Fraction:
    """max_k sup |xi_k(x) - xi_k(y)|, exact."""
    return max((Fraction(0) if xi.constant else Fraction(1, 2 ** xi.d)
                for xi in branches), default=Fraction(0))


def covers_interval(branches) -> bool:
    """Exact test that the branch images jointly cover [0,1].

    Constant branches are single points and cannot close a gap of positive
    length, so only interval images enter the sweep.
    """
    intervals = [xi for xi in branches if not xi.constant]
    if not intervals:
        return False
    depth = max(xi.d for xi in intervals)
    scaled = sorted((xi.l * 2 ** (depth - xi.d), (xi.l + 1) * 2 ** (depth - xi.d))
                    for xi in intervals)
    reach = 0
    for lo, hi in scaled:
        if lo > reach:
            return False
        reach = max(reach, hi)
    return reach >= 2 ** depth


def hom_defect(phi: ConnectingMap, pairs) -> float:
    """max over pairs (f, g) and grid points of ||phi(fg) - phi(f)phi(g)||."""
    worst = 0.0
    for f, g in pairs:
        fg = BlockElement(f.block, f.f.pointwise(g.f), f.c @ g.c)
        pf, pg, pfg = apply_map(phi, f), apply_map(phi, g), apply_map(phi, fg)
        delta = pfg.f.samples - pf.f.samples @ pg.f.samples
        worst = max(worst, kernel.stack_spectral_max(delta))
    return worst


def adjoint_defect(phi: ConnectingMap, elements) -> float:
    """max over elements of ||phi(f*) - phi(f)*||."""
    worst = 0.0
    for f in elements:
        fstar = BlockElement(f.block, f.f.adjoint(), f.c.conj().T)
        delta = apply_map(phi, fstar).f.samples - apply_map(phi, f).f.adjoint().samples
        worst = max(worst, kernel.stack_spectral_max(delta))
    return worst


def approx_unit_defect(phi: ConnectingMap, samples, powers: Sequence[int]) -> dict:
    """defect(n) = max over samples f of ||phi(h)^{1/n} phi(f) - phi(f)||.

    phi(h) is positive with spectrum in [0,1]; its fractional powers reuse a
    single eigendecomposition.
    """
    if not samples:
        raise ValueError("need at least one sample element")
    grid = samples[0].grid_size
    h = canonical_h(phi.source, grid)
    h_img = apply_map(phi, h)
    w, v = np.linalg.eigh(h_img.f.samples)
    w = np.clip(w, 0.0, None)
    images = [apply_map(phi, f).f.samples for f in samples]
    out = {}
    for n in powers:
        root = (v * (w ** (1.0 / n))[:, None, :]) @ v.conj().transpose(0, 2, 1)
        out[int(n)] = max(kernel.stack_spectral_max(root @ img - img)
                          for img in images)
    return out


@dataclass
class MapMetrics:
    oscillation: Fraction
    covers: bool
    hom_defect: float
    approx_unit_defect: dict


def map_metrics(phi: ConnectingMap, pairs=(), unit_samples=(),
                powers: Sequence[int] = (1,)) -> MapMetrics:
    """Quantitative diagnostics of a connecting map (see the per-metric
    functions for definitions)."""
    return MapMetrics(
        oscillation=oscillation(phi.branches),
        covers=covers_interval(phi.branches),
        hom_defect=hom_defect(phi, pairs) if pairs else 0.0,
        approx_unit_defect=(approx_unit_defect(phi, list(unit_samples), powers)
                            if unit_samples else {}),
    )


@dataclass
class WitnessResult:
    """Result of the ideal-generation witness search.

    stage is the earliest stage whose composed map has a branch with image
    inside the support interval (None if the search hit max_stage), and
    min_singular is the smallest singular value of the witness block over the
    covered source samples.
    """

    stage: Optional[int]
    branch: Optional[BranchMap]
    max_stage: int
    min_singular: float = 0.0

    @property
    def found(self) -> bool:
        return self.stage is not None


def simplicity_witness(tower, i: int, f: BlockElement, support,
                       max_stage: int = 8) -> WitnessResult:
    """Earliest stage j at which some composed branch of phi_ij maps into the
    support of f, so phi_ij(f) is nowhere zero and generates the stage ideal.

    The search is exact dyadic enumeration over the tower's branch structure
    (synthetic beyond the built depth); the witness block is then checked
    numerically on the source samples covered by the branch image.
    """
    if kernel.sup_norm(f.f) == 0.0:
        raise ZeroElement("the zero element generates nothing")
    x0, x1 = Fraction(support[0]), Fraction(support[1])
    if not x0 < x1:
        raise ValueError("support interval is empty")
    for j in range(i, max_stage + 1):
        counter = tower.branch_structure(i, j)
        witness = None
        for xi in counter:
            lo, hi = xi.image()
            if x0 < lo and hi < x1:
                witness = xi
                break
        if witness is None:
            continue
        lo, hi = witness.image()
        n = f.grid_size
        a = int(np.ceil(lo * n))
        b = int(np.floor(hi * n))
        block_samples = f.f.samples[a:b + 1]
        if block_samples.shape[0] == 0:
            block_samples = np.asarray([f.f.at(float(lo))])
        sigma = float(min(np.linalg.svd(mat, compute_uv=False)[-1]
                          for mat in block_samples))
        return WitnessResult(j, witness, max_stage, sigma)
    return WitnessResult(None, None, max_stage)
