"""The inductive system: iterated successor blocks and their composed maps.

A tower built from seed A(n_1, (a+1)n_1) follows the recurrences
a_{i+1} = 2 a_i + 1 and n_{i+1} = (2 a_i + 1) n_i.  Matrix-bearing operations
(stage_map, eig_density, applying maps) are limited to the built depth and the
dimension cap; branch structure, being pure integer data determined by the
a-recurrence, extends to arbitrary stages for the trace-level and
ideal-generation experiments.
"""

from __future__ import annotations

import base64
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import homs
from .blocks import BlockElement, BuildingBlock, canonical_h
from .errors import ContextMismatch, ResourceLimit, StageOutOfRange
from .homs import BranchMap, ConnectingMap, SampledPath
from .traces import oscillation_gap

__all__ = [
    "Tower",
    "build_tower",
    "stage_map",
    "EigDensity",
    "eig_density",
    "trace_unique_rate",
    "tower_to_doc",
    "tower_from_doc",
    "save_tower",
    "load_tower",
]

DEFAULT_DIM_CAP = 6000
SERIALIZE_BYTE_CAP = 1 << 30


def _successor_branch_counter(a: int) -> Counter:
    b = 2 * a + 1
    return Counter({BranchMap(0, 1, False): b,
                    BranchMap(1, 1, True): 1,
                    BranchMap(1, 1, False): b - 1})


@dataclass(eq=False)
class Tower:
    """Finite inductive system of building blocks and connecting maps."""

    stages: List[BuildingBlock]
    steps: List[ConnectingMap]
    grid_size: int
    dim_cap: int = DEFAULT_DIM_CAP
    _map_cache: Dict[Tuple[int, int], ConnectingMap] = field(
        default_factory=dict, repr=False)

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def seed(self) -> BuildingBlock:
        return self.stages[0]

    def stage(self, i: int) -> BuildingBlock:
        """1-based stage access, extended past the built depth by the recurrence."""
        if i < 1:
            raise StageOutOfRange(f"stage {i} < 1")
        if i <= self.depth:
            return self.stages[i - 1]
        blk = self.stages[-1]
        for _ in range(self.depth, i):
            blk = BuildingBlock((2 * blk.a + 1) * blk.n, 2 * blk.a + 1)
        return blk

    def check_stage_pair(self, i: int, j: int):
        if not 1 <= i <= j:
            raise StageOutOfRange(f"need 1 <= i <= j, got ({i}, {j})")

    def stage_index_of(self, e: BlockElement) -> int:
        for idx, blk in enumerate(self.stages):
            if blk == e.block:
                return idx + 1
        raise ContextMismatch(f"element block {e.block} is not a stage of this tower")

    def branch_structure(self, i: int, j: int) -> Counter:
        """Multiset of composed branches of phi_ij (synthetic beyond the built
        depth; exact integer data either way)."""
        self.check_stage_pair(i, j)
        acc = Counter({homs.IDENTITY_BRANCH: 1})
        for k in range(i, j):
            step = (_successor_branch_counter(self.stage(k).a) if k > len(self.steps)
                    else Counter(self.steps[k - 1].branches))
            # phi_{i,k+1} = phi_k o phi_{i,k}: earlier branches compose after
            # the later map's branches.
            nxt = Counter()
            for earlier, ce in acc.items():
                for later, cl in step.items():
                    nxt[earlier.after(later)] += ce * cl
            acc = nxt
        return acc

    def canonical_element(self, i: int = 1, refine: int = 1) -> BlockElement:
        return canonical_h(self.stage(i), self.grid_size * refine)


def build_tower(seed: BuildingBlock, depth: int, grid_size: int = 256,
                dim_cap: int = DEFAULT_DIM_CAP) -> Tower:
    """Iterate the successor construction from a seed block.

    depth counts stages, so depth=1 is just the seed.  Raises ResourceLimit
    before materializing a stage whose fibre dimension exceeds dim_cap.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if grid_size & (grid_size - 1):
        raise ValueError("grid size must be a power of two")
    stages = [seed]
    steps: List[ConnectingMap] = []
    for _ in range(depth - 1):
        nxt_dim = (2 * stages[-1].a + 2) * (2 * stages[-1].a + 1) * stages[-1].n
        if nxt_dim > dim_cap:
            raise ResourceLimit(
                f"stage dimension {nxt_dim} exceeds the cap {dim_cap}")
        blk, phi = homs.build_successor(stages[-1], grid_size)
        stages.append(blk)
        steps.append(phi)
    return Tower(stages, steps, grid_size, dim_cap)


def stage_map(tower: Tower, i: int, j: int) -> ConnectingMap:
    """Composed connecting map phi_ij (cached); requires built stages."""
    tower.check_stage_pair(i, j)
    if j > tower.depth:
        raise StageOutOfRange(f"stage {j} beyond built depth {tower.depth}")
    if i == j:
        return homs.identity_map(tower.stage(i), tower.grid_size)
    key = (i, j)
    got = tower._map_cache.get(key)
    if got is None:
        phi = tower.steps[i - 1]
        for k in range(i + 1, j):
            phi = homs.compose_maps(tower.steps[k - 1], phi)
        got = tower._map_cache[key] = phi
    return got


@dataclass
class EigDensity:
    """delta-density datum of the canonical element's image at one fibre."""

    delta: float
    distinct: np.ndarray
    eigenvalues: np.ndarray


def eig_density(tower: Tower, j: int, x: float, cluster_tol: float = 1e-9) -> EigDensity:
    """How densely the eigenvalues of phi_1j(h) at fibre x fill [0,1].

    delta is the smallest radius such that every point of [0,1] is within
    delta of an eigenvalue; distinct is the tolerance-clustered spectrum.
    """
    if j < 2:
        raise StageOutOfRange("density needs j >= 2")
    phi = stage_map(tower, 1, j)
    seed = tower.seed
    d = np.zeros((phi.target.nprime, phi.target.nprime), dtype=np.complex128)
    s = phi.source.nprime
    for idx, xi in enumerate(phi.branches):
        # h(t) = diag(1 x a*n, t x n) evaluated at the branch value, exactly
        block = np.diag([1.0] * (seed.a * seed.n) + [float(xi(x))] * seed.n)
        d[idx * s:(idx + 1) * s, idx * s:(idx + 1) * s] = block
    u = phi.path.sample(float(x))
    eigs = np.linalg.eigvalsh(u @ d @ u.conj().T)
    eigs = np.clip(eigs, 0.0, 1.0)  # h has spectrum in [0,1]; strip rounding
    gaps = np.diff(eigs) / 2.0 if len(eigs) > 1 else np.asarray([0.0])
    delta = max(float(eigs[0]), float(1.0 - eigs[-1]), float(gaps.max()))
    distinct = [float(eigs[0])]
    for lam in eigs[1:]:
        if lam - distinct[-1] > cluster_tol:
            distinct.append(float(lam))
    return EigDensity(delta, np.asarray(distinct), eigs)


def trace_unique_rate(tower: Tower, f: BlockElement, j: int):
    """Oscillation gap of the tracial evaluations of phi_ij(f), plus its
    modulus bound; the stage i is read off the element's block."""
    i = tower.stage_index_of(f)
    tower.check_stage_pair(i, j)
    gap, bound = oscillation_gap(tower, i, j, f)
    if gap > bound + 1e-9:
        raise AssertionError(
            f"oscillation gap {gap} exceeds its modulus bound {bound}")
    return gap, bound


def _encode_path(stack: np.ndarray) -> List[str]:
    out = []
    for mat in stack:
        flat = np.ascontiguousarray(mat).view(np.float64).reshape(-1)
        out.append(base64.b64encode(flat.astype("<f8").tobytes()).decode("ascii"))
    return out


def _decode_path(rows: List[str], dim: int) -> np.ndarray:
    stack = np.empty((len(rows), dim, dim), dtype=np.complex128)
    for k, row in enumerate(rows):
        flat = np.frombuffer(base64.b64decode(row), dtype="<f8")
        stack[k] = flat.view(np.complex128).reshape(dim, dim)
    return stack


def tower_to_doc(tower: Tower) -> dict:
    """JSON-ready document: seed, stages, and per-step branch data plus the
    unitary path as base64 little-endian float64 (re/im pairs, row-major),
    one string per grid point."""
    n = tower.grid_size
    steps = []
    for phi in tower.steps:
        need = (n + 1) * phi.target.nprime ** 2 * 16
        if need > SERIALIZE_BYTE_CAP:
            raise ResourceLimit(
                f"serializing a {phi.target.nprime}-dim path needs {need} bytes")
        steps.append({
            "branches": [{"l": xi.l, "d": xi.d, "constant": xi.constant}
                         for xi in phi.branches],
            "unitary_path": _encode_path(phi.unitary_stack(n)),
        })
    return {
        "seed": {"n": tower.seed.n, "a": tower.seed.a},
        "depth": tower.depth,
        "grid_size": n,
        "stages": [{"n": blk.n, "a": blk.a} for blk in tower.stages],
        "steps": steps,
    }


def tower_from_doc(doc: dict) -> Tower:
    stages = [BuildingBlock(s["n"], s["a"]) for s in doc["stages"]]
    grid = int(doc["grid_size"])
    steps = []
    for idx, step in enumerate(doc["steps"]):
        src, tgt = stages[idx], stages[idx + 1]
        branches = [BranchMap(b["l"], b["d"], b["constant"])
                    for b in step["branches"]]
        stack = _decode_path(step["unitary_path"], tgt.nprime)
        steps.append(ConnectingMap(src, tgt, branches, SampledPath(stack),
                                   depth=max(xi.d for xi in branches),
                                   grid_size=grid, successor=True))
    return Tower(stages, steps, grid)


def save_tower(tower: Tower, path: str):
    with open(path, "w") as fh:
        json.dump(tower_to_doc(tower), fh)


def load_tower(path: str) -> Tower:
    with open(path) as fh:
        return tower_from_doc(json.load(fh))
