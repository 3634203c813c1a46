"""Named verification checks over a built tower.

Each suite returns a list of Check records (name, measured value, bound,
pass/fail) so the CLI can assemble machine-readable reports and the test
suite can assert individual criteria.  All randomness is seeded and all
tolerances live in TOLERANCES so a run is reproducible bit-for-bit.

Operator norms of pure-rounding-noise differences (homomorphism defect,
adjoint defect, unitarity defect) are reported through their Frobenius upper
bounds: certified conservative values at a fraction of the cost.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from . import central, homs, kernel, tower as tower_mod, traces
from .blocks import (BlockElement, BuildingBlock, canonical_h, certify_no_projection,
                     psi_embed, random_element, scalar_transform, validate_element)
from .homs import apply_map
from .kernel import GridFunction
from .tower import Tower, build_tower, eig_density, stage_map, trace_unique_rate
from .traces import (Trace, affine_image, eval_trace, point_trace,
                     pushforward_trace, trace_norm)

__all__ = ["Check", "TOLERANCES", "VerifyContext", "SUITES", "run_suites"]

TOLERANCES: Dict[str, float] = {
    "validate_defect": 1e-9,
    "hom_defect": 1e-8,
    "unitarity_defect": 1e-10,
    "adjoint_defect": 1e-10,
    "duality": 1e-9,
    "trace_norm_preservation": 1e-6,
    "psi_right_inverse": 1e-9,
    "affine_cone": 1e-10,
    "gap_slack": 1e-6,
    "density_slack": 1e-9,
    "approx_unit_tail": 0.05,
    "approx_unit_first": 1e-9,
    "near_zero_cap": 0.5,
    "central_norm_defect": 1e-9,
}


@dataclass
class Check:
    name: str
    value: object
    bound: object
    passed: bool
    detail: str = ""

    def row(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value} bound={self.bound} {self.detail}"


def _leq(name: str, value: float, bound: float, tols, detail: str = "") -> Check:
    bound = tols.get(name.split(".")[-1], bound)
    return Check(name, float(value), bound, bool(value <= bound), detail)


@dataclass
class VerifyContext:
    """Deterministic inputs for a verification run."""

    seed_block: BuildingBlock = field(default_factory=lambda: BuildingBlock(1, 1))
    depth: int = 3
    grid_size: int = 256
    rng_seed: int = 20260809
    pairs_per_map: int = 20
    duality_pairs: int = 50
    projection_trials: int = 100
    tolerances: Dict[str, float] = field(default_factory=dict)
    _tower: Optional[Tower] = field(default=None, repr=False)

    def tol(self, name: str, default: float) -> float:
        return self.tolerances.get(name, TOLERANCES.get(name, default))

    @property
    def tower(self) -> Tower:
        if self._tower is None:
            self._tower = build_tower(self.seed_block, self.depth, self.grid_size)
        return self._tower

    def rng(self, *tags: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, *tags])

    def named_maps(self):
        """The maps exercised by the constructor suite: every step plus the
        composites out of stage 1."""
        t = self.tower
        out = [(f"phi_{i}_{i + 1}", stage_map(t, i, i + 1))
               for i in range(1, t.depth)]
        out += [(f"phi_1_{j}", stage_map(t, 1, j)) for j in range(3, t.depth + 1)]
        return out


def _seeded_pairs(ctx: VerifyContext, phi, tag: int, count: int):
    grid = ctx.grid_size * 2 ** phi.depth
    rng = ctx.rng(tag)
    elems = [random_element(phi.source, grid, rng) for _ in range(2 * count)]
    return list(zip(elems[::2], elems[1::2]))


def _fro_stack(stack: np.ndarray) -> float:
    return kernel.stack_frobenius_max(stack)


def constructor_suite(ctx: VerifyContext) -> List[Check]:
    """Criterion block: boundary validity of images, homomorphism defect over
    seeded pairs, unitarity of the path samples."""
    checks: List[Check] = []
    for tag, (label, phi) in enumerate(ctx.named_maps()):
        pairs = _seeded_pairs(ctx, phi, 100 + tag, ctx.pairs_per_map)
        h = canonical_h(phi.source, ctx.grid_size * 2 ** phi.depth)
        worst_validate = 0.0
        worst_hom = 0.0
        for f, g in pairs:
            fg = BlockElement(f.block, f.f.pointwise(g.f), f.c @ g.c)
            pf, pg, pfg = (apply_map(phi, f), apply_map(phi, g),
                           apply_map(phi, fg))
            for out in (pf, pg, pfg):
                worst_validate = max(worst_validate, validate_element(out))
            worst_hom = max(worst_hom,
                            _fro_stack(pfg.f.samples - pf.f.samples @ pg.f.samples))
        worst_validate = max(worst_validate, validate_element(apply_map(phi, h)))
        u = phi.unitary_stack(ctx.grid_size)
        checks.append(Check(f"{label}.validate_defect", worst_validate,
                            ctx.tol("validate_defect", 1e-9),
                            worst_validate <= ctx.tol("validate_defect", 1e-9),
                            f"{ctx.pairs_per_map} pairs"))
        checks.append(Check(f"{label}.hom_defect", worst_hom,
                            ctx.tol("hom_defect", 1e-8),
                            worst_hom <= ctx.tol("hom_defect", 1e-8),
                            "Frobenius upper bound"))
        udef = kernel.stack_unitarity_defect(u)
        checks.append(Check(f"{label}.unitarity_defect", udef,
                            ctx.tol("unitarity_defect", 1e-10),
                            udef <= ctx.tol("unitarity_defect", 1e-10),
                            f"{ctx.grid_size + 1} grid points"))
    return checks


def conditions_suite(ctx: VerifyContext) -> List[Check]:
    """Exact oscillation 2^{-(j-1)} and exact covering for phi_1j."""
    checks = []
    t = ctx.tower
    for j in range(2, t.depth + 1):
        branches = list(t.branch_structure(1, j).elements())
        osc = homs.oscillation(branches)
        want = Fraction(1, 2 ** (j - 1))
        checks.append(Check(f"phi_1_{j}.oscillation", str(osc), str(want),
                            osc == want, "exact dyadic"))
        cov = homs.covers_interval(branches)
        checks.append(Check(f"phi_1_{j}.covers", cov, True, cov is True,
                            "exact union of images"))
    return checks


def density_suite(ctx: VerifyContext, js=None, xs=None) -> List[Check]:
    """delta-density of the canonical element's image spectra."""
    t = ctx.tower
    js = list(js) if js is not None else list(range(2, t.depth + 1))
    xs = list(xs) if xs is not None else [k / 15 for k in range(16)]
    slack = ctx.tol("density_slack", 1e-9)
    checks = []
    for j in js:
        bound = 2.0 ** -(j - 1)
        worst, worst_x = -1.0, None
        for x in xs:
            delta = eig_density(t, j, x).delta
            if delta > worst:
                worst, worst_x = delta, x
        checks.append(Check(f"eig_density.j{j}", worst, bound + slack,
                            worst <= bound + slack,
                            f"max over {len(xs)} fibres (at x={worst_x})"))
    return checks


def density_rows(ctx: VerifyContext, js=None, xs=None):
    """(j, x, delta, bound) rows for reports."""
    t = ctx.tower
    js = list(js) if js is not None else list(range(2, t.depth + 1))
    xs = list(xs) if xs is not None else [k / 15 for k in range(16)]
    return [(j, x, eig_density(t, j, x).delta, 2.0 ** -(j - 1))
            for j in js for x in xs]


def trace_gap_suite(ctx: VerifyContext, js=None) -> List[Check]:
    """Oscillation gap of the canonical element under phi_1j, with the decay
    bound 2^{-(j-1)} (+ slack) and the modulus bound."""
    t = ctx.tower
    js = list(js) if js is not None else list(range(2, t.depth + 1))
    slack = ctx.tol("gap_slack", 1e-6)
    checks = []
    prev = None
    for j in js:
        h = canonical_h(t.seed, ctx.grid_size * 2 ** (j - 1))
        gap, modulus = trace_unique_rate(t, h, j)
        bound = 2.0 ** -(j - 1)
        checks.append(Check(f"trace_gap.j{j}", gap, bound + slack,
                            gap <= bound + slack, f"modulus bound {modulus}"))
        checks.append(_leq(f"trace_gap.j{j}.modulus", gap, modulus + slack,
                           {}, "estimate-(6) bound"))
        if prev is not None:
            checks.append(Check(f"trace_gap.j{j}.monotone", gap, prev,
                                gap <= prev + 1e-12, "nonincreasing in j"))
        prev = gap
    return checks


def trace_gap_rows(ctx: VerifyContext, js=None):
    t = ctx.tower
    js = list(js) if js is not None else list(range(2, t.depth + 1))
    out = []
    for j in js:
        h = canonical_h(t.seed, ctx.grid_size * 2 ** (j - 1))
        gap, modulus = trace_unique_rate(t, h, j)
        out.append((j, gap, modulus, 2.0 ** -(j - 1)))
    return out


APPROX_UNIT_POWERS = (1, 2, 4, 8, 16, 32, 64)


def approx_unit_suite(ctx: VerifyContext) -> List[Check]:
    """Approximate-unit defect of phi(h)^{1/n} on the standard sample set."""
    t = ctx.tower
    phi = stage_map(t, 1, 2)
    grid = ctx.grid_size * 2
    rng = ctx.rng(5)
    h = canonical_h(t.seed, grid)
    randoms = [random_element(t.seed, grid, rng) for _ in range(3)]
    by_n_h = homs.approx_unit_defect(phi, [h], APPROX_UNIT_POWERS)
    by_n = homs.approx_unit_defect(phi, [h] + randoms, APPROX_UNIT_POWERS)
    checks = [Check("approx_unit.h.n1", by_n_h[1],
                    (0.25, ctx.tol("approx_unit_first", 1e-9)),
                    abs(by_n_h[1] - 0.25) <= ctx.tol("approx_unit_first", 1e-9),
                    "||phi(h)^2 - phi(h)|| = 1/4")]
    mono = all(by_n[a] + 1e-10 >= by_n[b]
               for a, b in zip(APPROX_UNIT_POWERS, APPROX_UNIT_POWERS[1:]))
    checks.append(Check("approx_unit.monotone", mono, True, mono,
                        f"powers {APPROX_UNIT_POWERS}"))
    tail = by_n[APPROX_UNIT_POWERS[-1]]
    checks.append(Check("approx_unit.n64", tail,
                        ctx.tol("approx_unit_tail", 0.05),
                        tail < ctx.tol("approx_unit_tail", 0.05),
                        "standard sample set"))
    return checks


def approx_unit_rows(ctx: VerifyContext):
    t = ctx.tower
    phi = stage_map(t, 1, 2)
    grid = ctx.grid_size * 2
    rng = ctx.rng(5)
    samples = [canonical_h(t.seed, grid)] + [
        random_element(t.seed, grid, rng) for _ in range(3)]
    by_n = homs.approx_unit_defect(phi, samples, APPROX_UNIT_POWERS)
    return [(n, by_n[n]) for n in APPROX_UNIT_POWERS]


def _seeded_trace(block: BuildingBlock, grid: int, rng) -> Trace:
    count = int(rng.integers(1, 4))
    atoms = []
    for _ in range(count):
        loc = int(rng.integers(0, grid + 1)) / grid
        atoms.append((loc, float(rng.uniform(0.1, 1.0))))
    merged = {}
    for loc, w in atoms:
        merged[loc] = merged.get(loc, 0.0) + w
    return Trace(sorted(merged.items()), block)


def duality_suite(ctx: VerifyContext) -> List[Check]:
    """Pushforward duality and tracial-norm preservation."""
    t = ctx.tower
    checks = []
    for (label, phi), count in ((("phi_1_2", stage_map(t, 1, 2)), ctx.duality_pairs),
                                (("phi_2_3", stage_map(t, 2, 3)), 10)):
        if phi.target != t.stage(2) and t.depth < 3:
            continue
        rng = ctx.rng(7, phi.target.n)
        grid = ctx.grid_size * 2 ** phi.depth
        worst_dual = 0.0
        worst_norm = 0.0
        for _ in range(count):
            tau = _seeded_trace(phi.target, ctx.grid_size, rng)
            e = random_element(phi.source, grid, rng)
            lhs = eval_trace(pushforward_trace(phi, tau), e)
            rhs = eval_trace(tau, apply_map(phi, e))
            worst_dual = max(worst_dual, abs(lhs - rhs))
            worst_norm = max(worst_norm,
                             abs(trace_norm(pushforward_trace(phi, tau))
                                 - trace_norm(tau)))
        checks.append(Check(f"{label}.duality", worst_dual,
                            ctx.tol("duality", 1e-9),
                            worst_dual <= ctx.tol("duality", 1e-9),
                            f"{count} seeded (trace, element) pairs"))
        checks.append(Check(f"{label}.trace_norm_preservation", worst_norm,
                            ctx.tol("trace_norm_preservation", 1e-6),
                            worst_norm <= ctx.tol("trace_norm_preservation", 1e-6),
                            "state preservation"))
    return checks


def psi_suite(ctx: VerifyContext) -> List[Check]:
    """Right-inverse property of the affine embedding, and cone membership of
    tracial images."""
    blk = ctx.tower.seed
    rng = ctx.rng(11)
    n = ctx.grid_size
    ts = np.arange(n + 1) / n
    worst = 0.0
    for _ in range(50):
        g1 = float(rng.uniform(-2.0, 2.0))
        coeffs = rng.uniform(-1.0, 1.0, size=3)
        bump = sum(c * np.sin(np.pi * (k + 1) * ts) for k, c in enumerate(coeffs))
        bump[0] = 0.0
        bump[-1] = 0.0
        g0 = blk.a / (blk.a + 1) * g1
        g = GridFunction((1 - ts) * g0 + ts * g1 + bump)
        e = psi_embed(blk, g)
        img = affine_image(e)
        worst = max(worst, float(np.abs(img.samples - g.samples).max()))
    cone = abs(float(img.samples[0]) - blk.a / (blk.a + 1) * float(img.samples[-1]))
    return [
        Check("psi.right_inverse", worst, ctx.tol("psi_right_inverse", 1e-9),
              worst <= ctx.tol("psi_right_inverse", 1e-9), "50 seeded cone functions"),
        Check("psi.affine_cone", cone, ctx.tol("affine_cone", 1e-10),
              cone <= ctx.tol("affine_cone", 1e-10), "g(0) = a/(a+1) g(1)"),
    ]


def _steep_step(center: float, rate: float = 4000.0):
    def logistic(z):
        return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))

    def g(w):
        raw = logistic(rate * (np.asarray(w) - center))
        lo = logistic(-rate * center)
        hi = logistic(rate * (1.0 - center))
        return np.clip((raw - lo) / (hi - lo), 0.0, 1.0)
    return g


def projection_suite(ctx: VerifyContext) -> List[Check]:
    """Seeded almost-projection attempts: every verdict must be a rejection or
    a near-zero certificate with a small bound; the steep step applied to the
    canonical element must be rejected by the rank jump."""
    blk = ctx.tower.seed
    rng = ctx.rng(13)
    n = ctx.grid_size
    cap = ctx.tol("near_zero_cap", 0.5)
    bad = 0
    near_zero_worst = 0.0
    eps = 0.1
    for trial in range(ctx.projection_trials):
        mode = trial % 3
        if mode == 0:
            e = random_element(blk, n, rng, hermitian=True)
        elif mode == 1:
            base = random_element(blk, n, rng, hermitian=True)
            e = scalar_transform(base, _steep_step(0.4 + 0.2 * rng.uniform()))
        else:
            scale = float(rng.uniform(0.0, 2 * eps * 0.9))
            e = random_element(blk, n, rng, hermitian=True, scale=scale)
        verdict = certify_no_projection(e, eps)
        if verdict.is_near_zero:
            near_zero_worst = max(near_zero_worst, verdict.bound)
            if verdict.bound > cap:
                bad += 1
    checks = [Check("projection.trials", bad, 0, bad == 0,
                    f"{ctx.projection_trials} seeded attempts; "
                    f"worst near-zero bound {near_zero_worst:.3g}")]
    h = canonical_h(blk, n)
    step_center = (n // 2 - 0.5) / n  # off-grid: every sample clears the cut
    stepped = scalar_transform(h, _steep_step(step_center))
    verdict = certify_no_projection(stepped, eps)
    rank_jump = (not verdict.is_near_zero) and "rank jump" in verdict.reason
    checks.append(Check("projection.rank_jump", verdict.reason,
                        "rank jump rejection", rank_jump,
                        "steep step applied to the canonical element"))
    return checks


def central_suite(ctx: VerifyContext) -> List[Check]:
    """Finite-truncation central embeddings: exact commutation with disjoint
    factors, multiplicativity of norms on simple tensors, and the fibre trace
    of the canonical element's image."""
    t = ctx.tower
    n2 = t.stage(2).n
    trunc = central.TensorTruncation(t.stage(2), (n2, n2), ctx.grid_size)
    sigma = central.sigma_stage(t, 2, trunc, 2)
    h = canonical_h(t.seed, ctx.grid_size * 2)
    a = apply_map(stage_map(t, 1, 2), h)
    rng = ctx.rng(17)
    x = rng.standard_normal((n2, n2)) + 1j * rng.standard_normal((n2, n2))
    e2 = random_element(t.stage(2), ctx.grid_size, rng)
    b = central.simple_tensor(trunc, e2, [x, None])
    comm = sigma.commutator_metric(a, [b])
    ndef = sigma.norm_defect(a, b)
    tm2 = sigma.trace_match(a, 2)
    h4 = canonical_h(t.seed, ctx.grid_size * 4)
    a_fine = apply_map(stage_map(t, 1, 2), h4)
    tm3 = sigma.trace_match(a_fine, 3) if t.depth >= 3 else tm2
    nrec = sigma.norm_recovery(a, 2)
    checks = [
        Check("central.commutator", comm, 0.0, comm == 0.0,
              "disjoint tensor factors commute exactly"),
        Check("central.norm_defect", ndef, ctx.tol("central_norm_defect", 1e-9),
              ndef <= ctx.tol("central_norm_defect", 1e-9), "simple tensor"),
        Check("central.trace_match_2", tm2, 5 / 6, abs(tm2 - 5 / 6) == 0.0,
              "fibre trace of the image datum"),
        Check("central.trace_cauchy", abs(tm3 - tm2), 0.5,
              abs(tm3 - tm2) <= 0.5, f"tm(3) = {tm3}"),
        Check("central.norm_recovery", nrec, 1.0, abs(nrec - 1.0) <= 1e-12,
              "datum of the canonical element keeps norm 1"),
    ]
    return checks


def witness_suite(ctx: VerifyContext) -> List[Check]:
    """Ideal-generation witness depths for two reference supports."""
    t = ctx.tower
    h = canonical_h(t.seed, ctx.grid_size)
    mid = homs.simplicity_witness(t, 1, h, (0.4, 0.6), max_stage=8)
    low = homs.simplicity_witness(t, 1, h, (0.0, 0.1), max_stage=8)
    return [
        Check("witness.mid", mid.stage, 2, mid.stage == 2,
              f"support (0.4, 0.6); min singular value {mid.min_singular:.3g}"),
        Check("witness.low", low.stage, 5, low.stage == 5,
              f"support (0, 0.1); min singular value {low.min_singular:.3g}"),
    ]


def growth_suite(ctx: VerifyContext) -> List[Check]:
    """Exact integer growth of the stage parameters."""
    t = ctx.tower
    ok_a = all(t.stage(i + 1).a == 2 * t.stage(i).a + 1 for i in range(1, t.depth))
    ok_n = all(t.stage(i + 1).n == (2 * t.stage(i).a + 1) * t.stage(i).n
               for i in range(1, t.depth))
    ok_ratio = all(t.stage(i + 1).n // t.stage(i + 1).a == t.stage(i).n
                   and t.stage(i + 1).n % t.stage(i + 1).a == 0
                   for i in range(1, t.depth))
    return [
        Check("growth.a_recurrence", ok_a, True, ok_a, "a <- 2a+1"),
        Check("growth.n_recurrence", ok_n, True, ok_n, "n <- (2a+1)n"),
        Check("growth.ratio", ok_ratio, True, ok_ratio, "n_i/a_i = n_{i-1}"),
    ]


SUITES = {
    "growth": growth_suite,
    "constructor": constructor_suite,
    "conditions": conditions_suite,
    "eig-density": density_suite,
    "trace-gap": trace_gap_suite,
    "approx-unit": approx_unit_suite,
    "duality": duality_suite,
    "psi": psi_suite,
    "projection": projection_suite,
    "central": central_suite,
    "witness": witness_suite,
}


def run_suites(ctx: VerifyContext, names=None) -> List[Check]:
    names = list(names) if names is not None else list(SUITES)
    checks: List[Check] = []
    for name in names:
        started = time.perf_counter()
        suite_checks = SUITES[name](ctx)
        elapsed = time.perf_counter() - started
        for c in suite_checks:
            checks.append(c)
        checks.append(Check(f"{name}.runtime_s", round(elapsed, 3), None, True,
                            "informational"))
    return checks
