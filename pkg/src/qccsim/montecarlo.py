"""Finite-statistics emulation of weak measurement runs.

Each trial owns one counter block of a counter-based generator, so a
batch is a pure function of (seed, n): any chunking or thread layout
reproduces it bit for bit. Postselection is Bernoulli with the exact
coupled probability; accepted trials draw a pointer position from the
exact final density by inverse-CDF on a dense tabulation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .errors import ValidationError
from .neutron import AbsorberConfig, MagneticConfig, perturbed_intensity, reference_intensity
from .pointer import GRID_HALF_WIDTHS, GaussianPointerState, density, mean_position, norm_sq
from .weakmeas import Observable, PrePostContext, couple_and_postselect

DENSITY_POINTS = 4096

# Uniform draws consumed per trial; one full Philox counter block, so
# trial i always starts at counter offset i.
DRAWS_PER_TRIAL = 4


@dataclass(frozen=True)
class TrialBatch:
    """Outcomes of n independent pre/postselected trials.

    ``postselected`` is the per-trial success mask; ``positions`` holds
    the pointer readouts of successful trials, in trial order.
    """

    n_total: int
    n_postselected: int
    positions: np.ndarray
    seed: int
    postselected: np.ndarray

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=float)
        mask = np.asarray(self.postselected, dtype=bool)
        if mask.size != self.n_total:
            raise ValidationError("postselected mask length must equal n_total")
        if self.n_postselected != int(mask.sum()) or positions.size != self.n_postselected:
            raise ValidationError("postselection counts are inconsistent")
        if positions.size and not np.all(np.isfinite(positions)):
            raise ValidationError("positions contain non-finite entries")
        positions = positions.copy()
        positions.flags.writeable = False
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "postselected", mask)


@dataclass(frozen=True)
class EstimatorReport:
    """Weak-value estimate from a trial batch."""

    mean_shift: float
    std_error: float
    estimated_wv_re: float
    postselect_rate: float
    n_total: int
    n_postselected: int

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValidationError("standard error cannot be negative")
        if abs(self.postselect_rate - self.n_postselected / self.n_total) > 1e-12:
            raise ValidationError("postselect_rate inconsistent with counts")


def _tabulated_inverse_cdf(pointer_final: GaussianPointerState):
    """Inverse CDF of the normalized |phi_f(x)|^2 on a dense grid."""
    w = pointer_final.width
    lo = min(c.center for c in pointer_final.components) - GRID_HALF_WIDTHS * w
    hi = max(c.center for c in pointer_final.components) + GRID_HALF_WIDTHS * w
    xs = np.linspace(lo, hi, DENSITY_POINTS)
    dens = density(pointer_final, xs)
    segments = 0.5 * (dens[1:] + dens[:-1]) * np.diff(xs)
    cdf = np.concatenate(([0.0], np.cumsum(segments)))
    cdf /= cdf[-1]

    def draw(u: np.ndarray) -> np.ndarray:
        return np.interp(u, cdf, xs)

    return draw


def _trial_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    bits = Philox(key=seed)
    if start:
        bits.advance(start)
    return Generator(bits).random((count, DRAWS_PER_TRIAL))


def sample_trials(
    ctx: PrePostContext,
    obs: Observable,
    phi0: GaussianPointerState,
    g: float,
    n: int,
    seed: int,
    workers: int = 1,
) -> TrialBatch:
    """Sample n trials of the coupled pre/postselected run.

    ``workers`` only sets the execution layout; results are identical
    for any value because trial i derives all its randomness from
    counter block i of the seeded generator.
    """
    if n < 1:
        raise ValidationError(f"need at least one trial, got n={n}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    result = couple_and_postselect(ctx, obs, phi0, g)
    p_post = min(max(result.postselect_prob_coupled, 0.0), 1.0)
    draw = (
        _tabulated_inverse_cdf(result.pointer_final)
        if p_post > 0.0 and result.pointer_final.components
        else None
    )

    def run_chunk(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        start, count = bounds
        u = _trial_uniforms(seed, start, count)
        mask = u[:, 0] < p_post
        pos = draw(u[mask, 1]) if draw is not None else np.empty(0)
        return mask, pos

    chunk_size = -(-n // workers)
    bounds = [(s, min(chunk_size, n - s)) for s in range(0, n, chunk_size)]
    if len(bounds) == 1:
        parts = [run_chunk(bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, bounds))

    mask = np.concatenate([m for m, _ in parts])
    positions = np.concatenate([p for _, p in parts])
    return TrialBatch(
        n_total=n,
        n_postselected=int(mask.sum()),
        positions=positions,
        seed=int(seed),
        postselected=mask,
    )


def estimate_weak_value(batch: TrialBatch, phi0: GaussianPointerState, g: float) -> EstimatorReport:
    """Estimate Re(A^w) as (mean readout - initial mean) / g."""
    if batch.n_postselected < 2:
        raise ValidationError(
            f"insufficient statistics: {batch.n_postselected} postselected trials"
        )
    if g == 0.0:
        raise ValidationError("weak-value estimation needs a nonzero coupling")
    mean_shift = float(batch.positions.mean()) - mean_position(phi0)
    spread = float(batch.positions.std(ddof=1))
    std_error = spread / math.sqrt(batch.n_postselected) / abs(g)
    return EstimatorReport(
        mean_shift=mean_shift,
        std_error=std_error,
        estimated_wv_re=mean_shift / g,
        postselect_rate=batch.n_postselected / batch.n_total,
        n_total=batch.n_total,
        n_postselected=batch.n_postselected,
    )


@dataclass(frozen=True)
class IntensityCounts:
    """Detection counts for a reference/perturbed intensity experiment."""

    n_trials: int
    n_reference: int
    n_perturbed: int
    rate_reference: float
    rate_perturbed: float
    ratio: float
    ratio_std_error: float
    two_proportion_z: float
    seed: int


def sample_intensity_experiment(
    cfg: AbsorberConfig | MagneticConfig, n: int, seed: int
) -> IntensityCounts:
    """Bernoulli sampling of reference and perturbed detections.

    Both runs use n trials each, with independent uniforms from the
    same counter-based stream; the count ratio estimates the exact
    intensity ratio with a delta-method standard error.
    """
    if n < 1:
        raise ValidationError(f"need at least one trial, got n={n}")
    p_ref = reference_intensity()
    p_pert = perturbed_intensity(cfg)
    u = _trial_uniforms(seed, 0, n)
    n_ref = int(np.sum(u[:, 0] < p_ref))
    n_pert = int(np.sum(u[:, 1] < p_pert))
    if n_ref == 0:
        raise ValidationError("no reference detections; increase n")
    r_ref = n_ref / n
    r_pert = n_pert / n
    ratio = r_pert / r_ref
    var_term = 0.0
    if n_pert > 0:
        var_term += (1.0 - r_pert) / (n * r_pert)
    var_term += (1.0 - r_ref) / (n * r_ref)
    ratio_se = ratio * math.sqrt(var_term) if n_pert > 0 else 0.0
    pooled = (n_ref + n_pert) / (2.0 * n)
    denom = math.sqrt(pooled * (1.0 - pooled) * 2.0 / n) if 0.0 < pooled < 1.0 else 0.0
    if denom > 0.0:
        z = (r_pert - r_ref) / denom
    else:
        z = 0.0 if r_pert == r_ref else math.inf
    return IntensityCounts(
        n_trials=n,
        n_reference=n_ref,
        n_perturbed=n_pert,
        rate_reference=r_ref,
        rate_perturbed=r_pert,
        ratio=ratio,
        ratio_std_error=ratio_se,
        two_proportion_z=z,
        seed=int(seed),
    )
