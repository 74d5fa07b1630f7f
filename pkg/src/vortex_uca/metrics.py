"""Spectrum efficiency and the noise aggregation feeding it."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .channel import mode_gain_factors
from .errors import DegenerateGeometry, LengthMismatch, ModeUnobservable
from .geometry import LinkGeometry, mode_index_set
from .specfun import bessel_j
from .transceiver import INVERSION_TOL, NoiseModel

_SWEEP_FIELDS = {
    "phi": "tilt_phi",
    "theta": "bearing_theta",
    "distance": "center_distance",
}


@dataclass(frozen=True, eq=False)
class LinkBudget:
    """Per-mode transmit powers plus the receive-side noise model."""

    mode_powers: np.ndarray
    noise: NoiseModel

    def __post_init__(self):
        p = np.array(self.mode_powers, dtype=float)  # copy: frozen independently of the caller
        if p.ndim != 1:
            raise LengthMismatch("mode_powers must form a 1-D vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("mode powers must be finite and >= 0")
        p.setflags(write=False)
        object.__setattr__(self, "mode_powers", p)

    @classmethod
    def uniform(
        cls, geometry: LinkGeometry, mode_power: float, noise_variance: float, seed: int
    ) -> "LinkBudget":
        n_modes = len(mode_index_set(geometry))
        return cls(
            mode_powers=np.full(n_modes, float(mode_power)),
            noise=NoiseModel.uniform(noise_variance, geometry.n_rx, seed),
        )


@dataclass(frozen=True)
class SweepPoint:
    """One sweep sample; ``spectrum_efficiency`` is None at unevaluable points."""

    value: float
    spectrum_efficiency: float | None


def aggregate_noise_variance(mode: int, geometry: LinkGeometry, noise: NoiseModel) -> float:
    """Noise variance of the summed per-mode output: sum of sigma_m^2 / |c_{m,mode}|^2."""
    g = geometry
    if len(noise.variances) != g.n_rx:
        raise LengthMismatch(
            f"{len(noise.variances)} noise variances for {g.n_rx} rx elements"
        )
    f = mode_gain_factors(g)
    c_abs = np.abs(bessel_j(mode, f.b_factor))  # unimodular prefactor drops out
    small = c_abs < INVERSION_TOL
    if small.any():
        m_idx = int(np.argmax(small))
        raise ModeUnobservable(m_idx + 1, mode)
    return float(np.sum(noise.variances / c_abs**2))


def spectrum_efficiency(geometry: LinkGeometry, budget: LinkBudget) -> float:
    """Sum over modes of log2(1 + per-mode SNR), in bits/s/Hz.

    The per-mode SNR is M^2 |h|^2 p_mode over the aggregated noise variance
    of that mode's decomposition output.
    """
    g = geometry
    modes = mode_index_set(g)
    if len(budget.mode_powers) != len(modes):
        raise LengthMismatch(
            f"{len(budget.mode_powers)} mode powers for {len(modes)} modes"
        )
    h_power = abs(mode_gain_factors(g).h_scalar) ** 2
    total = 0.0
    for power, mode in zip(budget.mode_powers, modes):
        variance = aggregate_noise_variance(mode, g, budget.noise)
        if variance == 0.0:
            total += math.inf if power > 0 else 0.0
        else:
            total += math.log2(1.0 + g.n_rx**2 * h_power * power / variance)
    return total


def se_sweep(
    geometry: LinkGeometry,
    variable: str,
    grid,
    budget: LinkBudget,
) -> list[SweepPoint]:
    """Spectrum efficiency across a parameter grid.

    ``variable`` is one of 'phi', 'theta', 'distance'.  Points where some
    mode cannot be inverted (or the geometry degenerates) are carried as
    gaps with ``spectrum_efficiency=None`` rather than dropped.
    """
    if variable not in _SWEEP_FIELDS:
        raise ValueError(f"unknown sweep variable {variable!r}")
    field = _SWEEP_FIELDS[variable]
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid must not be empty")
    points = []
    for value in grid:
        candidate = dataclasses.replace(geometry, **{field: value})
        try:
            se = spectrum_efficiency(candidate, budget)
        except (ModeUnobservable, DegenerateGeometry):
            se = None
        points.append(SweepPoint(value=value, spectrum_efficiency=se))
    return points
