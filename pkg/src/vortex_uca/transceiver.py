"""Mode synthesis, propagation with additive noise, and mode decomposition.

The transmit side feeds every element the same symbols behind per-element
phase ramps (one ramp per mode).  The receive side undoes, per element and
per mode, the closed-form gain factor and offset phase, then sums across
elements; the phase ramps of distinct modes cancel in that sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelMatrix, ModeChannelMatrix, mode_channel_matrix, mode_gain_factors
from .errors import LengthMismatch, ModeUnobservable
from .geometry import TWO_PI, LinkGeometry, ModeIndexSet, mode_index_set
from .specfun import bessel_j

# Per-mode inversion refuses gain factors smaller than this.
INVERSION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeSymbolVector:
    """One complex symbol per mode, ordered like its mode set."""

    symbols: np.ndarray
    modes: ModeIndexSet

    def __post_init__(self):
        if self.symbols.ndim != 1 or len(self.symbols) != len(self.modes):
            raise LengthMismatch(
                f"{len(self.symbols)} symbols for {len(self.modes)} modes"
            )


@dataclass(frozen=True, eq=False)
class ElementSignalVector:
    """One complex sample per array element; ``side`` is 'tx' or 'rx'."""

    samples: np.ndarray
    side: str

    def __post_init__(self):
        if self.side not in ("tx", "rx"):
            raise ValueError(f"side must be 'tx' or 'rx', got {self.side!r}")
        if self.samples.ndim != 1:
            raise LengthMismatch("element signal must be a 1-D vector")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-receive-element circular complex Gaussian noise, seeded.

    ``sample(trial)`` is a pure function of (seed, trial): the same pair
    always reproduces the same draw, and distinct trials are independent
    streams, so Monte Carlo loops parallelize without coordination.
    """

    variances: np.ndarray
    seed: int

    def __post_init__(self):
        v = np.array(self.variances, dtype=float)  # copy: frozen independently of the caller
        if v.ndim != 1:
            raise LengthMismatch("variances must form a 1-D vector")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("variances must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "variances", v)
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def uniform(cls, variance: float, n_rx: int, seed: int) -> "NoiseModel":
        return cls(variances=np.full(n_rx, float(variance)), seed=seed)

    def sample(self, trial: int = 0) -> np.ndarray:
        if trial < 0:
            raise ValueError("trial must be >= 0")
        rng = np.random.default_rng([self.seed, int(trial)])
        pairs = rng.standard_normal((2, len(self.variances)))
        return np.sqrt(self.variances / 2.0) * (pairs[0] + 1j * pairs[1])


@dataclass(frozen=True, eq=False)
class DemuxOutput:
    """Decomposition products: per-element terms, their sums, and symbol estimates."""

    per_mode: np.ndarray  # (n_modes,) summed over elements
    per_element_terms: np.ndarray  # (n_rx, n_modes)
    estimated_symbols: np.ndarray  # (n_modes,)
    modes: ModeIndexSet


def _synthesis_matrix(geometry: LinkGeometry) -> np.ndarray:
    g = geometry
    modes = np.array(mode_index_set(g).modes)
    azimuth = TWO_PI * np.arange(g.n_tx) / g.n_tx + g.offset_alpha_tx
    return np.exp(1j * np.outer(azimuth, modes)) / math.sqrt(g.n_tx)


def synthesize_transmit(symbols: ModeSymbolVector, geometry: LinkGeometry) -> ElementSignalVector:
    """Element feed signals for a symbol vector (an isometry: power is preserved)."""
    modes = mode_index_set(geometry)
    if symbols.modes != modes:
        raise LengthMismatch(
            f"symbol modes {symbols.modes.modes} do not match geometry modes {modes.modes}"
        )
    samples = _synthesis_matrix(geometry) @ symbols.symbols
    return ElementSignalVector(samples=samples, side="tx")


def propagate(
    tx: ElementSignalVector,
    channel: ChannelMatrix,
    noise: NoiseModel | None = None,
    trial: int = 0,
) -> ElementSignalVector:
    """Receive-side samples y = H x (+ z) through an element-gain matrix."""
    if tx.side != "tx":
        raise LengthMismatch("propagate expects a tx-side signal")
    if len(tx) != channel.n_tx:
        raise LengthMismatch(f"{len(tx)} tx samples into a {channel.n_tx}-column channel")
    samples = channel.entries @ tx.samples
    if noise is not None:
        if len(noise.variances) != channel.n_rx:
            raise LengthMismatch(
                f"{len(noise.variances)} noise variances for {channel.n_rx} rx elements"
            )
        samples = samples + noise.sample(trial)
    return ElementSignalVector(samples=samples, side="rx")


def propagate_mode_model(
    symbols: ModeSymbolVector,
    mode_matrix: ModeChannelMatrix,
    noise: NoiseModel | None = None,
    trial: int = 0,
) -> ElementSignalVector:
    """Receive-side samples under the per-mode gain model: y = H~ s (+ z)."""
    if symbols.modes != mode_matrix.modes:
        raise LengthMismatch("symbol modes do not match mode-matrix modes")
    samples = mode_matrix.entries @ symbols.symbols
    if noise is not None:
        if len(noise.variances) != mode_matrix.n_rx:
            raise LengthMismatch(
                f"{len(noise.variances)} noise variances for {mode_matrix.n_rx} rx elements"
            )
        samples = samples + noise.sample(trial)
    return ElementSignalVector(samples=samples, side="rx")


@lru_cache(maxsize=256)
def _demux_weights(geometry: LinkGeometry) -> tuple[np.ndarray, ModeIndexSet]:
    """Per-(element, mode) compensation weights; raises when uninvertible."""
    g = geometry
    f = mode_gain_factors(g)
    modes = mode_index_set(g)
    mode_arr = np.array(modes.modes)
    # c_{m,l} = prefactor_m * J_l(b_m), tabulated for every (element, mode).
    bessel_table = np.column_stack([bessel_j(int(l), f.b_factor) for l in mode_arr])
    c = f.c_prefactor[:, None] * bessel_table
    too_small = np.abs(c) < INVERSION_TOL
    if too_small.any():
        m_idx, l_idx = np.argwhere(too_small)[0]
        raise ModeUnobservable(int(m_idx) + 1, int(mode_arr[l_idx]))
    psi = TWO_PI * np.arange(g.n_rx) / g.n_rx
    offset = psi[:, None] + g.offset_alpha_rx - f.zeta[:, None]
    weights = np.exp(-1j * offset * mode_arr[None, :]) / c
    weights.setflags(write=False)
    return weights, modes


def demultiplex(rx: ElementSignalVector, geometry: LinkGeometry) -> DemuxOutput:
    """Split a receive vector into per-mode components and symbol estimates.

    Each element sample is multiplied by the inverse closed-form gain factor
    and the conjugate offset phase for the probed mode, then summed across
    elements; estimates divide by M times the common gain scale.
    """
    g = geometry
    if rx.side != "rx":
        raise LengthMismatch("demultiplex expects an rx-side signal")
    if len(rx) != g.n_rx:
        raise LengthMismatch(f"{len(rx)} rx samples for {g.n_rx} elements")
    weights, modes = _demux_weights(g)
    terms = rx.samples[:, None] * weights
    per_mode = terms.sum(axis=0)
    h = mode_gain_factors(g).h_scalar
    estimates = per_mode / (g.n_rx * h)
    for arr in (terms, per_mode, estimates):
        arr.setflags(write=False)
    return DemuxOutput(
        per_mode=per_mode,
        per_element_terms=terms,
        estimated_symbols=estimates,
        modes=modes,
    )


def crosstalk_matrix(geometry: LinkGeometry) -> np.ndarray:
    """Mode-to-mode leakage of the decomposition under the closed-form model.

    Entry (row i0, column i) is the response of the mode-i0 output to a unit
    symbol on mode i.  Diagonal entries are exactly 1; off-diagonal
    magnitudes quantify inter-mode interference (zero for coaxial arrays).
    """
    g = geometry
    weights, _ = _demux_weights(g)
    gains = mode_channel_matrix(g, method="closed").entries
    h = mode_gain_factors(g).h_scalar
    return weights.T @ gains / (g.n_rx * h)
