"""Element-to-element and per-mode channel gains.

Two gain models coexist:

* the exact spherical-wave gain, whose phase carries the exact distance;
* the far-field model, where each receive element sees a constant-magnitude
  gain whose phase is sinusoidal in the transmit azimuth.  Summing that
  model against the transmit phase ramp collapses (for large arrays) into a
  closed form built from a Bessel factor per (element, mode) pair.

The direct finite sum over transmit elements stays available as the oracle
the closed form is measured against.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CaseMismatch
from .geometry import (
    TWO_PI,
    LinkGeometry,
    ModeIndexSet,
    exact_distance,
    mode_index_set,
    zeta,
)
from .specfun import bessel_j

# Magnitudes below this floor only matter to the error metric's log.
_LOG_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Element-to-element gains, rx elements as rows, tx elements as columns."""

    entries: np.ndarray  # (n_rx, n_tx) complex
    variant: str  # "exact" | "farfield"

    def __post_init__(self):
        if self.variant not in ("exact", "farfield"):
            raise ValueError(f"unknown channel variant {self.variant!r}")
        if self.entries.ndim != 2:
            raise ValueError("channel entries must be a 2-D matrix")

    @property
    def n_rx(self) -> int:
        return self.entries.shape[0]

    @property
    def n_tx(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class ModeChannelMatrix:
    """Per-mode gains at each receive element, one column per mode."""

    entries: np.ndarray  # (n_rx, n_modes) complex
    modes: ModeIndexSet

    def __post_init__(self):
        if self.entries.ndim != 2 or self.entries.shape[1] != len(self.modes):
            raise ValueError("mode matrix shape does not match mode set")

    @property
    def n_rx(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ModeGainFactors:
    """Per-receive-element factors of the far-field gain model.

    ``a_factor[m-1]`` is the constant-magnitude element prefactor,
    ``b_factor[m-1]`` the phase-spread amplitude feeding the Bessel factor,
    ``c_prefactor[m-1]`` the unimodular part of the per-mode factor, and
    ``zeta[m-1]`` the receive-element offset angle.  ``h_scalar`` collects
    the mode-independent scale sqrt(N) * beta * lambda / (4*pi*range).
    """

    h_scalar: complex
    a_factor: np.ndarray
    b_factor: np.ndarray
    c_prefactor: np.ndarray
    zeta: np.ndarray

    def c_factor(self, m: int, mode: int) -> complex:
        """Per-(element, mode) factor: unimodular prefactor times J_mode(b)."""
        return complex(self.c_prefactor[m - 1] * bessel_j(mode, float(self.b_factor[m - 1])))


@lru_cache(maxsize=256)
def mode_gain_factors(geometry: LinkGeometry) -> ModeGainFactors:
    """All far-field gain factors of a geometry, cached per geometry."""
    g = geometry
    srange = g.farfield_range
    amplitude = g.beta * g.wavelength / (4.0 * math.pi * srange)
    carrier = cmath.exp(-2j * math.pi * srange / g.wavelength)

    zetas = np.array([zeta(m, g) for m in range(1, g.n_rx + 1)])
    psi = TWO_PI * np.arange(g.n_rx) / g.n_rx
    bearing_gap = psi + g.offset_alpha_rx - g.bearing_theta
    inplane = g.center_distance * math.sin(g.tilt_phi)
    spread = np.sqrt(
        g.radius_rx**2 + inplane**2 - 2.0 * g.radius_rx * inplane * np.cos(bearing_gap)
    )
    b = TWO_PI * g.radius_tx * spread / (g.wavelength * srange)
    prefactor = np.exp(1j * TWO_PI * g.radius_rx * inplane * np.cos(bearing_gap)
                       / (g.wavelength * srange))
    a = amplitude * carrier * prefactor
    h = math.sqrt(g.n_tx) * amplitude * carrier
    for arr in (zetas, b, prefactor, a):
        arr.setflags(write=False)
    return ModeGainFactors(h_scalar=h, a_factor=a, b_factor=b, c_prefactor=prefactor, zeta=zetas)


def exact_channel_gain(m: int, n: int, geometry: LinkGeometry) -> complex:
    """Spherical-wave gain from tx element n to rx element m."""
    g = geometry
    dist = exact_distance(m, n, g)
    return (
        g.beta
        * g.wavelength
        * cmath.exp(-2j * math.pi * dist / g.wavelength)
        / (4.0 * math.pi * dist)
    )


def farfield_channel_gain(m: int, n: int, geometry: LinkGeometry) -> complex:
    """Far-field model gain from tx element n to rx element m.

    Constant magnitude beta*lambda/(4*pi*range) with a phase sinusoidal in
    the transmit azimuth; the sinusoid is centered on the receive element's
    offset angle.
    """
    g = geometry
    f = mode_gain_factors(g)
    azimuth_gap = (
        g.tx_base_angle(n)
        + g.offset_alpha_tx
        - g.rx_base_angle(m)
        - g.offset_alpha_rx
        + f.zeta[m - 1]
    )
    return complex(f.a_factor[m - 1] * cmath.exp(-1j * f.b_factor[m - 1] * math.sin(azimuth_gap)))


def _farfield_row(m: int, geometry: LinkGeometry) -> np.ndarray:
    """Far-field gains from every tx element to rx element m (vectorized)."""
    g = geometry
    f = mode_gain_factors(g)
    phi_n = TWO_PI * np.arange(g.n_tx) / g.n_tx + g.offset_alpha_tx
    gap = phi_n - g.rx_base_angle(m) - g.offset_alpha_rx + f.zeta[m - 1]
    return f.a_factor[m - 1] * np.exp(-1j * f.b_factor[m - 1] * np.sin(gap))


def mode_gain_direct(m: int, mode: int, geometry: LinkGeometry) -> complex:
    """Finite-sum per-mode gain: the oracle for the closed form.

    Sums the far-field element gains against the transmit-side phase ramp
    of ``mode`` and normalizes by sqrt(N).
    """
    g = geometry
    row = _farfield_row(m, g)
    ramp = np.exp(1j * TWO_PI * np.arange(g.n_tx) * mode / g.n_tx)
    return complex(np.sum(row * ramp) / math.sqrt(g.n_tx))


def mode_gain_closed(m: int, mode: int, geometry: LinkGeometry) -> complex:
    """Closed-form per-mode gain at rx element m."""
    g = geometry
    f = mode_gain_factors(g)
    phase = (g.rx_base_angle(m) + g.offset_alpha_rx - f.zeta[m - 1]) * mode
    return complex(f.h_scalar * cmath.exp(1j * phase) * f.c_factor(m, mode))


def mode_gain_aligned(m: int, mode: int, geometry: LinkGeometry) -> complex:
    """Per-mode gain for coaxial arrays (zero tilt).

    The Bessel argument collapses to a constant, so the gain magnitude is
    identical at every receive element.
    """
    g = geometry
    if g.tilt_phi != 0.0:
        raise CaseMismatch(f"aligned-case gain requires tilt_phi = 0, got {g.tilt_phi}")
    srange = g.farfield_range
    b = TWO_PI * g.radius_tx * g.radius_rx / (g.wavelength * srange)
    f = mode_gain_factors(g)
    phase = (g.rx_base_angle(m) + g.offset_alpha_rx - 0.5 * math.pi) * mode
    return complex(f.h_scalar * bessel_j(mode, b) * cmath.exp(1j * phase))


def coplanar_factors(m: int, mode: int, geometry: LinkGeometry) -> tuple[float, complex]:
    """(b_factor, c_factor) for arrays lying in one plane (tilt = pi/2).

    Requires the bearing to coincide with the receive-array offset; both
    returned factors specialize the general per-element factors exactly.
    """
    g = geometry
    if g.tilt_phi != 0.5 * math.pi:
        raise CaseMismatch(f"coplanar case requires tilt_phi = pi/2, got {g.tilt_phi}")
    if g.bearing_theta != g.offset_alpha_rx:
        raise CaseMismatch(
            "coplanar case requires bearing_theta == offset_alpha_rx "
            f"(got {g.bearing_theta} vs {g.offset_alpha_rx})"
        )
    g._check_rx_index(m)
    srange = g.farfield_range
    psi = g.rx_base_angle(m)
    spread = math.sqrt(
        g.radius_rx**2
        + g.center_distance**2
        - 2.0 * g.radius_rx * g.center_distance * math.cos(psi)
    )
    b = TWO_PI * g.radius_tx * spread / (g.wavelength * srange)
    c = cmath.exp(
        1j * TWO_PI * g.radius_rx * g.center_distance * math.cos(psi) / (g.wavelength * srange)
    ) * bessel_j(mode, b)
    return b, complex(c)


def approximation_error(m: int, mode: int, geometry: LinkGeometry) -> float:
    """log10 magnitude of (closed-form - direct-sum) per-mode gain.

    The magnitude is floored at 1e-300 so exact agreement maps to a finite
    value instead of -inf.
    """
    diff = abs(mode_gain_closed(m, mode, geometry) - mode_gain_direct(m, mode, geometry))
    return math.log10(max(diff, _LOG_FLOOR))


def channel_matrix(geometry: LinkGeometry, variant: str = "exact") -> ChannelMatrix:
    """Assemble the full element-to-element gain matrix."""
    g = geometry
    if variant == "exact":
        gain = exact_channel_gain
    elif variant == "farfield":
        gain = farfield_channel_gain
    else:
        raise ValueError(f"unknown channel variant {variant!r}")
    entries = np.array(
        [[gain(m, n, g) for n in range(1, g.n_tx + 1)] for m in range(1, g.n_rx + 1)]
    )
    entries.setflags(write=False)
    return ChannelMatrix(entries=entries, variant=variant)


def mode_channel_matrix(geometry: LinkGeometry, method: str = "closed") -> ModeChannelMatrix:
    """Assemble the per-mode gain matrix (one column per mode).

    ``method="closed"`` uses the closed form; ``method="direct"`` uses the
    finite-sum oracle.
    """
    g = geometry
    if method == "closed":
        gain = mode_gain_closed
    elif method == "direct":
        gain = mode_gain_direct
    else:
        raise ValueError(f"unknown mode-gain method {method!r}")
    modes = mode_index_set(g)
    entries = np.array(
        [[gain(m, mode, g) for mode in modes] for m in range(1, g.n_rx + 1)]
    )
    entries.setflags(write=False)
    return ModeChannelMatrix(entries=entries, modes=modes)
