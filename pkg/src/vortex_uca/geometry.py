"""Link geometry for a pair of parallel, non-coaxial uniform circular arrays.

The transmit UCA lies in the z=0 plane, centered on the origin.  The receive
UCA lies in a parallel plane; its center sits at distance ``center_distance``
from the transmit center, tilted by ``tilt_phi`` away from the common axis
with in-plane bearing ``bearing_theta``.  Both arrays may carry a rotational
offset of their first element (``offset_alpha_tx`` / ``offset_alpha_rx``).

Element indices are 1-based throughout, matching the usual antenna-array
numbering: transmit elements n = 1..n_tx, receive elements m = 1..n_rx.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, ValidationError

TWO_PI = 2.0 * math.pi

# Below this, the offset-angle denominator is treated as zero.
DEGENERACY_TOL = 1e-15

# The closed-form gain model assumes the arrays are far apart relative to
# their radii; constructions closer than this multiple only get a warning.
FAR_FIELD_MARGIN = 5.0


class FarFieldWarning(UserWarning):
    """Arrays are close enough that the far-field gain model degrades."""


def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ValidationError(field, message)


def _wrap_angle(value: float) -> float:
    """Map an arbitrary real angle into [0, 2*pi)."""
    wrapped = math.fmod(value, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class LinkGeometry:
    """Immutable description of one transmit/receive UCA pair.

    Distances are meters, angles radians.  ``beta`` is the dimensionless
    antenna/propagation scale factor multiplying every element gain.
    """

    n_tx: int
    n_rx: int
    radius_tx: float
    radius_rx: float
    center_distance: float
    bearing_theta: float = 0.0
    tilt_phi: float = 0.0
    offset_alpha_tx: float = 0.0
    offset_alpha_rx: float = 0.0
    wavelength: float = 0.1
    beta: float = 4.0 * math.pi

    def __post_init__(self):
        for name in ("n_tx", "n_rx"):
            value = getattr(self, name)
            _require(isinstance(value, (int, np.integer)), name, "must be an integer")
            object.__setattr__(self, name, int(value))
            _require(getattr(self, name) >= 1, name, "must be >= 1")
        _require(self.radius_tx > 0.0, "radius_tx", "must be > 0")
        _require(self.radius_rx > 0.0, "radius_rx", "must be > 0")
        _require(self.center_distance > 0.0, "center_distance", "must be > 0")
        _require(self.wavelength > 0.0, "wavelength", "must be > 0")
        _require(self.beta > 0.0, "beta", "must be > 0")
        for name in ("bearing_theta", "tilt_phi", "offset_alpha_tx", "offset_alpha_rx"):
            value = getattr(self, name)
            _require(math.isfinite(value), name, "must be finite")
            object.__setattr__(self, name, _wrap_angle(value))
        _require(
            self.tilt_phi <= 0.5 * math.pi,
            "tilt_phi",
            "must lie in [0, pi/2] after wrapping to [0, 2*pi)",
        )
        if self.far_field_warning:
            warnings.warn(
                f"center distance {self.center_distance} is below "
                f"{FAR_FIELD_MARGIN} x max array radius; far-field gain "
                f"formulas lose accuracy",
                FarFieldWarning,
                stacklevel=2,
            )

    @property
    def far_field_warning(self) -> bool:
        """True when the arrays are too close for the far-field model."""
        return self.center_distance < FAR_FIELD_MARGIN * max(self.radius_tx, self.radius_rx)

    @property
    def plane_separation(self) -> float:
        """Perpendicular distance between the two array planes."""
        return self.center_distance * math.cos(self.tilt_phi)

    @property
    def farfield_range(self) -> float:
        """Effective range sqrt(d^2 + r^2 + R^2) of the far-field amplitude."""
        return math.sqrt(
            self.center_distance**2 + self.radius_tx**2 + self.radius_rx**2
        )

    def tx_base_angle(self, n: int) -> float:
        """Base angle 2*pi*(n-1)/N of transmit element n (1-based)."""
        self._check_tx_index(n)
        return TWO_PI * (n - 1) / self.n_tx

    def rx_base_angle(self, m: int) -> float:
        """Base angle 2*pi*(m-1)/M of receive element m (1-based)."""
        self._check_rx_index(m)
        return TWO_PI * (m - 1) / self.n_rx

    def _check_tx_index(self, n: int) -> None:
        if not 1 <= n <= self.n_tx:
            raise ValueError(f"tx element index {n} outside 1..{self.n_tx}")

    def _check_rx_index(self, m: int) -> None:
        if not 1 <= m <= self.n_rx:
            raise ValueError(f"rx element index {m} outside 1..{self.n_rx}")


def _floor_toward_zero(value: float) -> int:
    # Lower mode bound rounds toward zero: ceil for negative values,
    # floor otherwise.  Keeps the set at exactly N consecutive integers
    # for even N.
    if value < 0.0:
        return math.ceil(value)
    return math.floor(value)


@dataclass(frozen=True)
class ModeIndexSet:
    """Strictly increasing set of integer mode numbers carried by the link."""

    modes: tuple[int, ...]

    @classmethod
    def for_element_count(cls, n: int) -> "ModeIndexSet":
        lower = _floor_toward_zero((2 - n) / 2)
        upper = _floor_toward_zero(n / 2)
        return cls(tuple(range(lower, upper + 1)))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, mode: int) -> bool:
        return mode in self.modes

    def index(self, mode: int) -> int:
        """Column position of ``mode`` in matrices ordered like this set."""
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ValueError(f"mode {mode} not in mode set {self.modes}") from None


def mode_index_set(geometry: LinkGeometry) -> ModeIndexSet:
    """Mode numbers supported by the transmit array size."""
    return ModeIndexSet.for_element_count(geometry.n_tx)


def element_positions(geometry: LinkGeometry) -> tuple[np.ndarray, np.ndarray]:
    """3-D coordinates of all array elements.

    Returns ``(tx, rx)`` arrays of shape (n_tx, 3) and (n_rx, 3); row i holds
    element i+1.  Transmit elements sit on the z=0 circle; receive elements
    sit in the plane z = plane_separation, displaced opposite the bearing
    direction (the sign convention every distance formula below relies on).
    """
    g = geometry
    phi_n = TWO_PI * np.arange(g.n_tx) / g.n_tx + g.offset_alpha_tx
    tx = np.stack(
        [g.radius_tx * np.cos(phi_n), g.radius_tx * np.sin(phi_n), np.zeros(g.n_tx)],
        axis=1,
    )
    psi_m = TWO_PI * np.arange(g.n_rx) / g.n_rx + g.offset_alpha_rx
    off = g.center_distance * math.sin(g.tilt_phi)
    rx = np.stack(
        [
            g.radius_rx * np.cos(psi_m) - off * math.cos(g.bearing_theta),
            g.radius_rx * np.sin(psi_m) - off * math.sin(g.bearing_theta),
            np.full(g.n_rx, g.plane_separation),
        ],
        axis=1,
    )
    return tx, rx


def _cross_terms(m: int, n: int, g: LinkGeometry) -> tuple[float, float, float]:
    """The three cosine cross-terms shared by all distance formulas.

    Returns (rR*cos(gap), Rd*sin(tilt)*cos(rx bearing gap),
    rd*sin(tilt)*cos(tx bearing gap)) for the element pair (m, n).
    """
    psi = g.rx_base_angle(m) + g.offset_alpha_rx
    phi = g.tx_base_angle(n) + g.offset_alpha_tx
    sin_tilt = math.sin(g.tilt_phi)
    term_rr = g.radius_tx * g.radius_rx * math.cos(psi - phi)
    term_rx = g.radius_rx * g.center_distance * sin_tilt * math.cos(psi - g.bearing_theta)
    term_tx = g.radius_tx * g.center_distance * sin_tilt * math.cos(phi - g.bearing_theta)
    return term_rr, term_rx, term_tx


def projected_distance(m: int, n: int, geometry: LinkGeometry) -> float:
    """In-plane distance between rx element m and the projection of tx element n."""
    g = geometry
    term_rr, term_rx, term_tx = _cross_terms(m, n, g)
    inplane = g.center_distance * math.sin(g.tilt_phi)
    sq = (
        g.radius_rx**2
        + g.radius_tx**2
        + inplane**2
        - 2.0 * term_rr
        - 2.0 * term_rx
        + 2.0 * term_tx
    )
    return math.sqrt(max(sq, 0.0))


def exact_distance(m: int, n: int, geometry: LinkGeometry) -> float:
    """Euclidean distance between tx element n and rx element m."""
    g = geometry
    term_rr, term_rx, term_tx = _cross_terms(m, n, g)
    sq = (
        g.radius_rx**2
        + g.radius_tx**2
        + g.center_distance**2
        - 2.0 * term_rr
        - 2.0 * term_rx
        + 2.0 * term_tx
    )
    return math.sqrt(max(sq, 0.0))


def approx_distance(m: int, n: int, geometry: LinkGeometry) -> float:
    """First-order far-field expansion of :func:`exact_distance`.

    Expands sqrt(1 - 2x) ~ 1 - x around the effective range; accurate when
    the cross-terms are small against d^2 + r^2 + R^2.
    """
    g = geometry
    term_rr, term_rx, term_tx = _cross_terms(m, n, g)
    srange = g.farfield_range
    return srange - (term_rr + term_rx - term_tx) / srange


def zeta(m: int, geometry: LinkGeometry) -> float:
    """Offset angle of rx element m relative to the projected tx center.

    Resolved with the two-argument arctangent into (-pi, pi], so the sine
    and cosine of the returned angle reproduce both defining ratios.
    Raises :class:`DegenerateGeometry` when the defining triangle collapses
    (rx element radius and in-plane offset cancel simultaneously).
    """
    g = geometry
    bearing_gap = g.rx_base_angle(m) + g.offset_alpha_rx - g.bearing_theta
    inplane = g.center_distance * math.sin(g.tilt_phi)
    sin_num = g.radius_rx - inplane * math.cos(bearing_gap)
    cos_num = inplane * math.sin(bearing_gap)
    denom = math.sqrt(sin_num**2 + cos_num**2)
    if denom <= DEGENERACY_TOL:
        raise DegenerateGeometry(
            f"offset angle undefined at rx element {m}: denominator {denom:.3e}"
        )
    return math.atan2(sin_num, cos_num)
