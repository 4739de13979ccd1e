"""Atmospheric turbulence statistics along a slant path.

Covers the refractive-index structure profile, path-weighted Rytov
variances for downlink and uplink propagation, the Fried coherence
diameter, Gaussian-beam geometry at the receiver, beam-wander pointing
jitter, and the resulting scintillation indices.

Conventions
-----------
* Altitudes and lengths in metres, angles in radians, Cn^2 in m^(-2/3).
* "Downlink" means space-to-platform (receiver at the bottom of the
  turbulent slab); "uplink" means platform-to-space.
* Every derived statistic accepts an injected override through
  :func:`link_scintillation`, so the fading and secrecy layers can be
  driven with externally supplied turbulence numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigurationError
from .numerics import QuadratureControl, integrate_interval

__all__ = [
    "LinkGeometry",
    "BeamGeometry",
    "TurbulenceStats",
    "MAX_ZENITH_RAD",
    "cn2_hufnagel_valley",
    "hv_profile",
    "rytov_variance_downlink",
    "rytov_variance_uplink",
    "fried_parameter",
    "beam_at_receiver",
    "pointing_variance",
    "scint_index_downlink",
    "scint_index_uplink",
    "link_scintillation",
]

# sec(zenith) diverges toward 90 deg; slant-path scaling laws stop being
# meaningful well before that, so reject steeper geometries outright.
MAX_ZENITH_RAD = math.radians(85.0)

DEFAULT_GROUND_CN2 = 1.7e-14

_PATH_QUAD = QuadratureControl(rel_tol=1e-9, abs_tol=1e-30, max_subdivisions=300)


@dataclass(frozen=True)
class LinkGeometry:
    """Slant-path geometry and environment of one optical link.

    Parameters
    ----------
    sat_altitude_m : float
        Altitude of the space node (top of the path).
    platform_altitude_m : float
        Altitude of the aerial platform (bottom of the path).
    zenith_angle_rad : float
        Zenith angle of the path, < 85 deg.
    wavelength_m : float
        Optical carrier wavelength.
    wind_speed_mps : float
        RMS pseudo-wind speed feeding the Cn^2 profile.
    """

    sat_altitude_m: float
    platform_altitude_m: float
    zenith_angle_rad: float
    wavelength_m: float
    wind_speed_mps: float

    def __post_init__(self):
        if not self.sat_altitude_m > self.platform_altitude_m >= 0.0:
            raise ValueError(
                "require sat_altitude_m > platform_altitude_m >= 0, got "
                f"{self.sat_altitude_m!r} and {self.platform_altitude_m!r}"
            )
        if not 0.0 <= self.zenith_angle_rad < MAX_ZENITH_RAD:
            raise ValueError(
                "zenith_angle_rad must lie in [0, 85 deg); got "
                f"{self.zenith_angle_rad!r} rad"
            )
        if not self.wavelength_m > 0.0:
            raise ValueError(f"wavelength_m must be > 0, got {self.wavelength_m!r}")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength_m

    @property
    def sec_zenith(self) -> float:
        return 1.0 / math.cos(self.zenith_angle_rad)

    @property
    def path_length_m(self) -> float:
        """Slant distance between the two nodes."""
        return (self.sat_altitude_m - self.platform_altitude_m) * self.sec_zenith


@dataclass(frozen=True)
class BeamGeometry:
    """Gaussian beam description for uplink transmission.

    `receiver_beam_radius_m` and `theta_recv` are the beam radius and
    refraction parameter at the far end of the path; both start unset and
    are filled by :func:`beam_at_receiver`.
    """

    w0_m: float
    curvature_theta0: float = 1.0
    receiver_beam_radius_m: float | None = None
    theta_recv: float | None = None

    def __post_init__(self):
        if not self.w0_m > 0.0:
            raise ValueError(f"w0_m must be > 0, got {self.w0_m!r}")
        if self.receiver_beam_radius_m is not None and not (
            self.receiver_beam_radius_m > 0.0
        ):
            raise ValueError("receiver_beam_radius_m must be > 0 when set")


@dataclass(frozen=True)
class TurbulenceStats:
    """Bundle of slant-path turbulence statistics.

    Any field may be None while the bundle is being assembled; consumers
    that need a specific ingredient raise ConfigurationError naming it.
    """

    rytov_var: float | None = None
    fried_r0_m: float | None = None
    pointing_var: float | None = None
    scint_index: float | None = None

    def __post_init__(self):
        for name in ("rytov_var", "pointing_var", "scint_index"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if self.fried_r0_m is not None and not self.fried_r0_m > 0.0:
            raise ValueError(f"fried_r0_m must be > 0, got {self.fried_r0_m!r}")


def cn2_hufnagel_valley(h_m, wind_mps: float, ground_cn2: float = DEFAULT_GROUND_CN2):
    """Hufnagel-Valley refractive-index structure parameter Cn^2(h).

    Parameters
    ----------
    h_m : float or array_like
        Altitude above ground in metres.
    wind_mps : float
        RMS pseudo-wind speed in m/s (21 m/s reproduces the classic HV-5/7
        profile together with ground_cn2 = 1.7e-14).
    ground_cn2 : float
        Ground-level structure constant A0 in m^(-2/3).

    Returns
    -------
    float or ndarray
        Cn^2(h) in m^(-2/3):

        0.00594 (w/27)^2 (1e-5 h)^10 exp(-h/1000)
        + 2.7e-16 exp(-h/1500) + A0 exp(-h/100)
    """
    h = np.asarray(h_m, dtype=float)
    if np.any(h < 0.0):
        raise ValueError("altitude must be >= 0")
    out = (
        0.00594 * (wind_mps / 27.0) ** 2 * (1e-5 * h) ** 10 * np.exp(-h / 1000.0)
        + 2.7e-16 * np.exp(-h / 1500.0)
        + ground_cn2 * np.exp(-h / 100.0)
    )
    if np.isscalar(h_m):
        return float(out)
    return out


def hv_profile(wind_mps: float, ground_cn2: float = DEFAULT_GROUND_CN2
               ) -> Callable[[float], float]:
    """Return Cn^2(h) as a single-argument callable."""

    def profile(h_m):
        return cn2_hufnagel_valley(h_m, wind_mps, ground_cn2)

    return profile


def rytov_variance_downlink(
    geom: LinkGeometry,
    profile: Callable[[float], float],
    ctl: QuadratureControl | None = None,
) -> float:
    """Plane-wave Rytov variance for space-to-platform propagation.

    sigma_R^2 = 2.25 k^(7/6) sec^(11/6)(zenith)
                * int_{h0}^{H} Cn^2(h) (h - h0)^(5/6) dh
    """
    h0 = geom.platform_altitude_m
    H = geom.sat_altitude_m

    def f(h):
        return profile(h) * (h - h0) ** (5.0 / 6.0)

    integral = integrate_interval(f, h0, H, ctl or _PATH_QUAD).value
    return (
        2.25 * geom.wavenumber ** (7.0 / 6.0)
        * geom.sec_zenith ** (11.0 / 6.0) * integral
    )


def rytov_variance_uplink(
    geom: LinkGeometry,
    profile: Callable[[float], float],
    ctl: QuadratureControl | None = None,
) -> float:
    """Spherical-wave Rytov variance for platform-to-space propagation.

    With xi = (h - h0)/(H - h0) the normalized distance from the
    transmitter,

    sigma_Bu^2 = 2.25 k^(7/6) (H - h0)^(5/6) sec^(11/6)(zenith)
                 * int_{h0}^{H} Cn^2(h) [xi (1 - xi)]^(5/6) dh / (H - h0)

    which reduces to the downlink weighting when the turbulence sits near
    the bottom of the slab.
    """
    h0 = geom.platform_altitude_m
    H = geom.sat_altitude_m
    span = H - h0

    def f(h):
        xi = (h - h0) / span
        return profile(h) * (xi * (1.0 - xi)) ** (5.0 / 6.0)

    integral = integrate_interval(f, h0, H, ctl or _PATH_QUAD).value
    return (
        2.25 * geom.wavenumber ** (7.0 / 6.0) * span ** (5.0 / 6.0)
        * geom.sec_zenith ** (11.0 / 6.0) * integral / span
    )


def fried_parameter(
    geom: LinkGeometry,
    profile: Callable[[float], float],
    ctl: QuadratureControl | None = None,
) -> float:
    """Atmospheric coherence diameter r0 over the slant path.

    r0 = [0.423 k^2 sec(zenith) int Cn^2(h) dh]^(-3/5).
    A turbulence-free profile yields +inf, which callers treat as the
    no-turbulence short circuit.
    """
    integral = integrate_interval(
        profile, geom.platform_altitude_m, geom.sat_altitude_m, ctl or _PATH_QUAD
    ).value
    if integral <= 0.0:
        return math.inf
    return (0.423 * geom.wavenumber**2 * geom.sec_zenith * integral) ** (-3.0 / 5.0)


def beam_at_receiver(geom: LinkGeometry, beam: BeamGeometry) -> BeamGeometry:
    """Propagate a Gaussian beam over the slant path.

    Fills the receiver-plane beam radius and refraction parameter using
    Lambda0 = 2 L / (k W0^2), W = W0 sqrt(Theta0^2 + Lambda0^2),
    Theta = Theta0 / (Theta0^2 + Lambda0^2).
    """
    L = geom.path_length_m
    lam0 = 2.0 * L / (geom.wavenumber * beam.w0_m**2)
    denom = beam.curvature_theta0**2 + lam0**2
    wp = beam.w0_m * math.sqrt(denom)
    theta = beam.curvature_theta0 / denom
    return replace(beam, receiver_beam_radius_m=wp, theta_recv=theta)


def pointing_variance(
    geom: LinkGeometry,
    beam: BeamGeometry,
    profile: Callable[[float], float],
    ctl: QuadratureControl | None = None,
) -> float:
    """RMS angular pointing error alpha_pe induced by beam wander.

    The beam-wander displacement variance at the receiver plane is

    sigma_pe^2 = 0.54 L^2 (lambda / 2 W0)^2 (2 W0 / r0)^(5/3)
                 * [1 - (u / (1 + u))^(1/6)],   u = Cr^2 W0^2 / r0^2

    with the wander cut-off constant Cr = 2 pi, and alpha_pe =
    sigma_pe / L in radians.  Returns 0 for a turbulence-free profile.
    """
    r0 = fried_parameter(geom, profile, ctl)
    if math.isinf(r0):
        return 0.0
    L = geom.path_length_m
    w0 = beam.w0_m
    cr2 = (2.0 * math.pi) ** 2
    u = cr2 * w0**2 / r0**2
    sig_pe2 = (
        0.54 * L**2 * (geom.wavelength_m / (2.0 * w0)) ** 2
        * (2.0 * w0 / r0) ** (5.0 / 3.0)
        * (1.0 - (u / (1.0 + u)) ** (1.0 / 6.0))
    )
    return math.sqrt(sig_pe2) / L


def scint_index_downlink(rytov_var: float) -> float:
    """Scintillation index of the downlink received irradiance.

    sigma_I^2 = exp[ 0.49 s / (1 + 1.11 s^(6/5))^(7/6)
                   + 0.51 s / (1 + 0.69 s^(6/5))^(5/6) ] - 1

    with s the downlink Rytov variance.  Tends to s itself for weak
    turbulence and saturates for strong fluctuations.
    """
    s = rytov_var
    if not math.isfinite(s) or s < 0.0:
        raise ValueError(f"rytov_var must be finite and >= 0, got {s!r}")
    if s == 0.0:
        return 0.0
    return math.expm1(
        0.49 * s / (1.0 + 1.11 * s ** 1.2) ** (7.0 / 6.0)
        + 0.51 * s / (1.0 + 0.69 * s ** 1.2) ** (5.0 / 6.0)
    )


def scint_index_uplink(
    geom: LinkGeometry, beam: BeamGeometry, stats: TurbulenceStats
) -> float:
    """Scintillation index of the uplink received irradiance.

    Beam-wander pointing jitter adds an untracked-beam term on top of the
    longitudinal scintillation:

    sigma_I^2 = 5.95 (H - h0)^2 sec^2(zenith) (2 W0 / r0)^(5/3)
                (alpha_pe / W)^2
              + exp[ 0.49 s / (1 + (1.11 + Theta) s^(6/5))^(7/6)
                   + 0.51 s / (1 + 0.69 s^(6/5))^(5/6) ] - 1

    with s the uplink Rytov variance, W and Theta the receiver-plane beam
    parameters, r0 the Fried diameter and alpha_pe the angular wander.

    The required ingredients must all be present; a missing one raises
    ConfigurationError naming the absent field.
    """
    for obj, field in ((stats, "rytov_var"), (stats, "fried_r0_m"),
                       (stats, "pointing_var"),
                       (beam, "receiver_beam_radius_m"), (beam, "theta_recv")):
        if getattr(obj, field) is None:
            raise ConfigurationError(
                f"scint_index_uplink needs '{field}'; it is unset"
            )
    s = stats.rytov_var
    if s == 0.0 and stats.pointing_var == 0.0:
        return 0.0
    span = geom.sat_altitude_m - geom.platform_altitude_m
    if math.isinf(stats.fried_r0_m):
        wander = 0.0
    else:
        wander = (
            5.95 * span**2 * geom.sec_zenith**2
            * (2.0 * beam.w0_m / stats.fried_r0_m) ** (5.0 / 3.0)
            * (stats.pointing_var / beam.receiver_beam_radius_m) ** 2
        )
    if s == 0.0:
        longitudinal = 0.0
    else:
        longitudinal = math.expm1(
            0.49 * s / (1.0 + (1.11 + beam.theta_recv) * s ** 1.2) ** (7.0 / 6.0)
            + 0.51 * s / (1.0 + 0.69 * s ** 1.2) ** (5.0 / 6.0)
        )
    return wander + longitudinal


def link_scintillation(
    geom: LinkGeometry,
    direction: str,
    beam: BeamGeometry | None = None,
    profile: Callable[[float], float] | None = None,
    overrides: Mapping[str, float] | None = None,
) -> TurbulenceStats:
    """Assemble the turbulence statistics for one link end to end.

    direction is "downlink" or "uplink".  `overrides` may pin any of
    rytov_var, fried_r0, pointing_var, scint_index; the override path is
    authoritative and skips the corresponding computation.  Without an
    override, each quantity is computed from `profile` (required then);
    uplink additionally requires `beam`.
    """
    ov = dict(overrides or {})
    unknown = set(ov) - {"rytov_var", "fried_r0", "pointing_var", "scint_index"}
    if unknown:
        raise ConfigurationError(f"unknown turbulence overrides: {sorted(unknown)}")

    def need_profile(what):
        if profile is None:
            raise ConfigurationError(
                f"no Cn^2 profile supplied and no override for {what}"
            )

    if "scint_index" in ov:
        si = float(ov["scint_index"])
        return TurbulenceStats(
            rytov_var=ov.get("rytov_var"),
            fried_r0_m=ov.get("fried_r0"),
            pointing_var=ov.get("pointing_var"),
            scint_index=si,
        )

    if direction == "downlink":
        if "rytov_var" in ov:
            rv = float(ov["rytov_var"])
        else:
            need_profile("rytov_var")
            rv = rytov_variance_downlink(geom, profile)
        return TurbulenceStats(rytov_var=rv, scint_index=scint_index_downlink(rv))

    if direction != "uplink":
        raise ConfigurationError(f"direction must be downlink or uplink, got {direction!r}")

    if beam is None:
        raise ConfigurationError("uplink scintillation needs a BeamGeometry")
    if beam.receiver_beam_radius_m is None or beam.theta_recv is None:
        beam = beam_at_receiver(geom, beam)

    if "rytov_var" in ov:
        rv = float(ov["rytov_var"])
    else:
        need_profile("rytov_var")
        rv = rytov_variance_uplink(geom, profile)
    if "fried_r0" in ov:
        r0 = float(ov["fried_r0"])
    else:
        need_profile("fried_r0")
        r0 = fried_parameter(geom, profile)
    if "pointing_var" in ov:
        ape = float(ov["pointing_var"])
    else:
        need_profile("pointing_var")
        ape = pointing_variance(geom, beam, profile)
    stats = TurbulenceStats(rytov_var=rv, fried_r0_m=r0, pointing_var=ape)
    si = scint_index_uplink(geom, beam, stats)
    return replace(stats, scint_index=si)
