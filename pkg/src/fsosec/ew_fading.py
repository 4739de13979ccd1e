"""Exponentiated-Weibull irradiance and SNR statistics.

The received irradiance I of an aperture-averaged optical link is modelled
as exponentiated Weibull with shape parameters alpha, beta and scale eta:

    F_I(I) = [1 - exp(-(I/eta)^beta)]^alpha

Intensity detection maps irradiance to instantaneous SNR via
gamma = gbar * I^2 with E[I^2] = 1, so the SNR-domain CDF is

    F_gamma(g) = [1 - exp(-(g / (eta^2 gbar))^(beta/2))]^alpha

The exact power forms above are used everywhere in this module; their
infinite-series expansions exist only as independent oracles in the test
suite.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SeriesConvergenceError
from .numerics import SeriesControl, gen_binomial_row, log_gamma, sum_alternating

__all__ = [
    "EWParams",
    "FitRangeWarning",
    "FIT_VALID_RANGE",
    "fit_from_scint",
    "normalize_eta",
    "ew_cdf_irradiance",
    "ew_cdf_snr",
    "ew_pdf_snr",
    "ew_quantile",
    "ew_moment",
]

# Moment series terms decay only polynomially (~ j^-(alpha + 1 + n/beta)),
# so the tail rule can need tens of thousands of terms for small alpha.
_MOMENT_SERIES = SeriesControl(max_terms=200_000, tail_tol=1e-13,
                               consecutive_small=3)

#: Scintillation-index range over which the moment-matching fit below is
#: treated as interpolation rather than extrapolation.
FIT_VALID_RANGE = (5e-3, 10.0)


class FitRangeWarning(UserWarning):
    """Scintillation index outside the fitted range of the (alpha, beta) map."""


@dataclass(frozen=True)
class EWParams:
    """Exponentiated-Weibull parameter triple (alpha, beta, eta)."""

    alpha: float
    beta: float
    eta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "eta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def from_shape(cls, alpha: float, beta: float) -> "EWParams":
        """Build parameters with eta chosen so that E[I^2] = 1."""
        return cls(alpha, beta, normalize_eta(alpha, beta))


def _moment_series_sum(alpha: float, exponent: float,
                       ctl: SeriesControl) -> float:
    """sum_{j>=0} (-1)^j C(alpha-1, j) / (1+j)^exponent."""

    def terms():
        c = 1.0  # (-1)^j C(alpha-1, j)
        j = 0
        while True:
            yield c / (1.0 + j) ** exponent
            c *= -(alpha - 1.0 - j) / (j + 1.0)
            j += 1

    value, used, converged = sum_alternating(terms(), ctl)
    if not converged:
        raise SeriesConvergenceError(
            f"moment series for alpha={alpha}, exponent={exponent} did not "
            f"converge within {ctl.max_terms} terms",
            best_estimate=value, terms_used=used,
        )
    return value


def normalize_eta(alpha: float, beta: float,
                  ctl: SeriesControl | None = None) -> float:
    """Scale parameter enforcing the unit-second-moment convention.

    eta = [alpha * Gamma(1 + 2/beta) * S]^(-1/2) with
    S = sum_j (-1)^j C(alpha-1, j) / (1+j)^(1 + 2/beta),
    which makes E[I^2] = 1 exactly.
    """
    if not alpha > 0 or not beta > 0:
        raise ValueError("alpha and beta must be > 0")
    s = _moment_series_sum(alpha, 1.0 + 2.0 / beta, ctl or _MOMENT_SERIES)
    return (alpha * math.exp(log_gamma(1.0 + 2.0 / beta)) * s) ** -0.5


def fit_from_scint(scint_index: float) -> EWParams:
    """Shape parameters from the scintillation index, scale normalized.

    Uses the moment-matching approximation of Barrios & Dios for
    aperture-averaged irradiance (Opt. Express 20(12), 2012):

        alpha = 7.220 sigma_I^(2/3) / Gamma(2.487 sigma_I^(2/6) - 0.104)
        beta  = 1.012 (alpha sigma_I^2)^(-13/25) + 0.142

    (powers written on sigma_I, the square root of the scintillation
    index).  The reference normalizes eta through the first moment; here
    eta is always recomputed through :func:`normalize_eta` so that
    E[I^2] = 1 holds exactly.

    A scintillation index outside FIT_VALID_RANGE still produces
    parameters but emits FitRangeWarning.
    """
    s2 = float(scint_index)
    if not (math.isfinite(s2) and s2 > 0.0):
        raise ValueError(f"scint_index must be finite and > 0, got {scint_index!r}")
    if not FIT_VALID_RANGE[0] <= s2 <= FIT_VALID_RANGE[1]:
        warnings.warn(
            f"scintillation index {s2:g} outside fitted range "
            f"[{FIT_VALID_RANGE[0]:g}, {FIT_VALID_RANGE[1]:g}]; "
            "parameters are extrapolated",
            FitRangeWarning, stacklevel=2,
        )
    alpha = 7.220 * s2 ** (1.0 / 3.0) / math.exp(
        log_gamma(2.487 * s2 ** (1.0 / 6.0) - 0.104)
    )
    beta = 1.012 * (alpha * s2) ** (-13.0 / 25.0) + 0.142
    return EWParams.from_shape(alpha, beta)


def ew_cdf_irradiance(irradiance, p: EWParams):
    """CDF of the irradiance, [1 - exp(-(I/eta)^beta)]^alpha."""
    i = np.asarray(irradiance, dtype=float)
    if np.any(i < 0.0):
        raise ValueError("irradiance must be >= 0")
    with np.errstate(divide="ignore"):
        x = (i / p.eta) ** p.beta
    out = (-np.expm1(-x)) ** p.alpha
    return float(out) if np.isscalar(irradiance) else out


def ew_cdf_snr(gamma, gbar: float, p: EWParams):
    """SNR-domain CDF, [1 - exp(-(g/(eta^2 gbar))^(beta/2))]^alpha."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("gamma must be >= 0")
    if not gbar > 0.0:
        raise ValueError(f"gbar must be > 0, got {gbar!r}")
    x = (g / (p.eta**2 * gbar)) ** (p.beta / 2.0)
    out = (-np.expm1(-x)) ** p.alpha
    return float(out) if np.isscalar(gamma) else out


def _pdf_at_zero(gbar: float, p: EWParams) -> float:
    # gamma -> 0 limit of the density: x^(alpha-1) prefactor decides.
    if p.beta < 2.0:
        return math.inf
    if p.beta == 2.0:
        if p.alpha < 1.0:
            return math.inf
        if p.alpha == 1.0:
            return 1.0 / (p.eta**2 * gbar)
        return 0.0
    return 0.0


def ew_pdf_snr(gamma, gbar: float, p: EWParams):
    """SNR-domain density.

    f(g) = alpha beta g^(beta/2 - 1) / (2 (eta^2 gbar)^(beta/2))
           * exp(-x) (1 - exp(-x))^(alpha - 1),
    x = (g / (eta^2 gbar))^(beta/2).

    At g = 0 the density diverges whenever beta < 2; the +inf sentinel is
    returned there instead of raising.
    """
    if not gbar > 0.0:
        raise ValueError(f"gbar must be > 0, got {gbar!r}")
    scalar = np.isscalar(gamma)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(g < 0.0):
        raise ValueError("gamma must be >= 0")
    scale = p.eta**2 * gbar
    out = np.empty_like(g)
    zero = g == 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gp = g[~zero]
        x = (gp / scale) ** (p.beta / 2.0)
        out[~zero] = (
            p.alpha * p.beta * gp ** (p.beta / 2.0 - 1.0)
            / (2.0 * scale ** (p.beta / 2.0))
            * np.exp(-x) * (-np.expm1(-x)) ** (p.alpha - 1.0)
        )
    out[zero] = _pdf_at_zero(gbar, p)
    return float(out[0]) if scalar else out


def ew_quantile(u, p: EWParams):
    """Inverse CDF of the irradiance.

    I(u) = eta * (-ln(1 - u^(1/alpha)))^(1/beta) for u in [0, 1).
    """
    scalar = np.isscalar(u)
    uu = np.asarray(u, dtype=float)
    if np.any((uu < 0.0) | (uu >= 1.0)):
        raise ValueError("u must lie in [0, 1)")
    with np.errstate(divide="ignore"):
        out = p.eta * (-np.log1p(-(uu ** (1.0 / p.alpha)))) ** (1.0 / p.beta)
    return float(out) if scalar else out


def ew_moment(n: int, p: EWParams, ctl: SeriesControl | None = None) -> float:
    """n-th moment of the irradiance.

    E[I^n] = alpha eta^n Gamma(1 + n/beta)
             * sum_j (-1)^j C(alpha-1, j) / (1+j)^(1 + n/beta)
    """
    if n < 1:
        raise ValueError(f"moment order must be >= 1, got {n}")
    s = _moment_series_sum(p.alpha, 1.0 + n / p.beta, ctl or _MOMENT_SERIES)
    return p.alpha * p.eta**n * math.exp(log_gamma(1.0 + n / p.beta)) * s
