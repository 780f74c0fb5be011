"""Horizon-hugging wave packet, plane-wave mode data, and the eikonal.

The test packet is

    C0(x0, rho) = rho^(-1/2) * P(sigma(rho, x0)),
    P(sigma)    = (sigma - sigma*)^(eps + i*alpha) e^{-a (sigma - sigma*)}
                  for sigma > sigma*, else 0,

so its support lies strictly outside the horizon and collapses onto the
horizon curve as the localisation rate a grows.  Its Klein-Gordon norm at
x0 = 0 has the closed value 4 pi alpha Gamma(2 eps) / (2a)^(2 eps); the
radial-drift terms cancel identically in the norm bracket, so the closed
form is exact at every a, not merely asymptotically.

Radial modes carry wavenumber eta and frequency factor
gamma = (2 rho)^(-1/2) (eta^2+1)^(-1/4); the two frequency branches at
x0 = 0 have time derivatives i*lambda_-(eta) and i*lambda_+(eta) with
lambda_pm = -A(0) eta / rho +- sqrt(eta^2 + 1).  The eikonal
E = gamma e^{-i eta sigma(rho, x0)} (eta < 0) transports the same data
along rays, with |eta| standing in for sqrt(eta^2+1) in the frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import GridMismatchError
from .flow import FlowMap
from .gammatools import GammaParams

__all__ = [
    "PacketParams",
    "ModeSpec",
    "FieldOnGrid",
    "eval_packet_profile",
    "packet_profile_derivative",
    "eval_packet",
    "packet_fields",
    "mode_initial_data",
    "eval_eikonal",
    "eikonal_fields",
    "gamma_tilde",
    "packet_norm",
]


@dataclass(frozen=True)
class PacketParams:
    """Packet shape (alpha, a, eps) anchored at the separatrix value sigma_star."""

    alpha: float
    a: float
    eps: float
    sigma_star: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.a > 0 and self.sigma_star > 0):
            raise ValueError("alpha, a and sigma_star must be positive")
        if not 0.0 < self.eps <= 0.5:
            raise ValueError("eps must lie in (0, 1/2]")

    @property
    def gamma_params(self) -> GammaParams:
        return GammaParams(alpha=self.alpha, eps=self.eps)

    def with_a(self, a: float) -> "PacketParams":
        return PacketParams(alpha=self.alpha, a=a, eps=self.eps,
                            sigma_star=self.sigma_star)


@dataclass(frozen=True)
class ModeSpec:
    """Radial wavenumber of an azimuthally symmetric mode (m = 0)."""

    eta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")


@dataclass(frozen=True)
class FieldOnGrid:
    """A complex field sampled on a radial grid with both first derivatives."""

    rho: np.ndarray
    value: np.ndarray
    d_dx0: np.ndarray
    d_drho: np.ndarray

    def __post_init__(self) -> None:
        n = self.rho.shape
        for arr in (self.value, self.d_dx0, self.d_drho):
            if arr.shape != n:
                raise GridMismatchError("field components disagree in shape")

    def scaled(self, c: complex) -> "FieldOnGrid":
        return FieldOnGrid(self.rho, c * self.value, c * self.d_dx0,
                           c * self.d_drho)


def eval_packet_profile(sigma, p: PacketParams):
    """Profile P(sigma): zero at and below sigma_star, continuous there (eps > 0)."""
    sigma = np.asarray(sigma, dtype=float)
    s = sigma - p.sigma_star
    out = np.zeros(s.shape, dtype=complex)
    pos = s > 0.0
    sp = s[pos]
    out[pos] = np.exp((p.eps + 1j * p.alpha) * np.log(sp) - p.a * sp)
    return out if out.ndim else complex(out)


def packet_profile_derivative(sigma, p: PacketParams):
    """dP/dsigma on the support; integrably singular at sigma_star for eps < 1."""
    sigma = np.asarray(sigma, dtype=float)
    s = sigma - p.sigma_star
    out = np.zeros(s.shape, dtype=complex)
    pos = s > 0.0
    sp = s[pos]
    out[pos] = (np.exp((p.eps + 1j * p.alpha) * np.log(sp) - p.a * sp)
                * ((p.eps + 1j * p.alpha) / sp - p.a))
    return out if out.ndim else complex(out)


def eval_packet(rho: float, x0: float, p: PacketParams, flow: FlowMap) -> complex:
    """C0(x0, rho); zero whenever the ray label sigma(rho, x0) <= sigma_star."""
    sigma, _ = flow.sigma_of(rho, x0)
    return complex(eval_packet_profile(sigma, p) / math.sqrt(rho))


def packet_fields(rho, x0: float, p: PacketParams, flow: FlowMap) -> FieldOnGrid:
    """Packet value and derivatives on a grid, via the ray label and its tangent.

    d/dx0 follows from the transport of sigma:
    dC0/dx0 = rho^(-1/2) P'(sigma) * (-(A/rho + 1) dsigma/drho).
    """
    rho = np.asarray(rho, dtype=float)
    sigma, dsig = flow.sigma_map(rho, x0)
    a0 = flow.profile.eval(x0)
    inv_sqrt = rho ** -0.5
    prof = eval_packet_profile(sigma, p)
    dprof = packet_profile_derivative(sigma, p)
    value = inv_sqrt * prof
    d_dx0 = inv_sqrt * dprof * (-(a0 / rho + 1.0) * dsig)
    d_drho = -0.5 * rho ** -1.5 * prof + inv_sqrt * dprof * dsig
    return FieldOnGrid(rho=rho, value=value, d_dx0=d_dx0, d_drho=d_drho)


def gamma_tilde(eta: float) -> float:
    """Frequency normalisation 2^(-1/2) (eta^2 + 1)^(-1/4) (the 1/sqrt(rho) split off)."""
    return 2.0 ** -0.5 * (eta * eta + 1.0) ** -0.25


def mode_initial_data(mode: ModeSpec, rho, a0_over_rho, family: str = "+"):
    """Plane-wave mode data at x0 = 0 for the +/- frequency branch.

    value = gamma e^{i rho eta};  d/dx0 = i lambda_mp(eta) * value, where the
    "+" branch pairs with lambda_- and the "-" branch with lambda_+.  The
    data satisfy conj(data(+, eta)) = data(-, -eta).
    """
    if family not in ("+", "-"):
        raise ValueError("family must be '+' or '-'")
    eta = mode.eta
    rho = np.asarray(rho, dtype=float)
    a0_over_rho = np.asarray(a0_over_rho, dtype=float)
    gam = gamma_tilde(eta) * rho ** -0.5
    value = gam * np.exp(1j * eta * rho)
    root = math.sqrt(eta * eta + 1.0)
    lam = -a0_over_rho * eta + (-root if family == "+" else root)
    d_dx0 = 1j * lam * value
    if value.ndim == 0:
        return complex(value), complex(d_dx0)
    return value, d_dx0


def eval_eikonal(rho: float, x0: float, eta: float, flow: FlowMap) -> complex:
    """E = gamma(rho, eta) e^{-i eta sigma(rho, x0)} for eta < 0."""
    if eta >= 0.0:
        raise ValueError("the eikonal uses the eta < 0 branch")
    sigma, _ = flow.sigma_of(rho, x0)
    return complex(gamma_tilde(eta) * rho ** -0.5 * np.exp(-1j * eta * sigma))


def eikonal_fields(rho, x0: float, eta: float, flow: FlowMap) -> FieldOnGrid:
    """Eikonal value and derivatives on a grid (eta < 0).

    dE/dx0 = E * i eta (A/rho + 1) dsigma/drho, which at x0 = 0 carries
    |eta| where the exact mode carries sqrt(eta^2 + 1).
    """
    if eta >= 0.0:
        raise ValueError("the eikonal uses the eta < 0 branch")
    rho = np.asarray(rho, dtype=float)
    sigma, dsig = flow.sigma_map(rho, x0)
    a0 = flow.profile.eval(x0)
    value = gamma_tilde(eta) * rho ** -0.5 * np.exp(-1j * eta * sigma)
    d_dx0 = value * (1j * eta * (a0 / rho + 1.0) * dsig)
    d_drho = value * (-0.5 / rho - 1j * eta * dsig)
    return FieldOnGrid(rho=rho, value=value, d_dx0=d_dx0, d_drho=d_drho)


def packet_norm(p: PacketParams, flow: FlowMap | None = None,
                numeric: bool = False, *, epsrel: float = 1e-11) -> float:
    """Klein-Gordon norm of the packet at x0 = 0.

    Closed form 4 pi alpha Gamma(2 eps) / (2a)^(2 eps).  With numeric=True
    the full norm bracket (time and drift terms) is integrated adaptively;
    the substitution u = s^(2 eps) absorbs the s^(2 eps - 1) endpoint of
    the integrand, s = sigma - sigma_star.
    """
    closed = 4.0 * math.pi * p.alpha * special.gamma(2.0 * p.eps) \
        / (2.0 * p.a) ** (2.0 * p.eps)
    if not numeric:
        return closed
    if flow is None:
        raise ValueError("numeric norm needs the flow (for A(0))")

    a0 = float(flow.profile.eval(0.0))
    star = p.sigma_star
    two_eps = 2.0 * p.eps

    def bracket(s):
        # full x0 = 0 integrand of the KG norm, written in s = rho - sigma_star
        rho = star + s
        prof = np.exp((p.eps + 1j * p.alpha) * np.log(s) - p.a * s)
        dprof = prof * ((p.eps + 1j * p.alpha) / s - p.a)
        c = rho ** -0.5 * prof
        c_t = -rho ** -0.5 * (a0 / rho + 1.0) * dprof
        c_r = -0.5 * rho ** -1.5 * prof + rho ** -0.5 * dprof
        term = (np.conj(c) * c_t).imag + (a0 / rho) * (np.conj(c) * c_r).imag
        return -4.0 * math.pi * term * rho

    s_max = 45.0 / p.a
    u_max = s_max ** two_eps

    def integrand(u):
        s = u ** (1.0 / two_eps)
        return bracket(s) * s / (two_eps * u)

    val, _ = integrate.quad(integrand, 0.0, u_max, epsabs=1e-13,
                            epsrel=epsrel, limit=400)
    return float(val)
