"""Background draining flow and its characteristic geometry.

A radial flow with strength A(x0) < 0 drags outgoing sound rays along the
characteristic ODE

    drho/dx0 = A(x0)/rho + 1 .

For constant A the fixed point rho = |A| separates rays that escape to
infinity from rays that are swallowed (rho -> 0 in finite time).  For a
time-dependent A the same separation is performed by a distinguished
solution rho*(x0), the separatrix; its value at x0 = 0 is written
sigma_star.  The region 0 < rho < rho*(x0) is the acoustic black hole.

The characteristic label sigma(rho, x0) is the x0=0 value of the ray
through (rho, x0).  It is constant along rays, equals rho at x0 = 0 and is
strictly increasing in rho; its radial derivative is obtained from the
tangent (variational) equation integrated alongside the ray, which stays
accurate even where neighbouring rays separate exponentially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BracketError, CaptureError, StepFailureError

__all__ = [
    "VelocityProfile",
    "HorizonCurve",
    "FlowMap",
    "CharacteristicPath",
    "characteristic_rhs",
    "integrate_characteristic",
    "find_separatrix",
    "sigma_of",
    "sigma_map",
]

# Forward classification runs to this many transition times; the separatrix
# repels nearby rays at unit-order rate, so 30*tau keeps the classification
# bias below ~exp(-30), which the horizon's forward instability can afford.
CLASSIFY_WINDOW_TAUS = 30.0

_ESCAPE_FACTOR = 2.0  # escaped once rho > 2*|A(+inf)|


@dataclass(frozen=True)
class VelocityProfile:
    """Flow strength A(x0): negative, smooth, with finite limits at +-infinity.

    form="smooth-step" uses A(x0) = (a_plus+a_minus)/2
    + (a_plus-a_minus)/2 * tanh(x0/tau); form="constant" holds a_minus.
    """

    a_minus: float
    a_plus: float
    tau: float = 1.0
    form: str = "smooth-step"

    def __post_init__(self) -> None:
        if self.form not in ("constant", "smooth-step"):
            raise ValueError(f"unknown profile form {self.form!r}")
        if not (self.a_minus < 0.0 and self.a_plus < 0.0):
            raise ValueError("flow strength must be negative at both ends")
        if not self.tau > 0.0:
            raise ValueError("tau must be positive")

    @classmethod
    def constant(cls, a: float) -> "VelocityProfile":
        return cls(a_minus=a, a_plus=a, form="constant")

    def eval(self, x0):
        """A(x0); accepts scalars or arrays."""
        if self.form == "constant":
            return self.a_minus * np.ones_like(np.asarray(x0, dtype=float))
        mid = 0.5 * (self.a_plus + self.a_minus)
        amp = 0.5 * (self.a_plus - self.a_minus)
        return mid + amp * np.tanh(np.asarray(x0, dtype=float) / self.tau)

    @property
    def a_inf_minus(self) -> float:
        return self.a_minus

    @property
    def a_inf_plus(self) -> float:
        return self.a_plus

    @property
    def a_max_abs(self) -> float:
        return max(abs(self.a_minus), abs(self.a_plus))


@dataclass(frozen=True)
class HorizonCurve:
    """Sampled separatrix rho*(x0) on a symmetric grid around x0 = 0."""

    x0: np.ndarray
    rho_star: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.x0, self.rho_star)


@dataclass(frozen=True)
class FlowMap:
    """A profile together with its separatrix data and integrator settings."""

    profile: VelocityProfile
    sigma_star: float
    horizon: HorizonCurve
    ode_tol: float = 1e-10
    rho_min: float = 1e-3

    def sigma_of(self, rho: float, x0: float) -> tuple[float, float]:
        return sigma_of(rho, x0, self)

    def sigma_map(self, rho, x0: float):
        return sigma_map(rho, x0, self)

    def integrate(self, sigma0: float, x0_from: float, x0_to: float,
                  t_eval=None) -> "CharacteristicPath":
        return integrate_characteristic(
            sigma0, x0_from, x0_to, self.profile,
            ode_tol=self.ode_tol, rho_min=self.rho_min, t_eval=t_eval)


@dataclass(frozen=True)
class CharacteristicPath:
    """One integrated ray: samples of rho(x0) plus a capture flag."""

    x0: np.ndarray
    rho: np.ndarray
    captured: bool


def characteristic_rhs(rho: float, x0: float, profile: VelocityProfile) -> float:
    """Right-hand side A(x0)/rho + 1 of the ray equation."""
    if np.any(np.asarray(rho) <= 0.0):
        raise ValueError("rho must be positive (ODE is singular at rho = 0)")
    return profile.eval(x0) / rho + 1.0


def _solve(profile: VelocityProfile, y0, span, *, ode_tol,
           events=None, t_eval=None, tangent=False):
    """solve_ivp wrapper for the ray equation, optionally with tangent J."""

    if tangent:
        def rhs(t, y):
            rho, jac = y
            a = profile.eval(t)
            return [a / rho + 1.0, (-a / rho ** 2) * jac]
    else:
        def rhs(t, y):
            return [profile.eval(t) / y[0] + 1.0]

    sol = solve_ivp(rhs, span, y0, method="DOP853", rtol=ode_tol,
                    atol=ode_tol * 1e-2, events=events, t_eval=t_eval,
                    dense_output=False)
    if not sol.success and sol.status != 1:  # status 1 = terminated by event
        raise StepFailureError(f"ray integration failed: {sol.message}")
    return sol


def _capture_event(rho_min: float):
    def hit(t, y):
        return y[0] - rho_min
    hit.terminal = True
    hit.direction = -1
    return hit


def integrate_characteristic(sigma0: float, x0_from: float, x0_to: float,
                             profile: VelocityProfile, *,
                             ode_tol: float = 1e-10, rho_min: float = 1e-3,
                             t_eval=None) -> CharacteristicPath:
    """Integrate one ray from rho(x0_from) = sigma0 to x0_to.

    Stops early with captured=True if the ray reaches rho_min.
    """
    if sigma0 <= rho_min:
        raise ValueError(f"sigma0 = {sigma0} must exceed rho_min = {rho_min}")
    sol = _solve(profile, [sigma0], (x0_from, x0_to), ode_tol=ode_tol,
                 events=[_capture_event(rho_min)], t_eval=t_eval)
    captured = bool(sol.t_events[0].size)
    return CharacteristicPath(x0=sol.t, rho=sol.y[0], captured=captured)


def _classifier(profile: VelocityProfile, *, ode_tol: float, rho_min: float):
    """Predicate: does the ray started at (0, sigma) escape to infinity?

    Escape is declared once rho exceeds 2*|A(+inf)| within the forward
    window; capture once rho falls to rho_min.  rho(window) is monotone in
    the start value, so the predicate is monotone and bisection is exact.
    """
    window = CLASSIFY_WINDOW_TAUS * profile.tau
    escape_level = _ESCAPE_FACTOR * abs(profile.a_inf_plus)

    def crossed(t, y):
        return y[0] - escape_level
    crossed.terminal = True
    crossed.direction = 1

    def escapes(sigma: float) -> bool:
        if sigma >= escape_level:
            return True
        sol = _solve(profile, [sigma], (0.0, window), ode_tol=ode_tol,
                     events=[_capture_event(rho_min), crossed])
        if sol.t_events[0].size:
            return False
        return bool(sol.t_events[1].size) or sol.y[0, -1] > escape_level

    return escapes


def find_separatrix(profile: VelocityProfile, bracket=None,
                    x0_horizon_max: float = 10.0, *,
                    ode_tol: float = 1e-10, rho_min: float = 1e-3,
                    tol: float = 1e-12, n_horizon: int = 401) -> FlowMap:
    """Locate sigma_star by bisection and sample the horizon curve.

    The bracket must straddle the separatrix: the lower endpoint captured,
    the upper escaping.  The horizon curve is integrated forward and
    backward from (0, sigma_star); forward integration amplifies the
    sigma_star uncertainty like exp(|A|/rho*^2 * x0), which the default
    tol = 1e-12 keeps below ~1e-7 at x0 = 10 for unit-order profiles.
    """
    if bracket is None:
        lo = max(4.0 * rho_min, 0.25 * min(abs(profile.a_minus), abs(profile.a_plus)))
        hi = 3.0 * profile.a_max_abs
    else:
        lo, hi = float(bracket[0]), float(bracket[1])

    escapes = _classifier(profile, ode_tol=ode_tol, rho_min=rho_min)
    if escapes(lo):
        raise BracketError(f"lower bracket endpoint {lo} already escapes")
    if not escapes(hi):
        raise BracketError(f"upper bracket endpoint {hi} does not escape")

    # coarse passes at relaxed tolerance, final passes at full tolerance
    coarse = _classifier(profile, ode_tol=max(ode_tol, 1e-8), rho_min=rho_min)
    while hi - lo > 1e4 * tol:
        mid = 0.5 * (lo + hi)
        if coarse(mid):
            hi = mid
        else:
            lo = mid
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if escapes(mid):
            hi = mid
        else:
            lo = mid
    sigma_star = 0.5 * (lo + hi)

    x_grid = np.linspace(0.0, float(x0_horizon_max), n_horizon)
    fwd = _solve(profile, [sigma_star], (0.0, x0_horizon_max),
                 ode_tol=min(ode_tol, 1e-12), t_eval=x_grid)
    bwd = _solve(profile, [sigma_star], (0.0, -x0_horizon_max),
                 ode_tol=min(ode_tol, 1e-12), t_eval=-x_grid)
    x0 = np.concatenate([-x_grid[::-1], x_grid[1:]])
    rho_star = np.concatenate([bwd.y[0][::-1], fwd.y[0][1:]])
    horizon = HorizonCurve(x0=x0, rho_star=rho_star)

    return FlowMap(profile=profile, sigma_star=sigma_star, horizon=horizon,
                   ode_tol=ode_tol, rho_min=rho_min)


def sigma_of(rho: float, x0: float, flow: FlowMap) -> tuple[float, float]:
    """Characteristic label sigma(rho, x0) and its radial derivative.

    Integrates the ray through (rho, x0) back to x0 = 0 together with the
    tangent equation dJ/dx0 = (-A/rho^2) J, J(x0) = 1; returns
    (rho(0), J(0)).  At x0 = 0 this is (rho, 1) identically.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if x0 == 0.0:
        return float(rho), 1.0
    sol = _solve(flow.profile, [float(rho), 1.0], (float(x0), 0.0),
                 ode_tol=flow.ode_tol,
                 events=[_capture_event(flow.rho_min)], tangent=True)
    if sol.t_events[0].size:
        raise CaptureError(
            f"ray through (rho={rho}, x0={x0}) reaches rho_min before x0=0")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def sigma_map(rho, x0: float, flow: FlowMap):
    """Vectorised sigma_of over a radial grid, for x0 >= 0.

    Backward rays from x0 >= 0 never reach rho = 0 (the inward drift makes
    rho grow toward the past), so no capture handling is needed here.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise ValueError("rho must be positive")
    if x0 < 0.0:
        raise ValueError("sigma_map supports x0 >= 0; use sigma_of pointwise")
    if x0 == 0.0:
        return rho.copy(), np.ones_like(rho)

    n = rho.size
    profile = flow.profile

    def rhs(t, y):
        r = y[:n]
        jac = y[n:]
        a = profile.eval(t)
        return np.concatenate([a / r + 1.0, (-a / r ** 2) * jac])

    y0 = np.concatenate([rho, np.ones(n)])
    sol = solve_ivp(rhs, (float(x0), 0.0), y0, method="DOP853",
                    rtol=flow.ode_tol, atol=flow.ode_tol * 1e-2)
    if not sol.success:
        raise StepFailureError(f"sigma_map integration failed: {sol.message}")
    return sol.y[:n, -1], sol.y[n:, -1]
