"""
Deterministic continuum comparator.

Transmit power is spread as a density rho over the decoded region: a segment
[0, R] on the line or a disk of radius R in the plane. The next frontier is
the farthest point x whose integrated gain

    rho * integral over the region of |x - u|^-alpha du

still reaches tau. Iterating the frontier gives nondecreasing increments, so
the continuum region grows without bound for every alpha > 0, unlike the
discrete Poisson network.

Both integrals scale as R^(d - alpha) times a unit-region integral of the
relative gap g = x/R - 1, so the solver works on g and never forms x - R for
large R.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate, special
from scipy.integrate import IntegrationWarning
from scipy.optimize import brentq
from scipy.stats import qmc

from .utils.errors import InvalidParameterError, InvariantViolationError, QuadratureError
from .utils.logger import LoggingMixin

logger = logging.getLogger(__name__)

LOG_BRANCH_TOLERANCE = 1e-9  # |alpha - 1| (line) or |alpha - 2| (disk radial part) below this uses the log form
QUAD_EPSREL = 1e-10
SOLVER_RTOL = 1e-13
GAP_XTOL = 1e-300
NEAR_EDGE_GAP = 0.5  # below this relative gap the disk integral switches to the hyperbolic substitution
MIN_GAP = 2.0 ** -52
MAX_GAP = 2.0 ** 330


def _unit_line_integral(g: float, alpha: float) -> float:
    """integral_0^1 (1 + g - u)^-alpha du for a relative gap g > 0 beyond the segment end."""
    c = 1.0 + g
    # log(g / c), accurate at both ends of the gap range
    log_ratio = math.log1p(-1.0 / c) if g >= 1.0 else math.log(g) - math.log1p(g)
    if abs(alpha - 1.0) < LOG_BRANCH_TOLERANCE:
        return -log_ratio
    beta = 1.0 - alpha
    return -c ** beta * math.expm1(beta * log_ratio) / beta


def _line_edge_value(alpha: float) -> float:
    """The unit line integral at g = 0: 1/(1 - alpha), divergent for alpha >= 1."""
    if alpha >= 1.0 - LOG_BRANCH_TOLERANCE:
        return math.inf
    return 1.0 / (1.0 - alpha)


def line_power_integral(x: float, R: float, alpha: float) -> float:
    """integral_0^R (x - u)^-alpha du for x > R."""
    if R <= 0 or alpha <= 0:
        raise InvalidParameterError(f"Need R > 0 and alpha > 0, got R={R}, alpha={alpha}")
    if x <= R:
        raise InvalidParameterError(f"Target x={x} must lie beyond the segment end R={R}")
    return R ** (1.0 - alpha) * _unit_line_integral((x - R) / R, alpha)


def _checked_quad(func: Callable[[float], float], a: float, b: float, **kwargs) -> float:
    value, abserr, _info, *message = integrate.quad(func, a, b, epsabs=0.0, epsrel=QUAD_EPSREL,
                                                    limit=200, full_output=1, **kwargs)
    if message:
        raise QuadratureError(f"Quadrature did not converge: {message[0]}", achieved_error=abserr)
    return value


def _chord_power(hi: float, chord: float, beta: float) -> float:
    """(hi^beta - lo^beta) / beta for lo = hi - chord, without forming lo."""
    log_ratio = math.log1p(-chord / hi)
    if abs(beta) < LOG_BRANCH_TOLERANCE:
        return -log_ratio
    return -hi ** beta * math.expm1(beta * log_ratio) / beta


def _sinh_ratio(beta: float, t: float) -> float:
    """sinh(beta t) / beta, t at beta = 0."""
    if abs(beta) < LOG_BRANCH_TOLERANCE:
        return t
    return math.sinh(beta * t) / beta


def _disk_edge_value(alpha: float) -> float:
    """
    The unit disk integral for a target on the rim:
    (2^beta / beta) B((beta + 1)/2, 1/2) with beta = 2 - alpha, divergent for alpha >= 2.
    """
    beta = 2.0 - alpha
    if beta <= LOG_BRANCH_TOLERANCE:
        return math.inf
    return 2.0 ** beta / beta * float(special.beta((beta + 1.0) / 2.0, 0.5))


def _unit_disk_integral(g: float, alpha: float) -> float:
    """
    integral over the unit disk of |p - u|^-alpha du for a target p at
    distance 1 + g from the centre, g > 0.

    In target-centred polar coordinates a ray meets the disk on the chord
    [rho1, rho2] with rho1 * rho2 = D = g(2 + g), and the radial part is
    closed form. Away from the rim the remaining angle is integrated over the
    half-chord parameter phi. Close to the rim the half chord w = sqrt(D) sinh(t)
    gives rho1, rho2 = sqrt(D) e^-+t, leaving only an inverse square root at
    the far end, which the algebraic quadrature weight absorbs.
    """
    beta = 2.0 - alpha
    D = g * (2.0 + g)
    if g >= NEAR_EDGE_GAP:
        def angular(phi: float) -> float:
            w = math.cos(phi)
            s = math.sqrt(D + w * w)
            return w / s * _chord_power(s + w, 2.0 * w, beta)

        return 2.0 * _checked_quad(angular, 0.0, math.pi / 2.0)

    root_d = math.sqrt(D)
    t_max = math.asinh(1.0 / root_d)

    def radial(t: float) -> float:
        u = t_max - t
        ratio = u / math.sinh(u / 2.0) if u > 0.0 else 2.0
        taper = math.sqrt(ratio / (2.0 * root_d * math.cosh((t_max + t) / 2.0) * (1.0 + root_d * math.sinh(t))))
        return math.sinh(t) * _sinh_ratio(beta, t) * taper

    scale = 4.0 * D ** ((beta + 1.0) / 2.0)
    return scale * _checked_quad(radial, 0.0, t_max, weight='alg', wvar=(0.0, -0.5))


def disk_power_integral(x: float, R: float, alpha: float) -> float:
    """
    integral over the disk |u| <= R of |p - u|^-alpha du for a target p at
    distance x from the centre. Finite for x > R, and at x = R when alpha < 2.
    The radial part is integrated in closed form, the angular part by adaptive
    quadrature; on the rim the whole integral is closed form.
    """
    if R <= 0 or alpha <= 0:
        raise InvalidParameterError(f"Need R > 0 and alpha > 0, got R={R}, alpha={alpha}")
    if x < R:
        raise InvalidParameterError(f"Disk integral is undefined inside the disk: x={x}, R={R}")
    if x == R:
        edge = _disk_edge_value(alpha)
        if math.isinf(edge):
            raise InvalidParameterError(f"Disk integral diverges on the rim for alpha={alpha}")
        return R ** (2.0 - alpha) * edge
    return R ** (2.0 - alpha) * _unit_disk_integral((x - R) / R, alpha)


def _checked_dblquad(func, a: float, b: float, gfun, hfun) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            value, abserr = integrate.dblquad(func, a, b, gfun, hfun, epsabs=0.0, epsrel=QUAD_EPSREL)
        except IntegrationWarning as w:
            raise QuadratureError(f"2-D quadrature did not converge: {w}") from None
    if abserr > 1e-8 * abs(value):
        raise QuadratureError(f"2-D quadrature error {abserr:.3g} above tolerance", achieved_error=abserr)
    return value


def disk_power_integral_at(point: Sequence[float], R: float, alpha: float) -> float:
    """The disk integral by direct 2-D quadrature at an arbitrary target outside the disk."""
    px, py = (float(v) for v in point)
    if math.hypot(px, py) <= R:
        raise InvalidParameterError("Target must lie outside the disk")

    def integrand(v: float, u: float) -> float:
        return ((px - u) ** 2 + (py - v) ** 2) ** (-alpha / 2.0)

    return _checked_dblquad(
        integrand, -R, R,
        lambda u: -math.sqrt(max(R * R - u * u, 0.0)),
        lambda u: math.sqrt(max(R * R - u * u, 0.0)),
    )


def strip_power_integral(x: float, R: float, alpha: float, width: float) -> float:
    """Integral over [0, R] x [-w/2, w/2] of the plane path gain, divided by w."""
    if width <= 0:
        raise InvalidParameterError("width must be > 0")
    if x <= R:
        raise InvalidParameterError(f"Target x={x} must lie beyond the strip end R={R}")
    half = width / 2.0

    def integrand(v: float, u: float) -> float:
        return ((x - u) ** 2 + v * v) ** (-alpha / 2.0)

    return _checked_dblquad(integrand, 0.0, R, lambda u: -half, lambda u: half) / width


def monte_carlo_disk_integral(x: float, R: float, alpha: float, n_points: int, seed: int) -> float:
    """
    Scrambled Sobol estimate of the disk integral, sampling the angle and the
    position along each chord uniformly in target-centred polar coordinates.
    """
    if n_points < 2 or n_points & (n_points - 1):
        raise InvalidParameterError("n_points must be a power of two")
    if x < R:
        raise InvalidParameterError("Target must not lie inside the disk")
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    u = sampler.random_base2(int(math.log2(n_points)))
    theta_max = math.asin(min(R / x, 1.0))
    theta = (2.0 * u[:, 0] - 1.0) * theta_max
    half_chord = np.sqrt(np.maximum(R * R - (x * np.sin(theta)) ** 2, 0.0))
    rho1 = np.maximum(x * np.cos(theta) - half_chord, 0.0)
    rho2 = x * np.cos(theta) + half_chord
    rho = rho1 + u[:, 1] * (rho2 - rho1)
    with np.errstate(divide='ignore', invalid='ignore'):
        weights = np.where(rho > 0.0, (rho2 - rho1) * rho ** (1.0 - alpha), 0.0)
    return float(2.0 * theta_max * weights.mean())


@dataclass(frozen=True)
class ContinuumState:
    """Frontier history R_0 < R_1 < ... of one continuum run, with per-step increments."""
    dimension: int
    rho: float
    tau: float
    alpha: float
    frontier_history: Tuple[float, ...]
    increments: Tuple[float, ...]
    stalled: bool = False
    escaped: bool = False

    def __post_init__(self):
        history = np.asarray(self.frontier_history)
        if history.size == 0:
            raise InvalidParameterError("frontier_history must hold the initial radius")
        if np.any(np.diff(history) <= 0):
            raise InvariantViolationError("frontier_history must be strictly increasing")

    @property
    def steps(self) -> int:
        return len(self.increments)

    @property
    def final_radius(self) -> float:
        return self.frontier_history[-1]

    def rows(self):
        """CSV rows: step, R, increment (empty for the initial radius)."""
        out = [{'step': 0, 'R': self.frontier_history[0], 'increment': None}]
        for t, (radius, inc) in enumerate(zip(self.frontier_history[1:], self.increments), start=1):
            out.append({'step': t, 'R': radius, 'increment': inc})
        return out


def _validate(R: float, rho: float, tau: float, alpha: float) -> None:
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    if R <= 0:
        raise InvalidParameterError(f"R must be > 0, got {R}")
    if rho <= 0 or tau <= 0:
        raise InvalidParameterError(f"rho and tau must be > 0, got rho={rho}, tau={tau}")


class FrontierSolver(LoggingMixin):
    """
    Brackets and solves rho * R^(d - alpha) * f(g) = tau for the relative gap
    g of the next frontier x = R(1 + g), where f is the unit-region integral
    and f(0) its rim value.
    """

    def __init__(self, dimension: int, unit_integral: Callable[[float, float], float],
                 edge_value: Callable[[float], float]):
        self.dimension = dimension
        self.unit_integral = unit_integral
        self.edge_value = edge_value

    def solve_gap(self, R: float, rho: float, tau: float, alpha: float) -> float:
        """0 when the region cannot reach beyond its own edge, inf when the gap exceeds MAX_GAP."""
        _validate(R, rho, tau, alpha)
        log_target = math.log(tau) - math.log(rho) - (self.dimension - alpha) * math.log(R)
        tiny = np.finfo(float).tiny

        def excess(g: float) -> float:
            return math.log(max(self.unit_integral(g, alpha), tiny)) - log_target

        if math.log(self.edge_value(alpha)) <= log_target:
            self.logger.debug(f"No frontier beyond R={R} (rho={rho}, tau={tau}, alpha={alpha})")
            return 0.0
        lower = upper = 1.0
        if excess(1.0) >= 0.0:
            while True:
                lower, upper = upper, upper * 2.0
                if upper > MAX_GAP:
                    self.logger.debug(f"Frontier gap beyond {MAX_GAP:.3g} at R={R}")
                    return math.inf
                if excess(upper) < 0.0:
                    break
        else:
            # Divergent rim: the root sits between the rim and g = 1
            while True:
                lower, upper = lower / 2.0, lower
                if lower < MIN_GAP:
                    self.logger.debug(f"Frontier gap below {MIN_GAP:.3g} at R={R}")
                    return 0.0
                if excess(lower) >= 0.0:
                    break
        self.logger.debug(f"Frontier gap bracket [{lower!r}, {upper!r}] for R={R}")
        root, info = brentq(excess, lower, upper, xtol=GAP_XTOL, rtol=SOLVER_RTOL,
                            maxiter=500, full_output=True, disp=False)
        if not info.converged:
            raise InvariantViolationError(f"Frontier solver did not converge from [{lower}, {upper}]: {info.flag}")
        return float(root)

    def solve(self, R: float, rho: float, tau: float, alpha: float) -> float:
        g = self.solve_gap(R, rho, tau, alpha)
        if g == 0.0:
            return R
        return R + R * g


_LINE_SOLVER = FrontierSolver(1, _unit_line_integral, _line_edge_value)
_DISK_SOLVER = FrontierSolver(2, _unit_disk_integral, _disk_edge_value)


def frontier_1d(R: float, rho: float, tau: float, alpha: float) -> float:
    """
    Largest x > R with rho * integral_0^R (x - u)^-alpha du >= tau; R if none,
    inf once the frontier leaves floating-point range.
    """
    return _LINE_SOLVER.solve(R, rho, tau, alpha)


def frontier_2d(R: float, rho: float, tau: float, alpha: float) -> float:
    """Largest distance x > R from the centre of the decoded disk still reaching tau; R if none, inf out of range."""
    return _DISK_SOLVER.solve(R, rho, tau, alpha)


def _rounding_allowance(x: float) -> float:
    return 4.0 * SOLVER_RTOL * abs(x)


def continuum_growth(dimension: int, rho: float, tau: float, alpha: float, steps: int,
                     initial_radius: float = 1.0) -> ContinuumState:
    """
    Iterate the frontier `steps` times from `initial_radius` (the point-source
    radius (p_t/tau)^(1/alpha), 1 when normalized). Each increment must be at
    least the previous one; a decrease beyond solver rounding raises
    InvariantViolationError.

    The run ends early with `stalled` set when the region cannot reach beyond
    itself, and with `escaped` set once the next frontier is out of
    floating-point range (alpha below the dimension grows super-exponentially).
    """
    if dimension not in (1, 2):
        raise InvalidParameterError(f"dimension must be 1 or 2, got {dimension!r}")
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    _validate(initial_radius, rho, tau, alpha)
    frontier = frontier_1d if dimension == 1 else frontier_2d

    history = [float(initial_radius)]
    increments = []
    stalled = escaped = False
    for t in range(1, steps + 1):
        R = history[-1]
        x = frontier(R, rho, tau, alpha)
        if math.isinf(x):
            escaped = True
            logger.warning(f"Continuum frontier left floating-point range at step {t} from R={R!r} "
                           f"(rho={rho}, alpha={alpha})")
            break
        if not x > R:
            stalled = True
            logger.warning(f"Continuum iteration stalled at step {t}: R={R} cannot reach beyond itself "
                           f"(rho={rho}, tau={tau}, alpha={alpha})")
            break
        increment = x - R
        if increments and increment < increments[-1] - _rounding_allowance(x):
            logger.error(f"Increment decreased at step {t}: {increment!r} < {increments[-1]!r}")
            raise InvariantViolationError(
                f"Continuum increments must be nondecreasing; step {t} gave {increment!r} after {increments[-1]!r}"
            )
        history.append(x)
        increments.append(increment)
    logger.info(f"Continuum growth ({dimension}-D, rho={rho}, alpha={alpha}): "
                f"R {history[0]} -> {history[-1]:.6g} in {len(increments)} steps")
    return ContinuumState(
        dimension=dimension, rho=rho, tau=tau, alpha=alpha,
        frontier_history=tuple(history), increments=tuple(increments),
        stalled=stalled, escaped=escaped,
    )
