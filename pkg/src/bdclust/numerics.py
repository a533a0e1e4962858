"""Special functions used by the likelihoods and the dependence penalty."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special


class NumericsError(ArithmeticError):
    pass


class NonPositiveArgument(NumericsError, ValueError):
    pass


class OutOfRangeProbability(NumericsError, ValueError):
    pass


class NonConvergentQuadrature(NumericsError):
    def __init__(self, message: str, nodes: int):
        super().__init__(f"{message} (after {nodes} integrand evaluations)")
        self.nodes = nodes


@dataclass(frozen=True)
class QuadratureSpec:
    max_nodes: int = 200
    rel_tol: float = 1e-11

    def __post_init__(self):
        if self.max_nodes < 16:
            raise ValueError("max_nodes must be at least 16")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


def log_gamma_fn(x: float) -> float:
    if not x > 0:
        raise NonPositiveArgument(f"log-gamma needs x > 0, got {x!r}")
    return float(special.gammaln(x))


def log_gamma_density(x, shape: float, rate: float):
    """Log density of Gamma(shape, rate) at ``x``; accepts arrays for ``x``."""
    if not (shape > 0 and rate > 0):
        raise NonPositiveArgument("shape and rate must be positive")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa <= 0):
        raise NonPositiveArgument("Gamma density is evaluated at x > 0 only")
    out = shape * math.log(rate) - special.gammaln(shape) + (shape - 1.0) * np.log(xa) - rate * xa
    return float(out) if np.ndim(out) == 0 else out


def gamma_cdf(x, shape: float, rate: float):
    return special.gammainc(shape, rate * np.asarray(x, dtype=np.float64))


def gamma_quantile(p: float, shape: float, rate: float) -> float:
    """Inverse of the Gamma(shape, rate) CDF by a bracketed root search."""
    if not 0.0 < p < 1.0:
        raise OutOfRangeProbability(f"p must lie in (0, 1), got {p!r}")
    if not (shape > 0 and rate > 0):
        raise NonPositiveArgument("shape and rate must be positive")
    # search over log y for the unit-rate variable y; this keeps relative
    # accuracy for tiny quantiles of small shapes
    f = lambda t: special.gammainc(shape, math.exp(t)) - p  # noqa: E731
    lo, hi = -1.0, max(1.0, math.log(max(shape, 1.0)) + 1.0)
    while f(hi) < 0:
        lo, hi = hi, hi + 2.0 * abs(hi)
    while f(lo) > 0:
        lo, hi = lo * 2.0, lo
    t = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    y = math.exp(t)
    return y / rate


def gamma_quantile_array(p, shape: float, rate: float, upper=None) -> np.ndarray:
    """Vectorised quantile.

    ``upper`` optionally holds 1 - p computed without cancellation; it is used
    for the right tail so probabilities that round to 1 stay finite.
    """
    p = np.asarray(p, dtype=np.float64)
    if upper is None:
        upper = 1.0 - p
    upper = np.asarray(upper, dtype=np.float64)
    lower_tail = special.gammaincinv(shape, p)
    upper_tail = special.gammainccinv(shape, upper)
    return np.where(p <= 0.5, lower_tail, upper_tail) / rate


def _tricomi_integrand(u, a, b, x):
    # U(a,b,x) Gamma(a) x^a = int_0^inf e^-u u^(a-1) (1 + u/x)^(b-a-1) du
    return np.exp(-u + (a - 1.0) * np.log(u) + (b - a - 1.0) * np.log1p(u / x))


def log_tricomi_u(a: float, b: float, x: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """log U(a, b, x) for a > 0, x > 0 from the Laplace-type integral.

    The substitution t = u / x makes the exponential factor scale-free, so
    the same breakpoints work for small and large x.
    """
    if not (a > 0 and x > 0):
        raise NonPositiveArgument("tricomi_u needs a > 0 and x > 0")
    total = 0.0
    evals = 0
    breaks = {0.0, 1.0, max(1.0, a), max(1.0, a) + 40.0}
    if x < 1.0:
        # power-law stretch between u ~ x and u ~ 1
        breaks.update(np.geomspace(x, 1.0, int(math.ceil(-math.log10(x))) + 1).tolist())
    breaks = sorted(breaks)
    pieces = list(zip(breaks[:-1], breaks[1:])) + [(breaks[-1], np.inf)]
    for lo, hi in pieces:
        if hi <= lo:
            continue
        val, err, info = integrate.quad(
            _tricomi_integrand, lo, hi, args=(a, b, x),
            epsabs=0.0, epsrel=spec.rel_tol, limit=spec.max_nodes, full_output=1,
        )[:3]
        evals += info["neval"]
        if err > max(1e-9 * abs(val), 1e-300) and val > 1e-280:
            raise NonConvergentQuadrature(
                f"tricomi_u({a}, {b}, {x}) piece [{lo}, {hi}] error {err:.3g}", evals
            )
        total += val
    if not total > 0:
        raise NonConvergentQuadrature(f"tricomi_u({a}, {b}, {x}) underflowed", evals)
    return math.log(total) - special.gammaln(a) - a * math.log(x)


def tricomi_u(a: float, b: float, x: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return math.exp(log_tricomi_u(a, b, x, spec))


def log_rising(x: float, m: int, step: float) -> float:
    """log of x (x + step) ... (x + (m - 1) step)."""
    if m <= 0:
        return 0.0
    if step == 0:
        return m * math.log(x)
    if step > 0 and x > 0:
        r = x / step
        return m * math.log(step) + special.gammaln(r + m) - special.gammaln(r)
    return float(sum(math.log(x + j * step) for j in range(m)))
