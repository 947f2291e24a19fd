"""Adaptive quadrature of vector-valued integrands with an explicit failure contract."""
import numpy as np
from scipy.integrate import quad_vec

from .errors import QuadratureError


def integrate(f, a, b, breakpoints=(), rtol=1e-10, atol=0.0, max_intervals=20000):
    """Integrate ``f`` over ``[a, b]``; every output component is held to the same tolerance.

    ``f`` maps a 1-d array of abscissae to an array whose leading axis runs over
    the abscissae; the result has the remaining shape. Interior breakpoints
    (kinks of a tabulated integrand) seed the subdivision. Raises
    QuadratureError carrying the estimated error if the tolerance is not met.
    """
    points = np.asarray(breakpoints, float)
    points = points[(points > a) & (points < b)]
    result, err, info = quad_vec(
        lambda x: f(np.array([x]))[0], a, b, epsabs=atol, epsrel=rtol, norm="max",
        limit=max_intervals, points=points if points.size else None, full_output=True,
    )
    if not info.success:
        raise QuadratureError("adaptive quadrature did not reach its tolerance", err)
    return result
