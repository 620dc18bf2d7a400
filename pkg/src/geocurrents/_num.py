"""Scalar helpers that work on both python floats and mpmath numbers.

Everything that can see a high-precision value dispatches here, so the
same geometric code runs in double precision for ordinary boxes and in
extended precision inside long earthquake paths.
"""

import cmath
import math

import mpmath
from mpmath import mpc, mpf

TWO_PI = 2.0 * math.pi
PT_EPS = 1e-12


def is_mp(*xs):
    return any(isinstance(x, (mpf, mpc)) for x in xs)


def reduce_angle(theta):
    """Reduce an angle to [0, 2*pi)."""
    if isinstance(theta, mpf):
        return theta % (2 * mpmath.pi)
    r = float(theta) % TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


def ccw(x, y):
    """Counterclockwise angular distance from x to y, in [0, 2*pi)."""
    return reduce_angle(y - x)


def angular_distance(x, y):
    d = ccw(x, y)
    return min(d, (2 * mpmath.pi if isinstance(d, mpf) else TWO_PI) - d)


def expj(theta):
    if isinstance(theta, mpf):
        return mpmath.expj(theta)
    return complex(math.cos(theta), math.sin(theta))


def arg(z):
    if isinstance(z, mpc):
        return reduce_angle(mpmath.arg(z))
    return reduce_angle(math.atan2(z.imag, z.real))


def sqrt(x):
    return mpmath.sqrt(x) if is_mp(x) else cmath.sqrt(x)


def exp(x):
    return mpmath.exp(x) if is_mp(x) else math.exp(x)


def sin(x):
    return mpmath.sin(x) if is_mp(x) else math.sin(x)


def log1p(x):
    return mpmath.log1p(x) if is_mp(x) else math.log1p(x)


def conj(z):
    return z.conjugate()


def to_mp(x):
    """Exact conversion of a float/complex to the current mpmath context."""
    if isinstance(x, (mpf, mpc)):
        return +x
    if isinstance(x, complex):
        return mpc(x.real, x.imag)
    return mpf(x)


def dps_for_weight(total_weight):
    """Decimal digits needed to resolve points squeezed by exp(-total_weight)."""
    return 30 + int(math.ceil(1.5 * max(float(total_weight), 0.0) / math.log(10.0)))
