"""Input validation helpers shared by the estimators and module functions."""

import numbers

import numpy as np

QUARTER_PI = np.pi / 4
# values up to this far above pi/4 are read as pi/4 written to four decimals (0.7854)
QUARTER_PI_SLACK = 5e-5


def check_theta0(theta0, allow_boundary=True):
    """Validate the state-family angle and return it as a float.

    Parameters
    ----------
    theta0 : float
        Angle of the pair ``cos t |00> +/- sin t |11>``.
    allow_boundary : bool, default=True
        Whether ``theta0 == pi/4`` (orthogonal states) is accepted.  Inputs
        within ``QUARTER_PI_SLACK`` above ``pi/4`` are clamped to it.

    Raises
    ------
    ValueError
        If ``theta0`` lies outside ``(0, pi/4]``.
    """
    if not isinstance(theta0, numbers.Real) or not np.isfinite(theta0):
        raise ValueError(f"theta0 must be a finite real number, got {theta0!r}")
    theta0 = float(theta0)
    upper = QUARTER_PI + QUARTER_PI_SLACK
    if theta0 <= 0.0 or theta0 > upper or (not allow_boundary and theta0 >= QUARTER_PI - 1e-15):
        bound = "]" if allow_boundary else ")"
        raise ValueError(f"theta0 must lie in (0, pi/4{bound}, got {theta0!r}")
    return min(theta0, QUARTER_PI)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)


def check_fraction(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_sent(sent, n_states=2):
    if isinstance(sent, bool) or not isinstance(sent, numbers.Integral):
        raise ValueError(f"sent must be an integer state index, got {sent!r}")
    if not 0 <= sent < n_states:
        raise ValueError(f"sent must lie in [0, {n_states}), got {sent!r}")
    return int(sent)


def as_generator(random_state):
    """Turn ``None``, an int seed or a Generator into a ``numpy.random.Generator``.

    Unlike :func:`sklearn.utils.check_random_state` this always hands back the
    new-style Generator, which is what the samplers use.
    """
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(random_state, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(random_state)
    raise ValueError(f"cannot build a Generator from {random_state!r}")
