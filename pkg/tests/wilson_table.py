"""(k, n) cases for the Wilson interval, extremes included, and a
quadratic-root oracle independent of the closed form in the package."""

import math

CASES = [
    (0, 1), (1, 1), (0, 10), (10, 10), (75, 100), (1, 2), (3, 7), (5, 20),
    (19, 20), (50, 100), (0, 400), (400, 400), (1, 400), (123, 456), (999, 1000),
    (1, 1000), (250, 3000), (2999, 3000), (7, 9), (33, 64),
]


def wilson_by_roots(k, n, z=1.96):
    """Solve (p_hat - p)^2 = z^2 p (1 - p) / n for p."""
    p_hat = k / n
    a = 1 + z * z / n
    b = -(2 * p_hat + z * z / n)
    c = p_hat * p_hat
    disc = math.sqrt(max(b * b - 4 * a * c, 0.0))
    return (-b - disc) / (2 * a), (-b + disc) / (2 * a)
