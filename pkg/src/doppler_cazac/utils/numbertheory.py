from math import gcd
from typing import List, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def is_square_free(m: int) -> bool:
    """
    Check that no prime square divides m.

    Args:
        m: Positive integer to test

    Returns:
        True if m is square-free
    """
    if m < 1:
        return False
    k = 2
    while k * k <= m:
        if m % (k * k) == 0:
            return False
        k += 1
    return True


def coprime(a: int, b: int) -> bool:
    return gcd(a, b) == 1


def totatives(n: int) -> List[int]:
    """Integers in [1, n-1] coprime to n, ascending."""
    return [k for k in range(1, n) if coprime(k, n)]


def centered_mod(x: ArrayLike, modulus: float) -> ArrayLike:
    """
    Reduce x into the principal range [-(modulus-1)/2, (modulus-1)/2].

    Fractional inputs are kept fractional; for odd integer moduli the result
    of an integer input is the usual centered residue. The half-open
    [-modulus/2, modulus/2) window is used so non-integer inputs land in a
    single period.

    Args:
        x: Scalar or array to reduce
        modulus: Period of the reduction

    Returns:
        Reduced value(s), same shape as x
    """
    half = modulus / 2.0
    return np.mod(np.asarray(x, dtype=float) + half, modulus) - half


def centered_residues(p: int, n: int) -> np.ndarray:
    """Exact integer residues <p*k> centered mod n for k = 0..n-1 (n odd)."""
    k = np.arange(n, dtype=np.int64)
    res = (p * k) % n
    half = (n - 1) // 2
    return np.where(res > half, res - n, res)
