"""Decay exponents and iteration constants for degenerate diffusion with advection.

Every closed form here has a brute-force companion (``*_bruteforce``) computing
the same quantity as a literal product or sum, so the algebra can be
cross-checked without trusting either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""


def _check_params(n: int, q: float, alpha: float) -> None:
    if n < 1 or int(n) != n:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    if q < 1:
        raise ParameterError(f"integrability index must be >= 1, got {q}")
    if alpha <= 0:
        raise ParameterError(f"diffusion exponent must be > 0, got {alpha}")


def smoothing_exponents(n: int, p0: float, alpha: float) -> tuple[float, float]:
    """Exponents (delta0, gamma0) of the L^p0 -> L^inf smoothing bound
    ||u(t)||_inf <= K ||u0||_p0^delta0 t^(-gamma0)."""
    _check_params(n, p0, alpha)
    den = 2.0 * p0 + n * alpha
    return 2.0 * p0 / den, n / den


def halving_exponents(n: int, q: float, alpha: float) -> tuple[float, float]:
    """Exponents (delta, kappa) of the one-step norm-halving estimate
    ||u(t)||_q <= K_q ||u(t0)||_{q/2}^delta (t-t0)^(-kappa)."""
    _check_params(n, q, alpha)
    den = 2.0 * q + 2.0 * n * alpha
    return (2.0 * q + n * alpha) / den, n / den


@dataclass(frozen=True)
class ExponentSet:
    """All decay/iteration constants for one parameter triple (n, q, alpha)."""

    n: int
    q: float
    alpha: float
    delta0: float
    gamma0: float
    delta_half: float
    kappa_half: float
    theta: float
    beta: float
    gamma: float


def exponent_set(n: int, q: float, alpha: float) -> ExponentSet:
    _check_params(n, q, alpha)
    delta0, gamma0 = smoothing_exponents(n, q, alpha)
    delta_half, kappa_half = halving_exponents(n, q, alpha)
    beta = 2.0 * q / (q + alpha)
    theta = n * (q + alpha) / (n * q + 2.0 * q + 2.0 * n * alpha)
    theta_beta = theta * beta
    if theta_beta >= 2.0:
        raise ParameterError(f"interpolation product theta*beta = {theta_beta} >= 2")
    gamma = 2.0 / (2.0 - theta_beta)
    return ExponentSet(
        n=n, q=q, alpha=alpha,
        delta0=delta0, gamma0=gamma0,
        delta_half=delta_half, kappa_half=kappa_half,
        theta=theta, beta=beta, gamma=gamma,
    )


# ---------------------------------------------------------------------------
# Iteration sequences A_m, B_j over the dyadic norm scale 2^j q.
# ---------------------------------------------------------------------------

def moser_A(m: int, q: float, n: int, alpha: float) -> float:
    """Accumulated norm exponent after m dyadic halving steps (closed form)."""
    _check_params(n, q, alpha)
    if m < 1:
        raise ParameterError(f"iteration count must be >= 1, got {m}")
    na = n * alpha
    return (2.0 * q + na * 2.0 ** (-m)) / (2.0 * q + na)


def moser_A_bruteforce(m: int, q: float, n: int, alpha: float) -> float:
    na = n * alpha
    prod = 1.0
    for j in range(1, m + 1):
        prod *= (2.0 ** j * 2.0 * q + na) / (2.0 ** j * 2.0 * q + 2.0 * na)
    return prod


def moser_B(j: int, m: int, q: float, n: int, alpha: float) -> float:
    """Exponent weight of the j-th iterate's constant (closed form); B_0 = 1."""
    _check_params(n, q, alpha)
    if j > m:
        raise IndexError(f"weight index {j} exceeds iteration count {m}")
    if j < 0:
        raise IndexError(f"weight index must be >= 0, got {j}")
    if j == 0:
        return 1.0
    na = n * alpha
    return (2.0 * q + na * 2.0 ** (-m)) / (2.0 * q + na * 2.0 ** (j - m))


def moser_B_bruteforce(j: int, m: int, q: float, n: int, alpha: float) -> float:
    na = n * alpha
    prod = 1.0
    for k in range(j):
        prod *= (2.0 ** (m - k) * 2.0 * q + na) / (2.0 ** (m - k) * 2.0 * q + 2.0 * na)
    return prod


def moser_exponent_sum(m: int, q: float, n: int, alpha: float) -> float:
    """Accumulated time exponent S_m = sum_{j=1}^m -n/(2^j 2q + 2n alpha) B_{m-j}
    (closed form)."""
    _check_params(n, q, alpha)
    if m < 1:
        raise ParameterError(f"iteration count must be >= 1, got {m}")
    na = n * alpha
    pref = 2.0 * n * (2.0 * q + na * 2.0 ** (-m)) / (2.0 * q)
    bracket = 1.0 / (4.0 * q + 2.0 * na) - 1.0 / (2.0 ** m * 4.0 * q + 2.0 * na)
    return -pref * bracket


def moser_exponent_sum_bruteforce(m: int, q: float, n: int, alpha: float) -> float:
    na = n * alpha
    total = 0.0
    for j in range(1, m + 1):
        total += -n / (2.0 ** j * 2.0 * q + 2.0 * na) * moser_B_bruteforce(m - j, m, q, n, alpha)
    return total


def moser_limits(q: float, n: int, alpha: float) -> tuple[float, float]:
    """(lim A_m, lim S_m) as m -> inf: (2q/(2q+n alpha), -n/(2q+n alpha))."""
    _check_params(n, q, alpha)
    den = 2.0 * q + n * alpha
    return 2.0 * q / den, -n / den


def moser_time_grid(m: int, t: float) -> list[float]:
    """Dyadic time ladder t_0 = 2^-m t, t_j = t_0 + (1 - 2^-j) t, ending at t."""
    if m < 1:
        raise ParameterError(f"iteration count must be >= 1, got {m}")
    if t <= 0:
        raise ParameterError(f"final time must be > 0, got {t}")
    t0 = 2.0 ** (-m) * t
    return [t0] + [t0 + (1.0 - 2.0 ** (-j)) * t for j in range(1, m + 1)]


def moser_Kj_log_bound(j: int, q: float, n: int, alpha: float, C: float) -> float:
    """Log of the upper bound for the j-th iterate's multiplicative constant,
    given a stand-in value C for the interpolation constant.

    Stable for large j: both exponents are computed through 2^-j factors.
    """
    _check_params(n, q, alpha)
    if j < 1:
        raise ParameterError(f"iterate index must be >= 1, got {j}")
    if C <= 0:
        raise ParameterError(f"interpolation constant must be > 0, got {C}")
    if q * 2.0 ** j <= 1.0:
        raise ParameterError(f"need 2^j q > 1, got q={q}, j={j}")
    c_exp = (n + 2.0) * 2.0 ** (-j) / (2.0 * q) + 2.0 * n * alpha * 4.0 ** (-j) / q
    # bracket = (2^j q + alpha)^2 / (2^j 4q (2^j q - 1)), taken in log space
    log_num = 2.0 * (j * math.log(2.0) + math.log(q + alpha * 2.0 ** (-j)))
    log_den = (j * math.log(2.0) + math.log(4.0 * q)
               + j * math.log(2.0) + math.log(q - 2.0 ** (-j)))
    b_exp = n * 2.0 ** (-j) / (2.0 * q)
    return c_exp * math.log(C) + b_exp * (log_num - log_den)


def j0_threshold(q: float, n: int, alpha: float) -> int:
    """Smallest j with 2n alpha/(2^j q) < 1, alpha/(2^j (2q-1)) < 1 and
    alpha^2/(2^{2j} 2q (2q-1)) < 1."""
    _check_params(n, q, alpha)
    j = 1
    while not (2.0 * n * alpha / (2.0 ** j * q) < 1.0
               and alpha / (2.0 ** j * (2.0 * q - 1.0)) < 1.0
               and alpha ** 2 / (2.0 ** (2 * j) * 2.0 * q * (2.0 * q - 1.0)) < 1.0):
        j += 1
    return j


@dataclass(frozen=True)
class MoserTrace:
    """Full record of one iteration run: sequences, exponent sums, and the
    (finite) log bound on the accumulated constant product."""

    q: float
    n: int
    alpha: float
    m: int
    A: list[float]
    B: list[float]
    S: list[float]
    K_bound: float


def moser_trace(q: float, n: int, alpha: float, m: int, C: float = 2.0) -> MoserTrace:
    _check_params(n, q, alpha)
    if m < 1:
        raise ParameterError(f"iteration count must be >= 1, got {m}")
    A = [moser_A(k, q, n, alpha) for k in range(1, m + 1)]
    B = [moser_B(j, m, q, n, alpha) for j in range(m + 1)]
    S = [moser_exponent_sum(k, q, n, alpha) for k in range(1, m + 1)]
    log_prod = sum(moser_B(m - j, m, q, n, alpha) * moser_Kj_log_bound(j, q, n, alpha, C)
                   for j in range(1, m + 1))
    return MoserTrace(q=q, n=n, alpha=alpha, m=m, A=A, B=B, S=S,
                      K_bound=math.exp(log_prod))
