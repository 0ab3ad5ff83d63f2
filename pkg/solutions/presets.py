"""
Named monodromy families and their closed-form reference values
"""
import math
from typing import Any, Callable, Dict

import numpy as np
from scipy import integrate, special

from gravity.bessel import bessel_j
from riemann_hilbert.contour import Lambda
from riemann_hilbert.spectral import WeylPoint
from utils.errors import ConfigurationError, DomainError


def einstein_rosen_document(k: float = 1.0, a: float = 1.0, b: float = 1.0, lam: int = -1) -> Dict[str, Any]:
    """diag(exp(4b e^{-ak} cos(k omega)), exp(-4b e^{-ak} cos(k omega)))"""
    if k < 0:
        raise ConfigurationError("einstein_rosen needs k >= 0")
    return {
        'name': 'einstein_rosen',
        'lambda': int(Lambda.parse(lam)),
        'channels': [
            {'kind': 'exp_sum', 'terms': [{'type': 'cos', 'c': 4.0 * b, 'k': k, 'damping_a': a}]},
            {'kind': 'exp_sum', 'terms': [{'type': 'cos', 'c': -4.0 * b, 'k': k, 'damping_a': a}]},
        ],
    }


def kasner_document(a: float = 1.1125, N: int = 2) -> Dict[str, Any]:
    """diag((omega - a)**N, (omega - a)**-N)"""
    if int(N) != N:
        raise ConfigurationError("kasner needs an integer N")
    return {
        'name': 'kasner',
        'lambda': -1,
        'channels': [
            {'kind': 'monomial', 'a': a, 'N': int(N)},
            {'kind': 'monomial', 'a': a, 'N': -int(N)},
        ],
    }


def pulse_document(a: float = 1.0, b: float = 1.0) -> Dict[str, Any]:
    """diag(exp(4ab / (omega**2 + a**2)), exp(-4ab / (omega**2 + a**2)))"""
    if a <= 0:
        raise ConfigurationError("pulse needs a > 0")
    return {
        'name': 'pulse',
        'lambda': -1,
        'channels': [
            {'kind': 'exp_sum', 'strip': a, 'terms': [{'type': 'inv_quad', 'c': 4.0 * a * b, 'a': a}]},
            {'kind': 'exp_sum', 'strip': a, 'terms': [{'type': 'inv_quad', 'c': -4.0 * a * b, 'a': a}]},
        ],
    }


def constant_document(c: float = 2.0, lam: int = -1) -> Dict[str, Any]:
    """diag(c, 1/c)"""
    if c == 0:
        raise ConfigurationError("constant monodromy needs c != 0")
    log_c = complex(np.log(complex(c)))
    value = log_c.real if log_c.imag == 0 else [log_c.real, log_c.imag]
    negated = -log_c.real if log_c.imag == 0 else [-log_c.real, -log_c.imag]
    return {
        'name': 'constant',
        'lambda': int(Lambda.parse(lam)),
        'channels': [
            {'kind': 'exp_sum', 'terms': [{'type': 'power', 'c': value, 'p': 0}]},
            {'kind': 'exp_sum', 'terms': [{'type': 'power', 'c': negated, 'p': 0}]},
        ],
    }


PRESETS: Dict[str, Callable[..., Dict[str, Any]]] = {
    'einstein_rosen': einstein_rosen_document,
    'kasner': kasner_document,
    'pulse': pulse_document,
    'constant': constant_document,
}


def preset_document(name: str, **params: Any) -> Dict[str, Any]:
    """
    Build a preset monodromy document

    Args:
        name: One of PRESETS
        **params: Preset parameters; unrelated keys are ignored

    Returns:
        Monodromy document
    """
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}", {'known': sorted(PRESETS)})
    builder = PRESETS[name]
    accepted = builder.__code__.co_varnames[:builder.__code__.co_argcount]
    if 'lambda' in params and 'lam' in accepted:
        params['lam'] = params.pop('lambda')
    try:
        return builder(**{k: v for k, v in params.items() if k in accepted and v is not None})
    except TypeError as e:
        raise ConfigurationError(f"bad parameters for preset {name!r}: {e}")


# ----------------------------------------------------------------------
# reference values
# ----------------------------------------------------------------------
def einstein_rosen_log_delta(k: float, a: float, b: float, rho, v, lam: int = -1):
    """log Delta for the Einstein-Rosen family: Bessel J0 for lambda = -1, I0 for +1"""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    amplitude = 4.0 * b * math.exp(-a * k)
    if Lambda.parse(lam) is Lambda.MINUS:
        radial = bessel_j(0, k * rho)
    else:
        radial = special.i0(k * rho)
    return amplitude * np.cos(k * v) * radial


def kasner_m(a: float, n_power: int, point: WeylPoint, outside_root: complex) -> complex:
    """M_11 = (-(1/2) rho * outside_root)**N for the rational split"""
    return complex((-0.5 * point.rho * outside_root) ** n_power)


def kasner_deformed_m(n: int, point: WeylPoint) -> float:
    """Deformed Kasner M_11 = (rho/2)**(2n)"""
    return (0.5 * point.rho) ** (2 * n)


def pulse_log_delta(a: float, b: float, rho, v):
    """log Delta of the pulse: 4b Re[1 / sqrt((a - i v)**2 + rho**2)]"""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    return 4.0 * b * (1.0 / np.sqrt((a - 1j * v) ** 2 + rho ** 2)).real


def pulse_log_delta_integral(a: float, b: float, rho: float, v: float) -> float:
    """4b times the integral of e^{-ak} cos(kv) J0(k rho) over k >= 0, by adaptive quadrature"""
    if a <= 0:
        raise DomainError("pulse integral converges only for a > 0")
    upper = 60.0 / a
    value, _ = integrate.quad(
        lambda k: math.exp(-a * k) * math.cos(k * v) * float(bessel_j(0, k * rho)),
        0.0, upper, limit=400, epsabs=1e-14, epsrel=1e-12)
    return 4.0 * b * value
