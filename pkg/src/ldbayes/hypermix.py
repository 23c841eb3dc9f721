"""Log-Sobolev constants and the hypermixing coefficients they induce.

A log-Sobolev constant C_LS yields hypermixing with waiting time
T0 = C_LS ln(3)/2, onset ell0 = 12 T0, decay rate alpha0 = ln(3/2)/(8 T0)
and exponent profile alpha(ell) = (1+e^x)(1+e^-x)/(e^x - e^-x) at
x = alpha0 ell, which decreases from alpha(ell0) to 1.  The module also
bounds a family of constants uniformly and spot-checks the correlation
inequality on a two-state chain whose semigroup is explicitly
diagonalizable.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import format_float
from .errors import EmptyFamily, InvalidParameter, RangeViolation
from .simulate import rng_from_seed

LN3 = math.log(3.0)
LN_3_2 = math.log(1.5)
COTH_SWITCH = 20.0


@dataclass(frozen=True)
class LogSobolevSpec:
    """A log-Sobolev constant together with how it was obtained."""

    kind: str
    c_ls: float

    @classmethod
    def explicit(cls, c_ls: float) -> "LogSobolevSpec":
        if not c_ls > 0:
            raise InvalidParameter(f"log-Sobolev constant must be positive, got {c_ls}")
        return cls("explicit", float(c_ls))

    @classmethod
    def strongly_convex(cls, rho: float) -> "LogSobolevSpec":
        return cls("strongly-convex", cls_strongly_convex(rho))

    @classmethod
    def locally_nonconvex(cls, ell: float, rho: float, r: float) -> "LogSobolevSpec":
        return cls("locally-nonconvex", cls_locally_nonconvex(ell, rho, r))


def cls_strongly_convex(rho: float) -> float:
    """1/rho for a potential with curvature bounded below by rho > 0."""
    if not rho > 0:
        raise InvalidParameter(f"curvature bound must be positive, got {rho}")
    return 1.0 / rho


def cls_locally_nonconvex(ell: float, rho: float, r: float) -> float:
    """(2/rho) e^{16 ell r^2} for curvature rho outside a radius-r ball."""
    if not ell > 0:
        raise InvalidParameter(f"ell must be positive, got {ell}")
    if not rho > 0:
        raise InvalidParameter(f"rho must be positive, got {rho}")
    if r < 0:
        raise InvalidParameter(f"r must be nonnegative, got {r}")
    return (2.0 / rho) * math.exp(16.0 * ell * r * r)


@dataclass(frozen=True)
class HypermixingProfile:
    """Coefficients (T0, ell0, alpha0, alpha) attached to one constant."""

    c_ls: float
    t0: float
    ell0: float
    alpha0: float
    alpha: Callable

    def __post_init__(self):
        assert abs(self.t0 - self.c_ls * LN3 / 2.0) <= 1e-12 * self.t0
        assert abs(self.ell0 - 12.0 * self.t0) <= 1e-12 * self.ell0
        assert abs(self.alpha0 - LN_3_2 / (8.0 * self.t0)) <= 1e-12 * self.alpha0


def _alpha_values(alpha0: float, ell0: float, ells: np.ndarray) -> np.ndarray:
    if np.any(ells < ell0 * (1.0 - 1e-12)):
        raise RangeViolation(f"alpha is defined on [{ell0:g}, inf)")
    x = alpha0 * ells
    out = np.empty_like(x)
    small = x <= COTH_SWITCH
    xs = x[small]
    out[small] = (1.0 + np.exp(xs)) * (1.0 + np.exp(-xs)) / (np.exp(xs) - np.exp(-xs))
    out[~small] = 1.0 / np.tanh(x[~small] / 2.0)
    return out


def hypermixing_profile(cls_value: float) -> HypermixingProfile:
    """Build the coefficient profile attached to a log-Sobolev constant."""
    if not cls_value > 0:
        raise InvalidParameter(f"log-Sobolev constant must be positive, got {cls_value}")
    t0 = cls_value * LN3 / 2.0
    ell0 = 12.0 * t0
    alpha0 = LN_3_2 / (8.0 * t0)

    def alpha(ell):
        arr = np.asarray(ell, dtype=float)
        vals = _alpha_values(alpha0, ell0, np.atleast_1d(arr))
        return float(vals[0]) if arr.ndim == 0 else vals

    return HypermixingProfile(float(cls_value), t0, ell0, alpha0, alpha)


class RegularFamilyCheck(NamedTuple):
    sup_cls: float
    ell0_uniform: float
    alpha_bound: float
    regular: bool


def check_regular_family(cls_values, cap: float | None = None) -> RegularFamilyCheck:
    """Uniform hypermixing data for a family of log-Sobolev constants.

    The family is regular when its constants are uniformly bounded; for a
    finite list that always holds, and an explicit ``cap`` asserts the
    bound instead (regular = sup <= cap).
    """
    values = np.asarray(list(cls_values), dtype=float)
    if values.size == 0:
        raise EmptyFamily("no log-Sobolev constants supplied")
    if values.min() <= 0:
        raise InvalidParameter(f"constants must be positive, got {values.min()}")
    sup_cls = float(values.max())
    if not np.isfinite(sup_cls):
        return RegularFamilyCheck(sup_cls, math.inf, math.inf, False)
    profile = hypermixing_profile(sup_cls)
    regular = True if cap is None else sup_cls <= cap
    return RegularFamilyCheck(sup_cls, profile.ell0, profile.alpha(profile.ell0), regular)


class CorrelationCheck(NamedTuple):
    worst_ratio: float
    passed: bool
    n_pairs: int
    ells: tuple


def check_two_state_correlation_bound(
    q: float, n_pairs: int = 100, seed: int = 0, ells=None
) -> CorrelationCheck:
    """Correlation bound on the symmetric two-state chain with jump rate q.

    The chain on {0,1} flips at rate q; its semigroup is diagonal in the
    parity function with gap 2q, so E[f(X_0) g(X_ell)] is available in
    closed form.  With the profile of C_LS = 1/(2q) the product of
    L^alpha(ell) norms must dominate the correlation for every
    nonnegative pair; checked at ell in {ell0, 2 ell0} by default.
    """
    if not q > 0:
        raise InvalidParameter(f"jump rate must be positive, got {q}")
    profile = hypermixing_profile(1.0 / (2.0 * q))
    if ells is None:
        ells = (profile.ell0, 2.0 * profile.ell0)
    rng = rng_from_seed(seed)
    worst = 0.0
    for ell in ells:
        a = profile.alpha(ell)
        decay = math.exp(-2.0 * q * ell)
        for _ in range(n_pairs):
            f = rng.uniform(0.0, 1.0, size=2)
            g = rng.uniform(0.0, 1.0, size=2)
            # E f(X_0) g(X_ell) under the stationary chain
            corr = 0.25 * (
                (f[0] + f[1]) * (g[0] + g[1]) + decay * (f[0] - f[1]) * (g[0] - g[1])
            )
            norm_f = (0.5 * (f[0] ** a + f[1] ** a)) ** (1.0 / a)
            norm_g = (0.5 * (g[0] ** a + g[1] ** a)) ** (1.0 / a)
            worst = max(worst, corr / (norm_f * norm_g))
    return CorrelationCheck(worst, worst <= 1.0 + 1e-12, n_pairs, tuple(ells))


def write_profile_csv(path, profile: HypermixingProfile, ells) -> None:
    """CSV with columns ell, alpha listing the profile on a grid."""
    ells = np.asarray(ells, dtype=float)
    values = profile.alpha(ells) if ells.ndim else [profile.alpha(float(ells))]
    lines = ["ell,alpha"]
    for ell, val in zip(np.atleast_1d(ells), np.atleast_1d(values)):
        lines.append(f"{format_float(ell)},{format_float(val)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
