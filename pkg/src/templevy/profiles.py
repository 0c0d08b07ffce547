"""Radial tempering profiles.

A profile is the bounded nonincreasing multiplier q(s) applied to the stable
radial density s^(-1-alpha).  The built-in kinds cover constant (pure stable),
polynomial tempering (1+s)^(-m), exponential tempering (1+s)^a exp(-c s),
hard truncation, and the relativistic Bessel-type kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedProfileError

__all__ = [
    "RadialProfile",
    "Constant",
    "PolyTempered",
    "ExpTempered",
    "Truncated",
    "Relativistic",
    "Custom",
    "profile_eval",
    "doubling_constant",
    "tail_index",
    "relativistic_kernel",
    "profile_from_dict",
    "profile_to_dict",
]


def relativistic_kernel(d: int, alpha: float, s):
    """Bessel-type kernel of the relativistic stable Levy density.

    K(s) = s^(d+alpha) * int_0^inf exp(-u - s^2/(4u)) u^((-2-d-alpha)/2) du,
    evaluated through the modified Bessel function of the second kind:
    K(s) = 2^(1+nu) s^nu K_nu(s) with nu = (d+alpha)/2.  The scaled Bessel
    routine keeps the evaluation stable for large s (underflows cleanly to 0
    past s ~ 700 where exp(-s) leaves double range).
    """
    nu = 0.5 * (d + alpha)
    s = np.asarray(s, dtype=float)
    return 2.0 ** (1.0 + nu) * s**nu * special.kve(nu, s) * np.exp(-s)


@dataclass(frozen=True)
class RadialProfile:
    """Base class; subclasses implement ``value`` on positive arrays."""

    #: whether q satisfies the doubling bound q(s) <= K q(2s)
    doubling = True

    def value(self, s: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.value(s)


@dataclass(frozen=True)
class Constant(RadialProfile):
    c: float = 1.0

    def value(self, s):
        return np.full_like(s, self.c)


@dataclass(frozen=True)
class PolyTempered(RadialProfile):
    """q(s) = (1+s)^(-m)."""

    m: float

    def value(self, s):
        return (1.0 + s) ** (-self.m)


@dataclass(frozen=True)
class ExpTempered(RadialProfile):
    """q(s) = (1+s)^a exp(-c1 s).

    c2 records the (possibly slacker) upper decay rate used by envelope
    specifications; evaluation always uses c1.
    """

    #: q(s)/q(2s) = e^(c1 s) (1+s)^{-a}... is unbounded: not doubling
    doubling = False

    a: float = 0.0
    c1: float = 1.0
    c2: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.c2 is None:
            object.__setattr__(self, "c2", self.c1)
        if self.c1 <= 0 or self.c2 <= 0 or self.a < 0:
            raise DomainError("ExpTempered requires a >= 0 and c1, c2 > 0")

    def value(self, s):
        return (1.0 + s) ** self.a * np.exp(-self.c1 * s)


@dataclass(frozen=True)
class Truncated(RadialProfile):
    """q(s) = 1 for s <= s0, 0 otherwise.  Not doubling."""

    s0: float
    doubling = False

    def value(self, s):
        return np.where(s <= self.s0, 1.0, 0.0)


@dataclass(frozen=True)
class Relativistic(RadialProfile):
    """The kernel K_{d,alpha}(s) of the relativistic alpha-stable process."""

    #: decays like e^(-s): not doubling
    doubling = False

    d: int
    alpha: float

    def value(self, s):
        return relativistic_kernel(self.d, self.alpha, s)


@dataclass(frozen=True, eq=False)
class Custom(RadialProfile):
    """User-supplied profile; compared by identity."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"
    declares_doubling: bool = True

    @property
    def doubling(self):  # type: ignore[override]
        return self.declares_doubling

    def value(self, s):
        return np.asarray(self.func(s), dtype=float)


def profile_eval(q: RadialProfile, s):
    """Evaluate q(s) for s > 0; raises DomainError outside the domain."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("profile argument must be positive")
    out = q(arr)
    if np.isscalar(s) or arr.ndim == 0:
        return float(out)
    return out


def doubling_constant(q: RadialProfile, s_min: float, s_max: float, n: int = 400):
    """Measure the doubling constant K = sup q(s)/q(2s) on a log grid.

    Returns (K, eta) with eta = log2 K.  Profiles that vanish inside
    [s_min, 2 s_max] (hard truncation) are rejected.
    """
    if not (0 < s_min < s_max):
        raise DomainError("need 0 < s_min < s_max")
    grid = np.exp(np.linspace(math.log(s_min), math.log(s_max), n))
    num = q(grid)
    den = q(2.0 * grid)
    if np.any(den <= 0) or np.any(num <= 0):
        raise UnsupportedProfileError(
            "profile vanishes on the requested range; doubling undefined"
        )
    K = float(np.max(num / den))
    K = max(K, 1.0)
    return K, math.log2(K)


def tail_index(q: RadialProfile, alpha: float) -> float:
    """Largest admissible beta in [alpha, 2] with s^(beta-alpha-1) q(s) integrable.

    Exponential-type decay (including truncation and the relativistic kernel)
    admits beta = 2; polynomial tempering (1+s)^(-m) admits anything below
    alpha + m (a tiny guard keeps the integral strictly convergent); a constant
    profile admits only beta = alpha.
    """
    guard = 1e-9
    if isinstance(q, (ExpTempered, Truncated, Relativistic)):
        return 2.0
    if isinstance(q, PolyTempered):
        return min(2.0, alpha + q.m - guard)
    if isinstance(q, Constant):
        return alpha
    # custom profile: probe the decay empirically on a log grid
    s = np.exp(np.linspace(0.0, math.log(1e6), 200))
    v = q(s)
    pos = v > 0
    if pos.sum() < 10:
        return 2.0
    slope = np.polyfit(np.log(s[pos]), np.log(v[pos]), 1)[0]
    return min(2.0, max(alpha, alpha - slope - guard))


_KINDS = {
    "constant": Constant,
    "poly": PolyTempered,
    "exp": ExpTempered,
    "truncated": Truncated,
    "relativistic": Relativistic,
}


def profile_to_dict(q: RadialProfile) -> dict:
    if isinstance(q, Constant):
        return {"kind": "constant", "value": q.c}
    if isinstance(q, PolyTempered):
        return {"kind": "poly", "m": q.m}
    if isinstance(q, ExpTempered):
        return {"kind": "exp", "a": q.a, "c1": q.c1, "c2": q.c2}
    if isinstance(q, Truncated):
        return {"kind": "truncated", "s0": q.s0}
    if isinstance(q, Relativistic):
        return {"kind": "relativistic", "d": q.d, "alpha": q.alpha}
    raise DomainError(f"profile {q!r} has no JSON representation")


def profile_from_dict(spec: dict) -> RadialProfile:
    kind = spec.get("kind")
    if kind == "constant":
        return Constant(float(spec.get("value", 1.0)))
    if kind == "poly":
        return PolyTempered(float(spec["m"]))
    if kind == "exp":
        return ExpTempered(
            float(spec.get("a", 0.0)),
            float(spec.get("c1", 1.0)),
            float(spec["c2"]) if "c2" in spec else None,
        )
    if kind == "truncated":
        return Truncated(float(spec["s0"]))
    if kind == "relativistic":
        return Relativistic(int(spec["d"]), float(spec["alpha"]))
    raise DomainError(f"unknown profile kind {kind!r}")
