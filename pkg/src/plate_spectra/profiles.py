"""Rotationally symmetric Young's-modulus perturbation profiles.

A profile is a radial function f: [0, inf) -> [0, 1] vanishing beyond the
support radius ``a``. Everything downstream only sees it through the
moments

    f_t  = int_0^1 f(a r) r^(t-3) dr      (t >= 3)
    ft_k = int_0^1 f(a r) r^(2k+1) dr     (k >= 0),  ft_k == f_(2k+4).

Disk and annulus moments are closed form. The bump and tabulated kinds
go through adaptive quadrature; for t > 200 the substitution
r = exp(-s/(t-2)) flattens the boundary layer at r = 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np

from .errors import DomainError
from .numerics import Interval, integrate

__all__ = [
    "RadialProfile",
    "disk",
    "annulus",
    "bump",
    "tabulated",
    "read_table",
    "parse_profile",
    "moment_f_t",
    "moment_ftilde_k",
]

MOMENT_RTOL = 1e-12
LARGE_T = 200.0


@dataclass(frozen=True)
class RadialProfile:
    """Immutable radial profile.

    ``params`` holds (t1, t2) for an annulus; ``rho``/``values`` hold the
    samples of a tabulated profile (linear interpolation, zero beyond the
    last sample).
    """

    kind: str
    a: float
    params: tuple = ()
    rho: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"support radius a={self.a} must be positive and finite")
        if self.kind == "annulus":
            t1, t2 = self.params
            if not 0.0 <= t1 < t2 <= 1.0:
                raise DomainError(f"annulus needs 0 <= t1 < t2 <= 1, got ({t1}, {t2})")
        elif self.kind == "table":
            rho = np.asarray(self.rho, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if rho.size < 2 or rho.size != vals.size:
                raise DomainError("table needs at least two (rho, f) samples")
            if np.any(np.diff(rho) <= 0) or rho[0] < 0:
                raise DomainError("table rho must be nonnegative and strictly increasing")
            if np.any(vals < 0) or np.any(vals > 1):
                raise DomainError("table values must lie in [0, 1]")
            if not np.any(vals > 0):
                raise DomainError("profile vanishes almost everywhere")
        elif self.kind not in ("disk", "bump"):
            raise DomainError(f"unknown profile kind {self.kind!r}")

    def __call__(self, rho):
        """Evaluate f at radius ``rho`` (scalar or array)."""
        x = np.asarray(rho, dtype=float) / self.a
        out = self._unit(x)
        return float(out) if np.ndim(out) == 0 else out

    def _unit(self, x):
        """f(a x), vectorised."""
        x = np.asarray(x, dtype=float)
        if self.kind == "disk":
            return np.where(x <= 1.0, 1.0, 0.0)
        if self.kind == "annulus":
            t1, t2 = self.params
            return np.where((x >= t1) & (x <= t2), 1.0, 0.0)
        if self.kind == "bump":
            y = np.clip(1.0 - x * x, 1e-300, None)
            return np.where(x < 1.0, np.exp(1.0 - 1.0 / y), 0.0)
        rho = np.asarray(self.rho) / self.a
        vals = np.asarray(self.values)
        return np.where(x <= rho[-1], np.interp(x, rho, vals), 0.0)

    def _breaks(self) -> list[float]:
        if self.kind == "annulus":
            return list(self.params)
        if self.kind == "table":
            return [r / self.a for r in self.rho]
        return []

    @property
    def spec(self) -> str:
        """The profile in the command-line grammar."""
        if self.kind == "disk":
            return f"disk:a={self.a!r}"
        if self.kind == "annulus":
            return f"annulus:a={self.a!r},t1={self.params[0]!r},t2={self.params[1]!r}"
        if self.kind == "bump":
            return f"bump:a={self.a!r}"
        return f"table:a={self.a!r},n={len(self.rho)}"

    def moment(self, t: float) -> float:
        return _moment(self, float(t))

    def log_moment(self, t: float) -> float:
        """ln f_t, stable for large t on the closed-form kinds."""
        t = float(t)
        if t < 3:
            raise DomainError(f"moment order t={t} < 3")
        if self.kind == "disk":
            return -math.log(t - 2.0)
        if self.kind == "annulus":
            t1, t2 = self.params
            p = t - 2.0
            hi = p * math.log(t2)
            if t1 == 0.0:
                return hi - math.log(p)
            lo = p * math.log(t1)
            return hi + math.log1p(-math.exp(lo - hi)) - math.log(p)
        return math.log(_moment(self, t))

    def ftilde(self, k: int) -> float:
        return _ftilde(self, int(k))

    def ftilde_mp(self, k: int) -> mpmath.mpf:
        """ft_k at the current mpmath precision (exact for disk/annulus)."""
        if self.kind == "disk":
            return mpmath.mpf(1) / (2 * k + 2)
        if self.kind == "annulus":
            t1, t2 = (mpmath.mpf(repr(v)) for v in self.params)
            return (t2 ** (2 * k + 2) - t1 ** (2 * k + 2)) / (2 * k + 2)
        return mpmath.mpf(_ftilde(self, int(k)))


def _quad_moment(profile: RadialProfile, power: float) -> float:
    """int_0^1 f(a r) r^power dr by adaptive quadrature."""
    f = profile._unit
    brk = profile._breaks()
    t = power + 3.0
    if t > LARGE_T:
        p = t - 2.0

        def g(s):
            return float(f(math.exp(-s / p))) * math.exp(-s)

        pts = [-p * math.log(b) for b in brk if 0.0 < b < 1.0]
        return integrate(g, Interval(0.0, math.inf), MOMENT_RTOL, points=pts) / p

    def h(r):
        return float(f(r)) * r**power

    return integrate(h, Interval(0.0, 1.0), MOMENT_RTOL, points=brk)


@lru_cache(maxsize=4096)
def _moment(profile: RadialProfile, t: float) -> float:
    if t < 3:
        raise DomainError(f"moment order t={t} < 3")
    if profile.kind == "disk":
        return 1.0 / (t - 2.0)
    if profile.kind == "annulus":
        t1, t2 = profile.params
        p = t - 2.0
        return (t2**p - t1**p) / p
    return _quad_moment(profile, t - 3.0)


@lru_cache(maxsize=4096)
def _ftilde(profile: RadialProfile, k: int) -> float:
    if k < 0:
        raise DomainError(f"moment index k={k} < 0")
    if profile.kind == "disk":
        return 1.0 / (2 * k + 2)
    if profile.kind == "annulus":
        t1, t2 = profile.params
        return (t2 ** (2 * k + 2) - t1 ** (2 * k + 2)) / (2 * k + 2)
    if 2 * k + 4 > LARGE_T:
        return _quad_moment(profile, 2.0 * k + 1.0)
    # u = r^2: an integrand independent of the f_t route
    f = profile._unit
    brk = [b * b for b in profile._breaks()]

    def h(u):
        return 0.5 * float(f(math.sqrt(u))) * u**k

    return integrate(h, Interval(0.0, 1.0), MOMENT_RTOL, points=brk)


def moment_f_t(profile: RadialProfile, t: float) -> float:
    """f_t = int_0^1 f(a r) r^(t-3) dr for t >= 3."""
    return profile.moment(t)


def moment_ftilde_k(profile: RadialProfile, k: int) -> float:
    """ft_k = int_0^1 f(a r) r^(2k+1) dr for k >= 0."""
    return profile.ftilde(k)


def disk(a: float = 1.0) -> RadialProfile:
    return RadialProfile("disk", float(a))


def annulus(a: float = 1.0, t1: float = 0.5, t2: float = 1.0) -> RadialProfile:
    return RadialProfile("annulus", float(a), (float(t1), float(t2)))


def bump(a: float = 1.0) -> RadialProfile:
    """C-infinity bump exp(1 - 1/(1 - (rho/a)^2)) with f(0) = 1."""
    return RadialProfile("bump", float(a))


def tabulated(rho, values) -> RadialProfile:
    """Profile from samples; ``a`` is the radius where the samples end or reach zero."""
    rho = [float(r) for r in rho]
    values = [float(v) for v in values]
    last = max(i for i, v in enumerate(values) if v > 0)
    a = rho[min(last + 1, len(rho) - 1)]
    return RadialProfile("table", a, rho=tuple(rho), values=tuple(values))


def read_table(path) -> RadialProfile:
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["rho", "f"]:
            raise DomainError(f"{path}: expected CSV header 'rho,f'")
        rows = [(float(r["rho"]), float(r["f"])) for r in reader]
    return tabulated([r for r, _ in rows], [v for _, v in rows])


def parse_profile(spec: str) -> RadialProfile:
    """Parse ``disk:a=1``, ``annulus:a=1,t1=0.5,t2=1``, ``bump:a=1`` or ``table:path=f.csv``."""
    kind, _, rest = spec.strip().partition(":")
    kv = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise DomainError(f"malformed profile option {item!r}")
        kv[key.strip()] = val.strip()
    builders = {
        "disk": lambda: disk(float(kv.pop("a", 1.0))),
        "annulus": lambda: annulus(
            float(kv.pop("a", 1.0)), float(kv.pop("t1")), float(kv.pop("t2", 1.0))
        ),
        "bump": lambda: bump(float(kv.pop("a", 1.0))),
        "table": lambda: read_table(kv.pop("path")),
    }
    if kind not in builders:
        raise DomainError(f"unknown profile kind {kind!r}")
    try:
        profile = builders[kind]()
    except KeyError as exc:
        raise DomainError(f"profile {spec!r} is missing option {exc}") from None
    if kv:
        raise DomainError(f"unknown profile options {sorted(kv)} in {spec!r}")
    return profile
