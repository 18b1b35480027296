"""Lévy bases with a Gaussian part and a finite (compound Poisson) jump measure.

A basis is described by its characteristic triplet ``(a, nu, gamma)`` with
``nu = sum_i mass_i * delta_{size_i}``. The law of ``L(A)`` depends on ``A``
only through its volume ``v``::

    E exp(i z L(A)) = exp(v * psi(z)),
    psi(z) = i gamma z - a z**2 / 2
             + sum_i mass_i (exp(i size_i z) - 1 - i size_i z 1{|size_i| <= 1}).

Because ``nu`` is finite the increment law is simulated exactly, with no
small-jump truncation.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristic triplet restricted to finite jump measures.

    Parameters
    ----------
    gaussian_var
        Gaussian variance density ``a >= 0``.
    drift
        The ``gamma`` of the triplet (truncation function ``1{|x| <= 1}``).
    jumps
        Pairs ``(mass, size)`` with ``mass > 0`` and ``size != 0``.
    """

    gaussian_var: float = 0.0
    drift: float = 0.0
    jumps: tuple = ()

    def __post_init__(self):
        jumps = tuple((float(m), float(s)) for m, s in self.jumps)
        object.__setattr__(self, "gaussian_var", float(self.gaussian_var))
        object.__setattr__(self, "drift", float(self.drift))
        object.__setattr__(self, "jumps", jumps)
        if not math.isfinite(self.gaussian_var) or self.gaussian_var < 0:
            raise DomainError(f"gaussian_var must be finite and >= 0, got {self.gaussian_var}")
        if not math.isfinite(self.drift):
            raise DomainError("drift must be finite")
        for mass, size in jumps:
            if not (math.isfinite(mass) and mass > 0):
                raise DomainError(f"jump mass must be finite and > 0, got {mass}")
            if not math.isfinite(size) or size == 0:
                raise DomainError(f"jump size must be finite and nonzero, got {size}")

    @property
    def total_jump_mass(self):
        return sum(m for m, _ in self.jumps)

    def to_dict(self):
        return {
            "gaussian_var": self.gaussian_var,
            "drift": self.drift,
            "jumps": [{"mass": m, "size": s} for m, s in self.jumps],
        }

    @classmethod
    def from_dict(cls, data):
        jumps = tuple((j["mass"], j["size"]) for j in data.get("jumps", ()))
        return cls(data.get("gaussian_var", 0.0), data.get("drift", 0.0), jumps)

    def centered(self):
        """Same triplet with the drift shifted so that ``E L([0,1]^d) = 0``."""
        m = derive_moments(self).mean
        return LevyTriplet(self.gaussian_var, self.drift - m, self.jumps)


def gaussian(variance=1.0, mean=0.0):
    return LevyTriplet(variance, mean, ())


def poisson(rate=1.0, size=1.0):
    """Compound Poisson basis with a single atom; the drift makes it uncompensated."""
    drift = rate * size if abs(size) <= 1 else 0.0
    return LevyTriplet(0.0, drift, ((rate, size),))


@dataclass(frozen=True)
class MomentSet:
    """Moments of ``L([0,1]^d)``: mean, variance, fourth central moment and ``eta``."""

    mean: float
    sigma2: float
    mu4: float
    kappa3: float = 0.0
    kappa4: float = 0.0

    @property
    def eta(self):
        """``sigma**-4 E L^4``; only defined for centered bases with positive variance."""
        if self.mean != 0:
            raise DomainError("eta is defined only for mean-zero bases (E L([0,1]^d) = 0)")
        if self.sigma2 <= 0:
            raise DomainError("eta is undefined for a basis with zero variance")
        return self.mu4 / self.sigma2**2


def derive_moments(triplet):
    """Exact moments from the cumulants of the compound Poisson plus Gaussian law."""
    mean = triplet.drift + sum(m * s for m, s in triplet.jumps if abs(s) > 1)
    k2 = triplet.gaussian_var + sum(m * s**2 for m, s in triplet.jumps)
    k3 = sum(m * s**3 for m, s in triplet.jumps)
    k4 = sum(m * s**4 for m, s in triplet.jumps)
    return MomentSet(mean=mean, sigma2=k2, mu4=k4 + 3.0 * k2**2, kappa3=k3, kappa4=k4)


def characteristic_exponent(triplet, z):
    """``psi(z)``; accepts scalars or arrays."""
    z = np.asarray(z, dtype=np.float64)
    out = 1j * triplet.drift * z - 0.5 * triplet.gaussian_var * z**2
    for m, s in triplet.jumps:
        comp = s if abs(s) <= 1 else 0.0
        out = out + m * (np.exp(1j * s * z) - 1.0 - 1j * comp * z)
    return complex(out) if out.ndim == 0 else out


def sample_increments(triplet, volume, count, stream):
    """Draw ``count`` i.i.d. copies of ``L(A)`` with ``lambda(A) = volume``.

    ``count`` may be an int or a shape tuple.
    """
    volume = float(volume)
    if not volume > 0:
        raise DomainError(f"volume must be > 0, got {volume}")
    shape = (count,) if np.ndim(count) == 0 else tuple(count)
    compensator = sum(m * s for m, s in triplet.jumps if abs(s) <= 1)
    out = np.full(shape, (triplet.drift - compensator) * volume, dtype=np.float64)
    if triplet.gaussian_var > 0:
        out += stream.normal(0.0, math.sqrt(triplet.gaussian_var * volume), size=shape)
    for m, s in triplet.jumps:
        out += s * stream.poisson(m * volume, size=shape)
    return out
