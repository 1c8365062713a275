"""
Finite Measure Spaces
Points with strictly positive weights, complex functions on them, integration
and L^p norms. On a finite space every null set is empty, so "almost everywhere"
statements become exact identities.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from src.errors import InvalidInputError

Number = Union[int, float, complex]


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """Points 0..n-1 with masses weights[i] > 0 (sigma-algebra: the full power set)."""
    weights: np.ndarray

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def matches(self, other: "FiniteMeasureSpace") -> bool:
        """Same points with the same masses"""
        return other is self or np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        return f"FiniteMeasureSpace(n={self.n}, weights={self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class CFunction:
    """A complex function on a finite measure space, stored as its value vector."""
    space: FiniteMeasureSpace
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.shape[0] != self.space.n:
            raise InvalidInputError(
                f"function has {values.shape[0]} values but the space has {self.space.n} points"
            )
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def constant(cls, space: FiniteMeasureSpace, c: Number = 1.0) -> "CFunction":
        return cls(space, np.full(space.n, c, dtype=complex))

    @classmethod
    def indicator(cls, space: FiniteMeasureSpace, points: Union[int, Sequence[int]]) -> "CFunction":
        values = np.zeros(space.n, dtype=complex)
        values[np.atleast_1d(points)] = 1.0
        return cls(space, values)

    def _check_same_space(self, other: "CFunction") -> None:
        if not other.space.matches(self.space):
            raise InvalidInputError("functions live on different spaces")

    def __add__(self, other: "CFunction") -> "CFunction":
        self._check_same_space(other)
        return CFunction(self.space, self.values + other.values)

    def __sub__(self, other: "CFunction") -> "CFunction":
        self._check_same_space(other)
        return CFunction(self.space, self.values - other.values)

    def __mul__(self, scalar: Number) -> "CFunction":
        return CFunction(self.space, self.values * scalar)

    __rmul__ = __mul__

    def conj(self) -> "CFunction":
        return CFunction(self.space, np.conj(self.values))

    def abs(self) -> "CFunction":
        return CFunction(self.space, np.abs(self.values))


def make_space(weights: Sequence[float]) -> FiniteMeasureSpace:
    """
    Build a finite measure space from point masses

    Args:
        weights: strictly positive, finite point masses

    Returns:
        FiniteMeasureSpace with the weights stored exactly as given
    """
    try:
        arr = np.array(weights, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"weights must be real numbers: {e}")
    if arr.size == 0:
        raise InvalidInputError("a measure space needs at least one point")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("weights must be finite")
    if np.any(arr <= 0):
        bad = int(np.flatnonzero(arr <= 0)[0])
        raise InvalidInputError(f"weight {bad} is {arr[bad]}; zero-mass points are not allowed")
    return FiniteMeasureSpace(_frozen(arr))


def z2_space() -> FiniteMeasureSpace:
    """The Bernoulli (1/2, 1/2) two-point probability space"""
    return make_space([0.5, 0.5])


def as_function(space: FiniteMeasureSpace, f: Union[CFunction, Sequence[Number]]) -> CFunction:
    """Accept either a CFunction on space or a raw value sequence"""
    if isinstance(f, CFunction):
        if not f.space.matches(space):
            raise InvalidInputError("function lives on a different space")
        return f
    return CFunction(space, f)


def _fsum_complex(terms: np.ndarray) -> complex:
    # fsum is correctly rounded, hence independent of summation order
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def integrate(space: FiniteMeasureSpace, f: Union[CFunction, Sequence[Number]]) -> complex:
    """Integral of f against the point masses"""
    f = as_function(space, f)
    return _fsum_complex(space.weights * f.values)


def duality_pair(space: FiniteMeasureSpace, f: Union[CFunction, Sequence[Number]],
                 g: Union[CFunction, Sequence[Number]]) -> complex:
    """Bilinear pairing sum_i mu_i f_i g_i. No conjugation is applied."""
    f = as_function(space, f)
    g = as_function(space, g)
    return _fsum_complex(space.weights * f.values * g.values)


def sesquilinear_pair(space: FiniteMeasureSpace, f: Union[CFunction, Sequence[Number]],
                      g: Union[CFunction, Sequence[Number]]) -> complex:
    """The L^2 inner product sum_i mu_i f_i conj(g_i)"""
    g = as_function(space, g)
    return duality_pair(space, f, g.conj())


def dual_exponent(p: float) -> float:
    """Hoelder conjugate of p, with 1 <-> infinity"""
    p = _check_exponent(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _check_exponent(p: float) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise InvalidInputError(f"exponent must be a real number, got {p!r}")
    if math.isnan(p) or p < 1.0:
        raise InvalidInputError(f"exponent must lie in [1, inf], got {p}")
    return p


def lp_norm(space: FiniteMeasureSpace, f: Union[CFunction, Sequence[Number]], p: float) -> float:
    """
    L^p norm of f; p = inf gives max |f_i| (every point has positive mass).
    Values are rescaled by max |f_i| before powering to avoid overflow.
    """
    p = _check_exponent(p)
    f = as_function(space, f)
    mags = np.abs(f.values)
    top = float(mags.max())
    if math.isinf(p) or top == 0.0:
        return top
    scaled = math.fsum(space.weights * (mags / top) ** p)
    return top * scaled ** (1.0 / p)
