"""
Samplers for points of C^d and pairs (z, w), plus local refinement.

The default grid is polar per complex coordinate (zero, then radii geometric
from 1e-3 to 1e3 times 24 angles). Sample order is the order of the arrays
returned here; checks break ties on it. Refinement runs Nelder-Mead on the
real coordinates of the minimiser and a bounded scalar search on the
lambda angle.
"""

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Tuple, Union

import numpy as np
from scipy import optimize

from src.errors import InvalidInputError
from src.log_utils import get_logger

logger = get_logger(__name__)

# (z, w) pairs beyond this are subsampled deterministically
MAX_PAIRS = 250_000

NEAR_KERNEL_EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
NEAR_KERNEL_ANGLES = 24


@dataclass(frozen=True)
class GridSampler:
    r_min: float = 1e-3
    r_max: float = 1e3
    radial: int = 13
    angular: int = 24
    include_zero: bool = True
    max_points: int = 4096

    def __post_init__(self):
        if not (0 < self.r_min <= self.r_max) or self.radial < 1 or self.angular < 1:
            raise InvalidInputError(f"bad grid sampler {self}")

    @property
    def kind(self) -> str:
        return "grid"

    def coordinate_grid(self) -> np.ndarray:
        radii = np.geomspace(self.r_min, self.r_max, self.radial)
        angles = 2 * np.pi * np.arange(self.angular) / self.angular
        ring = (radii[:, None] * np.exp(1j * angles[None, :])).reshape(-1)
        return np.concatenate([[0j], ring]) if self.include_zero else ring

    def points(self, d: int) -> np.ndarray:
        """All grid points of C^d as columns, shape (d, N)"""
        grid = self.coordinate_grid()
        if grid.size ** d <= self.max_points:
            return np.array(list(itertools.product(grid, repeat=d)), dtype=complex).T.reshape(d, -1)
        # per-coordinate product too large: deterministic subsample
        rng = np.random.default_rng(0)
        return grid[rng.integers(0, grid.size, size=(d, self.max_points))]

    def pairs(self, d: int) -> Tuple[np.ndarray, np.ndarray]:
        return _all_pairs(self.points(d))

    def to_dict(self) -> Dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class RandomSampler:
    count: int = 4096
    seed: int = 0
    r_min: float = 1e-3
    r_max: float = 1e3

    def __post_init__(self):
        if self.count < 1 or not (0 < self.r_min <= self.r_max):
            raise InvalidInputError(f"bad random sampler {self}")

    @property
    def kind(self) -> str:
        return "random"

    def _draw(self, rng: np.random.Generator, d: int) -> np.ndarray:
        radii = np.exp(rng.uniform(math.log(self.r_min), math.log(self.r_max), (d, self.count)))
        return radii * np.exp(2j * np.pi * rng.random((d, self.count)))

    def points(self, d: int) -> np.ndarray:
        return self._draw(np.random.default_rng([self.seed, d]), d)

    def pairs(self, d: int) -> Tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng([self.seed, d, 2])
        return self._draw(rng, d), self._draw(rng, d)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, **asdict(self)}


Sampler = Union[GridSampler, RandomSampler]


def _all_pairs(P: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    N = P.shape[1]
    if N * N <= MAX_PAIRS:
        zi, wi = np.divmod(np.arange(N * N), N)
    else:
        rng = np.random.default_rng(1)
        zi = rng.integers(0, N, MAX_PAIRS)
        wi = rng.integers(0, N, MAX_PAIRS)
    return P[:, zi], P[:, wi]


def parse_sampler(text: str) -> Sampler:
    """
    Parse 'grid' / 'grid:r_max=100,radial=9' / 'random:count=5000,seed=7'

    Raises:
        InvalidInputError: unknown kind or field
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    cls = {"grid": GridSampler, "random": RandomSampler}.get(kind)
    if cls is None:
        raise InvalidInputError(f"unknown sampler {kind!r}; use grid or random")
    fields = cls.__dataclass_fields__
    kwargs = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in fields:
            raise InvalidInputError(f"bad sampler field {item!r} for {kind}")
        target = fields[key].type
        try:
            if target in (bool, "bool"):
                kwargs[key] = value.strip().lower() in ("1", "true", "yes")
            elif target in (int, "int"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        except ValueError:
            raise InvalidInputError(f"bad value in sampler field {item!r}")
    return cls(**kwargs)


def near_kernel_probes(Z: np.ndarray, lam: complex) -> Tuple[np.ndarray, np.ndarray]:
    """
    Points w = lam * z * (1 + eps e^{i theta}) close to the kernel {(a, lam a)} of Id - E_lam

    Returns:
        Tuple of (Z repeated, W), each of shape (d, N * len(eps) * angles)
    """
    thetas = 2 * np.pi * np.arange(NEAR_KERNEL_ANGLES) / NEAR_KERNEL_ANGLES
    factors = (1.0 + np.asarray(NEAR_KERNEL_EPS)[:, None] * np.exp(1j * thetas)[None, :]).reshape(-1)
    Zr = np.repeat(Z, factors.size, axis=1)
    W = lam * Zr * np.tile(factors, Z.shape[1])[None, :]
    return Zr, W


def to_real(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.concatenate([v.real, v.imag])


def from_real(x: np.ndarray) -> np.ndarray:
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def refine_point(objective: Callable[[np.ndarray], float], start: np.ndarray,
                 maxiter: int = 400) -> Tuple[np.ndarray, float]:
    """
    Nelder-Mead over the real coordinates of a complex vector

    Returns:
        Tuple of (best complex vector, objective value); the start is kept if nothing better is found
    """
    start = np.asarray(start, dtype=complex).reshape(-1)
    best_value = objective(start)

    def real_objective(x: np.ndarray) -> float:
        value = objective(from_real(x))
        return value if np.isfinite(value) else 1e300

    scale = max(1e-6, float(np.abs(start).max()))
    x0 = to_real(start)
    simplex = np.vstack([x0] + [x0 + 0.05 * scale * np.eye(x0.size)[i] for i in range(x0.size)])
    result = optimize.minimize(real_objective, x0=x0, method="Nelder-Mead",
                               options={"maxiter": maxiter, "xatol": 1e-10, "fatol": 1e-14,
                                        "initial_simplex": simplex})
    if result.fun < best_value:
        return from_real(result.x), float(result.fun)
    return start, best_value


def refine_angle(objective: Callable[[float], float], center: float, half_width: float) -> Tuple[float, float]:
    """Bounded scalar search for an angle in [center - half_width, center + half_width]"""
    best = (center, objective(center))
    result = optimize.minimize_scalar(objective, bounds=(center - half_width, center + half_width),
                                      method="bounded", options={"xatol": 1e-12})
    if result.success and result.fun < best[1]:
        return float(result.x), float(result.fun)
    return best
