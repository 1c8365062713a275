"""
Semigroups, Resolvents and the Angle of Analyticity
For a symmetric Dunford-Schwartz T the generator A = Id - T is bounded, so
S_t = e^{-tA} is computed directly (Pade scaling and squaring) and every
domain condition is vacuous. The angle part searches the scalar function
zeta(z) = (z - 1)(conj(z)|z|^{p-2} - 1) for its largest argument and compares
pi/2 - sup |arg zeta| with the closed form arccos|1 - 2/p|.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize, special

from src.bilinear import phase_field
from src.errors import InvalidInputError, NumericFailure
from src.forms import CheckReport, complex_list
from src.log_utils import get_logger
from src.operators import DEFAULT_TOL, KernelOperator, classify, identity, l1_norm, linf_norm
from src.parallel import deterministic_min, map_ordered
from src.space import CFunction, as_function, duality_pair, lp_norm

logger = get_logger(__name__)

# |zeta| below this is treated as a zero of zeta (arg undefined)
ZETA_FLOOR = 1e-9

DEFAULT_QUAD_POINTS = 64


@dataclass(frozen=True, eq=False)
class GeneratorInstance:
    T: KernelOperator
    A: np.ndarray

    @property
    def space(self):
        return self.T.space

    @property
    def n(self) -> int:
        return self.T.n


def make_generator(T: KernelOperator, tol: float = DEFAULT_TOL) -> GeneratorInstance:
    """
    A = Id - T for a symmetric Dunford-Schwartz T

    Raises:
        InvalidInputError: T is not symmetric or not Dunford-Schwartz
    """
    found = classify(T, tol)
    if not (found.symmetric and found.dunford_schwartz):
        failed = ", ".join(sorted(found.witnesses))
        logger.error(f"❌ generator needs a symmetric Dunford-Schwartz operator (failed: {failed})")
        raise InvalidInputError(f"operator is not symmetric Dunford-Schwartz (failed: {failed})")
    A = np.eye(T.n, dtype=complex) - T.entries
    A.setflags(write=False)
    return GeneratorInstance(T, A)


# ---------------------------------------------------------------------------
# Matrix exponential
# ---------------------------------------------------------------------------

PADE_DEGREES = (3, 5, 7, 9, 13)
PADE_THETA = (0.01495585217958292, 0.2539398330063230, 0.9504178996162932, 2.097847961257068, 5.371920351148152)


def _pade_coefficients(m: int) -> np.ndarray:
    # b_k = (2m - k)! m! / ((2m)! k! (m - k)!)
    c = [1.0]
    for k in range(1, m + 1):
        c.append(c[-1] * (m - k + 1) / (k * (2 * m - k + 1)))
    return np.array(c)


def _pade(M: np.ndarray, m: int) -> np.ndarray:
    n = M.shape[0]
    c = _pade_coefficients(m)
    eye = np.eye(n, dtype=M.dtype)
    M2 = M @ M
    if m == 13:
        M4 = M2 @ M2
        M6 = M2 @ M4
        U = M @ (M6 @ (c[13] * M6 + c[11] * M4 + c[9] * M2) + c[7] * M6 + c[5] * M4 + c[3] * M2 + c[1] * eye)
        V = M6 @ (c[12] * M6 + c[10] * M4 + c[8] * M2) + c[6] * M6 + c[4] * M4 + c[2] * M2 + c[0] * eye
    else:
        powers = [eye, M2]
        for _ in range(2, (m + 1) // 2 + 1):
            powers.append(powers[-1] @ M2)
        U = M @ sum(c[k] * powers[k // 2] for k in range(m, 0, -2))
        V = sum(c[k] * powers[k // 2] for k in range(m - 1, -1, -2))
    return linalg.solve(V - U, V + U)


def expm_pade(M: np.ndarray) -> np.ndarray:
    """e^M by scaling and squaring with a degree 3..13 Pade core chosen by the 1-norm"""
    M = np.asarray(M, dtype=complex)
    norm = float(np.abs(M).sum(axis=0).max()) if M.size else 0.0
    if norm == 0.0:
        return np.eye(M.shape[0], dtype=complex)
    for m, theta in zip(PADE_DEGREES, PADE_THETA):
        if norm <= theta:
            return _pade(M, m)
    t, s = math.frexp(norm / PADE_THETA[-1])
    s = max(0, s - (t == 0.5))
    E = _pade(M / 2.0 ** s, 13)
    for _ in range(s):
        E = E @ E
    return E


def exp_semigroup(G: GeneratorInstance, t: float) -> KernelOperator:
    """S_t = e^{-tA}; S_0 is the identity exactly"""
    if t < 0 or not math.isfinite(t):
        raise InvalidInputError(f"time must be a finite nonnegative number, got {t}")
    if t == 0:
        return identity(G.space)
    E = expm_pade(-t * G.A)
    if not np.all(np.isfinite(E)):
        raise NumericFailure(f"matrix exponential overflowed at t={t}")
    return KernelOperator(G.space, E)


def exp_semigroup_spectral(G: GeneratorInstance, t: float) -> KernelOperator:
    """Independent oracle: eigen-decomposition of the hermitian D^{1/2} A D^{-1/2}"""
    if t < 0:
        raise InvalidInputError(f"time must be nonnegative, got {t}")
    root = np.sqrt(G.space.weights)
    H = root[:, None] * G.A / root[None, :]
    H = 0.5 * (H + H.conj().T)
    vals, vecs = np.linalg.eigh(H)
    E = (vecs * np.exp(-t * vals)[None, :]) @ vecs.conj().T
    return KernelOperator(G.space, E / root[:, None] * root[None, :])


def spectral_norm_estimate(M: np.ndarray, iters: int = 100, seed: int = 0) -> float:
    """Largest singular value of M by power iteration on M^H M"""
    M = np.asarray(M, dtype=complex)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = M.conj().T @ (M @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        sigma = math.sqrt(norm)
    return sigma


def semigroup_law_defect(G: GeneratorInstance, t: float, s: float) -> float:
    """||S_{t+s} - S_t S_s|| in the largest-row-sum norm"""
    lhs = exp_semigroup(G, t + s).entries
    rhs = exp_semigroup(G, t).entries @ exp_semigroup(G, s).entries
    return float(np.abs(lhs - rhs).sum(axis=1).max())


def contraction_norms(G: GeneratorInstance, t: float) -> Tuple[float, float]:
    """(||S_t||_{L1 -> L1}, ||S_t||_{Linf -> Linf})"""
    S = exp_semigroup(G, t)
    return l1_norm(S), linf_norm(S)


# ---------------------------------------------------------------------------
# Resolvent and bounded approximation
# ---------------------------------------------------------------------------

def resolvent_quadrature(G: GeneratorInstance, f: CFunction, quad_points: int = DEFAULT_QUAD_POINTS) -> np.ndarray:
    """Gauss-Laguerre value of the integral of e^{-t} S_t f over [0, inf)"""
    if quad_points < 8:
        raise InvalidInputError("resolvent quadrature needs at least 8 points")
    f = as_function(G.space, f)
    nodes, weights = special.roots_laguerre(quad_points)
    total = np.zeros(G.n, dtype=complex)
    for t, w in zip(nodes, weights):
        total += w * (exp_semigroup(G, float(t)).entries @ f.values)
    return total


def resolvent_solve(G: GeneratorInstance, f: CFunction) -> np.ndarray:
    """x with (Id + A) x = f; Id + A is invertible since A has spectrum in [0, 2]"""
    f = as_function(G.space, f)
    return linalg.solve(np.eye(G.n) + G.A, f.values)


def resolvent_defect(G: GeneratorInstance, f: CFunction, quad_points: int = DEFAULT_QUAD_POINTS) -> float:
    """max |quadrature - solve| relative to 1 + max |solve|"""
    direct = resolvent_solve(G, f)
    quad = resolvent_quadrature(G, f, quad_points)
    return float(np.abs(quad - direct).max() / (1.0 + np.abs(direct).max()))


def resolvent_check(G: GeneratorInstance, f: CFunction, quad_points: int = DEFAULT_QUAD_POINTS,
                    tol: float = 1e-10) -> bool:
    return resolvent_defect(G, f, quad_points) <= tol


def generator_approx_check(G: GeneratorInstance, g: CFunction, eps_list: Sequence[float],
                           p: float = 2.0) -> List[float]:
    """
    ||(1/eps)(Id - S_eps) g - A g||_p for each eps

    Returns:
        errors in the order of eps_list; they decay like eps ||A^2 g||_p / 2
    """
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidInputError("eps_list must be positive and strictly decreasing")
    g = as_function(G.space, g)
    Ag = G.A @ g.values
    errors = []
    for e in eps:
        approx = (g.values - exp_semigroup(G, e).entries @ g.values) / e
        errors.append(lp_norm(G.space, approx - Ag, p))
    return errors


def first_order_ratios(errors: Sequence[float]) -> List[float]:
    """Successive error ratios; about 1/2 per halving of eps for first-order decay"""
    return [b / a if a > 0 else 0.0 for a, b in zip(errors, errors[1:])]


# ---------------------------------------------------------------------------
# Angle of analyticity
# ---------------------------------------------------------------------------

def phi_p(p: float) -> float:
    """
    arccos|1 - 2/p|, cross-checked against arctan(2 sqrt(p - 1) / |p - 2|)

    Raises:
        InvalidInputError: p <= 1 or not finite
    """
    if not (math.isfinite(p) and p > 1):
        raise InvalidInputError(f"phi_p needs a finite p > 1, got {p}")
    x = abs(1.0 - 2.0 / p)
    phi = math.acos(x)
    if p != 2:
        alt = math.atan(2.0 * math.sqrt(p - 1.0) / abs(p - 2.0))
        conditioning = max(1.0, 1.0 / math.sqrt(1.0 - x * x)) if x < 1 else math.inf
        if abs(phi - alt) > 1e-14 * conditioning:
            raise NumericFailure(f"closed forms of phi_p disagree at p={p}: {phi} vs {alt}")
    return phi


def zeta(z: np.ndarray, p: float) -> np.ndarray:
    """(z - 1)(conj(z)|z|^{p-2} - 1), with conj(z)|z|^{p-2} taken as 0 at z = 0"""
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(mag > 0, np.conj(z) * np.power(np.where(mag > 0, mag, 1.0), p - 2.0), 0.0)
    return (z - 1.0) * (second - 1.0)


def _abs_arg(z: np.ndarray, p: float) -> np.ndarray:
    values = zeta(z, p)
    return np.where(np.abs(values) >= ZETA_FLOOR, np.abs(np.angle(values)), 0.0)


def _in_domain(z: np.ndarray) -> np.ndarray:
    return (np.abs(z) <= 1.0) & (z.imag <= 0.0)


@dataclass
class AngleReport:
    p: float
    phi_closed: float
    phi_numeric: float
    gap: float
    witness_z: complex
    samples: int
    outside_max: float
    sup_arg: float
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "phi_closed": self.phi_closed,
            "phi_numeric": self.phi_numeric,
            "gap": self.gap,
            "witness_z": [self.witness_z.real, self.witness_z.imag],
            "samples": self.samples,
            "sup_arg": self.sup_arg,
            "outside_max": self.outside_max,
            "symmetry_ok": self.outside_max <= self.sup_arg + 1e-3,
            "details": self.details,
        }


def angle_candidates(radial: int = 60, angular: int = 91, approach: int = 40) -> Tuple[np.ndarray, np.ndarray]:
    """
    Search points in |z| <= 1, Im z <= 0

    Returns:
        Tuple of (polar grid, points z = 1 + eps e^{i theta} approaching z = 1)
    """
    radii = np.geomspace(1e-3, 1.0, radial)
    angles = np.linspace(-np.pi, 0.0, angular)
    polar = (radii[:, None] * np.exp(1j * angles[None, :])).reshape(-1)
    eps = np.geomspace(1e-1, 1e-4, approach)
    thetas = np.linspace(np.pi, 1.5 * np.pi, angular)
    near = (1.0 + eps[:, None] * np.exp(1j * thetas[None, :])).reshape(-1)
    return np.concatenate([[0j], polar]), near[_in_domain(near)]


def scalar_angle(p: float, radial: int = 60, angular: int = 91, approach: int = 40,
                 refine_iters: int = 400, seed: int = 0) -> AngleReport:
    """
    pi/2 - sup |arg zeta(z)| over the reduced domain, compared with phi_p

    The constraint family is invariant under z -> conj(z) and, up to a positive
    factor, z -> 1/z, so the search covers |z| <= 1, Im z <= 0; 100 points
    outside that domain are spot-checked (outside_max).
    """
    closed = phi_p(p)
    polar, near = angle_candidates(radial, angular, approach)
    args_polar = _abs_arg(polar, p)
    args_near = _abs_arg(near, p)
    i_polar = int(np.argmax(args_polar))
    i_near = int(np.argmax(args_near))
    options = {"maxiter": refine_iters, "xatol": 1e-12, "fatol": 1e-15}

    if args_near[i_near] >= args_polar[i_polar]:
        start = near[i_near] - 1.0
        x0 = np.array([math.log(abs(start)), float(np.angle(start)) % (2 * np.pi)])

        def objective(v: np.ndarray) -> float:
            z = 1.0 + math.exp(v[0]) * np.exp(1j * v[1])
            if v[0] > 0 or not _in_domain(np.array([z]))[0]:
                return 0.0
            return -float(_abs_arg(np.array([z]), p)[0])

        result = optimize.minimize(objective, x0, method="Nelder-Mead", options=options)
        best_z = complex(1.0 + math.exp(result.x[0]) * np.exp(1j * result.x[1]))
        start_z = near[i_near]
    else:
        def objective(v: np.ndarray) -> float:
            z = complex(v[0], v[1])
            if not _in_domain(np.array([z]))[0]:
                return 0.0
            return -float(_abs_arg(np.array([z]), p)[0])

        start_z = polar[i_polar]
        result = optimize.minimize(objective, np.array([start_z.real, start_z.imag]), method="Nelder-Mead",
                                   options=options)
        best_z = complex(result.x[0], result.x[1])

    best_arg = float(_abs_arg(np.array([best_z]), p)[0])
    start_arg = float(_abs_arg(np.array([start_z]), p)[0])
    if not _in_domain(np.array([best_z]))[0] or best_arg < start_arg:
        best_z, best_arg = complex(start_z), start_arg

    rng = np.random.default_rng(seed)
    outside = np.empty(0, dtype=complex)
    while outside.size < 100:
        r = np.exp(rng.uniform(math.log(1e-3), math.log(10.0), 200))
        z = r * np.exp(2j * np.pi * rng.random(200))
        outside = np.concatenate([outside, z[~_in_domain(z)]])
    outside_max = float(_abs_arg(outside[:100], p).max())

    numeric = math.pi / 2 - best_arg
    report = AngleReport(
        p=p,
        phi_closed=closed,
        phi_numeric=numeric,
        gap=abs(closed - numeric),
        witness_z=best_z,
        samples=int(polar.size + near.size),
        outside_max=outside_max,
        sup_arg=best_arg,
        details={"radial": radial, "angular": angular, "approach": approach, "refine_iters": refine_iters},
    )
    logger.info(f"📊 angle p={p}: closed {closed:.9f} numeric {numeric:.9f} gap {report.gap:.2e}")
    return report


def angle_profile(p: float, phis: Sequence[float], radial: int = 30, angular: int = 61,
                  approach: int = 30) -> List[Dict[str, float]]:
    """min over sampled z and both signs of Re(e^{+-i phi} zeta(z)) / |zeta(z)|, per phi"""
    polar, near = angle_candidates(radial, angular, approach)
    values = zeta(np.concatenate([polar, near]), p)
    values = values[np.abs(values) >= ZETA_FLOOR]
    unit = values / np.abs(values)
    rows = []
    for phi in phis:
        lowest = min(float((np.exp(1j * phi) * unit).real.min()), float((np.exp(-1j * phi) * unit).real.min()))
        rows.append({"p": p, "phi": float(phi), "min_normalized_value": lowest})
    return rows


# ---------------------------------------------------------------------------
# Dissipativity on the sector
# ---------------------------------------------------------------------------

PROBE_EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
PROBE_ANGLES = 24
TOP_PAIRS = 8


def boundary_points(witness_z: complex, radii: Sequence[float] = PROBE_EPS) -> List[complex]:
    """
    witness_z and the points 1 + r u on the ray from 1 towards it, with their conjugates

    The sup of |arg zeta| is approached as z -> 1 along a fixed direction, so
    these points sit on the boundary of the sector for phi = phi_p while
    |zeta| ~ r^2 stays far above rounding.
    """
    offset = complex(witness_z) - 1.0
    direction = offset / abs(offset) if offset != 0 else -1.0 + 0j
    points = [complex(witness_z)] + [1.0 + r * direction for r in radii]
    return points + [z.conjugate() for z in points]


def _dual_power(f: np.ndarray, p: float) -> np.ndarray:
    # conj(f)|f|^{p-2}, 0 where f = 0
    mag = np.abs(f)
    safe = np.where(mag > 0, mag, 1.0)
    return np.where(mag > 0, np.conj(f) * safe ** (p - 2.0), 0.0)


def dissipativity_value(G: GeneratorInstance, p: float, phi: float, f: CFunction, sign: int = 1) -> Tuple[float, float]:
    """(Re(e^{sign i phi} integral of Af * conj(f)|f|^{p-2}), sum_i mu_i (|A||f|)_i |f_i|^{p-1})"""
    f = as_function(G.space, f)
    Af = CFunction(G.space, G.A @ f.values)
    dual = CFunction(G.space, _dual_power(f.values, p))
    raw = (np.exp(sign * 1j * phi) * duality_pair(G.space, Af, dual)).real
    mag = np.abs(f.values)
    scale = float((G.space.weights * (np.abs(G.A) @ mag) * mag ** (p - 1.0)).sum())
    return float(raw), scale


def _dissipativity_probes(G: GeneratorInstance, samples: int, seed: int,
                          witness_z: Optional[complex]) -> List[Tuple[str, np.ndarray]]:
    n = G.n
    rng = np.random.default_rng(seed)
    probes: List[Tuple[str, np.ndarray]] = []
    for _ in range(samples):
        mags = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), n))
        probes.append(("random", mags * np.exp(2j * np.pi * rng.random(n))))
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        probes.append(("indicator", e))

    field_ = phase_field(G.T)
    masses = field_.masses.copy()
    np.fill_diagonal(masses, 0.0)
    order = np.argsort(-masses.reshape(-1), kind="stable")[:TOP_PAIRS]
    thetas = 2 * np.pi * np.arange(PROBE_ANGLES) / PROBE_ANGLES
    for flat in order:
        x, y = divmod(int(flat), n)
        if masses[x, y] <= 0:
            continue
        lam = field_.phases[x, y]
        for eps in PROBE_EPS:
            for theta in thetas:
                f = np.zeros(n, dtype=complex)
                f[x] = 1.0
                f[y] = lam * (1.0 + eps * np.exp(1j * theta))
                probes.append(("two_point", f))
        if witness_z is not None:
            # boundary points of the scalar problem moved onto the pair: f_x = z, f_y = lambda(x, y)
            for z in boundary_points(witness_z):
                f = np.zeros(n, dtype=complex)
                f[x] = z
                f[y] = lam
                probes.append(("transplant", f))
    return probes


def dissipativity_check(G: GeneratorInstance, p: float, phi: float, samples: int = 1000, seed: int = 0,
                        tol: float = 1e-9, witness_z: Optional[complex] = None, threads: int = 1) -> CheckReport:
    """
    Sample Re(e^{+-i phi} integral of Af * conj(f)|f|^{p-2}) >= 0 (dissipativity on the sector)

    Probes: random vectors, indicators, two-point vectors near the block kernels
    on the heaviest pairs, and the boundary points of the scalar-angle witness
    transplanted onto those pairs (the witness is computed when witness_z is None).
    """
    if not p > 1:
        raise InvalidInputError(f"dissipativity check needs p > 1, got {p}")
    if witness_z is None:
        witness_z = scalar_angle(p, radial=30, angular=61, approach=30).witness_z
    probes = _dissipativity_probes(G, samples, seed, witness_z)

    def one(index: int):
        kind, values = probes[index]
        f = CFunction(G.space, values)
        best = None
        for sign in (1, -1):
            raw, scale = dissipativity_value(G, p, phi, f, sign)
            value = raw / scale if scale > 0 else 0.0
            candidate = (value, (index, sign), (raw, scale, sign, kind))
            if best is None or (value, (index, sign)) < (best[0], best[1]):
                best = candidate
        return best

    value, (index, sign), (raw, scale, _, kind) = deterministic_min(map_ordered(one, range(len(probes)), threads))
    report = CheckReport(
        kind="dissipativity",
        min_value=value,
        raw_value=raw,
        scale=scale,
        witness={"probe_index": index, "probe": kind, "sign": sign, "f": complex_list(probes[index][1])},
        samples=len(probes),
        seed=seed,
        tolerance=tol,
        details={"p": p, "phi": phi, "phi_p": phi_p(p), "witness_z": [witness_z.real, witness_z.imag]},
    )
    logger.info(f"{'✅' if report.verdict == 'pass' else '❌'} dissipativity p={p} phi={phi:.6f}: "
                f"min {value:.3g} over {len(probes)} probes")
    return report
