"""
Representing Measures and the Disintegration Identity
The bilinear form (f, g) -> integral of Tf * g is a measure m on the product of
the space with itself: m(x, y) = mu_y * t_yx, so that
    sum_y mu_y (Tf)(y) g(y) = sum_{x,y} m(x, y) f(x) g(y).
Writing m = |m| * lambda gives the phase field. For symmetric T the form
splits into a diagonal term with weights mu_i (1 - (|T|1)_i) plus a
|m|-weighted integral of two-point blocks Id - E_lambda(x, y).

The measure-side evaluation (measure_pairing) never calls the operator code,
so comparing it with apply() is a genuine cross-check.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import InvalidInputError, NumericFailure
from src.log_utils import get_logger
from src.operators import DEFAULT_TOL, KernelOperator, adjoint, apply, classify, l1_norm, modulus
from src.parallel import tree_sum
from src.space import CFunction, FiniteMeasureSpace, as_function, dual_exponent, duality_pair, integrate

logger = get_logger(__name__)

DISINTEGRATION_MODES = ("general", "sub_markovian", "markovian")

# relative agreement demanded of the construction-time probe
PROBE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RepresentingMeasure:
    """Complex masses m[x, y] on source x target (here both are T.space)."""
    source_space: FiniteMeasureSpace
    target_space: FiniteMeasureSpace
    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    def total_mass(self) -> complex:
        return complex(self.masses.sum())

    def abs(self) -> "RepresentingMeasure":
        """The variation |m|"""
        return RepresentingMeasure(self.source_space, self.target_space, np.abs(self.masses))


def measure_pairing(measure: RepresentingMeasure, f: Union[CFunction, Sequence[complex]],
                    g: Union[CFunction, Sequence[complex]]) -> complex:
    """sum_{x,y} m(x, y) f(x) g(y)"""
    f = as_function(measure.source_space, f)
    g = as_function(measure.target_space, g)
    return complex(np.einsum("xy,x,y->", measure.masses, f.values, g.values))


def _pair_scale(measure: RepresentingMeasure, f: CFunction, g: CFunction) -> float:
    return float(np.einsum("xy,x,y->", np.abs(measure.masses), np.abs(f.values), np.abs(g.values)))


def representing_measure(T: KernelOperator, seed: int = 0) -> RepresentingMeasure:
    """
    Build the representing measure of T and confirm it on one random probe

    Raises:
        NumericFailure: the measure and operator paths disagree on the probe
    """
    mu = T.space.weights
    measure = RepresentingMeasure(T.space, T.space, (mu[:, None] * T.entries).T)

    rng = np.random.default_rng(seed)
    f = CFunction(T.space, rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n))
    g = CFunction(T.space, rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n))
    direct = duality_pair(T.space, apply(T, f), g)
    via_measure = measure_pairing(measure, f, g)
    if abs(direct - via_measure) > PROBE_TOL * (1.0 + _pair_scale(measure, f, g)):
        raise NumericFailure(f"representing measure probe mismatch: {direct} vs {via_measure}")
    return measure


def modulus_measure_defect(T: KernelOperator) -> float:
    """max |(|m_T|) - m_|T|| over all cells"""
    lhs = np.abs(representing_measure(T).masses)
    rhs = representing_measure(modulus(T)).masses
    return float(np.abs(lhs - rhs).max())


def modulus_measure_check(T: KernelOperator, tol: float = 1e-14) -> bool:
    """|m_T| equals the representing measure of |T| within tol (relative to each cell)"""
    lhs = np.abs(representing_measure(T).masses)
    rhs = representing_measure(modulus(T)).masses
    return bool(np.all(np.abs(lhs - rhs) <= tol * (1.0 + lhs)))


def holder_extension_check(T: KernelOperator, p: float, f: CFunction, g: CFunction,
                           tol: float = 1e-13) -> bool:
    """
    The operator path and the measure path agree for f in L^p, g in L^q

    On a finite space every function lies in every L^p, so this certifies
    that the two evaluation paths agree rather than testing integrability.
    """
    q = dual_exponent(p)
    logger.debug(f"holder extension check p={p} q={q}")
    measure = representing_measure(T)
    f = as_function(T.space, f)
    g = as_function(T.space, g)
    direct = duality_pair(T.space, apply(T, f), g)
    via_measure = measure_pairing(measure, f, g)
    return abs(direct - via_measure) <= tol * (1.0 + _pair_scale(measure, f, g))


def grothendieck_sup_check(T: KernelOperator, fs: Sequence[CFunction],
                           tol: float = DEFAULT_TOL) -> Tuple[float, float, bool]:
    """
    integral of max_j |Tf_j|  <=  ||T||_{L1->L1} * integral of max_j |f_j|

    Returns:
        Tuple of (lhs, rhs, ok)
    """
    if len(fs) == 0:
        raise InvalidInputError("grothendieck check needs at least one function")
    values = np.stack([as_function(T.space, f).values for f in fs], axis=1)
    images = T.entries @ values
    lhs = integrate(T.space, np.abs(images).max(axis=1)).real
    rhs = l1_norm(T) * integrate(T.space, np.abs(values).max(axis=1)).real
    return lhs, rhs, bool(lhs <= rhs + tol)


def adjoint_transport_defect(T: KernelOperator) -> float:
    """max |m_S(x, y) - m_T(y, x)| for the adjoint S of T"""
    m_t = representing_measure(T).masses
    m_s = representing_measure(adjoint(T)).masses
    return float(np.abs(m_s - m_t.T).max())


@dataclass
class PhaseField:
    masses: np.ndarray
    phases: np.ndarray

    def hermitian_defect(self, cutoff: float = 0.0) -> float:
        """max |lambda(x, y) - conj(lambda(y, x))| over cells with mass > cutoff"""
        live = (self.masses > cutoff) & (self.masses.T > cutoff)
        if not live.any():
            return 0.0
        return float(np.abs(self.phases - np.conj(self.phases.T))[live].max())


def phase_field(T: Union[KernelOperator, RepresentingMeasure]) -> PhaseField:
    """Split m = |m| * lambda, with lambda = 1 on zero-mass cells"""
    measure = T if isinstance(T, RepresentingMeasure) else representing_measure(T)
    m = measure.masses
    mags = np.abs(m)
    phases = np.ones_like(m)
    live = mags > 0
    phases[live] = m[live] / mags[live]
    return PhaseField(masses=mags, phases=phases)


# ---------------------------------------------------------------------------
# Disintegration
# ---------------------------------------------------------------------------

@dataclass
class DisintegrationPair:
    x: int
    y: int
    mass: float
    phase: complex

    def to_dict(self) -> Dict:
        return {"x": self.x, "y": self.y, "mass": self.mass, "phase": [self.phase.real, self.phase.imag]}


@dataclass
class Disintegration:
    """Diagonal weights plus positive-mass (x, y, mass, phase) records."""
    space: FiniteMeasureSpace
    diagonal: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    masses: np.ndarray
    phases: np.ndarray
    mode: str
    mass_cutoff: float
    dropped_mass: float = 0.0
    warnings: List[str] = field(default_factory=list)

    @property
    def pairs(self) -> List[DisintegrationPair]:
        return [
            DisintegrationPair(int(x), int(y), float(m), complex(ph))
            for x, y, m, ph in zip(self.xs, self.ys, self.masses, self.phases)
        ]

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "diagonal": [float(d) for d in self.diagonal],
            "pairs": [pair.to_dict() for pair in self.pairs],
            "mass_cutoff": self.mass_cutoff,
            "dropped_mass": self.dropped_mass,
            "warnings": list(self.warnings),
        }


def disintegrate(T: KernelOperator, mode: str = "general", tol: float = DEFAULT_TOL,
                 mass_cutoff: Optional[float] = None, allow_noncontractive: bool = False) -> Disintegration:
    """
    Disintegrate the form of Id - T into a diagonal term and two-point blocks

    Args:
        T: symmetric operator
        mode: 'general', 'sub_markovian' (T >= 0, phases exactly 1) or 'markovian' (diagonal exactly 0)
        tol: classification tolerance
        mass_cutoff: cells with |m| <= cutoff are omitted; defaults to tol
        allow_noncontractive: accept symmetric T that is not Dunford-Schwartz, with a warning

    Raises:
        InvalidInputError: T not symmetric, not contractive, or not of the class the mode needs
    """
    if mode not in DISINTEGRATION_MODES:
        raise InvalidInputError(f"unknown disintegration mode {mode!r}; choose from {DISINTEGRATION_MODES}")
    cutoff = tol if mass_cutoff is None else mass_cutoff
    if cutoff < 0:
        raise InvalidInputError("mass cutoff must be nonnegative")

    found = classify(T, tol)
    if not found.symmetric:
        w = found.witnesses["symmetric"]
        logger.error(f"❌ disintegration needs a symmetric operator (defect {w.defect:.3g} at {w.index})")
        raise InvalidInputError(f"operator is not symmetric: defect {w.defect:.3g} at {w.index}")

    warnings: List[str] = []
    if not found.dunford_schwartz:
        message = (f"operator is not Dunford-Schwartz (L^inf norm {found.linf_norm:.6g}); "
                   "the identity holds but diagonal weights may be negative")
        if not allow_noncontractive:
            raise InvalidInputError(message)
        logger.warning(f"⚠️ {message}")
        warnings.append(message)
    if mode == "sub_markovian" and not found.positive:
        raise InvalidInputError("sub_markovian mode needs an operator with nonnegative entries")
    if mode == "markovian" and not found.markovian:
        raise InvalidInputError("markovian mode needs a Markovian operator")

    mu = T.space.weights
    diagonal = mu * (1.0 - np.abs(T.entries).sum(axis=1))
    if mode == "markovian":
        diagonal = np.zeros(T.n)

    field_ = phase_field(T)
    keep = field_.masses > cutoff
    xs, ys = np.nonzero(keep)
    phases = field_.phases[xs, ys]
    if mode != "general":
        phases = np.ones(xs.size, dtype=complex)
    dropped = float(field_.masses[~keep].sum())

    result = Disintegration(
        space=T.space,
        diagonal=diagonal,
        xs=xs,
        ys=ys,
        masses=field_.masses[xs, ys],
        phases=phases,
        mode=mode,
        mass_cutoff=cutoff,
        dropped_mass=dropped,
        warnings=warnings,
    )
    logger.info(f"✅ disintegrated n={T.n} mode={mode}: {xs.size} pairs, dropped mass {dropped:.3g}")
    return result


def evaluate_disintegration(D: Disintegration, f: Union[CFunction, Sequence[complex]],
                            g: Union[CFunction, Sequence[complex]]) -> complex:
    """
    sum_i d_i f_i g_i + sum_pairs mass * (1/2)[(f(x) - conj(lam) f(y)) g(x) + (f(y) - lam f(x)) g(y)]

    Dropping cells below the mass cutoff moves the result by at most
    dropped_mass times the largest block value.
    """
    f = as_function(D.space, f).values
    g = as_function(D.space, g).values
    fx, fy, gx, gy = f[D.xs], f[D.ys], g[D.xs], g[D.ys]
    blocks = 0.5 * D.masses * ((fx - np.conj(D.phases) * fy) * gx + (fy - D.phases * fx) * gy)
    return complex(tree_sum(D.diagonal * f * g) + tree_sum(blocks))


def disintegration_residual(T: KernelOperator, D: Disintegration, probes: int = 20, seed: int = 0) -> float:
    """Largest |evaluate_disintegration - integral of (Id - T)f * g| over random complex probes"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        f = CFunction(T.space, rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n))
        g = CFunction(T.space, rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n))
        direct = duality_pair(T.space, f - apply(T, f), g)
        worst = max(worst, abs(evaluate_disintegration(D, f, g) - direct))
    return worst
