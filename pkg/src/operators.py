"""
Kernel Operators
Complex matrices acting on function values, (Tf)_i = sum_j t_ij f_j, with the
measure entering only through pairings. Covers classification (symmetric,
Dunford-Schwartz, sub-Markovian, Markovian), the linear modulus, the bilinear
adjoint, restriction to a subset, Markov embeddings, the Z2 operators E_lambda
and C2, and random test-instance generation.

On a finite space the linear modulus |T|f = sup{|Tg| : |g| <= f} is the
entrywise absolute value of the kernel: for row i the supremum is attained by
g_j = f_j * conj(t_ij)/|t_ij|, which gives (Tg)_i = sum_j |t_ij| f_j.
modulus_oracle() checks this against a brute-force supremum.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from src.errors import InvalidInputError, NumericFailure
from src.log_utils import get_logger
from src.space import CFunction, FiniteMeasureSpace, as_function, integrate, make_space, z2_space

logger = get_logger(__name__)

DEFAULT_TOL = 1e-9
UNIMODULAR_TOL = 1e-12

OPERATOR_CLASSES = ("general", "sub_markovian", "markovian")


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """An n x n complex kernel on a finite measure space."""
    space: FiniteMeasureSpace
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        n = self.space.n
        if m.shape != (n, n):
            raise InvalidInputError(f"kernel has shape {m.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(m)):
            raise InvalidInputError("kernel entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.space.n

    def _same_space(self, other: "KernelOperator") -> None:
        if not other.space.matches(self.space):
            raise InvalidInputError("operators act on different spaces")

    def __add__(self, other: "KernelOperator") -> "KernelOperator":
        self._same_space(other)
        return KernelOperator(self.space, self.entries + other.entries)

    def __sub__(self, other: "KernelOperator") -> "KernelOperator":
        self._same_space(other)
        return KernelOperator(self.space, self.entries - other.entries)

    def __mul__(self, scalar: Union[float, complex]) -> "KernelOperator":
        return KernelOperator(self.space, self.entries * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "KernelOperator") -> "KernelOperator":
        self._same_space(other)
        return KernelOperator(self.space, self.entries @ other.entries)

    def __repr__(self) -> str:
        return f"KernelOperator(n={self.n})"


def identity(space: FiniteMeasureSpace) -> KernelOperator:
    return KernelOperator(space, np.eye(space.n, dtype=complex))


def zero(space: FiniteMeasureSpace) -> KernelOperator:
    return KernelOperator(space, np.zeros((space.n, space.n), dtype=complex))


def apply(T: KernelOperator, f: Union[CFunction, Sequence[complex]]) -> CFunction:
    """(Tf)_i = sum_j t_ij f_j"""
    f = as_function(T.space, f)
    return CFunction(T.space, T.entries @ f.values)


def apply_values(T: KernelOperator, values: np.ndarray) -> np.ndarray:
    """Batched application: values has shape (n,) or (n, k), one column per function"""
    values = np.asarray(values, dtype=complex)
    if values.shape[0] != T.n:
        raise InvalidInputError(f"expected {T.n} rows of values, got {values.shape[0]}")
    return T.entries @ values


def apply_stack(kernels: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Apply kernel k of a (k, n, n) stack to column k of an (n, k) value array"""
    return np.einsum("kij,jk->ik", kernels, values)


def real_part(T: KernelOperator) -> KernelOperator:
    """Re T = (T + conj T)/2, entrywise real part"""
    return KernelOperator(T.space, T.entries.real)


def imag_part(T: KernelOperator) -> KernelOperator:
    """Im T = (T - conj T)/2i, entrywise imaginary part"""
    return KernelOperator(T.space, T.entries.imag)


def conjugate(T: KernelOperator) -> KernelOperator:
    """conj T f := conj(T conj f), entrywise conjugation of the kernel"""
    return KernelOperator(T.space, np.conj(T.entries))


def linf_norm(T: KernelOperator) -> float:
    """Norm on L^inf: largest absolute row sum"""
    return float(np.abs(T.entries).sum(axis=1).max())


def l1_norm(T: KernelOperator) -> float:
    """Norm on L^1: max_j (sum_i mu_i |t_ij|) / mu_j"""
    mu = T.space.weights
    return float(((mu[:, None] * np.abs(T.entries)).sum(axis=0) / mu).max())


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass
class Violation:
    """First failed scalar condition of a classification check."""
    condition: str
    index: Tuple[int, ...]
    defect: float

    def to_dict(self) -> Dict:
        return {"condition": self.condition, "index": list(self.index), "defect": self.defect}


@dataclass
class OperatorClass:
    symmetric: bool
    dunford_schwartz: bool
    sub_markovian: bool
    markovian: bool
    positive: bool
    linf_norm: float
    l1_norm: float
    tolerance: float
    witnesses: Dict[str, Violation] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "symmetric": self.symmetric,
            "dunford_schwartz": self.dunford_schwartz,
            "sub_markovian": self.sub_markovian,
            "markovian": self.markovian,
            "positive": self.positive,
            "linf_norm": self.linf_norm,
            "l1_norm": self.l1_norm,
            "tolerance": self.tolerance,
            "witnesses": {name: v.to_dict() for name, v in self.witnesses.items()},
        }


def _first_violation(defects: np.ndarray, tol: float, condition: str) -> Optional[Violation]:
    bad = np.argwhere(defects > tol)
    if bad.size == 0:
        return None
    index = tuple(int(i) for i in bad[0])
    return Violation(condition, index, float(defects[index]))


def classify(T: KernelOperator, tol: float = DEFAULT_TOL) -> OperatorClass:
    """
    Classify a kernel operator

    Args:
        T: the operator
        tol: a condition failing by less than tol is accepted

    Returns:
        OperatorClass with one witness per failed condition (first in index order)
    """
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    t = T.entries
    mu = T.space.weights
    witnesses: Dict[str, Violation] = {}

    # mu_i t_ij = mu_j conj(t_ji), compared at the scale of the larger weight
    weighted = mu[:, None] * t
    sym_defect = np.abs(weighted - np.conj(weighted.T)) / np.maximum(mu[:, None], mu[None, :])
    v = _first_violation(sym_defect, tol, "symmetric")
    if v:
        witnesses["symmetric"] = v

    abs_t = np.abs(t)
    row_sums = abs_t.sum(axis=1)
    col_sums = (mu[:, None] * abs_t).sum(axis=0) / mu
    v = _first_violation(row_sums - 1.0, tol, "linf_contraction")
    if v:
        witnesses["linf_contraction"] = v
    v = _first_violation(col_sums - 1.0, tol, "l1_contraction")
    if v:
        witnesses["l1_contraction"] = v

    pos_defect = np.maximum(np.abs(t.imag), -t.real)
    v = _first_violation(pos_defect, tol, "positive")
    if v:
        witnesses["positive"] = v

    v = _first_violation(np.abs(t.sum(axis=1) - 1.0), tol, "fixes_constants")
    if v:
        witnesses["fixes_constants"] = v

    dunford_schwartz = "linf_contraction" not in witnesses and "l1_contraction" not in witnesses
    positive = "positive" not in witnesses
    sub_markovian = dunford_schwartz and positive
    markovian = sub_markovian and "fixes_constants" not in witnesses

    result = OperatorClass(
        symmetric="symmetric" not in witnesses,
        dunford_schwartz=dunford_schwartz,
        sub_markovian=sub_markovian,
        markovian=markovian,
        positive=positive,
        linf_norm=float(row_sums.max()),
        l1_norm=float(col_sums.max()),
        tolerance=tol,
        witnesses=witnesses,
    )
    logger.debug(f"classify n={T.n}: {result.to_dict()}")
    return result


# ---------------------------------------------------------------------------
# Modulus, adjoint, restriction
# ---------------------------------------------------------------------------

def modulus(T: KernelOperator) -> KernelOperator:
    """The linear modulus |T|: entrywise absolute value of the kernel"""
    return KernelOperator(T.space, np.abs(T.entries))


@dataclass
class ModulusOracle:
    """Brute-force supremum of |Tg| over |g| <= f against (|T| f)."""
    modulus_values: np.ndarray
    random_sup: np.ndarray
    aligned: np.ndarray

    def overshoot(self) -> float:
        """How far any sampled |Tg| exceeds |T|f (should be <= 0 up to rounding)"""
        return float((self.random_sup - self.modulus_values).max())

    def attainment_gap(self) -> float:
        """How far the phase-aligned g falls short of |T|f"""
        return float(np.abs(self.aligned - self.modulus_values).max())


def modulus_oracle(T: KernelOperator, f: Union[CFunction, Sequence[float]], samples: int = 256,
                   seed: int = 0) -> ModulusOracle:
    """Compare |T|f with sampled sup{|Tg| : |g| <= f} and with the phase-aligned maximiser"""
    f = as_function(T.space, f)
    weights = f.values.real
    if np.any(np.abs(f.values.imag) > 0) or np.any(weights < 0):
        raise InvalidInputError("modulus oracle needs a nonnegative real f")
    rng = np.random.default_rng(seed)
    t = T.entries

    # |g_j| = f_j with random phases; shrunken magnitudes never beat the extreme ones
    phases = np.exp(2j * np.pi * rng.random((T.n, samples)))
    shrink = np.where(rng.random((T.n, samples)) < 0.2, rng.random((T.n, samples)), 1.0)
    g = weights[:, None] * shrink * phases
    random_sup = np.abs(t @ g).max(axis=1)

    abs_t = np.abs(t)
    align = np.where(abs_t > 0, np.conj(t) / np.where(abs_t > 0, abs_t, 1.0), 1.0)
    aligned = np.abs((t * align * weights[None, :]).sum(axis=1))
    return ModulusOracle(modulus_values=abs_t @ weights, random_sup=random_sup, aligned=aligned)


def adjoint(T: KernelOperator) -> KernelOperator:
    """The bilinear adjoint S with s_ji = mu_i t_ij / mu_j, so <Tf, g> = <f, Sg>"""
    mu = T.space.weights
    return KernelOperator(T.space, (T.entries.T * mu[None, :]) / mu[:, None])


def _check_subset(space: FiniteMeasureSpace, B: Sequence[int]) -> np.ndarray:
    try:
        idx = np.array(sorted(set(int(b) for b in B)), dtype=int)
    except (TypeError, ValueError):
        raise InvalidInputError("subset must contain point indices")
    if idx.size == 0:
        raise InvalidInputError("subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= space.n:
        raise InvalidInputError(f"subset indices must lie in 0..{space.n - 1}")
    return idx


def restrict(T: KernelOperator, B: Sequence[int]) -> Tuple[FiniteMeasureSpace, KernelOperator]:
    """
    T_B := Res_B T Ext_B on the subspace B

    Returns:
        Tuple of (subspace with weights mu_B, submatrix operator)
    """
    idx = _check_subset(T.space, B)
    sub = make_space(T.space.weights[idx])
    return sub, KernelOperator(sub, T.entries[np.ix_(idx, idx)])


def multiply_indicator(f: CFunction, B: Sequence[int]) -> CFunction:
    """M_B f: multiplication by the indicator of B"""
    idx = _check_subset(f.space, B)
    values = np.zeros(f.space.n, dtype=complex)
    values[idx] = f.values[idx]
    return CFunction(f.space, values)


def restrict_function(f: CFunction, B: Sequence[int], subspace: FiniteMeasureSpace) -> CFunction:
    """Res_B f"""
    idx = _check_subset(f.space, B)
    return CFunction(subspace, f.values[idx])


def extend(g: CFunction, B: Sequence[int], space: FiniteMeasureSpace) -> CFunction:
    """Ext_B g: extension by zero from B to the whole space"""
    idx = _check_subset(space, B)
    if idx.size != g.space.n:
        raise InvalidInputError("function does not live on the subset")
    values = np.zeros(space.n, dtype=complex)
    values[idx] = g.values
    return CFunction(space, values)


def direct_sum(S: KernelOperator, T: KernelOperator) -> KernelOperator:
    """S on the first S.n points, T on the remaining ones, no transitions between the two parts"""
    space = make_space(np.concatenate([S.space.weights, T.space.weights]))
    return KernelOperator(space, block_diag(S.entries, T.entries).astype(complex))


# ---------------------------------------------------------------------------
# Markov embeddings
# ---------------------------------------------------------------------------

FUNCTION_CATALOG: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs2": lambda z: np.abs(z) ** 2 + 0j,
    "conj": np.conj,
    "abspow1.5": lambda z: np.abs(z) ** 1.5 + 0j,
}


@dataclass(frozen=True, eq=False)
class MarkovEmbedding:
    """Phi f := f o phi, from functions on target to functions on source."""
    phi: np.ndarray
    source: FiniteMeasureSpace
    target: FiniteMeasureSpace

    def __call__(self, f: CFunction) -> CFunction:
        f = as_function(self.target, f)
        return CFunction(self.source, f.values[self.phi])


def markov_embedding(phi: Sequence[int], source: FiniteMeasureSpace, target: FiniteMeasureSpace,
                     tol: float = DEFAULT_TOL) -> MarkovEmbedding:
    """
    Build Phi from a measure-preserving point map phi: source -> target

    Raises:
        InvalidInputError: phi has the wrong length, is not onto, or does not preserve mass
    """
    try:
        phi = np.array(phi, dtype=int).reshape(-1)
    except (TypeError, ValueError):
        raise InvalidInputError("point map must be a list of target indices")
    if phi.size != source.n:
        raise InvalidInputError(f"point map has {phi.size} entries, source has {source.n} points")
    if phi.min() < 0 or phi.max() >= target.n:
        raise InvalidInputError("point map leaves the target space")
    if np.unique(phi).size != target.n:
        raise InvalidInputError("point map is not onto")
    pushed = np.bincount(phi, weights=source.weights, minlength=target.n)
    defect = np.abs(pushed - target.weights)
    if np.any(defect > tol * (1.0 + target.weights)):
        bad = int(np.argmax(defect))
        raise InvalidInputError(
            f"point map is not measure-preserving at point {bad}: {pushed[bad]} vs {target.weights[bad]}"
        )
    phi.setflags(write=False)
    return MarkovEmbedding(phi, source, target)


def pushforward_check(phi: Sequence[int], source: FiniteMeasureSpace, target: FiniteMeasureSpace,
                      F: Union[str, Callable[[np.ndarray], np.ndarray]], f: CFunction,
                      tol: float = DEFAULT_TOL) -> bool:
    """Phi(F(f)) == F(Phi f) pointwise, and the integral of f is preserved"""
    embed = markov_embedding(phi, source, target, tol)
    if isinstance(F, str):
        if F not in FUNCTION_CATALOG:
            raise InvalidInputError(f"unknown catalog function {F!r}; choose from {sorted(FUNCTION_CATALOG)}")
        F = FUNCTION_CATALOG[F]
    f = as_function(target, f)

    lhs = embed(CFunction(target, F(f.values))).values
    rhs = F(embed(f).values)
    pointwise = bool(np.all(np.abs(lhs - rhs) <= tol))
    mass_kept = abs(integrate(target, f) - integrate(source, embed(f))) <= tol * (1.0 + np.abs(f.values).max())
    if not (pointwise and mass_kept):
        logger.warning(f"⚠️ pushforward check failed: pointwise={pointwise} integral={mass_kept}")
    return pointwise and bool(mass_kept)


# ---------------------------------------------------------------------------
# Z2 operators
# ---------------------------------------------------------------------------

def e_lambda(lam: complex) -> KernelOperator:
    """E_lambda = (0 conj(lambda); lambda 0) on Z2, lambda unimodular"""
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > UNIMODULAR_TOL:
        raise InvalidInputError(f"lambda must be unimodular, |lambda| = {abs(lam)}")
    return KernelOperator(z2_space(), np.array([[0.0, lam.conjugate()], [lam, 0.0]], dtype=complex))


def e_lambda_stack(lams: np.ndarray) -> np.ndarray:
    """Kernels of E_lambda for an array of unimodular lambdas, shape (k, 2, 2)"""
    lams = np.asarray(lams, dtype=complex).reshape(-1)
    stack = np.zeros((lams.size, 2, 2), dtype=complex)
    stack[:, 0, 1] = np.conj(lams)
    stack[:, 1, 0] = lams
    return stack


def c2_membership(a: float, b: float, w: complex, tol: float = UNIMODULAR_TOL) -> bool:
    """max(|a|, |b|) <= 1 - |w|: (a conj(w); w b) is an absolute contraction on Z2"""
    return max(abs(a), abs(b)) <= 1.0 - abs(w) + tol


def c2_operator(a: float, b: float, w: complex) -> KernelOperator:
    """The symmetric Z2 matrix (a conj(w); w b)"""
    w = complex(w)
    return KernelOperator(z2_space(), np.array([[a, w.conjugate()], [w, b]], dtype=complex))


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def _mu_symmetrize(mu: np.ndarray, z: np.ndarray) -> np.ndarray:
    # average t_ij with mu_j conj(t_ji) / mu_i
    return 0.5 * (z + (mu[None, :] * np.conj(z.T)) / mu[:, None])


def _scale_to_contraction(rng: np.random.Generator, s: np.ndarray) -> np.ndarray:
    top = np.abs(s).sum(axis=1).max()
    if top == 0:
        return s
    # some instances sit exactly on the contraction boundary
    target = 1.0 if rng.random() < 0.3 else rng.uniform(0.5, 1.0)
    return s * (target / top)


def _metropolis_kernel(rng: np.random.Generator, mu: np.ndarray, mask: np.ndarray) -> np.ndarray:
    n = mu.size
    proposal = rng.random((n, n)) * mask
    proposal = 0.5 * (proposal + proposal.T)
    np.fill_diagonal(proposal, 0.0)
    top = proposal.sum(axis=1).max()
    if top > 0:
        proposal = proposal / top
    accept = np.minimum(1.0, mu[None, :] / mu[:, None])
    t = proposal * accept
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, 1.0 - t.sum(axis=1))
    return t


def random_symmetric_contraction(n: int, seed: int, cls: str = "general",
                                 space: Optional[FiniteMeasureSpace] = None) -> KernelOperator:
    """
    Deterministic random symmetric Dunford-Schwartz kernel

    Args:
        n: number of points
        seed: nonnegative integer seed
        cls: 'general' (complex), 'sub_markovian' (nonnegative) or 'markovian' (Metropolis)
        space: optional measure space; random weights are drawn when omitted

    Returns:
        KernelOperator whose classification confirms the requested class
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if cls not in OPERATOR_CLASSES:
        raise InvalidInputError(f"unknown operator class {cls!r}; choose from {OPERATOR_CLASSES}")
    rng = np.random.default_rng([int(seed), int(n), OPERATOR_CLASSES.index(cls)])

    if space is None:
        space = make_space(rng.uniform(0.2, 2.0, n))
    elif space.n != n:
        raise InvalidInputError(f"space has {space.n} points, expected {n}")
    mu = space.weights

    density = rng.uniform(0.3, 1.0)
    mask = rng.random((n, n)) < density
    mask = mask | mask.T

    if cls == "markovian":
        t = _metropolis_kernel(rng, mu, mask)
    elif cls == "sub_markovian":
        t = _scale_to_contraction(rng, _mu_symmetrize(mu, rng.random((n, n)) * mask))
    else:
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * mask
        t = _scale_to_contraction(rng, _mu_symmetrize(mu, z))

    T = KernelOperator(space, t)
    found = classify(T)
    wanted = {
        "general": found.symmetric and found.dunford_schwartz,
        "sub_markovian": found.symmetric and found.sub_markovian,
        "markovian": found.symmetric and found.markovian,
    }[cls]
    if not wanted:
        raise NumericFailure(f"generated {cls} kernel failed its classification: {found.to_dict()}")
    return T
