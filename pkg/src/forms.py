"""
Form Families and Form Inequality Checks
A form family is m pairs (F_j, G_j) of functions C^d -> C. The checks sample
the three places where the form must be nonnegative:

- scalar:  s(x) = Re sum_j F_j(x) G_j(x) on C^d
- Z2:      Re sum_j integral of (Id - E_lambda) F_j(f) * G_j(f) on the two-point space
- full:    Re sum_j integral of (Id - T) F_j(f) * G_j(f) for an operator T

Every report carries raw_value (the form value at the witness), scale (the sum
of absolute values of the bilinear terms at that witness) and
min_value = raw_value / scale, so verdicts do not depend on |x|^p growth.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.bilinear import disintegrate
from src.errors import ExpressionError, InvalidInputError
from src.expressions import AbsPow, Binary, Expr, Literal, Phase, Unary, Var, eval_batch, eval_expr, max_variable, parse_expr, to_text
from src.log_utils import get_logger
from src.operators import KernelOperator, apply, apply_stack, e_lambda, e_lambda_stack, identity, zero
from src.parallel import deterministic_min, map_ordered
from src.sampling import GridSampler, Sampler, near_kernel_probes, refine_angle, refine_point
from src.space import CFunction, duality_pair, z2_space

logger = get_logger(__name__)

DEFAULT_LAMBDA_COUNT = 360
Z2_MODES = ("general", "sub_markovian", "markovian")

VIOLATION_NOTE = "hypothesis fails for this family/angle"


@dataclass(frozen=True)
class FormFamily:
    d: int
    pairs: Tuple[Tuple[Expr, Expr], ...]
    name: Optional[str] = None
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError("family arity d must be at least 1")
        if len(self.pairs) < 1:
            raise InvalidInputError("a form family needs at least one (F, G) pair")
        for F, G in self.pairs:
            if max(max_variable(F), max_variable(G)) > self.d:
                raise InvalidInputError(f"expression uses more than d={self.d} variables")

    @property
    def m(self) -> int:
        return len(self.pairs)

    def evaluate(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """F and G values of every pair at the columns of X, shape (m, k), plus the valid mask"""
        X = np.asarray(X, dtype=complex).reshape(self.d, -1)
        F = np.empty((self.m, X.shape[1]), dtype=complex)
        G = np.empty_like(F)
        valid = np.ones(X.shape[1], dtype=bool)
        for j, (fe, ge) in enumerate(self.pairs):
            F[j], ok_f = eval_batch(fe, X)
            G[j], ok_g = eval_batch(ge, X)
            valid &= ok_f & ok_g
        return F, G, valid

    def evaluate_point(self, x: Sequence[complex]) -> Tuple[np.ndarray, np.ndarray]:
        """Scalar path: raises ExpressionError at a singular point"""
        F = np.array([eval_expr(fe, x) for fe, _ in self.pairs], dtype=complex)
        G = np.array([eval_expr(ge, x) for _, ge in self.pairs], dtype=complex)
        return F, G

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "d": self.d,
            "m": self.m,
            "params": dict(self.params),
            "pairs": [[to_text(F), to_text(G)] for F, G in self.pairs],
        }


def family_analyticity(p: float, phi: float, sign: int = 1) -> FormFamily:
    """
    F(x) = x, G(x) = e^{sign i phi} conj(x) |x|^{p-2}, with G(0) = 0

    Raises:
        InvalidInputError: p <= 1 or sign not +-1
    """
    if not p > 1:
        raise InvalidInputError(f"analyticity family needs p > 1, got {p}")
    if sign not in (1, -1):
        raise InvalidInputError(f"sign must be +1 or -1, got {sign}")
    x = Var(1)
    power = AbsPow(x, p - 2.0, vanish_at_zero=p <= 2)
    G = Binary("*", Binary("*", Phase(sign * phi), Unary("conj", x)), power)
    return FormFamily(d=1, pairs=((x, G),), name="analyticity", params={"p": p, "phi": phi, "sign": sign})


def _split_top_level(text: str, sep: str) -> List[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def family_from_text(d: int, pairs_text: str, name: str = "custom") -> FormFamily:
    """Build a family from 'F1:G1,F2:G2' (commas inside function calls are not separators)"""
    pairs = []
    for item in _split_top_level(pairs_text, ","):
        halves = _split_top_level(item, ":")
        if len(halves) != 2:
            raise InvalidInputError(f"expected 'F:G', got {item.strip()!r}")
        pairs.append((parse_expr(halves[0], d), parse_expr(halves[1], d)))
    return FormFamily(d=d, pairs=tuple(pairs), name=name)


def random_affine_family(d: int, m: int, seed: int) -> FormFamily:
    """Random pairs F = a x_k + b, G = c conj(x_l) + e with rounded complex coefficients (test content)"""
    rng = np.random.default_rng([seed, d, m])

    def coeff() -> Literal:
        return Literal(complex(round(rng.normal(), 3), round(rng.normal(), 3)))

    pairs = []
    for _ in range(m):
        k, l = rng.integers(1, d + 1, size=2)
        F = Binary("+", Binary("*", coeff(), Var(int(k))), coeff())
        G = Binary("+", Binary("*", coeff(), Unary("conj", Var(int(l)))), coeff())
        pairs.append((F, G))
    return FormFamily(d=d, pairs=tuple(pairs), name="random_affine", params={"seed": seed})


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def complex_list(v: Sequence[complex]) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v, dtype=complex).reshape(-1)]


@dataclass
class CheckReport:
    kind: str
    min_value: float
    raw_value: float
    scale: float
    witness: Dict[str, Any]
    samples: int
    seed: Optional[int]
    tolerance: float
    skipped: int = 0
    family: Optional[Dict[str, Any]] = None
    sampler: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "violated" if self.min_value < -self.tolerance else "pass"

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "kind": self.kind,
            "verdict": self.verdict,
            "min_value": self.min_value,
            "raw_value": self.raw_value,
            "scale": self.scale,
            "witness": self.witness,
            "samples": self.samples,
            "skipped": self.skipped,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "family": self.family,
            "sampler": self.sampler,
            "details": self.details,
        }
        if self.verdict == "violated":
            out["note"] = VIOLATION_NOTE
        return out


def _normalized(raw: float, scale: float) -> float:
    return raw / scale if scale > 0 else 0.0


# ---------------------------------------------------------------------------
# Scalar form
# ---------------------------------------------------------------------------

def scalar_value(family: FormFamily, x: Sequence[complex]) -> Tuple[float, float]:
    """(s(x), sum_j |F_j(x)| |G_j(x)|) via the scalar evaluator"""
    F, G = family.evaluate_point(x)
    return float((F * G).sum().real), float((np.abs(F) * np.abs(G)).sum())


def scalar_check(family: FormFamily, sampler: Optional[Sampler] = None, tol: float = 1e-9,
                 refine: bool = True) -> CheckReport:
    """Minimum of Re sum_j F_j(x) G_j(x) over sampled x (scale-normalised)"""
    sampler = sampler or GridSampler()
    X = sampler.points(family.d)
    F, G, valid = family.evaluate(X)
    raw = (F * G).sum(axis=0).real
    scale = (np.abs(F) * np.abs(G)).sum(axis=0)
    values = np.where(scale > 0, raw / np.where(scale > 0, scale, 1.0), 0.0)
    values[~valid] = np.inf
    skipped = int((~valid).sum())
    if skipped == X.shape[1]:
        raise ExpressionError("family could not be evaluated at any sample")
    best = int(np.argmin(values))
    x_best = X[:, best]

    def objective(x: np.ndarray) -> float:
        try:
            return _normalized(*scalar_value(family, x))
        except ExpressionError:
            return math.inf

    if refine:
        x_best, _ = refine_point(objective, x_best)
    raw_w, scale_w = scalar_value(family, x_best)
    report = CheckReport(
        kind="scalar",
        min_value=_normalized(raw_w, scale_w),
        raw_value=raw_w,
        scale=scale_w,
        witness={"x": complex_list(x_best), "sample_index": best},
        samples=int(X.shape[1]),
        seed=getattr(sampler, "seed", None),
        tolerance=tol,
        skipped=skipped,
        family=family.to_dict(),
        sampler=sampler.to_dict(),
    )
    logger.info(f"{'✅' if report.verdict == 'pass' else '❌'} scalar check {family.name}: min {report.min_value:.3g}")
    return report


# ---------------------------------------------------------------------------
# Z2 form
# ---------------------------------------------------------------------------

def z2_operator_form_value(family: FormFamily, T2: KernelOperator, z: Sequence[complex],
                           w: Sequence[complex]) -> float:
    """Re sum_j integral over Z2 of (Id - T2) F_j(f) * G_j(f), f = (z, w)"""
    space = T2.space
    if space.n != 2:
        raise InvalidInputError("operator must act on the two-point space")
    Fz, Gz = family.evaluate_point(z)
    Fw, Gw = family.evaluate_point(w)
    A = identity(space) - T2
    total = 0.0
    for j in range(family.m):
        Fj = CFunction(space, [Fz[j], Fw[j]])
        Gj = CFunction(space, [Gz[j], Gw[j]])
        total += duality_pair(space, apply(A, Fj), Gj).real
    return total


def z2_form_value(family: FormFamily, lam: complex, z: Sequence[complex], w: Sequence[complex]) -> float:
    """The Z2 form value with A = Id - E_lambda"""
    return z2_operator_form_value(family, e_lambda(lam), z, w)


def z2_form_scale(family: FormFamily, z: Sequence[complex], w: Sequence[complex]) -> float:
    """sum_j (|F_j(z)| + |F_j(w)|)(|G_j(z)| + |G_j(w)|)"""
    Fz, Gz = family.evaluate_point(z)
    Fw, Gw = family.evaluate_point(w)
    return float(((np.abs(Fz) + np.abs(Fw)) * (np.abs(Gz) + np.abs(Gw))).sum())


def _z2_block_values(lams: np.ndarray, FZ: np.ndarray, FW: np.ndarray, GZ: np.ndarray,
                     GW: np.ndarray) -> np.ndarray:
    # column k is paired with lams[k]; E_lambda enters through apply_stack
    stack = e_lambda_stack(np.broadcast_to(lams, FZ.shape[1:]))
    total = np.zeros(FZ.shape[1])
    for j in range(FZ.shape[0]):
        U = np.stack([FZ[j], FW[j]])
        AU = U - apply_stack(stack, U)
        total += (0.5 * (AU[0] * GZ[j] + AU[1] * GW[j])).real
    return total


def _z2_batch(family: FormFamily, lams: np.ndarray, Z: np.ndarray, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Normalised Z2 values for columns (lams[k], Z[:, k], W[:, k]); invalid columns are +inf"""
    FZ, GZ, okz = family.evaluate(Z)
    FW, GW, okw = family.evaluate(W)
    raw = _z2_block_values(lams, FZ, FW, GZ, GW)
    scale = ((np.abs(FZ) + np.abs(FW)) * (np.abs(GZ) + np.abs(GW))).sum(axis=0)
    values = np.where(scale > 0, raw / np.where(scale > 0, scale, 1.0), 0.0)
    valid = okz & okw
    values[~valid] = np.inf
    return values, valid


def lambda_grid(count: int) -> np.ndarray:
    """count equispaced points of the unit circle, index 0 at lambda = 1"""
    if count < 1:
        raise InvalidInputError("lambda count must be at least 1")
    return np.exp(2j * np.pi * np.arange(count) / count)


def z2_criterion_check(family: FormFamily, lambda_count: int = DEFAULT_LAMBDA_COUNT,
                       sampler: Optional[Sampler] = None, tol: float = 1e-9, mode: str = "general",
                       refine: bool = True, threads: int = 1) -> CheckReport:
    """
    Minimise the Z2 form over lambda and (z, w)

    Args:
        family: form family
        lambda_count: equispaced lambdas on the circle (general mode)
        sampler: (z, w) sampler; the default polar grid plus near-kernel probes per lambda
        tol: verdict tolerance on the normalised value
        mode: 'general', 'sub_markovian' (lambda = 1 plus the scalar check) or 'markovian' (lambda = 1)
        refine: run local refinement from the grid minimiser
        threads: workers for the lambda sweep; the result does not depend on it

    Returns:
        CheckReport whose witness is (lambda, z, w)
    """
    if mode not in Z2_MODES:
        raise InvalidInputError(f"unknown z2 mode {mode!r}; choose from {Z2_MODES}")
    sampler = sampler or GridSampler()
    lams = lambda_grid(lambda_count) if mode == "general" else np.array([1.0 + 0j])
    logger.debug(f"z2 check {family.name}: mode={mode} lambdas={lams.size} sampler={sampler.to_dict()}")

    Z, W = sampler.pairs(family.d)
    FZ, GZ, okz = family.evaluate(Z)
    FW, GW, okw = family.evaluate(W)
    static_scale = ((np.abs(FZ) + np.abs(FW)) * (np.abs(GZ) + np.abs(GW))).sum(axis=0)
    static_ok = okz & okw
    base_points = sampler.points(family.d)

    def sweep(index: int):
        lam = lams[index]
        raw = _z2_block_values(np.array(lam), FZ, FW, GZ, GW)
        values = np.where(static_scale > 0, raw / np.where(static_scale > 0, static_scale, 1.0), 0.0)
        values[~static_ok] = np.inf
        PZ, PW = near_kernel_probes(base_points, lam)
        probe_values, probe_ok = _z2_batch(family, np.array(lam), PZ, PW)
        all_values = np.concatenate([values, probe_values])
        k = int(np.argmin(all_values))
        if k < values.size:
            z, w = Z[:, k], W[:, k]
        else:
            z, w = PZ[:, k - values.size], PW[:, k - values.size]
        skipped = int((~static_ok).sum() + (~probe_ok).sum())
        return float(all_values[k]), (index, k), (z, w, skipped, all_values.size)

    results = map_ordered(sweep, range(lams.size), threads)
    value, (lam_index, sample_index), (z, w, _, _) = deterministic_min(results)
    if not np.isfinite(value):
        raise ExpressionError("family could not be evaluated at any Z2 sample")
    samples = sum(r[2][3] for r in results)
    skipped = sum(r[2][2] for r in results)
    theta = 2 * np.pi * lam_index / lams.size if mode == "general" else 0.0

    def objective_zw(theta_: float):
        lam = np.exp(1j * theta_)

        def objective(v: np.ndarray) -> float:
            vals, _ = _z2_batch(family, np.array(lam), v[:family.d, None], v[family.d:, None])
            return float(vals[0])
        return objective

    if refine:
        zw, _ = refine_point(objective_zw(theta), np.concatenate([z, w]))
        if mode == "general":
            def on_angle(t: float) -> float:
                vals, _ = _z2_batch(family, np.array(np.exp(1j * t)), zw[:family.d, None], zw[family.d:, None])
                return float(vals[0])
            theta, _ = refine_angle(on_angle, theta, 2 * np.pi / lams.size)
            zw, _ = refine_point(objective_zw(theta), zw)
        z, w = zw[:family.d], zw[family.d:]

    lam = complex(np.exp(1j * theta)) if theta != 0.0 else 1.0 + 0j
    raw_w = z2_form_value(family, lam, z, w)
    scale_w = z2_form_scale(family, z, w)
    details: Dict[str, Any] = {"mode": mode, "lambda_count": int(lams.size)}
    report = CheckReport(
        kind="z2",
        min_value=_normalized(raw_w, scale_w),
        raw_value=raw_w,
        scale=scale_w,
        witness={"lambda": [lam.real, lam.imag], "lambda_index": int(lam_index), "sample_index": int(sample_index),
                 "z": complex_list(z), "w": complex_list(w)},
        samples=int(samples),
        seed=getattr(sampler, "seed", None),
        tolerance=tol,
        skipped=int(skipped),
        family=family.to_dict(),
        sampler=sampler.to_dict(),
        details=details,
    )

    if mode == "sub_markovian":
        scalar = scalar_check(family, sampler, tol, refine=refine)
        details["scalar"] = scalar.to_dict()
        if scalar.min_value < report.min_value:
            report.min_value, report.raw_value, report.scale = scalar.min_value, scalar.raw_value, scalar.scale
            report.witness = {"scalar": True, **scalar.witness}

    logger.info(f"{'✅' if report.verdict == 'pass' else '❌'} z2 check {family.name} ({mode}): "
                f"min {report.min_value:.3g} over {report.samples} samples")
    return report


def zero_operator_check(family: FormFamily, sampler: Optional[Sampler] = None, tol: float = 1e-9) -> CheckReport:
    """The Z2 form with T = 0 (= (E_1 + E_-1)/2), which is the scalar form averaged over the two atoms"""
    sampler = sampler or GridSampler()
    Z, W = sampler.pairs(family.d)
    FZ, GZ, okz = family.evaluate(Z)
    FW, GW, okw = family.evaluate(W)
    zero_stack = np.zeros((Z.shape[1], 2, 2), dtype=complex)
    raw = np.zeros(Z.shape[1])
    for j in range(family.m):
        U = np.stack([FZ[j], FW[j]])
        AU = U - apply_stack(zero_stack, U)
        raw += (0.5 * (AU[0] * GZ[j] + AU[1] * GW[j])).real
    scale = ((np.abs(FZ) + np.abs(FW)) * (np.abs(GZ) + np.abs(GW))).sum(axis=0)
    values = np.where(scale > 0, raw / np.where(scale > 0, scale, 1.0), 0.0)
    valid = okz & okw
    values[~valid] = np.inf
    k = int(np.argmin(values))
    z, w = Z[:, k], W[:, k]
    raw_w = z2_operator_form_value(family, zero(z2_space()), z, w)
    scale_w = z2_form_scale(family, z, w)
    return CheckReport(
        kind="zero_operator",
        min_value=_normalized(raw_w, scale_w),
        raw_value=raw_w,
        scale=scale_w,
        witness={"z": complex_list(z), "w": complex_list(w), "sample_index": k},
        samples=int(Z.shape[1]),
        seed=getattr(sampler, "seed", None),
        tolerance=tol,
        skipped=int((~valid).sum()),
        family=family.to_dict(),
        sampler=sampler.to_dict(),
    )


# ---------------------------------------------------------------------------
# Full form
# ---------------------------------------------------------------------------

def _compose(family: FormFamily, T: KernelOperator, fs: Sequence[CFunction]) -> Tuple[np.ndarray, np.ndarray]:
    if len(fs) != family.d:
        raise InvalidInputError(f"family has d={family.d} but {len(fs)} functions were given")
    for f in fs:
        if not f.space.matches(T.space):
            raise InvalidInputError("functions and operator live on different spaces")
    X = np.stack([f.values for f in fs])
    F, G, valid = family.evaluate(X)
    if not valid.all():
        bad = int(np.flatnonzero(~valid)[0])
        raise ExpressionError(f"family cannot be evaluated at point {bad}")
    return F, G


def full_form_value(family: FormFamily, T: KernelOperator, fs: Sequence[CFunction]) -> float:
    """Re sum_j integral of (Id - T)(F_j o f) * (G_j o f)"""
    F, G = _compose(family, T, fs)
    A = identity(T.space) - T
    return float(sum(duality_pair(T.space, apply(A, F[j]), G[j]).real for j in range(family.m)))


def full_form_scale(family: FormFamily, T: KernelOperator, fs: Sequence[CFunction]) -> float:
    """sum_j sum_i mu_i sum_k |(Id - T)_ik| |F_j(k)| |G_j(i)|"""
    F, G = _compose(family, T, fs)
    A = np.abs(np.eye(T.n) - T.entries)
    mu = T.space.weights
    return float(sum((mu * (A @ np.abs(F[j])) * np.abs(G[j])).sum() for j in range(family.m)))


def _full_probe(T: KernelOperator, d: int, seed: int, index: int) -> List[CFunction]:
    rng = np.random.default_rng([seed, index])
    n = T.n
    mags = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), (d, n)))
    values = mags * np.exp(2j * np.pi * rng.random((d, n)))
    if index % 2 == 1 and n >= 2:
        # two-point function close to the kernel of the block at a random cell
        mu = T.space.weights
        masses = np.abs((mu[:, None] * T.entries).T)
        np.fill_diagonal(masses, 0.0)
        x, y = divmod(int(rng.integers(0, n * n)), n)
        if masses.max() > 0:
            flat = np.flatnonzero(masses.reshape(-1) > 0)
            x, y = divmod(int(flat[rng.integers(0, flat.size)]), n)
        m = (mu[y] * T.entries[y, x])
        lam = m / abs(m) if m != 0 else 1.0
        eps = 10.0 ** rng.uniform(-3, -1)
        a = values[:, x].copy()
        values = np.zeros((d, n), dtype=complex)
        values[:, x] = a
        values[:, y] = lam * a * (1 + eps * np.exp(2j * np.pi * rng.random()))
    return [CFunction(T.space, row) for row in values]


def full_check(family: FormFamily, T: KernelOperator, samples: int = 200, seed: int = 0,
               tol: float = 1e-9, threads: int = 1,
               extra_functions: Optional[Sequence[Sequence[CFunction]]] = None) -> CheckReport:
    """
    Minimum of the full form over random functions (every other sample is a two-point probe)

    extra_functions are caller-supplied function tuples evaluated after the random
    samples; their sample_index continues from samples.
    """
    if samples < 1:
        raise InvalidInputError("samples must be at least 1")
    extra = [list(fs) for fs in (extra_functions or ())]

    def one(index: int):
        fs = _full_probe(T, family.d, seed, index) if index < samples else extra[index - samples]
        try:
            raw = full_form_value(family, T, fs)
            scale = full_form_scale(family, T, fs)
        except ExpressionError:
            return math.nan, (index,), None
        return _normalized(raw, scale), (index,), (raw, scale, fs)

    results = map_ordered(one, range(samples + len(extra)), threads)
    best = deterministic_min(results)
    if best is None:
        raise ExpressionError("family could not be evaluated on any sampled function")
    value, (index,), (raw, scale, fs) = best
    report = CheckReport(
        kind="full",
        min_value=value,
        raw_value=raw,
        scale=scale,
        witness={"sample_index": index, "seed": seed, "f": [complex_list(f.values) for f in fs]},
        samples=samples + len(extra),
        seed=seed,
        tolerance=tol,
        skipped=sum(1 for r in results if r[2] is None),
        family=family.to_dict(),
        details={"n": T.n, "extra_functions": len(extra)},
    )
    logger.info(f"{'✅' if report.verdict == 'pass' else '❌'} full check {family.name} n={T.n}: min {value:.3g}")
    return report


@dataclass
class CrosscheckResult:
    direct: float
    decomposed: float
    z2_min: float
    scalar_min: float
    ok: bool
    identity_defect: float
    mode: str = "general"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "direct": self.direct,
            "decomposed": self.decomposed,
            "z2_min": self.z2_min,
            "scalar_min": self.scalar_min,
            "ok": self.ok,
            "identity_defect": self.identity_defect,
        }


def reduction_crosscheck(family: FormFamily, T: KernelOperator, fs: Sequence[CFunction],
                         tol: float = 1e-9, mode: str = "general") -> CrosscheckResult:
    """
    Evaluate the full form directly and through the disintegration of T

    decomposed = sum_i d_i s(f(i)) + sum_pairs mass * Z2 value(lambda(x, y), f(x), f(y)).
    ok means the two agree and, whenever every block and diagonal term is
    nonnegative, the direct value is too; all comparisons are relative to
    full_form_scale.

    mode selects the disintegration and with it the Z2 hypothesis: 'general'
    blocks carry the phase of each cell, 'sub_markovian' blocks all have
    lambda = 1, and 'markovian' drops the diagonal so only lambda = 1 blocks remain.

    Raises:
        InvalidInputError: T is not of the class the mode needs
    """
    if mode not in Z2_MODES:
        raise InvalidInputError(f"unknown crosscheck mode {mode!r}; choose from {Z2_MODES}")
    direct = full_form_value(family, T, fs)
    D = disintegrate(T, mode, tol, mass_cutoff=0.0)
    F, G = _compose(family, T, fs)

    diag_terms = D.diagonal * (F * G).sum(axis=0).real
    block_values = _z2_block_values(D.phases, F[:, D.xs], F[:, D.ys], G[:, D.xs], G[:, D.ys])
    decomposed = float(diag_terms.sum() + (D.masses * block_values).sum())

    z2_min = float(block_values.min()) if block_values.size else 0.0
    scalar_min = float(diag_terms.min())
    slack = tol * (1.0 + full_form_scale(family, T, fs))
    defect = abs(direct - decomposed)
    identity_ok = defect <= slack
    hypotheses = z2_min >= -slack and scalar_min >= -slack
    ok = identity_ok and (not hypotheses or direct >= -slack)
    if not ok:
        logger.warning(f"⚠️ reduction crosscheck ({mode}) failed: direct={direct} decomposed={decomposed}")
    return CrosscheckResult(direct, decomposed, z2_min, scalar_min, bool(ok), defect, mode)
