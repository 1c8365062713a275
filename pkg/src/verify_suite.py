"""
Property Suites
Every identity and inequality the library certifies, run as seeded sweeps.
Each suite returns a SuiteResult; run_suites filters by module, derives one
seed per suite from the master seed and never records timings, so the
summary of two runs with the same seed is byte-identical.
"""

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from tabulate import tabulate

from src.bilinear import (
    adjoint_transport_defect,
    disintegrate,
    evaluate_disintegration,
    grothendieck_sup_check,
    modulus_measure_check,
    phase_field,
)
from src.errors import ExpressionError, InvalidInputError, NumericFailure
from src.forms import (
    family_analyticity,
    full_check,
    full_form_scale,
    full_form_value,
    random_affine_family,
    reduction_crosscheck,
    z2_criterion_check,
    z2_form_scale,
    z2_form_value,
)
from src.log_utils import get_logger
from src.operators import (
    FUNCTION_CATALOG,
    KernelOperator,
    apply,
    classify,
    direct_sum,
    e_lambda,
    modulus,
    modulus_oracle,
    multiply_indicator,
    pushforward_check,
    random_symmetric_contraction,
    restrict,
    restrict_function,
)
from src.sampling import GridSampler
from src.semigroup import (
    boundary_points,
    contraction_norms,
    dissipativity_check,
    first_order_ratios,
    generator_approx_check,
    make_generator,
    phi_p,
    resolvent_defect,
    scalar_angle,
    semigroup_law_defect,
)
from src.space import CFunction, duality_pair, dual_exponent, integrate, lp_norm, make_space, sesquilinear_pair

logger = get_logger(__name__)

MODULES = ("space", "operator", "bilinear", "forms", "semigroup")

# Reduced Z2 sweep used by the sharpness suite
VERIFY_GRID = GridSampler(radial=7, angular=12)
VERIFY_LAMBDAS = 72

ANGLE_PROBES = (1.1, 1.5, 3.0, 4.0, 10.0)
MONOTONE_PROBES = (1.25, 1.5, 3.0, 4.0, 10.0)
SHARPNESS_PROBES = (1.5, 3.0, 4.0)
END_TO_END_PROBES = (1.5, 3.0, 10.0)
DISSIPATIVITY_EXPONENTS = (1.5, 2.0, 3.0, 10.0)
CONSISTENCY_EXPONENTS = (1.5, 2.0, 3.0, 4.0)
SHARPNESS_OFFSET = 0.05
# random kernels per p that get an E_lambda block carrying the boundary functions
BOUNDARY_BLOCKS = 3


@dataclass
class SuiteResult:
    name: str
    module: str
    anchor: str
    ok: bool
    cases: int
    detail: str

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class Suite:
    name: str
    module: str
    anchor: str
    run: Callable[[int], Tuple[bool, int, str]]


def suite_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _cvec(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _random_space(rng: np.random.Generator, n: int):
    return make_space(rng.uniform(0.2, 2.0, n))


def _kernels(seed: int, count: int, n_min: int, n_max: int, cls: str = "general") -> List[KernelOperator]:
    rng = np.random.default_rng(seed)
    sizes = rng.integers(n_min, n_max + 1, size=count)
    return [random_symmetric_contraction(int(n), seed + k, cls) for k, n in enumerate(sizes)]


def _fmt(x: float) -> str:
    return f"{x:.2e}"


def _with_e_lambda_block(T: KernelOperator, lam: complex) -> KernelOperator:
    # the block cells are the heaviest pair of the direct sum
    c = 2.0 * float(T.space.weights.max())
    return direct_sum(KernelOperator(make_space([c, c]), e_lambda(lam).entries), T)


def _boundary_functions(T: KernelOperator, lam: complex, points: List[complex]) -> List[List[CFunction]]:
    functions = []
    for z in points:
        values = np.zeros(T.n, dtype=complex)
        values[0], values[1] = z, lam
        functions.append([CFunction(T.space, values)])
    return functions


# ---------------------------------------------------------------------------
# space
# ---------------------------------------------------------------------------

def _holder(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    cases = 0
    for _ in range(100):
        space = _random_space(rng, int(rng.integers(1, 21)))
        f, g = _cvec(rng, space.n), _cvec(rng, space.n)
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            lhs = abs(duality_pair(space, f, g))
            rhs = lp_norm(space, f, p) * lp_norm(space, g, dual_exponent(p))
            worst = max(worst, (lhs - rhs) / rhs)
            cases += 1
    return worst <= 1e-12, cases, f"max relative excess {_fmt(worst)}"


def _norm_axioms(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        space = _random_space(rng, int(rng.integers(1, 21)))
        f, g = CFunction(space, _cvec(rng, space.n)), CFunction(space, _cvec(rng, space.n))
        a = complex(*rng.standard_normal(2))
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            nf, ng = lp_norm(space, f, p), lp_norm(space, g, p)
            homogeneity = abs(lp_norm(space, f * a, p) - abs(a) * nf) / (abs(a) * nf)
            triangle = (lp_norm(space, f + g, p) - nf - ng) / (nf + ng)
            worst = max(worst, homogeneity, triangle)
    return worst <= 1e-12, 500, f"max relative defect {_fmt(worst)}"


def _linearity(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        space = _random_space(rng, int(rng.integers(1, 21)))
        f, g = CFunction(space, _cvec(rng, space.n)), CFunction(space, _cvec(rng, space.n))
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        lhs = integrate(space, f * a + g * b)
        rhs = a * integrate(space, f) + b * integrate(space, g)
        magnitude = (abs(a) * integrate(space, f.abs()) + abs(b) * integrate(space, g.abs())).real
        worst = max(worst, abs(lhs - rhs) / magnitude)
    return worst <= 1e-15, 100, f"max relative defect {_fmt(worst)}"


# ---------------------------------------------------------------------------
# operator
# ---------------------------------------------------------------------------

def _symmetry(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    agree = True
    kernels = _kernels(seed, 50, 2, 30)
    for T in kernels:
        f, g = CFunction(T.space, _cvec(rng, T.n)), CFunction(T.space, _cvec(rng, T.n))
        lhs = sesquilinear_pair(T.space, apply(T, f), g)
        rhs = sesquilinear_pair(T.space, f, apply(T, g))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
        for scaled in (T, T * 1.5):
            found = classify(scaled)
            agree &= ("linf_contraction" in found.witnesses) == ("l1_contraction" in found.witnesses)
        agree &= classify(modulus(T)).dunford_schwartz
    ok = worst <= 1e-12 and agree
    return ok, len(kernels), f"sesquilinear defect {_fmt(worst)}, contraction criteria agree: {agree}"


def _modulus(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst_pointwise = -math.inf
    worst_oracle = -math.inf
    kernels = _kernels(seed, 50, 2, 30)
    for k, T in enumerate(kernels):
        f = _cvec(rng, T.n)
        lhs = np.abs(apply(T, f).values)
        rhs = apply(modulus(T), np.abs(f)).values.real
        worst_pointwise = max(worst_pointwise, float(((lhs - rhs) / (1.0 + rhs)).max()))
        oracle = modulus_oracle(T, np.abs(f), samples=64, seed=seed + k)
        scale = 1.0 + float(oracle.modulus_values.max())
        worst_oracle = max(worst_oracle, oracle.overshoot() / scale, oracle.attainment_gap() / scale)
    ok = worst_pointwise <= 1e-12 and worst_oracle <= 1e-12
    return ok, len(kernels), f"|Tf| - |T||f| {_fmt(worst_pointwise)}, oracle {_fmt(worst_oracle)}"


def _restriction(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    flags_kept = True
    kernels = _kernels(seed, 30, 2, 30) + _kernels(seed + 1, 20, 2, 30, "sub_markovian")
    for T in kernels:
        B = np.flatnonzero(rng.random(T.n) < 0.5)
        if B.size == 0:
            B = np.array([0])
        sub, TB = restrict(T, B)
        f, g = CFunction(T.space, _cvec(rng, T.n)), CFunction(T.space, _cvec(rng, T.n))
        Mf, Mg = multiply_indicator(f, B), multiply_indicator(g, B)
        lhs = duality_pair(T.space, Mf - apply(T, Mf), Mg)
        rf, rg = restrict_function(f, B, sub), restrict_function(g, B, sub)
        rhs = duality_pair(sub, rf - apply(TB, rf), rg)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
        before, after = classify(T), classify(TB)
        flags_kept &= after.symmetric and after.dunford_schwartz
        flags_kept &= after.sub_markovian or not before.sub_markovian
    ok = worst <= 1e-13 and flags_kept
    return ok, len(kernels), f"identity defect {_fmt(worst)}, flags kept: {flags_kept}"


def _pushforward(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    ok = True
    cases = 0
    for _ in range(40):
        target = _random_space(rng, int(rng.integers(1, 11)))
        pieces = rng.integers(1, 4, size=target.n)
        phi = np.repeat(np.arange(target.n), pieces)
        split = []
        for x, k in enumerate(pieces):
            u = rng.uniform(0.5, 1.5, k)
            part = target.weights[x] * u / u.sum()
            part[-1] = target.weights[x] - part[:-1].sum()
            split.extend(part)
        source = make_space(split)
        f = CFunction(target, _cvec(rng, target.n))
        for name in FUNCTION_CATALOG:
            ok &= pushforward_check(phi, source, target, name, f, tol=1e-14)
            cases += 1
        # multiplicative and isometric on every L^p
        g = CFunction(target, _cvec(rng, target.n))
        Pf, Pg = CFunction(source, f.values[phi]), CFunction(source, g.values[phi])
        ok &= bool(np.array_equal(Pf.values * Pg.values, (f.values * g.values)[phi]))
        for p in (1.0, 2.0, 3.0, math.inf):
            ok &= abs(lp_norm(source, Pf, p) - lp_norm(target, f, p)) <= 1e-12 * lp_norm(target, f, p)
    return bool(ok), cases, f"catalog {sorted(FUNCTION_CATALOG)} at 1e-14"


# ---------------------------------------------------------------------------
# bilinear
# ---------------------------------------------------------------------------

def _identity_defect(T: KernelOperator, D, rng: np.random.Generator) -> float:
    f, g = _cvec(rng, T.n), _cvec(rng, T.n)
    direct = duality_pair(T.space, f - apply(T, f).values, g)
    scale = 1.0 + float((T.space.weights * (np.abs(f) + np.abs(T.entries) @ np.abs(f)) * np.abs(g)).sum())
    return abs(evaluate_disintegration(D, f, g) - direct) / scale


def _disintegration(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    lowest_diag = math.inf
    kernels = _kernels(seed, 200, 2, 50)
    for T in kernels:
        D = disintegrate(T, "general", mass_cutoff=0.0)
        worst = max(worst, _identity_defect(T, D, rng))
        lowest_diag = min(lowest_diag, float(D.diagonal.min()))
    ok = worst <= 1e-10 and lowest_diag >= -1e-9
    return ok, len(kernels), f"relative defect {_fmt(worst)}, min diagonal {_fmt(lowest_diag)}"


def _sub_markovian_disintegration(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_phase = 0.0
    worst_diag = 0.0
    sub = _kernels(seed, 100, 2, 50, "sub_markovian")
    markov = _kernels(seed + 1, 100, 2, 50, "markovian")
    for T in sub:
        D = disintegrate(T, "sub_markovian", mass_cutoff=0.0)
        worst = max(worst, _identity_defect(T, D, rng))
        if D.phases.size:
            worst_phase = max(worst_phase, float(np.abs(D.phases - 1.0).max()))
    for T in markov:
        D = disintegrate(T, "markovian", mass_cutoff=0.0)
        worst = max(worst, _identity_defect(T, D, rng))
        # the diagonal the markovian mode zeroes is 1 - T1, which must vanish
        worst_diag = max(worst_diag, float(np.abs(1.0 - T.entries.sum(axis=1)).max()))
    ok = worst <= 1e-10 and worst_phase <= 1e-12 and worst_diag <= 1e-12
    return ok, len(sub) + len(markov), (f"relative defect {_fmt(worst)}, phase {_fmt(worst_phase)}, "
                                        f"diagonal {_fmt(worst_diag)}")


def _modulus_measure(seed: int) -> Tuple[bool, int, str]:
    kernels = _kernels(seed, 200, 2, 50)
    failures = sum(not modulus_measure_check(T, tol=1e-14) for T in kernels)
    transport = max(adjoint_transport_defect(T) for T in kernels)
    ok = failures == 0 and transport <= 1e-14
    return ok, len(kernels), f"{failures} failing kernels, adjoint transport {_fmt(transport)}"


def _phase_symmetry(seed: int) -> Tuple[bool, int, str]:
    kernels = _kernels(seed, 200, 2, 50)
    worst = max(phase_field(T).hermitian_defect() for T in kernels)
    return worst <= 1e-12, len(kernels), f"max defect {_fmt(worst)}"


def _grothendieck(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    kernels = _kernels(seed, 200, 2, 30)
    worst = -math.inf
    ok = True
    for T in kernels:
        count = int(rng.integers(1, 11))
        fs = [CFunction(T.space, _cvec(rng, T.n)) for _ in range(count)]
        lhs, rhs, passed = grothendieck_sup_check(T, fs, tol=1e-12)
        ok &= passed
        worst = max(worst, lhs - rhs)
    return ok, len(kernels), f"max lhs - rhs {_fmt(worst)}"


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

def _z2_oracle(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_diagonal = 0.0
    for k in range(1000):
        d = int(rng.integers(1, 4))
        family = random_affine_family(d, int(rng.integers(1, 4)), seed + k)
        lam = complex(np.exp(2j * np.pi * rng.random()))
        z, w = _cvec(rng, d), _cvec(rng, d)
        Fz, Gz = family.evaluate_point(z)
        Fw, Gw = family.evaluate_point(w)
        by_hand = float((0.5 * ((Fz - np.conj(lam) * Fw) * Gz + (Fw - lam * Fz) * Gw)).real.sum())
        scale = 1.0 + z2_form_scale(family, z, w)
        worst = max(worst, abs(z2_form_value(family, lam, z, w) - by_hand) / scale)
        worst_diagonal = max(worst_diagonal, abs(z2_form_value(family, 1.0, z, z)) / scale)
    ok = worst <= 1e-13 and worst_diagonal <= 1e-13
    return ok, 1000, f"hand expansion {_fmt(worst)}, value at z = w {_fmt(worst_diagonal)}"


def _affine_in_operator(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(2, 20))
        space = _random_space(rng, n)
        T1 = random_symmetric_contraction(n, seed + 2 * k, space=space)
        T2 = random_symmetric_contraction(n, seed + 2 * k + 1, space=space)
        theta = float(rng.random())
        family = random_affine_family(2, 2, seed + k)
        fs = [CFunction(space, _cvec(rng, n)) for _ in range(2)]
        mixed = full_form_value(family, T1 * theta + T2 * (1.0 - theta), fs)
        parts = theta * full_form_value(family, T1, fs) + (1.0 - theta) * full_form_value(family, T2, fs)
        scale = 1.0 + full_form_scale(family, T1, fs) + full_form_scale(family, T2, fs)
        worst = max(worst, abs(mixed - parts) / scale)
    return worst <= 1e-13, 50, f"max relative defect {_fmt(worst)}"


def _witness_value(report) -> float:
    family = family_analyticity(**{k: report.family["params"][k] for k in ("p", "phi", "sign")})
    lam = complex(*report.witness["lambda"])
    z = np.array([complex(*c) for c in report.witness["z"]])
    w = np.array([complex(*c) for c in report.witness["w"]])
    scale = z2_form_scale(family, z, w)
    return z2_form_value(family, lam, z, w) / scale if scale > 0 else 0.0


def _sharpness(seed: int) -> Tuple[bool, int, str]:
    notes = []
    ok = True
    cases = 0
    for p in SHARPNESS_PROBES:
        phi = phi_p(p)
        at_angle = min(
            (z2_criterion_check(family_analyticity(p, phi, sign), VERIFY_LAMBDAS, VERIFY_GRID) for sign in (1, -1)),
            key=lambda r: r.min_value,
        )
        past = z2_criterion_check(family_analyticity(p, phi + SHARPNESS_OFFSET, 1), VERIFY_LAMBDAS, VERIFY_GRID)
        replay = _witness_value(past)
        passed = at_angle.verdict == "pass" and past.verdict == "violated"
        replay_ok = abs(replay - past.min_value) <= 1e-12 * (1.0 + abs(past.min_value))
        ok &= passed and replay_ok
        cases += 3
        notes.append(f"p={p:g}: {at_angle.min_value:.1e}/{past.min_value:.1e}")
    return bool(ok), cases, "; ".join(notes)


def _end_to_end(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    kernels = _kernels(seed, 50, 2, 30)
    ok = True
    worst = math.inf
    margin = -math.inf
    crosschecks = 0
    for p in END_TO_END_PROBES:
        family = family_analyticity(p, phi_p(p), 1)
        for k, T in enumerate(kernels):
            report = full_check(family, T, samples=100, seed=seed + k)
            worst = min(worst, report.min_value)
            ok &= report.verdict == "pass"
            witness = [CFunction(T.space, [complex(*c) for c in row]) for row in report.witness["f"]]
            try:
                ok &= reduction_crosscheck(family, T, witness).ok
                crosschecks += 1
            except ExpressionError:
                ok = False
        # functions on the boundary of the scalar sector, carried by an E_lambda block
        points = boundary_points(scalar_angle(p, radial=30, angular=61, approach=30).witness_z)
        past_family = family_analyticity(p, phi_p(p) + SHARPNESS_OFFSET, 1)
        for k in range(BOUNDARY_BLOCKS):
            lam = complex(np.exp(2j * np.pi * rng.random()))
            T = _with_e_lambda_block(kernels[k], lam)
            extra = _boundary_functions(T, lam, points)
            at_angle = full_check(family, T, samples=20, seed=seed + k, extra_functions=extra)
            past = full_check(past_family, T, samples=20, seed=seed + k, extra_functions=extra)
            ok &= at_angle.verdict == "pass" and past.verdict == "violated"
            margin = max(margin, at_angle.min_value)
    cases = (len(kernels) + 2 * BOUNDARY_BLOCKS) * len(END_TO_END_PROBES)
    return bool(ok), cases, (f"min normalised value {_fmt(worst)}, {crosschecks} crosschecks, "
                             f"boundary margin {_fmt(margin)}")


def _angle_consistency(seed: int) -> Tuple[bool, int, str]:
    notes = []
    ok = True
    cases = 0
    for p in CONSISTENCY_EXPONENTS:
        bound = scalar_angle(p, seed=seed).phi_numeric
        below = min(
            (z2_criterion_check(family_analyticity(p, bound - SHARPNESS_OFFSET, sign), VERIFY_LAMBDAS, VERIFY_GRID)
             for sign in (1, -1)),
            key=lambda r: r.min_value,
        )
        above = z2_criterion_check(family_analyticity(p, bound + SHARPNESS_OFFSET, 1), VERIFY_LAMBDAS, VERIFY_GRID)
        ok &= below.verdict == "pass" and above.verdict == "violated"
        cases += 3
        notes.append(f"p={p:g}: phi {bound:.4f}, {below.min_value:.1e}/{above.min_value:.1e}")
    return bool(ok), cases, "; ".join(notes)


def _markov_reduction(seed: int) -> Tuple[bool, int, str]:
    ok = True
    worst = math.inf
    cases = 0
    for offset, mode in enumerate(("sub_markovian", "markovian")):
        kernels = _kernels(seed + offset, 20, 2, 30, mode)
        for p in END_TO_END_PROBES:
            family = family_analyticity(p, phi_p(p), 1)
            for k, T in enumerate(kernels):
                report = full_check(family, T, samples=50, seed=seed + k)
                worst = min(worst, report.min_value)
                witness = [CFunction(T.space, [complex(*c) for c in row]) for row in report.witness["f"]]
                ok &= report.verdict == "pass" and reduction_crosscheck(family, T, witness, mode=mode).ok
                cases += 1
            ok &= z2_criterion_check(family, VERIFY_LAMBDAS, VERIFY_GRID, mode=mode).verdict == "pass"
            cases += 1
    return bool(ok), cases, f"min normalised value {_fmt(worst)}"


# ---------------------------------------------------------------------------
# semigroup
# ---------------------------------------------------------------------------

def _angle(seed: int) -> Tuple[bool, int, str]:
    gaps = {}
    numeric = {}
    for p in sorted(set(ANGLE_PROBES) | set(MONOTONE_PROBES)):
        report = scalar_angle(p, seed=seed)
        numeric[p] = report.phi_numeric
        if p in ANGLE_PROBES:
            gaps[p] = report.gap
    worst = max(gaps.values())
    closed_at_4 = abs(phi_p(4.0) - math.pi / 3) <= 1e-15
    bracket_4 = abs(numeric[4.0] - math.pi / 3) <= 1e-3
    below, above = [p for p in MONOTONE_PROBES if p < 2], [p for p in MONOTONE_PROBES if p > 2]
    monotone = all(numeric[a] <= numeric[b] + 1e-9 for a, b in zip(below, below[1:]))
    monotone &= all(numeric[a] >= numeric[b] - 1e-9 for a, b in zip(above, above[1:]))
    capped = all(v <= math.pi / 2 for v in numeric.values())
    ok = worst <= 1e-3 and closed_at_4 and bracket_4 and monotone and capped
    return ok, len(numeric), f"max gap {_fmt(worst)}, pi/3 at p=4: {closed_at_4 and bracket_4}, monotone: {monotone}"


def _contraction(seed: int) -> Tuple[bool, int, str]:
    kernels = _kernels(seed, 20, 2, 30)
    worst_norm = 0.0
    worst_law = 0.0
    for T in kernels:
        G = make_generator(T)
        for t in (0.01, 0.1, 1.0, 10.0):
            worst_norm = max(worst_norm, *contraction_norms(G, t))
        worst_law = max(worst_law, semigroup_law_defect(G, 0.3, 0.7))
    ok = worst_norm <= 1.0 + 1e-11 and worst_law <= 1e-11
    return ok, len(kernels), f"max norm {worst_norm:.15f}, law defect {_fmt(worst_law)}"


def _dissipativity(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    kernels = _kernels(seed, 50, 2, 30)
    e1 = make_generator(e_lambda(1.0))
    ok = True
    worst = math.inf
    margin = -math.inf
    for p in DISSIPATIVITY_EXPONENTS:
        witness_z = scalar_angle(p, radial=30, angular=61, approach=30).witness_z
        phi = phi_p(p)
        for k, T in enumerate(kernels):
            report = dissipativity_check(make_generator(T), p, phi, samples=50, seed=seed + k, witness_z=witness_z)
            worst = min(worst, report.min_value)
            ok &= report.verdict == "pass"
        blocks = [e1] + [make_generator(_with_e_lambda_block(kernels[k], complex(np.exp(2j * np.pi * rng.random()))))
                         for k in range(BOUNDARY_BLOCKS)]
        for G in blocks:
            at_angle = dissipativity_check(G, p, phi, samples=50, seed=seed, witness_z=witness_z)
            past = dissipativity_check(G, p, phi + SHARPNESS_OFFSET, samples=50, seed=seed, witness_z=witness_z)
            ok &= at_angle.verdict == "pass" and past.verdict == "violated"
            margin = max(margin, at_angle.min_value)
    cases = (len(kernels) + 2 * (BOUNDARY_BLOCKS + 1)) * len(DISSIPATIVITY_EXPONENTS)
    return bool(ok), cases, f"min normalised value at phi_p {_fmt(worst)}, boundary margin {_fmt(margin)}"


def _bounded_reduction(seed: int) -> Tuple[bool, int, str]:
    rng = np.random.default_rng(seed)
    kernels = _kernels(seed, 20, 2, 30)
    worst_resolvent = 0.0
    ratios: List[float] = []
    for T in kernels:
        G = make_generator(T)
        f = CFunction(T.space, _cvec(rng, T.n))
        worst_resolvent = max(worst_resolvent, resolvent_defect(G, f))
        errors = generator_approx_check(G, f, (0.1, 0.05, 0.025, 0.0125))
        if errors[0] > 1e-12:
            ratios.extend(first_order_ratios(errors))
    in_band = all(0.3 <= r <= 0.7 for r in ratios)
    ok = worst_resolvent <= 1e-10 and in_band
    spread = f"[{min(ratios):.3f}, {max(ratios):.3f}]" if ratios else "[]"
    return ok, len(kernels), f"resolvent {_fmt(worst_resolvent)}, ratios in {spread}"


SUITES: Tuple[Suite, ...] = (
    Suite("holder", "space", "Hoelder inequality", _holder),
    Suite("norm_axioms", "space", "Lp norm axioms", _norm_axioms),
    Suite("integral_linearity", "space", "linearity of the integral", _linearity),
    Suite("symmetry", "operator", "symmetric absolute contractions", _symmetry),
    Suite("modulus", "operator", "linear modulus |Tf| <= |T||f|", _modulus),
    Suite("restriction", "operator", "reduction to a finite measure space", _restriction),
    Suite("pushforward", "operator", "Markov embedding functional calculus", _pushforward),
    Suite("disintegration", "bilinear", "Thm Disintegration", _disintegration),
    Suite("sub_markovian_disintegration", "bilinear", "Cor disintegration sub-Markovian",
          _sub_markovian_disintegration),
    Suite("modulus_measure", "bilinear", "Thm representing measure of the modulus", _modulus_measure),
    Suite("phase_symmetry", "bilinear", "Cor hermitian phase", _phase_symmetry),
    Suite("grothendieck", "bilinear", "Lemma modulus L1 inequality", _grothendieck),
    Suite("z2_oracle", "forms", "Z2 block expansion", _z2_oracle),
    Suite("affine_in_operator", "forms", "Lemma scalar case convexity", _affine_in_operator),
    Suite("z2_sharpness", "forms", "optimal angle sharpness", _sharpness),
    Suite("end_to_end", "forms", "Thm symmetric contraction semigroups", _end_to_end),
    Suite("angle", "semigroup", "optimal angle arccos|1 - 2/p|", _angle),
    Suite("contraction", "semigroup", "semigroup law and contraction", _contraction),
    Suite("dissipativity", "semigroup", "dissipativity on the sector", _dissipativity),
    Suite("bounded_reduction", "semigroup", "Prop reduction to bounded operators", _bounded_reduction),
    Suite("angle_consistency", "forms", "Z2 criterion agrees with the scalar angle", _angle_consistency),
    Suite("markov_reduction", "forms", "Cor sub-Markovian and Markovian reductions", _markov_reduction),
)


def run_suites(master_seed: int, scope: str = "all", names: Optional[List[str]] = None) -> List[SuiteResult]:
    """
    Run every suite of scope (a module name or 'all')

    Raises:
        InvalidInputError: unknown scope or suite name
    """
    if scope != "all" and scope not in MODULES:
        raise InvalidInputError(f"unknown scope {scope!r}; choose all or one of {MODULES}")
    known = {s.name for s in SUITES}
    unknown = sorted(set(names or ()) - known)
    if unknown:
        raise InvalidInputError(f"unknown suites {unknown}")

    results = []
    for index, suite in enumerate(SUITES):
        if scope != "all" and suite.module != scope:
            continue
        if names and suite.name not in names:
            continue
        logger.debug(f"running suite {suite.name}")
        try:
            ok, cases, detail = suite.run(suite_seed(master_seed, index))
        except (InvalidInputError, NumericFailure, ExpressionError) as e:
            logger.error(f"❌ Suite {suite.name} raised {type(e).__name__}: {e}")
            ok, cases, detail = False, 0, f"{type(e).__name__}: {e}"
        logger.info(f"{'✅' if ok else '❌'} {suite.name}: {detail}")
        results.append(SuiteResult(suite.name, suite.module, suite.anchor, bool(ok), int(cases), detail))
    return results


def summary(results: List[SuiteResult], scope: str, master_seed: int) -> Dict:
    return {
        "ok": all(r.ok for r in results),
        "scope": scope,
        "master_seed": master_seed,
        "suites": [r.to_dict() for r in results],
    }


def summary_table(results: List[SuiteResult]) -> str:
    rows = [[r.module, r.anchor, "pass" if r.ok else "FAIL", r.cases, r.detail] for r in results]
    return tabulate(rows, headers=["module", "anchor", "result", "cases", "detail"], tablefmt="github")
