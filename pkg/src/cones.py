import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy
from sympy.solvers.simplex import linprog, InfeasibleLPError, UnboundedLPError

from src.rootsys import RootSystem, WeylElement

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


def _as_vector(v: Sequence) -> Vector:
    return tuple(Fraction(c) for c in v)


def _rational(value: Fraction) -> sympy.Rational:
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def _nonzero(vectors: Sequence[Sequence]) -> List[Vector]:
    return [_as_vector(v) for v in vectors if any(c != 0 for c in v)]


@dataclass(frozen=True)
class RationalCone:
    """Finitely generated cone over the rationals."""
    generators: Tuple[Vector, ...]
    ambient_dim: int

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence], ambient_dim: Optional[int] = None) -> "RationalCone":
        vectors = [_as_vector(v) for v in vectors]
        if ambient_dim is None:
            if not vectors:
                raise ValueError("Ambient dimension required for an empty generator list")
            ambient_dim = len(vectors[0])
        for v in vectors:
            if len(v) != ambient_dim:
                raise ValueError(f"Generator {v} does not live in dimension {ambient_dim}")
        return cls(generators=tuple(vectors), ambient_dim=ambient_dim)

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        return cone_member(self, x, strict=strict)

    def dimension(self) -> int:
        return cone_dimension(self.generators)

    def is_full_dimensional(self) -> bool:
        return self.dimension() == self.ambient_dim


def cone_dimension(vectors: Sequence[Sequence]) -> int:
    vectors = _nonzero(vectors)
    if not vectors:
        return 0
    return sympy.Matrix([[_rational(c) for c in v] for v in vectors]).rank()


def _max_slack(equality_blocks: List[Tuple[List[Vector], int]], target: Vector) -> Optional[Fraction]:
    """Maximize t subject to sum_b sign_b sum_j c_bj g_bj = target, c >= t, 0 <= t <= 1.

    Returns None when infeasible.
    """
    columns: List[Tuple[Vector, int]] = [(g, sign) for gens, sign in equality_blocks for g in gens]
    n_vars = len(columns) + 1
    dim = len(target)

    a_eq = [[_rational(sign * g[row]) for g, sign in columns] + [0] for row in range(dim)]
    b_eq = [_rational(c) for c in target]

    a_ub = []
    b_ub = []
    for j in range(len(columns)):
        row = [0] * n_vars
        row[j] = -1
        row[-1] = 1
        a_ub.append(row)
        b_ub.append(0)
    bound_row = [0] * n_vars
    bound_row[-1] = 1
    a_ub.append(bound_row)
    b_ub.append(1)

    objective = [0] * (n_vars - 1) + [-1]
    try:
        if dim:
            value, _ = linprog(objective, a_ub, b_ub, a_eq, b_eq)
        else:
            value, _ = linprog(objective, a_ub, b_ub)
    except InfeasibleLPError:
        return None
    except UnboundedLPError:
        # t is bounded by construction
        logger.error("Unexpected unbounded slack LP")
        raise
    slack = Fraction(str(sympy.Rational(-value)))
    logger.debug("slack LP over %d columns: %s", len(columns), slack)
    return slack


def cone_member(C, x: Sequence, strict: bool = False) -> bool:
    """Exact decision of x in cone(C), or x in its relative interior when strict."""
    if not isinstance(C, RationalCone):
        C = RationalCone.from_vectors(C, ambient_dim=len(x))
    x = _as_vector(x)
    if len(x) != C.ambient_dim:
        raise ValueError(f"Point of dimension {len(x)} against cone in dimension {C.ambient_dim}")
    gens = _nonzero(C.generators)
    if not gens:
        return (not strict) and all(c == 0 for c in x)
    slack = _max_slack([(gens, 1)], x)
    if slack is None:
        return False
    return slack > 0 if strict else True


def zero_in_interior_conv(points: Sequence[Sequence], full_dimensional: bool = False) -> bool:
    """0 in the relative interior of conv(points); with full_dimensional also dim conv = ambient."""
    if not points:
        raise ValueError("Point list must be nonempty")
    pts = [_as_vector(p) for p in points]
    dim = len(pts[0])
    if full_dimensional and cone_dimension(pts) < dim:
        return False
    # append the affine row sum c_j = 1
    lifted = [p + (Fraction(1),) for p in pts]
    target = tuple([Fraction(0)] * dim) + (Fraction(1),)
    slack = _max_slack([(lifted, 1)], target)
    return slack is not None and slack > 0


def zero_in_conv(points: Sequence[Sequence]) -> bool:
    if not points:
        raise ValueError("Point list must be nonempty")
    pts = [_as_vector(p) for p in points]
    dim = len(pts[0])
    lifted = [p + (Fraction(1),) for p in pts]
    target = tuple([Fraction(0)] * dim) + (Fraction(1),)
    return _max_slack([(lifted, 1)], target) is not None


def interiors_intersect(C1, C2) -> bool:
    """Relative interiors of two cones meet."""
    if not isinstance(C1, RationalCone):
        C1 = RationalCone.from_vectors(C1)
    if not isinstance(C2, RationalCone):
        C2 = RationalCone.from_vectors(C2)
    if C1.ambient_dim != C2.ambient_dim:
        raise ValueError("Cones live in different ambient dimensions")
    g1 = _nonzero(C1.generators)
    g2 = _nonzero(C2.generators)
    if not g1 or not g2:
        # the interior of a zero cone is empty
        return False
    target = tuple([Fraction(0)] * C1.ambient_dim)
    slack = _max_slack([(g1, 1), (g2, -1)], target)
    return slack is not None and slack > 0


def sign_vector_feasible(normals: Sequence[Sequence], signs: Sequence[int]) -> bool:
    """Is there x with sign(n_i . x) = signs[i] for every normal?"""
    if len(normals) != len(signs):
        raise ValueError("One sign per normal is required")
    if not any(signs):
        return True
    n_vars = len(normals[0])
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for normal, sign in zip(normals, signs):
        if sign == 0:
            a_eq.append([_rational(c) for c in normal])
            b_eq.append(0)
        else:
            # strict sign by homogeneity: sign * n.x >= 1
            a_ub.append([_rational(-sign * c) for c in normal])
            b_ub.append(-1)
    try:
        if a_eq:
            linprog([0] * n_vars, a_ub, b_ub, a_eq, b_eq, bounds=(None, None))
        else:
            linprog([0] * n_vars, a_ub, b_ub, bounds=(None, None))
    except InfeasibleLPError:
        return False
    return True


def ray_in_cone(ray: Sequence, others: Sequence[Sequence]) -> bool:
    """Does Q_{>0} * ray meet cone(others)?"""
    ray = _as_vector(ray)
    if all(c == 0 for c in ray):
        return True
    return cone_member(RationalCone.from_vectors(others, ambient_dim=len(ray)), ray, strict=False)


# Fourier-Motzkin oracle

Inequality = Tuple[Tuple[Fraction, ...], Fraction, bool]  # coeffs . x (< or <=) rhs, strict flag


def _normalize(ineq: Inequality) -> Inequality:
    coeffs, rhs, strict = ineq
    scale = next((abs(c) for c in coeffs if c != 0), None)
    if scale is None:
        return coeffs, rhs, strict
    return tuple(c / scale for c in coeffs), rhs / scale, strict


def fourier_motzkin_feasible(system: List[Inequality], n_vars: int) -> bool:
    """Feasibility of a mixed strict/non-strict system by variable elimination."""
    current = {_normalize(ineq) for ineq in system}
    for var in range(n_vars):
        positive, negative, rest = [], [], []
        for coeffs, rhs, strict in current:
            if coeffs[var] > 0:
                positive.append((coeffs, rhs, strict))
            elif coeffs[var] < 0:
                negative.append((coeffs, rhs, strict))
            else:
                rest.append((coeffs, rhs, strict))
        combined = set(rest)
        for pc, pr, ps in positive:
            for nc, nr, ns in negative:
                a, b = pc[var], -nc[var]
                coeffs = tuple(b * pc[k] + a * nc[k] for k in range(n_vars))
                combined.add(_normalize((coeffs, b * pr + a * nr, ps or ns)))
        current = combined
    for coeffs, rhs, strict in current:
        if strict and not rhs > 0:
            return False
        if not strict and rhs < 0:
            return False
    return True


def fm_cone_member(generators: Sequence[Sequence], x: Sequence, strict: bool = False) -> bool:
    """Independent oracle for cone_member."""
    gens = _nonzero(generators)
    x = _as_vector(x)
    if not gens:
        return (not strict) and all(c == 0 for c in x)
    m = len(gens)
    n_vars = m + 1  # coefficients and the slack t
    zero = Fraction(0)
    system: List[Inequality] = []
    for row in range(len(x)):
        coeffs = tuple(gens[j][row] for j in range(m)) + (zero,)
        system.append((coeffs, x[row], False))
        system.append((tuple(-c for c in coeffs), -x[row], False))
    for j in range(m):
        coeffs = [zero] * n_vars
        coeffs[j] = Fraction(-1)
        coeffs[-1] = Fraction(1)
        system.append((tuple(coeffs), zero, False))
    t_row = [zero] * n_vars
    t_row[-1] = Fraction(-1)
    system.append((tuple(t_row), zero, strict))
    return fourier_motzkin_feasible(system, n_vars)


def fm_zero_in_interior_conv(points: Sequence[Sequence]) -> bool:
    pts = [_as_vector(p) for p in points]
    lifted = [p + (Fraction(1),) for p in pts]
    target = tuple([Fraction(0)] * len(pts[0])) + (Fraction(1),)
    # zero-norm lifted vectors do not occur: the last coordinate is 1
    return fm_cone_member(lifted, target, strict=True)


# Suter chambers

def _linear_forms(R: RootSystem) -> List[Tuple[int, ...]]:
    """Simple coroots followed by minus the highest coroot, as forms on weight coordinates."""
    r = R.rank
    forms = [tuple(1 if j == i else 0 for j in range(r)) for i in range(r)]
    forms.append(tuple(-c for c in R.dual_highest_root()))
    return forms


def _evaluate(form: Sequence, v: Sequence) -> Fraction:
    return sum(Fraction(a) * b for a, b in zip(form, v))


def suter_chambers(R: RootSystem) -> List[WeylElement]:
    """One Weyl chamber inside each Z_i; any selection from their closures has 0 in its hull."""
    forms = _linear_forms(R)
    r = R.rank
    chambers: List[WeylElement] = []
    for i in range(r + 1):
        others = [forms[j] for j in range(r + 1) if j != i]
        system = sympy.Matrix([[sympy.Integer(c) for c in row] for row in others])
        element = None
        for attempt in range(1, 50):
            values = sympy.Matrix([sympy.Rational(1) + sympy.Rational(k, attempt * 7 + 3) * (k + 1) for k in range(r)])
            point = system.LUsolve(values)
            interior = tuple(Fraction(str(sympy.Rational(c))) for c in point)
            dominant, _, word = R.to_dominant(interior)
            if any(c == 0 for c in dominant):
                continue
            element = R.weyl_element(word)
            break
        if element is None:
            raise ArithmeticError(f"Could not place a regular point inside Z_{i + 1} for {R.simple_type}")
        for k in range(r):
            generator = element.column(k)
            if any(_evaluate(form, generator) < 0 for form in others):
                raise ArithmeticError(f"Chamber {element.word} is not inside Z_{i + 1}")
        chambers.append(element)
    return chambers


def chamber_generators(element: WeylElement) -> List[Tuple[int, ...]]:
    return [element.column(k) for k in range(len(element.matrix))]
