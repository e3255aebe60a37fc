import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Tuple, Optional, Iterable, Sequence

import sympy

logger = logging.getLogger(__name__)

Weight = Tuple[int, ...]

FAMILY_RANKS = {
    "A": lambda r: r >= 1,
    "B": lambda r: r >= 3,
    "C": lambda r: r >= 2,
    "D": lambda r: r >= 4,
    "E": lambda r: r in (6, 7, 8),
    "F": lambda r: r == 4,
    "G": lambda r: r == 2,
}

WEYL_ORDERS = {
    ("E", 6): 51840,
    ("E", 7): 2903040,
    ("E", 8): 696729600,
    ("F", 4): 1152,
    ("G", 2): 12,
}


@dataclass(frozen=True)
class SimpleType:
    """Cartan type of a simple group; B2 is stored as C2."""
    family: str
    rank: int

    def __post_init__(self):
        family = str(self.family).upper()
        if family == "B" and self.rank == 2:
            family = "C"
        object.__setattr__(self, "family", family)
        if family not in FAMILY_RANKS:
            raise ValueError(f"Unknown family '{self.family}', expected one of {sorted(FAMILY_RANKS)}")
        if not isinstance(self.rank, int) or not FAMILY_RANKS[family](self.rank):
            raise ValueError(f"Invalid rank {self.rank} for family {family}")

    @classmethod
    def parse(cls, text: str) -> "SimpleType":
        """Parse strings like 'A3', 'e6', 'G2'."""
        text = str(text).strip()
        if len(text) < 2 or not text[1:].isdigit():
            raise ValueError(f"Malformed type string '{text}'")
        return cls(text[0].upper(), int(text[1:]))

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"


@dataclass(frozen=True)
class WeylElement:
    """w = s_{word[0]} s_{word[1]} ... acting on fundamental-weight coordinates."""
    word: Tuple[int, ...]
    matrix: Tuple[Tuple[int, ...], ...]

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in self.matrix)

    def column(self, k: int) -> tuple:
        """Image of the k-th fundamental weight (0-based)."""
        return tuple(row[k] for row in self.matrix)

    def to_dict(self) -> Dict:
        return {"word": [i + 1 for i in self.word], "matrix": [list(r) for r in self.matrix]}


def _gram_matrix(t: SimpleType) -> List[List[Fraction]]:
    """Inner products of simple roots, Bourbaki numbering."""
    r = t.rank
    lengths = [Fraction(2)] * r
    edges: List[Tuple[int, int, Fraction]] = []

    if t.family == "A":
        edges = [(i, i + 1, Fraction(-1)) for i in range(r - 1)]
    elif t.family == "B":
        lengths[r - 1] = Fraction(1)
        edges = [(i, i + 1, Fraction(-1)) for i in range(r - 1)]
    elif t.family == "C":
        lengths[r - 1] = Fraction(4)
        edges = [(i, i + 1, Fraction(-1)) for i in range(r - 2)] + [(r - 2, r - 1, Fraction(-2))]
    elif t.family == "D":
        edges = [(i, i + 1, Fraction(-1)) for i in range(r - 2)] + [(r - 3, r - 1, Fraction(-1))]
    elif t.family == "E":
        pairs = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)]
        edges = [(a - 1, b - 1, Fraction(-1)) for a, b in pairs if a <= r and b <= r]
    elif t.family == "F":
        lengths = [Fraction(2), Fraction(2), Fraction(1), Fraction(1)]
        edges = [(0, 1, Fraction(-1)), (1, 2, Fraction(-1)), (2, 3, Fraction(-1, 2))]
    elif t.family == "G":
        lengths = [Fraction(2), Fraction(6)]
        edges = [(0, 1, Fraction(-3))]

    gram = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        gram[i][i] = lengths[i]
    for a, b, value in edges:
        gram[a][b] = value
        gram[b][a] = value
    return gram


def _w0_permutation(t: SimpleType) -> Tuple[int, ...]:
    """-w0 on fundamental weights, 1-based."""
    r = t.rank
    perm = list(range(1, r + 1))
    if t.family == "A":
        perm = list(range(r, 0, -1))
    elif t.family == "D" and r % 2 == 1:
        perm[r - 2], perm[r - 1] = r, r - 1
    elif t.family == "E" and r == 6:
        perm = [6, 2, 5, 4, 3, 1]
    return tuple(perm)


class RootSystem:
    """Immutable Lie datum of a simple type, all arithmetic exact."""

    def __init__(self, simple_type: SimpleType):
        if isinstance(simple_type, str):
            simple_type = SimpleType.parse(simple_type)
        self.simple_type = simple_type
        self.rank = simple_type.rank
        r = self.rank

        self.gram = _gram_matrix(simple_type)
        # row i holds alpha_i in fundamental-weight coordinates
        self.cartan: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(int(2 * self.gram[i][j] / self.gram[j][j]) for j in range(r)) for i in range(r)
        )
        inverse = sympy.Matrix(self.cartan).inv()
        self.inv_cartan: Tuple[Tuple[Fraction, ...], ...] = tuple(
            tuple(Fraction(int(inverse[i, j].p), int(inverse[i, j].q)) for j in range(r)) for i in range(r)
        )
        self.half_norms = tuple(self.gram[i][i] / 2 for i in range(r))
        self.positive_roots: List[Tuple[int, ...]] = self._generate_positive_roots(self.cartan)
        self.w0_perm = _w0_permutation(simple_type)
        self.dim_g = 2 * len(self.positive_roots) + r
        self.rho: Weight = tuple([1] * r)

        # (x, y) = sum_k sum_i y_k * form[k][i] * x_i
        self._form = [[self.inv_cartan[k][i] * self.half_norms[i] for i in range(r)] for k in range(r)]
        denominators = [value.denominator for row in self._form for value in row]
        self._form_scale = math.lcm(*denominators) if denominators else 1
        self._int_form = [[int(value * self._form_scale) for value in row] for row in self._form]

        self._root_norms = [self._root_norm(beta) for beta in self.positive_roots]

        logger.debug("Built root system %s with %d positive roots", simple_type, len(self.positive_roots))

    def __repr__(self) -> str:
        return f"RootSystem({self.simple_type})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RootSystem) and other.simple_type == self.simple_type

    def __hash__(self) -> int:
        return hash(self.simple_type)

    @staticmethod
    def _generate_positive_roots(cartan: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
        """Closure of the simple roots under simple reflections, kept positive."""
        r = len(cartan)
        simple = [tuple(1 if j == i else 0 for j in range(r)) for i in range(r)]
        found = set(simple)
        queue = deque(simple)
        while queue:
            beta = queue.popleft()
            for j in range(r):
                pairing = sum(beta[i] * cartan[i][j] for i in range(r))
                if pairing == 0:
                    continue
                image = tuple(beta[k] - (pairing if k == j else 0) for k in range(r))
                if all(c >= 0 for c in image) and any(c > 0 for c in image) and image not in found:
                    found.add(image)
                    queue.append(image)
        return sorted(found, key=lambda b: (sum(b), b))

    def _root_norm(self, beta: Sequence[int]) -> Fraction:
        r = self.rank
        return sum(beta[i] * beta[j] * self.gram[i][j] for i in range(r) for j in range(r))

    # weights

    def root_to_weight(self, beta: Sequence[int]) -> Weight:
        """Simple-root coordinates to fundamental-weight coordinates."""
        r = self.rank
        return tuple(sum(beta[i] * self.cartan[i][j] for i in range(r)) for j in range(r))

    def weight_to_root(self, weight: Sequence) -> Tuple[Fraction, ...]:
        r = self.rank
        return tuple(sum(Fraction(weight[k]) * self.inv_cartan[k][i] for k in range(r)) for i in range(r))

    def inner_product(self, x: Sequence, y: Sequence) -> Fraction:
        r = self.rank
        return sum(Fraction(y[k]) * self._form[k][i] * x[i] for k in range(r) for i in range(r))

    def scaled_inner_product(self, x: Sequence[int], y: Sequence[int]) -> int:
        """Integer multiple (fixed per root system) of the inner product."""
        r = self.rank
        return sum(y[k] * self._int_form[k][i] * x[i] for k in range(r) for i in range(r) if y[k] and x[i])

    def coroot_pairing(self, weight: Sequence, beta: Sequence[int]) -> Fraction:
        """<weight, beta^vee> for a positive root beta in simple-root coordinates."""
        r = self.rank
        numerator = sum(Fraction(beta[j]) * weight[j] * self.half_norms[j] for j in range(r))
        return 2 * numerator / self._root_norm(beta)

    def reflect(self, v: Sequence, i: int) -> tuple:
        """Simple reflection s_i (0-based) on fundamental-weight coordinates."""
        c = v[i]
        if c == 0:
            return tuple(v)
        row = self.cartan[i]
        return tuple(v[j] - c * row[j] for j in range(self.rank))

    def to_dominant(self, v: Sequence) -> Tuple[tuple, int, Tuple[int, ...]]:
        """Return (dominant representative, sign of w, word) with v = w * dominant."""
        current = tuple(v)
        sign = 1
        word: List[int] = []
        while True:
            negative = next((i for i, c in enumerate(current) if c < 0), None)
            if negative is None:
                return current, sign, tuple(word)
            current = self.reflect(current, negative)
            sign = -sign
            word.append(negative)

    def dominant_representative(self, v: Sequence) -> tuple:
        current = tuple(v)
        while True:
            negative = next((i for i, c in enumerate(current) if c < 0), None)
            if negative is None:
                return current
            current = self.reflect(current, negative)

    def is_dominant(self, v: Sequence) -> bool:
        return all(c >= 0 for c in v)

    def dual_weight(self, weight: Sequence[int]) -> Weight:
        return dual_weight(self, weight)

    def highest_root(self) -> Tuple[int, ...]:
        return max(self.positive_roots, key=lambda b: (sum(b), b))

    def dual_highest_root(self) -> Tuple[int, ...]:
        """Highest root of the dual system, in simple-coroot coordinates."""
        transposed = [[self.cartan[j][i] for j in range(self.rank)] for i in range(self.rank)]
        return max(self._generate_positive_roots(transposed), key=lambda b: (sum(b), b))

    def weyl_group_order(self) -> int:
        t = self.simple_type
        if t.family == "A":
            return math.factorial(t.rank + 1)
        if t.family in ("B", "C"):
            return 2 ** t.rank * math.factorial(t.rank)
        if t.family == "D":
            return 2 ** (t.rank - 1) * math.factorial(t.rank)
        return WEYL_ORDERS[(t.family, t.rank)]

    # Weyl group

    def weyl_element(self, word: Iterable[int]) -> WeylElement:
        """Element s_{word[0]} ... s_{word[-1]} (0-based indices)."""
        word = tuple(word)
        r = self.rank
        columns = []
        for k in range(r):
            v = tuple(1 if j == k else 0 for j in range(r))
            for i in reversed(word):
                v = self.reflect(v, i)
            columns.append(v)
        matrix = tuple(tuple(columns[k][row] for k in range(r)) for row in range(r))
        return WeylElement(word=word, matrix=matrix)

    def weyl_elements(self) -> List[WeylElement]:
        """All of W ordered by length, then lexicographically by word."""
        order = self.weyl_group_order()
        if order > 50000:
            raise NotImplementedError(f"Refusing to enumerate |W| = {order} elements for {self.simple_type}")
        seen: Dict[tuple, Tuple[int, ...]] = {self.rho: ()}
        layer = {self.rho: ()}
        ordered: List[Tuple[int, ...]] = [()]
        while layer:
            next_layer: Dict[tuple, Tuple[int, ...]] = {}
            for v, word in layer.items():
                for i in range(self.rank):
                    if v[i] <= 0:
                        continue
                    image = self.reflect(v, i)
                    if image in seen:
                        continue
                    candidate = (i,) + word
                    if image not in next_layer or candidate < next_layer[image]:
                        next_layer[image] = candidate
            for image, word in next_layer.items():
                seen[image] = word
            ordered.extend(sorted(next_layer.values()))
            layer = next_layer
        return [self.weyl_element(word) for word in ordered]

    # parabolic data

    def levi_dimension(self, i: int) -> int:
        return levi_dimension(self, i)

    def parabolic_codim(self, support: Iterable[int]) -> int:
        """dim G/P for the parabolic of a support set (1-based nodes)."""
        nodes = [i - 1 for i in support]
        return sum(1 for beta in self.positive_roots if any(beta[i] for i in nodes))

    def diagram_automorphisms(self) -> List[Tuple[int, ...]]:
        """Node permutations (1-based images) of the Dynkin diagram."""
        t = self.simple_type
        r = t.rank
        identity = tuple(range(1, r + 1))
        if t.family == "A" and r >= 2:
            return [identity, tuple(range(r, 0, -1))]
        if t.family == "D" and r == 4:
            autos = []
            for images in permutations((1, 3, 4)):
                mapping = {1: images[0], 2: 2, 3: images[1], 4: images[2]}
                autos.append(tuple(mapping[k] for k in range(1, 5)))
            return sorted(autos)
        if t.family == "D":
            swapped = list(identity)
            swapped[r - 2], swapped[r - 1] = r, r - 1
            return [identity, tuple(swapped)]
        if t.family == "E" and r == 6:
            return [identity, (6, 2, 5, 4, 3, 1)]
        return [identity]


def build_root_system(t) -> RootSystem:
    """Construct the root system of a simple type (string or SimpleType)."""
    if isinstance(t, str):
        t = SimpleType.parse(t)
    return RootSystem(t)


def validate_weight(R: RootSystem, weight: Sequence[int]) -> Weight:
    weight = tuple(int(c) for c in weight)
    if len(weight) != R.rank:
        raise ValueError(f"Weight {list(weight)} has length {len(weight)}, expected {R.rank} for {R.simple_type}")
    if any(c < 0 for c in weight):
        raise ValueError(f"Weight {list(weight)} is not dominant")
    return weight


def dual_weight(R: RootSystem, weight: Sequence[int]) -> Weight:
    """lambda* = -w0(lambda), read off the node permutation."""
    return tuple(weight[R.w0_perm[i] - 1] for i in range(R.rank))


def support(weight: Sequence[int]) -> frozenset:
    """1-based indices of the nonzero coordinates."""
    return frozenset(i + 1 for i, c in enumerate(weight) if c != 0)


def same_parabolic(weight_a: Sequence[int], weight_b: Sequence[int]) -> bool:
    return support(weight_a) == support(weight_b)


def weyl_orbit(R: RootSystem, v: Sequence, limit: Optional[int] = None) -> set:
    """Full W-orbit of a rational weight vector."""
    start = tuple(v)
    orbit = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for i in range(R.rank):
            image = R.reflect(current, i)
            if image not in orbit:
                orbit.add(image)
                queue.append(image)
                if limit is not None and len(orbit) > limit:
                    raise ValueError(f"Weyl orbit of {list(v)} exceeds {limit} elements")
    return orbit


def levi_dimension(R: RootSystem, i: int) -> int:
    """dim of the Levi subgroup obtained by removing node i (1-based)."""
    if not 1 <= i <= R.rank:
        raise ValueError(f"Node {i} out of range 1..{R.rank}")
    kept = sum(1 for beta in R.positive_roots if beta[i - 1] == 0)
    return R.rank + 2 * kept


def bound_data(R: RootSystem) -> Dict:
    """Levi dimensions, the ratio 2 dim G / (dim G - dim L) and its argmax nodes."""
    levis = {i: levi_dimension(R, i) for i in range(1, R.rank + 1)}
    largest = max(levis.values())
    ratio = Fraction(2 * R.dim_g, R.dim_g - largest)
    return {
        "type": str(R.simple_type),
        "dim_g": R.dim_g,
        "levi_dimensions": levis,
        "argmax_nodes": sorted(i for i, value in levis.items() if value == largest),
        "ratio": ratio,
        "bound": math.floor(ratio),
    }


def bound_bG(R: RootSystem) -> int:
    return bound_data(R)["bound"]
