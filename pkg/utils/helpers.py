"""Shared parsing, serialization and exact linear algebra helpers."""

import hashlib
import json
from fractions import Fraction
from typing import Any, List, Sequence, Tuple

import numpy as np
import sympy


def parse_vector(text: str) -> Tuple[int, ...]:
    """Parse '1,0,2' into (1, 0, 2)."""
    text = str(text).strip()
    if not text:
        raise ValueError("Empty vector string")
    try:
        return tuple(int(part.strip()) for part in text.split(","))
    except ValueError:
        raise ValueError(f"Malformed vector '{text}': expected comma-separated integers")


def parse_weight_tuple(text: str) -> List[Tuple[int, ...]]:
    """Parse '1,0;0,1' into [(1, 0), (0, 1)]."""
    members = [m for m in str(text).split(";")]
    if not members or any(not m.strip() for m in members):
        raise ValueError(f"Malformed weight tuple '{text}': members are separated by ';'")
    return [parse_vector(m) for m in members]


def parse_supports(text: str) -> List[frozenset]:
    """Parse '1|2,3|4' into [{1}, {2, 3}, {4}]."""
    supports = []
    for part in str(text).split("|"):
        nodes = parse_vector(part)
        if any(n < 1 for n in nodes):
            raise ValueError(f"Support nodes are 1-based, got '{part}'")
        supports.append(frozenset(nodes))
    return supports


def format_fraction(value) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert tuples, sets, Fractions and numpy scalars."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dump_json(payload: Any) -> str:
    """Deterministic JSON (sorted keys, no whitespace variation)."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)


def digest(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
    return h.hexdigest()[:16]


def modular_matmul(a: np.ndarray, b: np.ndarray, prime: int) -> np.ndarray:
    """a @ b mod p in int64 for p < 2^31, splitting b into 16-bit halves."""
    a = np.asarray(a, dtype=np.int64) % prime
    b = np.asarray(b, dtype=np.int64) % prime
    if a.shape[-1] >= 1 << 16:
        raise ValueError(f"Inner dimension {a.shape[-1]} too large for int64 modular products")
    high, low = b >> 16, b & 0xFFFF
    return (((a @ high) % prime << 16) + (a @ low) % prime) % prime


def modular_rank(matrix: np.ndarray, prime: int) -> int:
    """Rank over F_p by Gaussian elimination; never exceeds the rank over Q."""
    m = np.array(matrix, dtype=np.int64) % prime
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nonzero = np.flatnonzero(m[rank:, col])
        if nonzero.size == 0:
            continue
        pivot = rank + int(nonzero[0])
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        inverse = pow(int(m[rank, col]), prime - 2, prime)
        m[rank] = (m[rank] * inverse) % prime
        below = np.flatnonzero(m[rank + 1:, col]) + rank + 1
        if below.size:
            factors = m[below, col][:, None]
            # entries stay below p, so products fit in int64 for p < 2^31
            m[below] = (m[below] - (factors * m[rank]) % prime) % prime
        rank += 1
    return rank


def exact_rank(matrix: Sequence[Sequence]) -> int:
    return sympy.Matrix([[sympy.Rational(str(Fraction(c))) for c in row] for row in matrix]).rank()
