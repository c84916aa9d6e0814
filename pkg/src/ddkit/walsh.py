"""Walsh functions in Paley ordering and slot-wise switching functions.

All evaluations run over exact rationals.  Floats are accepted as inputs
because every finite float is a dyadic rational; they are converted with
``fractions.Fraction`` without rounding.  Slot values are always sampled at
slot midpoints, which can never hit a dyadic discontinuity of the Rademacher
factors, so the sign of every sample is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = [
    "SwitchingFunctions",
    "hamming_weight",
    "paley_bits",
    "rademacher",
    "switching_functions",
    "walsh_inner_product",
    "walsh_paley",
]


def _as_unit_rational(x) -> Fraction:
    if isinstance(x, float):
        x = Fraction(x)  # exact: binary floats are dyadic rationals
    elif isinstance(x, int):
        x = Fraction(x)
    if not isinstance(x, Rational):
        raise TypeError(f"expected a rational argument, got {type(x).__name__}")
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError(f"argument must lie in [0, 1), got {x}")
    return x


def paley_bits(n: int) -> tuple[int, ...]:
    """Binary digits (b_1, ..., b_m) of ``n``, least significant first.

    The digit b_j selects the Rademacher factor of level j; the tuple carries
    no trailing zeros, so its length is the bit length m of ``n``.
    """
    if n < 0:
        raise ValueError("Paley order must be non-negative")
    return tuple((n >> k) & 1 for k in range(n.bit_length()))


def hamming_weight(n: int) -> int:
    """Number of nonzero binary digits of ``n``."""
    if n < 0:
        raise ValueError("Paley order must be non-negative")
    return bin(n).count("1")


def rademacher(j: int, x) -> int:
    """Sign of sin(2^j * pi * x), the level-j Rademacher square wave.

    Parameters
    ----------
    j : int
        Level, >= 1.  The wave switches sign with frequency 2^(j-1) on [0, 1).
    x : rational
        Evaluation point in [0, 1).  Must not be a dyadic point of level j,
        where the sign is undefined.
    """
    if j < 1:
        raise ValueError("Rademacher level must be >= 1")
    x = _as_unit_rational(x)
    t = (x * (1 << j)) % 2
    if t == 0 or t == 1:
        raise ValueError(f"x={x} is a dyadic discontinuity point of level {j}")
    return 1 if t < 1 else -1


def walsh_paley(n: int, x) -> int:
    """Walsh function of Paley order ``n``: product of Rademacher factors
    R_j over the nonzero binary digits b_j of n.  Order 0 is identically +1.
    """
    if n < 0:
        raise ValueError("Paley order must be non-negative")
    x = _as_unit_rational(x)
    sign = 1
    for j, bit in enumerate(paley_bits(n), start=1):
        if bit:
            sign *= rademacher(j, x)
    return sign


@dataclass(frozen=True)
class SwitchingFunctions:
    """Per-slot control switching values for the three Pauli axes.

    Each vector holds one value in {-1, +1} per slot; the slot count is a
    power of two and each vector is constant on the dyadic intervals of its
    defining Walsh function.
    """

    n_slots: int
    x: tuple[int, ...]
    y: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        if self.n_slots < 1 or self.n_slots & (self.n_slots - 1):
            raise ValueError(f"n_slots must be a power of two, got {self.n_slots}")
        for name in ("x", "y", "z"):
            vec = getattr(self, name)
            if len(vec) != self.n_slots:
                raise ValueError(f"axis {name} has {len(vec)} slots, expected {self.n_slots}")
            if any(v not in (-1, 1) for v in vec):
                raise ValueError(f"axis {name} contains values outside {{-1, +1}}")

    def axis(self, name: str) -> tuple[int, ...]:
        return getattr(self, name)


def switching_functions(v, n_slots: int) -> SwitchingFunctions:
    """Sample the three switching functions of a Paley-order triple.

    Slot k (0-indexed) of axis u carries -W_{n_u}((k + 1/2) / n_slots):
    the negated Walsh function of that axis order at the slot midpoint.

    Parameters
    ----------
    v : sequence of three ints
        Paley orders (n_x, n_y, n_z).
    n_slots : int
        Power of two, at least 2^m where m is the largest bit length in v.
    """
    nx, ny, nz = (int(c) for c in v)
    if min(nx, ny, nz) < 0:
        raise ValueError("Paley orders must be non-negative")
    if n_slots < 1 or n_slots & (n_slots - 1):
        raise ValueError(f"n_slots must be a power of two, got {n_slots}")
    m = n_slots.bit_length() - 1
    if max(nx, ny, nz).bit_length() > m:
        raise ValueError(
            f"n_slots={n_slots} cannot resolve orders {v}; "
            f"need at least 2^{max(nx, ny, nz).bit_length()} slots"
        )
    mids = [Fraction(2 * k + 1, 2 * n_slots) for k in range(n_slots)]
    vecs = {}
    for name, order in (("x", nx), ("y", ny), ("z", nz)):
        vecs[name] = tuple(-walsh_paley(order, t) for t in mids)
    return SwitchingFunctions(n_slots=n_slots, **vecs)


def walsh_inner_product(n: int, k: int, m: int) -> Fraction:
    """Exact inner product (1/2^m) * sum over slot midpoints of W_n * W_k.

    For n, k < 2^m this equals 1 when n == k and 0 otherwise.
    """
    if m < 0:
        raise ValueError("grid exponent m must be non-negative")
    size = 1 << m
    if n >= size or k >= size:
        raise ValueError(f"orders must be < 2^{m} = {size}")
    total = 0
    for i in range(size):
        t = Fraction(2 * i + 1, 2 * size)
        total += walsh_paley(n, t) * walsh_paley(k, t)
    return Fraction(total, size)
