"""Analytic error-per-gate upper bounds for projection strings.

Two equivalent routes are provided.  :func:`renormalize_norms` applies one
step of the norm recursion: projecting along axis u over a block of duration
T leaves the u-axis and bath-only norms fixed and maps the two orthogonal
interaction norms to ``T * (beta * j_other + j_cross * j_u)``, doubling the
duration.  :func:`axis_prefactor` shortcuts the fully iterated recursion at
leading order: each concatenation level j not aligned with the requested
axis (and not a '0' repetition level) multiplies the bound by ``2^(j-1)``
and raises the expansion exponent by one.  Levels are counted innermost
first, and the level-j duration entering the recursion is ``2^(j-1)*tau0``.

The closed-form bound is only meaningful when the bath-only scale beta and
the interaction scale J are well separated; within a configurable ratio the
functions refuse with :class:`RegimeError`.  '0' levels still double the
running time but renormalize nothing, since repetition adds first-order
norms instead of projecting them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RegimeError
from .sequence import AXES, validate_projection_string

__all__ = [
    "EPGBound",
    "LMatrix",
    "NormState",
    "axis_prefactor",
    "build_l_matrix",
    "cdd_family_bound",
    "epg_bound",
    "renormalize_norms",
]

DEFAULT_REGIME_THRESHOLD = 10.0


@dataclass(frozen=True)
class NormState:
    """Operator-norm bounds (1/s) on the bath operators of a running block."""

    beta: float
    j_x: float
    j_y: float
    j_z: float
    duration: float

    def __post_init__(self):
        if min(self.beta, self.j_x, self.j_y, self.j_z) < 0:
            raise ValueError("norm bounds must be non-negative")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    def j(self, axis: str) -> float:
        return getattr(self, f"j_{axis}")


def renormalize_norms(state: NormState, axis: str) -> NormState:
    """One projection step of the norm recursion along ``axis``.

    The caller is responsible for staying in the perturbative window
    ``max(beta, J) * duration << 1``; nothing is enforced here.
    """
    if axis not in AXES:
        raise ValueError(f"projection axis must be one of {AXES}, got {axis!r}")
    others = [a for a in AXES if a != axis]
    t, beta = state.duration, state.beta
    j_axis = state.j(axis)
    updates = {"duration": 2 * t}
    for a, b in (others, reversed(others)):
        updates[f"j_{a}"] = t * (beta * state.j(a) + state.j(b) * j_axis)
    return replace(state, **updates)


@dataclass(frozen=True)
class LMatrix:
    """3 x m binary incidence matrix of a projection string.

    Row mu in (x, y, z); column j is the j-th applied (innermost-first)
    projection, so entry (mu, j) is 1 exactly when that projection is along
    mu.  Columns of '0' letters are all-zero.
    """

    string: str
    entries: tuple[tuple[int, ...], ...] = field(repr=False)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=int)


def build_l_matrix(s: str) -> LMatrix:
    validate_projection_string(s)
    rows = tuple(
        tuple(1 if letter == axis else 0 for letter in s) for axis in AXES
    )
    return LMatrix(string=s, entries=rows)


def axis_prefactor(s: str, axis: str) -> tuple[int, int]:
    """Leading-order bound data for one axis of the fully nested recursion.

    Returns ``(prefactor, exponent)``: the prefactor is the product of
    2^(j-1) over innermost-first levels j whose letter is neither ``axis``
    nor '0', and the exponent counts those levels.
    """
    validate_projection_string(s)
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    prefactor, exponent = 1, 0
    for j, letter in enumerate(s, start=1):
        if letter not in (axis, "0"):
            prefactor <<= j - 1
            exponent += 1
    return prefactor, exponent


@dataclass(frozen=True)
class EPGBound:
    """Analytic error-per-gate bound report for one projection string."""

    string: str
    per_axis: dict[str, tuple[int, int]]
    regime: str
    mode: str
    exponent: int
    coefficient: int
    bound_value: float
    total_sum: float
    dominant: float
    n_slots: int

    def to_json_dict(self) -> dict:
        return {
            "string": self.string,
            "per_axis": {a: list(self.per_axis[a]) for a in AXES},
            "regime": self.regime,
            "mode": self.mode,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "T_slots": self.n_slots,
            "bound_value": self.bound_value,
        }


def epg_bound(
    s: str,
    tau0: float,
    beta: float,
    j: float,
    mode: str = "sum",
    regime_threshold: float = DEFAULT_REGIME_THRESHOLD,
) -> EPGBound:
    """Leading-order error-per-gate bound over the whole running time.

    Each axis contributes ``prefactor * (tau0 * max(beta, j))^exponent * j *
    T`` with ``T = 2^len(s) * tau0``: every surviving chain carries one
    uncontracted interaction factor, so the linear scale is always the
    interaction norm ``j`` (the smaller scale in weak coupling, the larger
    in strong coupling, where the anticommutator chains dominate).  ``sum``
    mode adds the axes sharing the lowest exponent and drops strictly
    higher-order axes; ``dominant`` mode keeps only the largest of the
    lowest-exponent terms.  The integer coefficients depend only on the
    projection order, so they are exchange-symmetric in beta and j.
    """
    validate_projection_string(s)
    if mode not in ("sum", "dominant"):
        raise ValueError(f"mode must be 'sum' or 'dominant', got {mode!r}")
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    if beta < 0 or j < 0:
        raise ValueError("beta and j must be non-negative")
    big, small = max(beta, j), min(beta, j)
    if small > 0 and big / small < regime_threshold:
        raise RegimeError(
            f"beta={beta:g} and J={j:g} are within a factor of "
            f"{regime_threshold:g}; no leading-order bound applies when the "
            "scales are comparable"
        )
    per_axis = {a: axis_prefactor(s, a) for a in AXES}
    exponent = min(e for _, e in per_axis.values())
    leading = [pre for pre, e in per_axis.values() if e == exponent]
    coeff_sum = sum(leading)
    coeff_dom = max(leading)
    n_slots = 1 << len(s)
    unit = (tau0 * big) ** exponent * j * (n_slots * tau0)
    coefficient = coeff_sum if mode == "sum" else coeff_dom
    return EPGBound(
        string=s,
        per_axis=per_axis,
        regime="weak-coupling" if beta >= j else "strong-coupling",
        mode=mode,
        exponent=exponent,
        coefficient=coefficient,
        bound_value=coefficient * unit,
        total_sum=coeff_sum * unit,
        dominant=coeff_dom * unit,
        n_slots=n_slots,
    )


def cdd_family_bound(alpha: int, variant: str = "cdd") -> int:
    """log2 of the dominant bound coefficient for the two repeated families.

    ``cdd`` is the alternating word (xy)^alpha with coefficient 2^(alpha^2);
    ``blocked`` is x^alpha y^alpha with coefficient 2^((3*alpha^2-alpha)/2).
    """
    if alpha < 1:
        raise ValueError("cancellation order must be >= 1")
    if variant == "cdd":
        return alpha * alpha
    if variant == "blocked":
        return (3 * alpha * alpha - alpha) // 2
    raise ValueError(f"variant must be 'cdd' or 'blocked', got {variant!r}")
