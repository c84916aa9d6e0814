"""Pulse-sequence representations and the concatenated-projection algebra.

A sequence is described in one of three equivalent ways:

* a projection string ``s`` over the alphabet ``0xyz`` whose leftmost letter
  is the innermost (first-applied, shortest-timescale) projection;
* a Paley-order triple ``(n_x, n_y, n_z)`` subject to the one-nonzero-digit
  constraint, obtained by placing bit ``2^(j-1)`` on axis u when the j-th
  letter counted from the rightmost (outermost) end equals u;
* an explicit :class:`PulseSchedule` of equal free-evolution slots, each
  terminated by an instantaneous projective Pauli pulse.

Coincident pulses arising from concatenation are merged by projective Pauli
multiplication with global phases discarded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

from .errors import ConstraintViolation
from .walsh import SwitchingFunctions, switching_functions, walsh_paley

__all__ = [
    "AXES",
    "OwddClass",
    "PaleyVector",
    "PulseSchedule",
    "axis_counts",
    "cancellation_order",
    "cdd",
    "compile_cpdd",
    "concatenate",
    "cpdd_to_gwdd",
    "frame_signs",
    "ga8",
    "gwdd_to_cpdd",
    "owdd_enumerate",
    "owdd_h",
    "owdd_l",
    "owdd_slot_count",
    "pauli_product",
    "projection",
    "pulse_count",
    "schedule_to_switching",
    "switching_to_schedule",
    "validate_paley_vector",
    "validate_projection_string",
]

AXES = ("x", "y", "z")
PAULI_LABELS = ("I", "X", "Y", "Z")

# Projective single-qubit Pauli products, phases discarded.
_MUL = {
    ("I", "I"): "I", ("I", "X"): "X", ("I", "Y"): "Y", ("I", "Z"): "Z",
    ("X", "I"): "X", ("X", "X"): "I", ("X", "Y"): "Z", ("X", "Z"): "Y",
    ("Y", "I"): "Y", ("Y", "X"): "Z", ("Y", "Y"): "I", ("Y", "Z"): "X",
    ("Z", "I"): "Z", ("Z", "X"): "Y", ("Z", "Y"): "X", ("Z", "Z"): "I",
}

# Conjugation sign of each Pauli axis (x, y, z) under a frame label.
_CONJ_SIGNS = {
    "I": (1, 1, 1),
    "X": (1, -1, -1),
    "Y": (-1, 1, -1),
    "Z": (-1, -1, 1),
}


def pauli_product(a: str, b: str) -> str:
    """Label of a*b in the projective Pauli group (global phase dropped)."""
    return _MUL[(a, b)]


class PaleyVector(NamedTuple):
    """Paley-order triple (n_x, n_y, n_z) specifying a Walsh-modulated sequence."""

    n_x: int
    n_y: int
    n_z: int


def validate_paley_vector(v) -> PaleyVector:
    """Check the one-nonzero-digit constraint.

    Raises :class:`ConstraintViolation` naming the lowest offending bit
    position (1-based) when two or more axes set the same binary digit.
    """
    v = PaleyVector(*(int(c) for c in v))
    if min(v) < 0:
        raise ValueError("Paley orders must be non-negative")
    for j in range(1, max(v).bit_length() + 1):
        mask = 1 << (j - 1)
        axes = [a for a, n in zip(AXES, v) if n & mask]
        if len(axes) > 1:
            raise ConstraintViolation(j, axes)
    return v


def validate_projection_string(s: str) -> str:
    if not s:
        raise ValueError("projection string must have at least one letter")
    bad = set(s) - set("0xyz")
    if bad:
        raise ValueError(f"projection string may only contain 0xyz, got {sorted(bad)}")
    return s


def axis_counts(s: str) -> tuple[int, int, int]:
    """Occurrences (r_x, r_y, r_z) of each projection axis; '0' counts nowhere."""
    validate_projection_string(s)
    return (s.count("x"), s.count("y"), s.count("z"))


@dataclass(frozen=True)
class PulseSchedule:
    """Equal slots of duration ``tau0``; ``pulses[k]`` fires at the end of slot k.

    For a decoupling sequence the ordered product of all pulse labels is
    proportional to the identity.
    """

    tau0: float
    pulses: tuple[str, ...]

    def __post_init__(self):
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        object.__setattr__(self, "pulses", tuple(self.pulses))
        bad = set(self.pulses) - set(PAULI_LABELS)
        if bad:
            raise ValueError(f"unknown pulse labels {sorted(bad)}")

    @property
    def n_slots(self) -> int:
        return len(self.pulses)

    @property
    def duration(self) -> float:
        return self.n_slots * self.tau0

    def pulse_product(self) -> str:
        """Projective label of the ordered product of all pulses."""
        out = "I"
        for p in self.pulses:
            out = pauli_product(p, out)
        return out

    def is_decoupling(self) -> bool:
        return self.pulse_product() == "I"

    def to_json_dict(self) -> dict:
        return {"tau0_s": self.tau0, "n_slots": self.n_slots, "pulses": list(self.pulses)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "PulseSchedule":
        sched = cls(tau0=float(data["tau0_s"]), pulses=tuple(data["pulses"]))
        if int(data["n_slots"]) != sched.n_slots:
            raise ValueError(
                f"n_slots={data['n_slots']} does not match {sched.n_slots} pulses"
            )
        return sched


def projection(axis: str, tau0: float = 1.0) -> PulseSchedule:
    """Two-slot projection sequence p_axis = U f U f (axis '0' uses identities)."""
    if axis not in ("0", "x", "y", "z"):
        raise ValueError(f"unknown projection axis {axis!r}")
    label = "I" if axis == "0" else axis.upper()
    return PulseSchedule(tau0=tau0, pulses=(label, label))


def concatenate(outer_axis: str, inner: PulseSchedule) -> PulseSchedule:
    """Replace each free slot of p_outer_axis with the full inner schedule.

    The inner schedule's closing pulse coincides with the outer projection
    pulse at the junction and at the end; the two merge projectively.
    Axis '0' therefore repeats the inner schedule twice verbatim.
    """
    if outer_axis not in ("0", "x", "y", "z"):
        raise ValueError(f"unknown projection axis {outer_axis!r}")
    outer = "I" if outer_axis == "0" else outer_axis.upper()
    merged = pauli_product(outer, inner.pulses[-1])
    half = inner.pulses[:-1] + (merged,)
    return PulseSchedule(tau0=inner.tau0, pulses=half + half)


def compile_cpdd(s: str, tau0: float = 1.0) -> PulseSchedule:
    """Compile a projection string into its pulse schedule.

    The leftmost letter is applied first (innermost); each further letter
    wraps the schedule built so far, so the result has 2^len(s) slots.
    """
    validate_projection_string(s)
    sched = projection(s[0], tau0)
    for letter in s[1:]:
        sched = concatenate(letter, sched)
    return sched


def cpdd_to_gwdd(s: str) -> PaleyVector:
    """Paley-order triple of a projection string.

    Letter j counted from the rightmost (outermost) end contributes bit
    2^(j-1) to the order of its axis; '0' letters contribute nothing.
    """
    validate_projection_string(s)
    orders = {a: 0 for a in AXES}
    for j, letter in enumerate(reversed(s), start=1):
        if letter != "0":
            orders[letter] |= 1 << (j - 1)
    return PaleyVector(orders["x"], orders["y"], orders["z"])


def gwdd_to_cpdd(v, length: int | None = None) -> str:
    """Projection string of a valid Paley-order triple; inverse of
    :func:`cpdd_to_gwdd` up to innermost repetition padding.

    A triple does not record leading '0' (innermost repetition) letters, so
    by default the string length is the largest bit length in the triple
    (at least 1, so the all-zero triple maps to "0").  Pass ``length`` to
    left-pad with '0' letters explicitly.
    """
    v = validate_paley_vector(v)
    m = max(1, max(v).bit_length())
    if length is not None:
        if length < m:
            raise ValueError(f"length {length} cannot hold orders with {m} bits")
        m = length
    letters = []
    for j in range(m, 0, -1):  # string is written outward-in: s_m first
        mask = 1 << (j - 1)
        hit = [a for a, n in zip(AXES, v) if n & mask]
        letters.append(hit[0] if hit else "0")
    return "".join(letters)


def cancellation_order(s: str) -> int:
    """min{r_y + r_z, r_x + r_z, r_x + r_y} from the axis projection counts."""
    rx, ry, rz = axis_counts(s)
    return min(ry + rz, rx + rz, rx + ry)


def cdd(r: int) -> str:
    """Concatenated-decoupling string of level r: the word xy repeated r times."""
    if r < 1:
        raise ValueError("concatenation level must be >= 1")
    return "xy" * r


def ga8(r: int) -> str:
    """The word zyx repeated r times (the genetic-algorithm eight-slot family)."""
    if r < 1:
        raise ValueError("repetition count must be >= 1")
    return "zyx" * r


def owdd_h(alpha: int) -> str:
    """Slot-optimal member with the maximum number of axis switches:
    the length-m prefix of xyzxyz..., m = (3*alpha + parity)/2.
    """
    if alpha < 1:
        raise ValueError("cancellation order must be >= 1")
    m = (3 * alpha + alpha % 2) // 2
    return ("xyz" * ((m + 2) // 3))[:m]


def owdd_l(alpha: int) -> str:
    """Slot-optimal member with blocked axes: x^r_x y^r_y z^r_z with counts
    ((alpha+parity)/2, (alpha+parity)/2, (alpha-parity)/2).
    """
    if alpha < 1:
        raise ValueError("cancellation order must be >= 1")
    pb = alpha % 2
    high = (alpha + pb) // 2
    low = (alpha - pb) // 2
    return "x" * high + "y" * high + "z" * low


def owdd_slot_count(alpha: int) -> int:
    """Slots used by any slot-optimal sequence of cancellation order alpha:
    2^((3*alpha + parity)/2) with parity = alpha mod 2.
    """
    if alpha < 1:
        raise ValueError("cancellation order must be >= 1")
    return 1 << ((3 * alpha + alpha % 2) // 2)


@dataclass(frozen=True)
class OwddClass:
    """Equivalence class of slot-optimal sequences at one cancellation order."""

    order: int
    parity_bit: int
    axis_counts: tuple[int, int, int]  # sorted ascending multiset
    length: int

    @classmethod
    def from_order(cls, alpha: int) -> "OwddClass":
        if alpha < 1:
            raise ValueError("cancellation order must be >= 1")
        pb = alpha % 2
        low = (alpha - pb) // 2
        high = (alpha + pb) // 2
        return cls(
            order=alpha,
            parity_bit=pb,
            axis_counts=(low, high, high),
            length=(3 * alpha + pb) // 2,
        )


def _multiset_words(counts: dict[str, int]) -> Iterator[str]:
    """Distinct words with the given letter counts, in lexicographic order."""
    total = sum(counts.values())
    if total == 0:
        yield ""
        return
    for letter in sorted(counts):
        if counts[letter] == 0:
            continue
        counts[letter] -= 1
        for rest in _multiset_words(counts):
            yield letter + rest
        counts[letter] += 1


def owdd_enumerate(alpha: int) -> Iterator[str]:
    """All slot-optimal projection strings of cancellation order alpha.

    These are the '0'-free words of length m = (3*alpha + parity)/2 whose
    axis-count multiset is a permutation of the class counts; every emitted
    word satisfies ``cancellation_order(word) == alpha``.
    """
    cls = OwddClass.from_order(alpha)
    assignments = sorted(set(itertools.permutations(cls.axis_counts)))
    for rx, ry, rz in assignments:
        yield from _multiset_words({"x": rx, "y": ry, "z": rz})


def pulse_count(sched: PulseSchedule, policy: str = "merge") -> int:
    """Number of applied pulses.

    ``merge`` counts non-identity labels after coincident pulses have been
    merged projectively (identity merges cost nothing).  ``keep-events``
    counts one pulse event per slot boundary, i.e. the slot count.
    """
    if policy == "merge":
        return sum(1 for p in sched.pulses if p != "I")
    if policy == "keep-events":
        return sched.n_slots
    raise ValueError(f"unknown pulse-count policy {policy!r}")


def frame_signs(sched: PulseSchedule) -> list[tuple[int, int, int]]:
    """Per-slot conjugation signs (f_x, f_y, f_z) of the accumulated pulse frame.

    During slot k the control frame is the product of all earlier pulses;
    f_u is the sign picked up by sigma_u under conjugation with that frame.
    """
    out = []
    cur = (1, 1, 1)
    for pulse in sched.pulses:
        out.append(cur)
        s = _CONJ_SIGNS[pulse]
        cur = (cur[0] * s[0], cur[1] * s[1], cur[2] * s[2])
    return out


def _walsh_order_of(vec: tuple[int, ...]) -> int | None:
    """Paley order whose Walsh function matches ``vec`` on the midpoint grid,
    or None when ``vec`` is not a pure Walsh function.
    """
    n_slots = len(vec)
    m = n_slots.bit_length() - 1
    # The flip parity across the boundary at index 2^(m-j) equals the XOR of
    # bits j..m of the order; peeling from the top recovers each bit.
    g = [0] * (m + 2)
    for j in range(1, m + 1):
        k = 1 << (m - j)
        g[j] = 1 if vec[k - 1] != vec[k] else 0
    order = 0
    for j in range(1, m + 1):
        if g[j] ^ g[j + 1]:
            order |= 1 << (j - 1)
    for i in range(n_slots):
        if vec[i] != walsh_paley(order, Fraction(2 * i + 1, 2 * n_slots)):
            return None
    return order


def schedule_to_switching(sched: PulseSchedule) -> SwitchingFunctions:
    """Recover the three switching functions of a decoupling schedule.

    The Pauli frame is tracked slot by slot.  When the frame modulation is
    consistent with a valid Paley-order triple the exact Walsh-sampled
    switching functions of that triple are returned, so a schedule compiled
    from a triple round-trips exactly.  Any other decoupling schedule falls
    back to the canonical per-slot frame encoding (identity frame maps to
    (-1, -1, -1)); both encodings describe the same frames up to the global
    sign freedom of a triple.
    """
    if not sched.is_decoupling():
        raise ValueError("pulse product is not proportional to the identity")
    n_slots = sched.n_slots
    if n_slots < 1 or n_slots & (n_slots - 1):
        raise ValueError(f"slot count must be a power of two, got {n_slots}")
    signs = frame_signs(sched)
    f_vecs = [tuple(t[i] for t in signs) for i in range(3)]
    orders = [_walsh_order_of(v) for v in f_vecs]
    if None not in orders:
        a, b, c = orders  # f_x = W_a, f_y = W_b, f_z = W_c
        candidate = PaleyVector(b & c, a & c, a & b)
        consistent = (
            (candidate.n_y | candidate.n_z) == a
            and (candidate.n_x | candidate.n_z) == b
            and (candidate.n_x | candidate.n_y) == c
        )
        if consistent:
            try:
                validate_paley_vector(candidate)
            except ConstraintViolation:
                pass
            else:
                return switching_functions(candidate, n_slots)
    canon = [t if t != (1, 1, 1) else (-1, -1, -1) for t in signs]
    return SwitchingFunctions(
        n_slots=n_slots,
        x=tuple(t[0] for t in canon),
        y=tuple(t[1] for t in canon),
        z=tuple(t[2] for t in canon),
    )


def switching_to_schedule(sw: SwitchingFunctions, tau0: float = 1.0) -> PulseSchedule:
    """Rebuild a pulse schedule from switching functions.

    At each interior slot boundary the pulse is the projective product of
    sigma_u over the axes whose switching value flips; the closing pulse at
    the end restores the frame to the identity.
    """
    triples = list(zip(sw.x, sw.y, sw.z))
    pulses = []
    for prev, cur in zip(triples, triples[1:]):
        label = "I"
        for axis, p, c in zip(AXES, prev, cur):
            if p != c:
                label = pauli_product(axis.upper(), label)
        pulses.append(label)
    closing = "I"
    for axis, val in zip(AXES, triples[-1]):
        if val == 1:
            closing = pauli_product(axis.upper(), closing)
    pulses.append(closing)
    return PulseSchedule(tau0=tau0, pulses=tuple(pulses))
