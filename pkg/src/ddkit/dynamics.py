"""Exact finite-dimensional dynamics of a pulsed qubit in a small spin bath.

The joint Hilbert space is qubit (x) bath with the qubit factor first, so a
state vector of dimension 2*2^n_bath reshapes to (2, 2^n_bath).  The static
Hamiltonian is ``H = sigma_x (x) B_x + sigma_y (x) B_y + sigma_z (x) B_z +
1 (x) B_0`` with no qubit-only drift; pulses are instantaneous projective
Paulis on the qubit alone.  Propagators come from one Hermitian
eigendecomposition of H per model, reused for every slot duration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import DegenerateDraw, PrincipalBranchError, UnsupportedOrder
from .sequence import AXES, PulseSchedule, compile_cpdd, frame_signs

__all__ = [
    "ErrorAction",
    "SpinBathModel",
    "apply_schedule",
    "error_action_from_generator",
    "estimate_co",
    "exact_error_action",
    "fidelity",
    "fidelity_loss",
    "free_propagator",
    "magnus",
    "operator_norm",
    "reduced_state",
    "renormalized_bath_ops",
    "sample_bath",
    "toggled_hamiltonians",
    "total_propagator",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI_BY_INDEX = (PAULI["I"], PAULI["X"], PAULI["Y"], PAULI["Z"])


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(a, 2))


def _commutator(a, b):
    return a @ b - b @ a


def _anticommutator(a, b):
    return a @ b + b @ a


class SpinBathModel:
    """Immutable toy bath: Hermitian operators B_0, B_x, B_y, B_z on 2^n_bath.

    ``beta`` and ``j`` store the realized norms ||B_0|| and max_u ||B_u||.
    The Hamiltonian eigendecomposition is cached on first use; models are
    safe to share across threads after construction.
    """

    def __init__(self, n_bath, b0, bx, by, bz):
        dim = 2**n_bath
        ops = {"0": np.asarray(b0, dtype=complex)}
        for name, op in zip(AXES, (bx, by, bz)):
            ops[name] = np.asarray(op, dtype=complex)
        for name, op in ops.items():
            if op.shape != (dim, dim):
                raise ValueError(f"B_{name} must be {dim}x{dim} for n_bath={n_bath}")
            if not np.allclose(op, op.conj().T, atol=1e-12 * max(1.0, operator_norm(op))):
                raise ValueError(f"B_{name} is not Hermitian")
        self.n_bath = int(n_bath)
        self.b0 = ops["0"]
        self.bx = ops["x"]
        self.by = ops["y"]
        self.bz = ops["z"]
        self.beta = operator_norm(self.b0)
        self.j = max(operator_norm(ops[a]) for a in AXES)
        self._eig = None

    @property
    def dim_bath(self) -> int:
        return 2**self.n_bath

    def bath_op(self, axis: str) -> np.ndarray:
        return {"0": self.b0, "x": self.bx, "y": self.by, "z": self.bz}[axis]

    def hamiltonian(self) -> np.ndarray:
        h = np.kron(np.eye(2), self.b0).astype(complex)
        for axis, op in zip(AXES, (self.bx, self.by, self.bz)):
            h += np.kron(PAULI[axis.upper()], op)
        return h

    def _eigh(self):
        if self._eig is None:
            w, v = np.linalg.eigh(self.hamiltonian())
            self._eig = (w, v)
        return self._eig

    def h_norm(self) -> float:
        w, _ = self._eigh()
        return float(np.max(np.abs(w)))


@lru_cache(maxsize=4)
def _two_site_templates(n_bath: int) -> np.ndarray:
    """Stacked operators sigma^a_i (x) sigma^b_k for all ordered pairs i != k.

    Shape (n_pairs, 4, 4, d, d) with pairs in lexicographic (i, k) order and
    Pauli indices ordered (I, X, Y, Z).
    """
    dim = 2**n_bath
    pairs = [(i, k) for i in range(n_bath) for k in range(n_bath) if i != k]
    out = np.empty((len(pairs), 4, 4, dim, dim), dtype=complex)
    for p, (i, k) in enumerate(pairs):
        for a in range(4):
            for b in range(4):
                factors = [np.eye(2, dtype=complex)] * n_bath
                factors[i] = _PAULI_BY_INDEX[a]
                factors[k] = _PAULI_BY_INDEX[b]
                op = factors[0]
                for f in factors[1:]:
                    op = np.kron(op, f)
                out[p, a, b] = op
    return out


def sample_bath(n_bath: int, beta: float, j: float, rng: np.random.Generator) -> SpinBathModel:
    """Draw a random two-body bath model and rescale it to target norms.

    Each of B_0, B_x, B_y, B_z is a sum of sigma^a_i (x) sigma^b_k over all
    ordered bath-spin pairs with independent uniform [0, 1) coefficients.
    B_0 is rescaled to norm ``beta``; the three interaction operators share
    one scale factor bringing max_u ||B_u|| to ``j``, preserving anisotropy.
    """
    if n_bath < 2:
        raise ValueError("need at least two bath spins for two-body couplings")
    if beta < 0 or j < 0:
        raise ValueError("target norms must be non-negative")
    templates = _two_site_templates(n_bath)
    n_pairs = templates.shape[0]
    coeffs = rng.random(size=(4, n_pairs, 4, 4))
    raw = [np.tensordot(coeffs[m], templates, axes=3) for m in range(4)]
    norms = [operator_norm(op) for op in raw]
    if any(n == 0.0 for n in norms):
        raise DegenerateDraw("a sampled bath operator has zero norm; redraw")
    b0 = raw[0] * (beta / norms[0]) if beta > 0 else np.zeros_like(raw[0])
    scale = j / max(norms[1:])
    return SpinBathModel(n_bath, b0, raw[1] * scale, raw[2] * scale, raw[3] * scale)


def free_propagator(model: SpinBathModel, dt: float) -> np.ndarray:
    """exp(-i H dt) from the cached Hermitian eigendecomposition of H."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    w, v = model._eigh()
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _apply_pulse(psi: np.ndarray, label: str, dim_bath: int) -> np.ndarray:
    if label == "I":
        return psi
    return (PAULI[label] @ psi.reshape(2, dim_bath)).reshape(-1)


def apply_schedule(model: SpinBathModel, sched: PulseSchedule, psi0: np.ndarray) -> np.ndarray:
    """Alternate free evolution over tau0 and instantaneous qubit pulses."""
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (2 * model.dim_bath,):
        raise ValueError(f"state must have dimension {2 * model.dim_bath}")
    u_free = free_propagator(model, sched.tau0)
    for pulse in sched.pulses:
        psi = u_free @ psi
        psi = _apply_pulse(psi, pulse, model.dim_bath)
    return psi


def reduced_state(psi: np.ndarray) -> np.ndarray:
    """Qubit density matrix after tracing out the bath factor."""
    psi = np.asarray(psi, dtype=complex)
    mat = psi.reshape(2, -1)
    return mat @ mat.conj().T


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """Uhlmann fidelity against a pure state: sqrt(<psi|rho|psi>)."""
    psi = np.asarray(psi, dtype=complex)
    val = float(np.real(psi.conj() @ np.asarray(rho) @ psi))
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


def fidelity_loss(psi_joint: np.ndarray, psi_sys: np.ndarray) -> float:
    """1 - fidelity(reduced_state(psi_joint), psi_sys), evaluated stably.

    The survival probability <psi|rho|psi> is 1 - q with q the weight of the
    joint state on the orthogonal qubit component; computing q directly and
    returning q / (1 + sqrt(1 - q)) avoids the catastrophic cancellation of
    1 - sqrt(1 - q), which floors near 1e-13 for well-decoupled sequences.
    """
    psi_sys = np.asarray(psi_sys, dtype=complex)
    perp = np.array([-np.conj(psi_sys[1]), np.conj(psi_sys[0])])
    amps = perp.conj() @ np.asarray(psi_joint, dtype=complex).reshape(2, -1)
    q = float(np.real(amps.conj() @ amps))
    q = min(max(q, 0.0), 1.0)
    return q / (1.0 + np.sqrt(1.0 - q))


def toggled_hamiltonians(model: SpinBathModel, sched: PulseSchedule):
    """Per-slot toggling-frame Hamiltonians with their interaction signs.

    Returns a list of ``((f_x, f_y, f_z), H_slot)`` where the signs are the
    conjugation signs of the accumulated pulse frame and ``H_slot = 1 (x) B_0
    + sum_u f_u sigma_u (x) B_u``.
    """
    out = []
    h_bath = np.kron(np.eye(2), model.b0)
    terms = [np.kron(PAULI[a.upper()], model.bath_op(a)) for a in AXES]
    for signs in frame_signs(sched):
        h = h_bath.astype(complex)
        for f, term in zip(signs, terms):
            h = h + f * term
        out.append((signs, h))
    return out


def _trace_out_system(omega: np.ndarray) -> np.ndarray:
    d = omega.shape[0] // 2
    return omega[:d, :d] + omega[d:, d:]


@dataclass(frozen=True)
class ErrorAction:
    """Hermitian generator of the toggling-frame error evolution.

    ``sb_part`` is omega with the bath-only component removed, i.e. the
    piece that actually mixes qubit and bath; its norm is the error per
    gate.
    """

    omega: np.ndarray
    sb_part: np.ndarray

    @property
    def epg(self) -> float:
        return operator_norm(self.sb_part)


def error_action_from_generator(omega: np.ndarray) -> ErrorAction:
    """Split off the bath-only component: omega - 1 (x) Tr_S(omega)/2."""
    omega = np.asarray(omega, dtype=complex)
    bath_part = _trace_out_system(omega) / 2
    sb = omega - np.kron(np.eye(2), bath_part)
    return ErrorAction(omega=omega, sb_part=sb)


def magnus(toggled, tau0: float, order: int = 2) -> ErrorAction:
    """Magnus expansion of the error action for piecewise-constant segments.

    Orders 1 and 2 use the standard piecewise-constant formulas
    ``sum_k H_k tau0`` and ``-(i/2) tau0^2 sum_{k>l} [H_k, H_l]``.  Order 3
    is only available for two segments (a single projection), where it is
    the third Baker-Campbell-Hausdorff term.
    """
    mats = [t[1] if isinstance(t, tuple) else np.asarray(t) for t in toggled]
    if order not in (1, 2, 3):
        raise UnsupportedOrder(f"Magnus order must be 1, 2 or 3, got {order}")
    if order == 3 and len(mats) != 2:
        raise UnsupportedOrder("order 3 is only supported for two segments")
    omega = tau0 * sum(mats)
    if order >= 2:
        acc = np.zeros_like(mats[0])
        prefix = np.zeros_like(mats[0])
        for k, h in enumerate(mats):
            if k > 0:
                acc = acc + _commutator(h, prefix)
            prefix = prefix + h
        omega = omega - 0.5j * tau0**2 * acc
    if order == 3:
        a, b = mats
        omega = omega - (tau0**3 / 12.0) * (
            _commutator(b, _commutator(b, a)) + _commutator(a, _commutator(a, b))
        )
    return error_action_from_generator(omega)


def total_propagator(model: SpinBathModel, sched: PulseSchedule) -> np.ndarray:
    """Full joint propagator of the pulsed evolution, including all pulses."""
    dim = 2 * model.dim_bath
    u_free = free_propagator(model, sched.tau0)
    u = np.eye(dim, dtype=complex)
    eye_b = np.eye(model.dim_bath)
    for pulse in sched.pulses:
        u = u_free @ u
        if pulse != "I":
            u = np.kron(PAULI[pulse], eye_b) @ u
    return u


def _pulse_phase(sched: PulseSchedule) -> complex:
    """Scalar such that the ordered 2x2 pulse product equals phase * identity."""
    prod = np.eye(2, dtype=complex)
    for pulse in sched.pulses:
        prod = PAULI[pulse] @ prod
    if abs(prod[0, 1]) > 1e-12 or abs(prod[1, 0]) > 1e-12 or abs(prod[0, 0] - prod[1, 1]) > 1e-12:
        raise ValueError("pulse product is not proportional to the identity")
    return prod[0, 0]


def exact_error_action(model: SpinBathModel, sched: PulseSchedule) -> ErrorAction:
    """Error action from the exact propagator: omega = i log U(T).

    The pulse product's global phase is divided out first, then the
    principal logarithm is taken through a complex Schur form with
    eigenphases in (-pi, pi].  Refuses with :class:`PrincipalBranchError`
    when ``||H|| * T >= pi``, where the principal branch stops being
    trustworthy.
    """
    t_total = sched.duration
    if model.h_norm() * t_total >= np.pi:
        raise PrincipalBranchError(
            f"||H||*T = {model.h_norm() * t_total:.3g} >= pi; principal "
            "logarithm would wrap"
        )
    u = total_propagator(model, sched) / _pulse_phase(sched)
    # U is normal, so the complex Schur form is diagonal up to roundoff.
    tmat, q = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(tmat))
    omega = -(q * phases) @ q.conj().T
    omega = (omega + omega.conj().T) / 2
    return error_action_from_generator(omega)


def renormalized_bath_ops(model: SpinBathModel, axis: str, duration: float) -> SpinBathModel:
    """Concrete operator form of one projection step along ``axis``.

    The bath-only and on-axis operators pass through unchanged; each
    orthogonal operator maps to (duration/2) * (i[B_0, B_u] + {B_v, B_axis})
    with v the remaining axis.  Hermiticity is preserved exactly.
    """
    if axis not in AXES:
        raise ValueError(f"projection axis must be one of {AXES}, got {axis!r}")
    others = [a for a in AXES if a != axis]
    new_ops = {axis: model.bath_op(axis)}
    for a, b in (others, list(reversed(others))):
        new_ops[a] = (duration / 2.0) * (
            1j * _commutator(model.b0, model.bath_op(a))
            + _anticommutator(model.bath_op(b), model.bath_op(axis))
        )
    return SpinBathModel(
        model.n_bath, model.b0, new_ops["x"], new_ops["y"], new_ops["z"]
    )


def estimate_co(model: SpinBathModel, family, alpha: int, tau0_grid) -> float:
    """Fitted scaling exponent of the exact error per gate against tau0.

    ``family`` maps a cancellation order to a projection string; the same
    string is compiled at every grid point.  The least-squares slope of
    log(EPG) vs log(tau0) estimates alpha + 1.
    """
    grid = np.asarray(list(tau0_grid), dtype=float)
    if grid.size < 4 or grid.max() / grid.min() < 10.0:
        raise ValueError("need at least 4 grid points spanning a decade")
    string = family(alpha)
    epgs = []
    for tau0 in grid:
        sched = compile_cpdd(string, float(tau0))
        epgs.append(exact_error_action(model, sched).epg)
    slope, _ = np.polyfit(np.log(grid), np.log(np.asarray(epgs)), 1)
    return float(slope)
