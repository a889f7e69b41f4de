"""Time-dependent gate Hamiltonians for exchange-coupled qubit pairs.

Each gate is a list of ``HamiltonianTerm``s, a Gaussian pulse multiplying a
constant one- or two-site Pauli string. The SWAP drive is
``J(t) * (XX + YY + ZZ)``; the CNOT drive is
``J1(t) * (IX + ZI) + J2(t) * (ZX)`` (single-qubit X on the target,
single-qubit Z on the control, plus a ZX coupling). Its x-basis frame —
obtained by conjugating the control with ``R = exp(i (pi/4) sigma_y)`` — is
``J1(t) * (IX - XI) - J2(t) * (XX)``; the sign of the coupling term is
fixed by the conjugation identity itself, which the tests verify to
machine precision.

Within each gate the Pauli terms mutually commute, so the slot propagator
factorises exactly: a common eigenbasis per gate kind turns every time
step into a diagonal phase. ``gate_eigensystem`` exposes that basis.

Terms are stored per qubit pair and never as dense ``2^N`` matrices, so a
``GateSpec`` works unchanged at any chain size.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .operators import LocalOperator, pauli
from .pulses import GaussianPulse, PulseSchedule

# Amplitude/width defaults (hbar*omega0, tau0^2) realizing each gate in a
# single slot of duration tau0. The SWAP pulse area is 3*pi/4; the CNOT
# local/coupling areas are 3*pi/4 and pi/4.
DEFAULT_SWAP_PARAMS = (9.36309696, 0.020165)
DEFAULT_CNOT_LOCAL_PARAMS = (9.33360747, 0.0202927)
DEFAULT_CNOT_COUPLING_PARAMS = (3.11530553, 0.02023955)

GATE_KINDS = ("swap", "cnot", "cnot_rotated")

# Control-qubit y-rotation by pi/2 (half-angle convention):
# R = exp(i (pi/4) sigma_y) maps sigma_z -> -sigma_x and sigma_x -> sigma_z.
ROTATION_FRAME = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class HamiltonianTerm:
    """A pulse-driven Pauli string, truncated to its slot window."""

    pulse: GaussianPulse
    op: LocalOperator
    window: tuple[float, float] | None = None

    def coefficient(self, t):
        """Pulse value at ``t``; zero outside the half-open window."""
        value = self.pulse.value(t)
        if self.window is None:
            return value
        start, end = self.window
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= start) & (t_arr < end)
        out = np.where(inside, value, 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A gate kind on a qubit pair, with its per-channel (A, W) parameters.

    ``qubits`` is (control, target) for the CNOT kinds and simply the
    coupled pair for SWAP. ``params`` holds one (A, W) pair for SWAP and
    two — local drive then coupling — for the CNOT kinds.
    """

    kind: str
    qubits: tuple[int, int]
    params: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = (int(self.qubits[0]), int(self.qubits[1]))
        object.__setattr__(self, "qubits", qubits)
        if qubits[0] == qubits[1] or min(qubits) < 1:
            raise ValueError("gate needs two distinct 1-based qubit indices")
        params = tuple((float(a), float(w)) for a, w in self.params)
        object.__setattr__(self, "params", params)
        expected = 1 if self.kind == "swap" else 2
        if len(params) != expected:
            raise ValueError(f"{self.kind} takes {expected} (A, W) pair(s)")
        if any(w <= 0.0 for _, w in params):
            raise ValueError("pulse widths must be positive")


def swap_gate(q1: int, q2: int, params=DEFAULT_SWAP_PARAMS) -> GateSpec:
    return GateSpec(kind="swap", qubits=(q1, q2), params=(tuple(params),))


def cnot_gate(
    control: int,
    target: int,
    local_params=DEFAULT_CNOT_LOCAL_PARAMS,
    coupling_params=DEFAULT_CNOT_COUPLING_PARAMS,
) -> GateSpec:
    return GateSpec(
        kind="cnot",
        qubits=(control, target),
        params=(tuple(local_params), tuple(coupling_params)),
    )


def rotated_cnot_gate(
    control: int,
    target: int,
    local_params=DEFAULT_CNOT_LOCAL_PARAMS,
    coupling_params=DEFAULT_CNOT_COUPLING_PARAMS,
) -> GateSpec:
    return GateSpec(
        kind="cnot_rotated",
        qubits=(control, target),
        params=(tuple(local_params), tuple(coupling_params)),
    )


def _two_site(a: str, b: str) -> np.ndarray:
    return np.kron(pauli(a), pauli(b))


def build_swap_terms(
    pair: tuple[int, int],
    pulse: GaussianPulse,
    window: tuple[float, float] | None = None,
) -> list[HamiltonianTerm]:
    """``J(t) * (XX + YY + ZZ)`` on the pair, as three terms."""
    if pair[0] == pair[1]:
        raise ValueError("gate needs two distinct qubits")
    return [
        HamiltonianTerm(pulse, LocalOperator(pair, _two_site(axis, axis)), window)
        for axis in ("x", "y", "z")
    ]


def build_cnot_terms(
    pair: tuple[int, int],
    pulses: tuple[GaussianPulse, GaussianPulse],
    window: tuple[float, float] | None = None,
) -> list[HamiltonianTerm]:
    """``J1(t)*(IX) + J1(t)*(ZI) + J2(t)*(ZX)``, control first in the pair."""
    if pair[0] == pair[1]:
        raise ValueError("gate needs two distinct qubits")
    local, coupling = pulses
    return [
        HamiltonianTerm(local, LocalOperator(pair, _two_site("identity", "x")), window),
        HamiltonianTerm(local, LocalOperator(pair, _two_site("z", "identity")), window),
        HamiltonianTerm(coupling, LocalOperator(pair, _two_site("z", "x")), window),
    ]


def build_rotated_cnot_terms(
    pair: tuple[int, int],
    pulses: tuple[GaussianPulse, GaussianPulse],
    window: tuple[float, float] | None = None,
) -> list[HamiltonianTerm]:
    """``J1(t)*(IX) - J1(t)*(XI) - J2(t)*(XX)``: the CNOT drive conjugated
    by ``ROTATION_FRAME`` on the control qubit."""
    if pair[0] == pair[1]:
        raise ValueError("gate needs two distinct qubits")
    local, coupling = pulses
    return [
        HamiltonianTerm(local, LocalOperator(pair, _two_site("identity", "x")), window),
        HamiltonianTerm(local, LocalOperator(pair, -_two_site("x", "identity")), window),
        HamiltonianTerm(coupling, LocalOperator(pair, -_two_site("x", "x")), window),
    ]


def materialize_channel_pulses(
    params: tuple[tuple[float, float], ...], start: float, end: float
) -> tuple[GaussianPulse, ...]:
    """Concrete pulses for (A, W) channel parameters in ``[start, end)``.

    A window of duration ``alpha`` carries the rescaled parameters
    ``(A/alpha, W*alpha^2)`` centred mid-window, so the analytic pulse area
    is independent of the slot duration.
    """
    alpha = end - start
    if not (alpha > 0.0):
        raise ValueError("gate window must have positive duration")
    center = 0.5 * (start + end)
    return tuple(
        GaussianPulse(amplitude=a / alpha, width=w * alpha**2, center=center)
        for a, w in params
    )


def materialize_pulses(
    spec: GateSpec, start: float, end: float
) -> tuple[GaussianPulse, ...]:
    """Concrete pulses for a gate placed in the window ``[start, end)``."""
    return materialize_channel_pulses(spec.params, start, end)


def gate_terms(spec: GateSpec, start: float, end: float) -> list[HamiltonianTerm]:
    """All Hamiltonian terms of one gate bound to its window."""
    pulses = materialize_pulses(spec, start, end)
    window = (start, end)
    if spec.kind == "swap":
        return build_swap_terms(spec.qubits, pulses[0], window)
    if spec.kind == "cnot":
        return build_cnot_terms(spec.qubits, pulses, window)
    return build_rotated_cnot_terms(spec.qubits, pulses, window)


def schedule_terms(schedule: PulseSchedule) -> list[HamiltonianTerm]:
    """Every term of every scheduled gate, each with its own window."""
    terms: list[HamiltonianTerm] = []
    for entry in schedule.entries:
        terms.extend(gate_terms(entry.gate, entry.start, entry.end))
    return terms


def assemble_chain_hamiltonian(
    schedule: PulseSchedule, t: float
) -> list[HamiltonianTerm]:
    """The terms of all gates whose slot contains ``t`` (empty otherwise)."""
    terms: list[HamiltonianTerm] = []
    for entry in schedule.entries:
        if entry.start <= t < entry.end:
            terms.extend(gate_terms(entry.gate, entry.start, entry.end))
    return terms


def gate_channel_blocks(kind: str) -> tuple[np.ndarray, ...]:
    """Constant 4x4 blocks multiplying each pulse channel of a gate kind.

    SWAP has a single channel; the CNOT kinds have two (local drive,
    coupling). The blocks of one gate commute with each other.
    """
    if kind == "swap":
        return (_two_site("x", "x") + _two_site("y", "y") + _two_site("z", "z"),)
    if kind == "cnot":
        return (
            _two_site("identity", "x") + _two_site("z", "identity"),
            _two_site("z", "x"),
        )
    if kind == "cnot_rotated":
        return (
            _two_site("identity", "x") - _two_site("x", "identity"),
            -_two_site("x", "x"),
        )
    raise ValueError(f"unknown gate kind {kind!r}")


@lru_cache(maxsize=None)
def gate_eigensystem(kind: str) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Common eigenbasis ``V`` and per-channel eigenvalues of a gate kind.

    Because the channel blocks commute, ``V`` diagonalises all of them at
    once and the driven propagator is ``V exp(-i sum_i S_i d_i) V^dag``
    with ``S_i`` the accumulated pulse areas. Diagonality is asserted.
    """
    blocks = gate_channel_blocks(kind)
    # A generic irrational mix keeps common eigenvectors for commuting
    # Hermitian blocks even when one block alone is degenerate.
    weights = [1.0, np.pi, np.e][: len(blocks)]
    mix = sum(w * b for w, b in zip(weights, blocks))
    _, v = np.linalg.eigh(mix)
    diags = []
    for block in blocks:
        d = v.conj().T @ block @ v
        if np.max(np.abs(d - np.diag(np.diag(d)))) > 1e-10:
            raise AssertionError("gate channel blocks do not share the eigenbasis")
        diags.append(np.real(np.diag(d)).copy())
    return v, tuple(diags)


def ideal_gate_matrix(kind: str) -> np.ndarray:
    """The exact 4x4 target unitary of a gate kind (control first)."""
    if kind == "swap":
        return np.array(
            [
                [1, 0, 0, 0],
                [0, 0, 1, 0],
                [0, 1, 0, 0],
                [0, 0, 0, 1],
            ],
            dtype=complex,
        )
    if kind == "cnot":
        # Flips the target when the control is |1> (the -1 eigenstate of Z).
        return np.array(
            [
                [1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 0],
            ],
            dtype=complex,
        )
    if kind == "cnot_rotated":
        r = np.kron(ROTATION_FRAME, np.eye(2))
        return r @ ideal_gate_matrix("cnot") @ r.conj().T
    raise ValueError(f"unknown gate kind {kind!r}")
