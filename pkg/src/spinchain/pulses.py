"""Gaussian exchange pulses, analytic areas, duration rescaling and scheduling.

Units: energies in ``hbar*omega0``, times in ``tau0``, widths in ``tau0^2``.
A gate occupies one slot of duration ``alpha*tau0`` (``alpha = 1`` by
default); the k-th sequential slot is the window ``[(k-1), k] * tau0`` and
its pulse is centred at ``(k - 1/2) * tau0``. Pulses are truncated to their
slot window: outside it they contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class GaussianPulse:
    """``J(t) = amplitude * exp(-(t - center)^2 / width)``."""

    amplitude: float
    width: float
    center: float

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise ValueError("pulse amplitude must be finite")
        if not (self.width > 0.0):
            raise ValueError("pulse width must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * np.exp(-((t - self.center) ** 2) / self.width)
        return out if out.ndim else float(out)


def pulse_value(pulse: GaussianPulse, t):
    return pulse.value(t)


def pulse_area(pulse: GaussianPulse) -> float:
    """Full-line analytic area ``A * sqrt(pi * W)`` (units of hbar)."""
    return pulse.amplitude * math.sqrt(math.pi * pulse.width)


def windowed_area(pulse: GaussianPulse, start: float, end: float) -> float:
    """Numerical area over ``[start, end]`` by adaptive quadrature."""
    val, _ = quad(pulse.value, start, end, epsabs=1e-14, epsrel=1e-12)
    return val


def rescale(pulse: GaussianPulse, alpha: float) -> GaussianPulse:
    """Stretch a one-slot pulse to duration ``alpha*tau0``.

    Maps ``A -> A/alpha`` and ``W -> W*alpha^2`` (area-preserving) and
    re-centres at ``alpha/2``, the middle of the stretched slot.
    """
    if not (alpha > 0.0):
        raise ValueError("rescale factor must be positive")
    return GaussianPulse(
        amplitude=pulse.amplitude / alpha,
        width=pulse.width * alpha**2,
        center=0.5 * alpha,
    )


@dataclass(frozen=True, eq=False)
class ScheduledGate:
    """A gate bound to its time window ``[start, end)``."""

    gate: Any
    start: float
    end: float


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """Contiguous slots of equal duration, each holding zero or more gates.

    Gates sharing a slot act on pairwise-disjoint qubit pairs (the parallel
    two-row case); ``entries`` keeps the original gate order.
    """

    entries: tuple[ScheduledGate, ...]
    slot_duration: float
    num_slots: int

    @property
    def total_time(self) -> float:
        return self.num_slots * self.slot_duration

    def slot_window(self, k: int) -> tuple[float, float]:
        return k * self.slot_duration, (k + 1) * self.slot_duration

    def slot_entries(self, k: int) -> tuple[ScheduledGate, ...]:
        start, _ = self.slot_window(k)
        return tuple(e for e in self.entries if abs(e.start - start) < 1e-12)

    def active_entries(self, t: float) -> tuple[ScheduledGate, ...]:
        return tuple(e for e in self.entries if e.start <= t < e.end)


def idle_schedule(num_slots: int, slot_duration: float = 1.0) -> PulseSchedule:
    """A gate-free schedule: the chain just sits in its noise channel."""
    if num_slots < 0 or not (slot_duration > 0.0):
        raise ValueError("need num_slots >= 0 and a positive slot duration")
    return PulseSchedule(entries=(), slot_duration=slot_duration, num_slots=num_slots)


def _qubits_of(gate) -> frozenset:
    qubits = frozenset(gate.qubits)
    if len(qubits) != 2:
        raise ValueError("scheduled gates act on two distinct qubits")
    return qubits


def schedule_sequence(
    gates: Sequence,
    parallel_pairs: bool = False,
    slot_duration: float = 1.0,
) -> PulseSchedule:
    """Assign gates to consecutive slots of length ``slot_duration``.

    ``gates`` is a flat sequence of gate specs, or — when grouping is meant
    to be explicit — a sequence whose items may be lists/tuples of gates
    that must share one slot. With ``parallel_pairs`` set, consecutive flat
    gates on disjoint pairs are packed greedily into a shared slot; without
    it every flat gate gets its own slot. Gates on intersecting pairs can
    never share a slot.
    """
    if not (slot_duration > 0.0):
        raise ValueError("slot duration must be positive")

    groups: list[list] = []
    explicit: list[bool] = []
    for item in gates:
        if isinstance(item, (list, tuple)):
            group = list(item)
            if not group:
                raise ValueError("empty parallel group")
            occupied: set = set()
            for g in group:
                q = _qubits_of(g)
                if occupied & q:
                    raise ValueError(
                        "gates on intersecting qubit pairs cannot share a slot"
                    )
                occupied |= q
            groups.append(group)
            explicit.append(True)
            continue
        _qubits_of(item)
        if parallel_pairs and groups and not explicit[-1]:
            # Greedy packing: join the previous slot when disjoint from all
            # of its gates, otherwise open a new slot.
            occupied = set().union(*(_qubits_of(g) for g in groups[-1]))
            if not (occupied & _qubits_of(item)):
                groups[-1].append(item)
                continue
        groups.append([item])
        explicit.append(False)

    entries = []
    for k, group in enumerate(groups):
        start = k * slot_duration
        end = (k + 1) * slot_duration
        for g in group:
            entries.append(ScheduledGate(gate=g, start=start, end=end))
    return PulseSchedule(
        entries=tuple(entries), slot_duration=slot_duration, num_slots=len(groups)
    )
