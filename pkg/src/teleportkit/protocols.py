"""Teleportation as a two-party protocol with an explicit classical channel.

Three procedures are modelled:

* ``run_standard``: Bell measurement on (a, A), two bits to Bob, Pauli fix-up.
* ``run_two_step``: CNOT a->A and a z-measurement of A (one bit, X fix-up),
  then an x-measurement of a (one bit, Z fix-up).
* ``run_two_step`` with the classically correlated resource
  ``1/2 |00><00| + 1/2 |11><11|`` in place of the Bell pair.

Outcome to bit conventions: Phi+ 00, Phi- 01, Psi+ 10, Psi- 11 for the Bell
measurement; ``+`` 0 and ``-`` 1 for the x-measurement. Under these, the
two-step bits (A-bit, a-bit) coincide with the Bell bits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np

from teleportkit.core import (
    BELL_BASIS,
    CNOT,
    I,
    X,
    X_BASIS,
    Z,
    Z_BASIS,
    BlochParams,
    DensityMatrix,
    Gate,
    State,
    StateVector,
    apply_gate,
    bell_state,
    bloch_state,
    density_from,
    fidelity,
    measure,
    mix,
    reduced,
    tensor,
)
from teleportkit.rng import DEFAULT_SEED, substream

BELL_BITS: dict[str, tuple[int, int]] = {
    "Phi+": (0, 0),
    "Phi-": (0, 1),
    "Psi+": (1, 0),
    "Psi-": (1, 1),
}
BITS_BELL = {bits: kind for kind, bits in BELL_BITS.items()}
X_BITS = {"+": 0, "-": 1}

# Gates Bob applies, in order. Psi- uses X then Z, which is Y up to a global phase.
CORRECTIONS: dict[str, tuple[Gate, ...]] = {
    "Phi+": (I,),
    "Phi-": (Z,),
    "Psi+": (X,),
    "Psi-": (X, Z),
}


class ProtocolError(RuntimeError):
    """A party acted outside what the protocol allows."""


class ResourceKind(str, enum.Enum):
    ENTANGLED = "entangled"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class Party:
    name: str
    held: frozenset[str]

    def require(self, labels: Sequence[str]) -> None:
        missing = set(labels) - self.held
        if missing:
            raise ProtocolError(f"{self.name} does not hold {sorted(missing)}")


ALICE = Party("Alice", frozenset({"a", "A"}))
BOB = Party("Bob", frozenset({"B"}))


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    receiver: str
    bits: tuple[int, ...]
    step: str


@dataclass(frozen=True)
class Event:
    """One entry of a transcript. ``kind`` is prepare, gate, measure, message or correction."""

    kind: str
    party: str
    detail: Mapping = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Transcript:
    protocol: str
    params: BlochParams
    resource: ResourceKind
    stop_after: str
    probability: float
    outcome: tuple[str, ...]
    events: tuple[Event, ...]
    messages: tuple[ClassicalMessage, ...]
    final_state: State
    uncorrected_state: State
    target: StateVector
    snapshots: Mapping[str, State] = field(default_factory=dict)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(b for m in self.messages for b in m.bits)

    @property
    def fidelity(self) -> float:
        return fidelity(self.final_state, self.target)

    @property
    def bell_outcome(self) -> str | None:
        """Bell label equivalent to this branch's bits, when two bits were sent."""
        bits = self.bits
        return BITS_BELL.get(bits) if len(bits) == 2 else None

    def check_causality(self) -> None:
        """Raise unless every correction comes after the message carrying its bits."""
        delivered = set()
        for ev in self.events:
            if ev.kind == "message":
                delivered.add(ev.detail["step"])
            elif ev.kind == "correction" and ev.detail["step"] not in delivered:
                raise ProtocolError(f"correction for {ev.detail['step']!r} precedes its message")


def correction_for(outcome: str, table: Mapping[str, Sequence[Gate]] | None = None) -> tuple[Gate, ...]:
    table = CORRECTIONS if table is None else table
    try:
        return tuple(table[outcome])
    except KeyError:
        raise ValueError(f"unknown Bell outcome {outcome!r}") from None


def step1_correction(bit: int) -> Gate:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return X if bit else I


def step2_correction(bit: int | str) -> Gate:
    """Accepts the bit or the x-outcome symbol (``+``/``-``)."""
    if isinstance(bit, str):
        bit = X_BITS[bit]
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return Z if bit else I


def make_resource(kind: ResourceKind | str) -> State:
    kind = ResourceKind(kind)
    if kind is ResourceKind.ENTANGLED:
        return bell_state("Phi+", ("A", "B"))
    zero = StateVector(("A", "B"), [1, 0, 0, 0])
    one = StateVector(("A", "B"), [0, 0, 0, 1])
    return mix([(0.5, zero), (0.5, one)])


def _undo(state: State, gates: Sequence[Gate], target: str) -> State:
    for g in reversed(gates):
        state = apply_gate(state, g.dagger, target)
    return state


def _fix(state: State, gates: Sequence[Gate], target: str) -> State:
    for g in gates:
        state = apply_gate(state, g, target)
    return state


def _mode(rng):
    return "enumerate" if rng is None else "sample"


@lru_cache(maxsize=256)
def _prepare(params: BlochParams, resource: ResourceKind) -> tuple[State, tuple[Event, ...]]:
    payload = bloch_state(params, "a")
    shared = make_resource(resource)
    if isinstance(shared, DensityMatrix):
        state = tensor(density_from(payload), shared)
    else:
        state = tensor(payload, shared)
    events = (
        Event("prepare", "Alice", {"labels": ["a"], "theta": params.theta, "phi": params.phi}),
        Event("prepare", "source", {"labels": ["A", "B"], "resource": resource.value}),
    )
    return state, events


def standard_branches(
    params: BlochParams,
    rng: np.random.Generator | None = None,
    corrections: Mapping[str, Sequence[Gate]] | None = None,
) -> Iterator[Transcript]:
    """Bell-measurement teleportation; all four branches, or one drawn from ``rng``."""
    state, events = _prepare(params, ResourceKind.ENTANGLED)
    target = bloch_state(params, "B")
    ALICE.require(("a", "A"))
    for br in measure(state, BELL_BASIS, ("a", "A"), _mode(rng), rng):
        kind = br.outcome[0]
        msg = ClassicalMessage("Alice", "Bob", BELL_BITS[kind], "bell")
        gates = correction_for(kind, corrections)
        BOB.require(("B",))
        final = _fix(br.state, gates, "B")
        yield Transcript(
            protocol="standard",
            params=params,
            resource=ResourceKind.ENTANGLED,
            stop_after="bell",
            probability=br.probability,
            outcome=br.outcome,
            events=events
            + (
                Event("measure", "Alice", {"basis": "bell", "targets": ["a", "A"], "outcome": kind}),
                Event("message", "Alice", {"to": "Bob", "bits": list(msg.bits), "step": "bell"}),
                Event("correction", "Bob", {"gates": [g.name for g in gates], "target": "B", "step": "bell"}),
            ),
            messages=(msg,),
            final_state=final,
            uncorrected_state=br.state,
            target=target,
        )


def two_step_branches(
    params: BlochParams,
    resource: ResourceKind | str = ResourceKind.ENTANGLED,
    stop_after: str = "step2",
    rng: np.random.Generator | None = None,
) -> Iterator[Transcript]:
    """CNOT + z-measurement of A (step 1), then x-measurement of a (step 2).

    With ``stop_after="step1"`` the final state is Bob's reduced matrix and the
    corrected joint (a, B) state is kept in ``snapshots["step1"]``.
    """
    resource = ResourceKind(resource)
    if stop_after not in ("step1", "step2"):
        raise ValueError(f"stop_after must be step1 or step2, got {stop_after!r}")
    state, events = _prepare(params, resource)
    events = list(events)
    target = bloch_state(params, "B")
    mode = _mode(rng)

    ALICE.require(("a", "A"))
    state = apply_gate(state, CNOT, ("a", "A"))
    events.append(Event("gate", "Alice", {"gate": "CNOT", "targets": ["a", "A"]}))

    for b1 in measure(state, Z_BASIS, "A", mode, rng):
        bit1 = int(b1.outcome[0])
        msg1 = ClassicalMessage("Alice", "Bob", (bit1,), "step1")
        fix1 = (step1_correction(bit1),)
        BOB.require(("B",))
        joint = _fix(b1.state, fix1, "B")
        ev1 = events + [
            Event("measure", "Alice", {"basis": "z", "targets": ["A"], "outcome": b1.outcome[0]}),
            Event("message", "Alice", {"to": "Bob", "bits": [bit1], "step": "step1"}),
            Event("correction", "Bob", {"gates": [g.name for g in fix1], "target": "B", "step": "step1"}),
        ]
        if stop_after == "step1":
            rho_b = reduced(joint, "B")
            yield Transcript(
                protocol="two-step",
                params=params,
                resource=resource,
                stop_after="step1",
                probability=b1.probability,
                outcome=b1.outcome,
                events=tuple(ev1),
                messages=(msg1,),
                final_state=rho_b,
                uncorrected_state=_undo(rho_b, fix1, "B"),
                target=target,
                snapshots={"step1": joint},
            )
            continue

        for b2 in measure(joint, X_BASIS, "a", mode, rng):
            bit2 = X_BITS[b2.outcome[0]]
            msg2 = ClassicalMessage("Alice", "Bob", (bit2,), "step2")
            fix2 = (step2_correction(bit2),)
            final = _fix(b2.state, fix2, "B")
            yield Transcript(
                protocol="two-step",
                params=params,
                resource=resource,
                stop_after="step2",
                probability=b1.probability * b2.probability,
                outcome=b1.outcome + b2.outcome,
                events=tuple(ev1)
                + (
                    Event("measure", "Alice", {"basis": "x", "targets": ["a"], "outcome": b2.outcome[0]}),
                    Event("message", "Alice", {"to": "Bob", "bits": [bit2], "step": "step2"}),
                    Event("correction", "Bob", {"gates": [g.name for g in fix2], "target": "B", "step": "step2"}),
                ),
                messages=(msg1, msg2),
                final_state=final,
                uncorrected_state=_undo(final, fix1 + fix2, "B"),
                target=target,
                snapshots={"step1": joint},
            )


def run_standard(
    params: BlochParams,
    mode: str = "enumerate",
    seed: int = DEFAULT_SEED,
    shots: int = 1,
    corrections: Mapping[str, Sequence[Gate]] | None = None,
) -> list[Transcript]:
    """All branches (``enumerate``) or one sampled transcript per shot (``sample``).

    Shots are drawn in order from the run's own sub-stream of ``seed``.
    """
    if mode == "enumerate":
        return list(standard_branches(params, None, corrections))
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = substream(seed, "standard")
    return [t for _ in range(shots) for t in standard_branches(params, rng, corrections)]


def run_two_step(
    params: BlochParams,
    resource: ResourceKind | str = ResourceKind.ENTANGLED,
    stop_after: str = "step2",
    mode: str = "enumerate",
    seed: int = DEFAULT_SEED,
    shots: int = 1,
) -> list[Transcript]:
    if mode == "enumerate":
        return list(two_step_branches(params, resource, stop_after))
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    resource = ResourceKind(resource)
    rng = substream(seed, "two-step", resource.value, stop_after)
    return [t for _ in range(shots) for t in two_step_branches(params, resource, stop_after, rng)]
