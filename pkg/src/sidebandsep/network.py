"""Passive optical networks with frequency-dependent scattering matrices.

Elements are wired by wire labels. A network declares its external input
and output labels; loss elements add a hidden vacuum ancilla input and a
hidden dump output each, so the full matrix returned by
:func:`scattering_matrix` is always unitary. :func:`propagate` fills every
input the state does not provide with vacuum and traces out the dumps.

Beamsplitter convention: transmission ``sqrt(1 - r)`` (real), reflection
``i*sqrt(r)``. Delays act as ``exp(i*omega*tau)`` with ``omega`` measured
from the carrier; the carrier phase itself belongs in a phase shifter.
"""

from __future__ import annotations

import graphlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import SidebandState
from .errors import NetworkError

BEAMSPLITTER = "beamsplitter"
PHASE_SHIFT = "phase_shift"
DELAY = "delay"
LOSS = "loss"


@dataclass(frozen=True)
class Element:
    kind: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    value: float
    name: str

    def matrix(self, omega: float) -> np.ndarray:
        """Scattering matrix at ``omega`` (rad/s from the carrier), ancilla ports last."""
        if self.kind == BEAMSPLITTER:
            return _bs_matrix(self.value)
        if self.kind == PHASE_SHIFT:
            return np.array([[np.exp(1j * self.value)]])
        if self.kind == DELAY:
            return np.array([[np.exp(1j * omega * self.value)]])
        if self.kind == LOSS:
            # transmission is a power fraction; the reflected port is the dump
            return _bs_matrix(1.0 - self.value)
        raise NetworkError(f"unknown element kind {self.kind!r}")

    @property
    def ancilla(self) -> str | None:
        return f"{self.name}.vac" if self.kind == LOSS else None

    @property
    def dump(self) -> str | None:
        return f"{self.name}.dump" if self.kind == LOSS else None

    @property
    def all_inputs(self) -> tuple[str, ...]:
        return self.inputs + ((self.ancilla,) if self.kind == LOSS else ())

    @property
    def all_outputs(self) -> tuple[str, ...]:
        return self.outputs + ((self.dump,) if self.kind == LOSS else ())


def _bs_matrix(reflectivity: float) -> np.ndarray:
    t = math.sqrt(1.0 - reflectivity)
    r = 1j * math.sqrt(reflectivity)
    return np.array([[t, r], [r, t]])


def _unit_interval(value, what):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {value}")
    return float(value)


def beamsplitter(in1, in2, out1, out2, reflectivity=0.5, name=None) -> Element:
    """``out1 = t*in1 + i*r*in2``, ``out2 = i*r*in1 + t*in2``."""
    return Element(BEAMSPLITTER, (in1, in2), (out1, out2), _unit_interval(reflectivity, "reflectivity"), name)


def phase_shift(inp, out, phase, name=None) -> Element:
    return Element(PHASE_SHIFT, (inp,), (out,), float(phase), name)


def delay(inp, out, tau, name=None) -> Element:
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got {tau}")
    return Element(DELAY, (inp,), (out,), float(tau), name)


def loss(inp, out, transmission, name=None) -> Element:
    return Element(LOSS, (inp,), (out,), _unit_interval(transmission, "transmission"), name)


class OpticalNetwork:
    """A validated acyclic wiring of elements.

    ``inputs`` and ``outputs`` name the external ports. A label listed in
    both is a pass-through wire. Unnamed elements are named ``e<k>``.
    """

    def __init__(self, elements: Iterable[Element], inputs: Sequence[str], outputs: Sequence[str]):
        named = []
        for k, el in enumerate(elements):
            if el.name is None:
                el = Element(el.kind, el.inputs, el.outputs, el.value, f"e{k}")
            named.append(el)
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self.elements = tuple(named)
        self._check_and_sort()

    def _check_and_sort(self):
        names = [el.name for el in self.elements]
        if len(set(names)) != len(names):
            raise NetworkError(f"duplicate element names in {names}")
        if len(set(self.inputs)) != len(self.inputs) or len(set(self.outputs)) != len(self.outputs):
            raise NetworkError("duplicate external port labels")

        producer, consumer = {}, {}
        for el in self.elements:
            for w in el.all_outputs:
                if w in producer:
                    raise NetworkError(f"wire {w!r} is driven by both {producer[w]} and {el.name}")
                producer[w] = el.name
            for w in el.all_inputs:
                if w in consumer:
                    raise NetworkError(f"wire {w!r} feeds both {consumer[w]} and {el.name}")
                consumer[w] = el.name

        for w in self.inputs:
            if w in producer:
                raise NetworkError(f"external input {w!r} is also driven by element {producer[w]}")
            if w not in consumer and w not in self.outputs:
                raise NetworkError(f"external input {w!r} is not wired to anything")
        for w in self.outputs:
            if w not in producer and w not in self.inputs:
                raise NetworkError(f"external output {w!r} is not driven by anything")
            if w in consumer:
                raise NetworkError(f"external output {w!r} is also consumed by {consumer[w]}")
        ancillas = {el.ancilla for el in self.elements if el.kind == LOSS}
        dumps = {el.dump for el in self.elements if el.kind == LOSS}
        for w, el in consumer.items():
            if w not in producer and w not in self.inputs and w not in ancillas:
                raise NetworkError(f"input port {w!r} of {el} is unwired")
        for w, el in producer.items():
            if w not in consumer and w not in self.outputs and w not in dumps:
                raise NetworkError(f"output port {w!r} of {el} is unwired")

        graph = graphlib.TopologicalSorter()
        by_name = {el.name: el for el in self.elements}
        for el in self.elements:
            deps = [producer[w] for w in el.inputs if w in producer]
            graph.add(el.name, *deps)
        try:
            order = list(graph.static_order())
        except graphlib.CycleError as exc:
            raise NetworkError(f"network contains a cycle: {exc.args[1]}") from None
        self._order = tuple(by_name[n] for n in order)
        self.ancillas = tuple(el.ancilla for el in self._order if el.kind == LOSS)
        self.dumps = tuple(el.dump for el in self._order if el.kind == LOSS)

    @property
    def all_inputs(self) -> tuple[str, ...]:
        return self.inputs + self.ancillas

    @property
    def all_outputs(self) -> tuple[str, ...]:
        return self.outputs + self.dumps

    def __repr__(self):
        return f"OpticalNetwork({len(self.elements)} elements, inputs={self.inputs}, outputs={self.outputs})"


def scattering_matrix(net: OpticalNetwork, omega: float) -> np.ndarray:
    """Full matrix from ``net.all_inputs`` to ``net.all_outputs`` at ``omega``."""
    n_in = len(net.all_inputs)
    rows = {w: np.eye(n_in, dtype=complex)[i] for i, w in enumerate(net.all_inputs)}
    for el in net._order:
        incoming = np.array([rows.pop(w) for w in el.all_inputs])
        outgoing = el.matrix(omega) @ incoming
        for w, row in zip(el.all_outputs, outgoing):
            rows[w] = row
    return np.array([rows[w] for w in net.all_outputs])


def mode_transform(net: OpticalNetwork, omega: float) -> np.ndarray:
    """Mode-level matrix: ``+W`` modes through ``S(W)``, ``-W`` modes through ``S(-W)``."""
    s_up, s_low = scattering_matrix(net, omega), scattering_matrix(net, -omega)
    n_out, n_in = s_up.shape
    T = np.zeros((2 * n_out, 2 * n_in), dtype=complex)
    T[0::2, 0::2] = s_up
    T[1::2, 1::2] = s_low
    return T


def _embed(state: SidebandState, labels: Sequence[str]):
    missing = [b for b in state.beams if b not in labels]
    if missing:
        raise NetworkError(f"state beams {missing} are not inputs of the network {tuple(labels)}")
    pos = [labels.index(b) for b in state.beams]
    modes = [m for p in pos for m in (2 * p, 2 * p + 1)]
    k = 2 * len(labels)
    N = np.zeros((k, k), dtype=complex)
    M = np.zeros((k, k), dtype=complex)
    N[np.ix_(modes, modes)] = state.N
    M[np.ix_(modes, modes)] = state.M
    alpha = np.zeros(k, dtype=complex)
    alpha[modes] = state.alpha
    carrier = np.zeros(len(labels), dtype=complex)
    carrier[pos] = state.carrier
    return N, M, alpha, carrier


def propagate(state: SidebandState, net: OpticalNetwork) -> SidebandState:
    """Push a state through a network at the state's analysis frequency."""
    labels = net.all_inputs
    N, M, alpha, carrier = _embed(state, labels)
    omega = state.setup.omega
    keep = 2 * len(net.outputs)
    T = mode_transform(net, omega)[:keep]
    S0 = scattering_matrix(net, 0.0)[: len(net.outputs)]
    N_out = T.conj() @ N @ T.T
    M_out = T @ M @ T.T
    # restore exact symmetry lost to rounding so validation sees clean blocks
    N_out = 0.5 * (N_out + N_out.conj().T)
    M_out = 0.5 * (M_out + M_out.T)
    return SidebandState(net.outputs, N_out, M_out, T @ alpha, S0 @ carrier, state.setup)


def compose(first: OpticalNetwork, second: OpticalNetwork) -> OpticalNetwork:
    """Feed ``first``'s outputs into ``second``'s inputs with matching labels.

    Unmatched outputs of ``first`` stay external outputs; unmatched inputs
    of ``second`` become external inputs. Element names and internal wires
    get ``0:``/``1:`` prefixes so the two halves never collide.
    """
    joined = set(first.outputs) & set(second.inputs)
    elements = [_prefixed(el, "0:", first) for el in first.elements]
    elements += [_prefixed(el, "1:", second) for el in second.elements]
    inputs = list(first.inputs) + [w for w in second.inputs if w not in joined]
    outputs = [w for w in first.outputs if w not in joined] + list(second.outputs)
    return OpticalNetwork(elements, inputs, outputs)


def _prefixed(el: Element, prefix: str, net: OpticalNetwork) -> Element:
    external = set(net.inputs) | set(net.outputs)

    def wire(w):
        return w if w in external else prefix + w

    return Element(
        el.kind, tuple(map(wire, el.inputs)), tuple(map(wire, el.outputs)), el.value, prefix + el.name
    )


def is_unitary(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    return float(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1])).max()) < tol
