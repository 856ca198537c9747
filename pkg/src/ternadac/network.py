"""Linear resistive-network solver (modified nodal analysis).

Networks are resistor graphs plus voltage sources referenced to ground, each
source optionally behind a series resistance. Node 0 is ground. The solver
factors the system matrix once (dense LU with partial pivoting; networks here
stay well under a hundred nodes) and reuses the factorisation for repeated
solves, Thevenin extraction and per-source superposition weights.

A source with a positive series resistance is stamped as its Norton
equivalent, which keeps the matrix size down; a source with zero series
resistance gets an explicit branch-current unknown. Source currents are
reported positive out of the source's positive terminal in both cases.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import SolverError

#: Relative residual bound every solve is verified against.
RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class Resistor:
    node_a: int
    node_b: int
    ohms: float

    def __post_init__(self) -> None:
        if self.node_a < 0 or self.node_b < 0:
            raise SolverError("resistor node indices must be >= 0")
        if self.node_a == self.node_b:
            raise SolverError(f"resistor shorts node {self.node_a} to itself")
        if not self.ohms > 0:
            raise SolverError(f"resistance must be > 0 ohms, got {self.ohms}")


@dataclass(frozen=True)
class VoltageSource:
    """Ideal source from ``node`` to ground, behind ``series_ohms`` (0 = ideal)."""

    node: int
    series_ohms: float = 0.0

    def __post_init__(self) -> None:
        if self.node <= 0:
            raise SolverError("source node must be a non-ground node")
        if self.series_ohms < 0:
            raise SolverError("source series resistance must be >= 0")


@dataclass(frozen=True)
class ResistiveNetwork:
    """Resistor branches, grounded sources and one differential output port."""

    resistors: tuple[Resistor, ...]
    sources: tuple[VoltageSource, ...]
    port: tuple[int, int]
    name: str = ""

    def __post_init__(self) -> None:
        if self.port[0] < 0 or self.port[1] < 0:
            raise SolverError("port nodes must be >= 0")
        self._check_connected()

    @property
    def n_nodes(self) -> int:
        top = 0
        for r in self.resistors:
            top = max(top, r.node_a, r.node_b)
        for s in self.sources:
            top = max(top, s.node)
        top = max(top, self.port[0], self.port[1])
        return top + 1

    def _check_connected(self) -> None:
        # Every non-ground node must reach ground through resistor or source
        # branches, otherwise the system is singular.
        n = self.n_nodes
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for r in self.resistors:
            adjacency[r.node_a].append(r.node_b)
            adjacency[r.node_b].append(r.node_a)
        for s in self.sources:
            adjacency[s.node].append(0)
            adjacency[0].append(s.node)
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            node = stack.pop()
            for other in adjacency[node]:
                if not seen[other]:
                    seen[other] = True
                    stack.append(other)
        if not seen.all():
            floating = int(np.flatnonzero(~seen)[0])
            raise SolverError(f"node {floating} has no path to ground")


@dataclass(frozen=True)
class Solution:
    """Node voltages (index 0 = ground) and per-source branch currents."""

    node_voltages: np.ndarray
    source_currents: np.ndarray


@dataclass(frozen=True)
class TheveninEquivalent:
    """Open-circuit port voltage and port output impedance."""

    v_open: float
    z_out: float

    def __post_init__(self) -> None:
        if self.z_out < -1e-12:
            raise SolverError(f"negative output impedance {self.z_out}")


class NetworkSolver:
    """Cached-factorisation solver for one fixed network.

    Immutable after construction; concurrent solves share the factorisation
    read-only. Switch states of a DAC only change source levels, never the
    resistive graph, so one factorisation serves every digit state.
    """

    def __init__(self, net: ResistiveNetwork):
        self.net = net
        n = net.n_nodes
        self._n_nodes = n
        self._ideal_index: dict[int, int] = {}  # source position -> current-unknown column
        norton: list[int] = []
        for j, src in enumerate(net.sources):
            if src.series_ohms == 0.0:
                self._ideal_index[j] = len(self._ideal_index)
            else:
                norton.append(j)
        self._n_unknowns = (n - 1) + len(self._ideal_index)

        a = np.zeros((self._n_unknowns, self._n_unknowns))
        for r in net.resistors:
            g = 1.0 / r.ohms
            ia, ib = r.node_a - 1, r.node_b - 1
            if ia >= 0:
                a[ia, ia] += g
            if ib >= 0:
                a[ib, ib] += g
            if ia >= 0 and ib >= 0:
                a[ia, ib] -= g
                a[ib, ia] -= g
        for j, src in enumerate(net.sources):
            row = src.node - 1
            if src.series_ohms > 0.0:
                a[row, row] += 1.0 / src.series_ohms
            else:
                k = (n - 1) + self._ideal_index[j]
                a[row, k] -= 1.0  # branch current enters the node
                a[k, row] += 1.0  # constraint row: v_node = level
        self._matrix = a
        try:
            with warnings.catch_warnings():
                # An exactly singular matrix only warns here; the zero pivot is
                # caught at solve time and raised as a SolverError.
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                self._lu = scipy.linalg.lu_factor(a)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SolverError(f"singular network system: {exc}") from exc

    @property
    def n_sources(self) -> int:
        return len(self.net.sources)

    def _rhs(self, source_levels: Sequence[float]) -> np.ndarray:
        levels = np.asarray(source_levels, dtype=float)
        if levels.shape != (self.n_sources,):
            raise SolverError(
                f"expected {self.n_sources} source levels, got shape {levels.shape}"
            )
        b = np.zeros(self._n_unknowns)
        n = self._n_nodes
        for j, src in enumerate(self.net.sources):
            if src.series_ohms > 0.0:
                b[src.node - 1] += levels[j] / src.series_ohms
            else:
                b[(n - 1) + self._ideal_index[j]] = levels[j]
        return b

    def _solve_raw(self, b: np.ndarray) -> np.ndarray:
        x = scipy.linalg.lu_solve(self._lu, b)
        if not np.all(np.isfinite(x)):
            raise SolverError("singular network system (zero pivot in factorisation)")
        residual = self._matrix @ x - b
        scale = max(float(np.linalg.norm(b)), 1.0)
        if np.linalg.norm(residual) > RESIDUAL_RTOL * scale:
            worst = int(np.argmax(np.abs(residual)))
            if worst < self._n_nodes - 1:
                node = worst + 1
            else:
                order = sorted(self._ideal_index, key=self._ideal_index.get)
                node = self.net.sources[order[worst - (self._n_nodes - 1)]].node
            raise SolverError(
                f"singular or ill-conditioned system (largest residual at node {node})"
            )
        return x

    def _unpack(self, x: np.ndarray, levels: np.ndarray) -> Solution:
        n = self._n_nodes
        voltages = np.zeros(n)
        voltages[1:] = x[: n - 1]
        currents = np.zeros(self.n_sources)
        for j, src in enumerate(self.net.sources):
            if src.series_ohms > 0.0:
                currents[j] = (levels[j] - voltages[src.node]) / src.series_ohms
            else:
                currents[j] = x[(n - 1) + self._ideal_index[j]]
        return Solution(node_voltages=voltages, source_currents=currents)

    def solve(self, source_levels: Sequence[float]) -> Solution:
        """Node voltages and source currents for one excitation vector."""
        levels = np.asarray(source_levels, dtype=float)
        x = self._solve_raw(self._rhs(levels))
        return self._unpack(x, levels)

    def port_voltage(self, source_levels: Sequence[float]) -> float:
        sol = self.solve(source_levels)
        p, q = self.net.port
        return float(sol.node_voltages[p] - sol.node_voltages[q])

    @cached_property
    def _unit_solutions(self) -> np.ndarray:
        # Column i = full unknown vector for source i at 1 V, all others at 0 V.
        rhs = np.zeros((self._n_unknowns, self.n_sources))
        for i in range(self.n_sources):
            unit = np.zeros(self.n_sources)
            unit[i] = 1.0
            rhs[:, i] = self._rhs(unit)
        x = scipy.linalg.lu_solve(self._lu, rhs)
        if not np.all(np.isfinite(x)):
            raise SolverError("singular network system in superposition solve")
        return x

    @cached_property
    def port_weights(self) -> np.ndarray:
        """Differential port volts per source volt; the superposition fast path."""
        n = self._n_nodes
        x = self._unit_solutions
        p, q = self.net.port
        vp = x[p - 1] if p > 0 else np.zeros(self.n_sources)
        vq = x[q - 1] if q > 0 else np.zeros(self.n_sources)
        return vp - vq

    @cached_property
    def source_current_matrix(self) -> np.ndarray:
        """J[j, i] = current of source j when source i is at 1 V, others 0 V."""
        n = self._n_nodes
        x = self._unit_solutions
        j_mat = np.zeros((self.n_sources, self.n_sources))
        for j, src in enumerate(self.net.sources):
            if src.series_ohms > 0.0:
                v_node = x[src.node - 1]
                unit = np.zeros(self.n_sources)
                unit[j] = 1.0
                j_mat[j] = (unit - v_node) / src.series_ohms
            else:
                j_mat[j] = x[(n - 1) + self._ideal_index[j]]
        return j_mat

    def output_impedance(self) -> float:
        """Port impedance with all sources zeroed and a unit test current injected."""
        b = np.zeros(self._n_unknowns)
        p, q = self.net.port
        if p > 0:
            b[p - 1] += 1.0
        if q > 0:
            b[q - 1] -= 1.0
        x = self._solve_raw(b)
        vp = x[p - 1] if p > 0 else 0.0
        vq = x[q - 1] if q > 0 else 0.0
        return float(vp - vq)

    def thevenin(self, source_levels: Sequence[float]) -> TheveninEquivalent:
        return TheveninEquivalent(
            v_open=self.port_voltage(source_levels),
            z_out=self.output_impedance(),
        )


def solve(net: ResistiveNetwork, source_levels: Sequence[float]) -> Solution:
    """One-shot MNA solve; see :class:`NetworkSolver` for the cached path."""
    return NetworkSolver(net).solve(source_levels)


def thevenin(net: ResistiveNetwork, source_levels: Sequence[float]) -> TheveninEquivalent:
    """Open-circuit port voltage for the given excitation plus port impedance."""
    return NetworkSolver(net).thevenin(source_levels)


def superposition_weights(net: ResistiveNetwork) -> np.ndarray:
    """Differential port voltage per source for unit excitations.

    For any excitation vector ``s`` the port voltage is ``weights @ s``; the
    direct solve and this fast path agree to the solver tolerance.
    """
    return NetworkSolver(net).port_weights


def netlist_dump(net: ResistiveNetwork) -> str:
    """Textual netlist (for debugging and golden-file tests)."""
    lines = [f"* {net.name or 'network'}"]
    for k, r in enumerate(net.resistors):
        lines.append(f"R{k} {r.node_a} {r.node_b} {r.ohms:.9g}")
    for k, s in enumerate(net.sources):
        lines.append(f"V{k} {s.node} 0 series={s.series_ohms:.9g}")
    lines.append(f"PORT {net.port[0]} {net.port[1]}")
    return "\n".join(lines) + "\n"
