"""DAC topology builders, prototype configuration, calibration and evaluation.

A :class:`DacConfig` describes an ordered list of stages. Power-of-3 weighted
stages inject straight into the differential output node through their string
resistors; runs of ladder stages form 4R-3R chains that hang off the output
node, each chain closed by a 6R terminator so its weight ratios are exact at
any finite length. Chains after the first section connect through a series
entry resistor, which is the free element :func:`calibrate` adjusts so that
consecutive stage weights step by exactly 3 across section boundaries
(including the high-voltage to low-voltage supply step).

Switches are ideal source selection plus an optional state-independent
on-resistance, so the resistive graph is fixed and one factorisation plus a
superposition weight table evaluates any digit state.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .codec import DigitVector, split_differential
from .errors import CalibrationError, ConfigError, RangeError
from .network import NetworkSolver, Resistor, ResistiveNetwork, VoltageSource

#: Relative tolerance on calibrated weight ratios.
RATIO_RTOL = 1e-9

WEIGHT_RATIO = 3.0


class StageKind(Enum):
    POWER3_WEIGHTED = "POWER3_WEIGHTED"
    LADDER_4R3R = "LADDER_4R3R"


class TopologyKind(Enum):
    R2R = "R2R"
    TERNARY_4R3R = "TERNARY_4R3R"
    DIFFERENTIAL_4R3R = "DIFFERENTIAL_4R3R"
    POWER3_DIFFERENTIAL = "POWER3_DIFFERENTIAL"


@dataclass(frozen=True)
class StageSpec:
    """One converter stage: topology role, unit resistance and supply rail.

    For POWER3_WEIGHTED stages ``r_base`` is the string resistance and
    ``parallel_strings`` strings share the injection (effective resistance
    r_base / parallel_strings). For LADDER_4R3R stages ``r_base`` is the unit
    R of the 4R-3R chain. ``entry_ohms`` overrides the series element joining
    this stage's section to the output node; it is set by :func:`calibrate`
    and only meaningful on the first stage of a non-leading section.
    """

    kind: StageKind
    r_base: float
    supply_v: float
    parallel_strings: int = 1
    entry_ohms: float | None = None

    def __post_init__(self) -> None:
        if not self.r_base > 0:
            raise ConfigError(f"stage r_base must be > 0 ohms, got {self.r_base}")
        if not self.supply_v > 0:
            raise ConfigError(f"stage supply_v must be > 0 volts, got {self.supply_v}")
        if self.parallel_strings < 1:
            raise ConfigError("parallel_strings must be >= 1")
        if self.entry_ohms is not None and not self.entry_ohms > 0:
            raise ConfigError("entry_ohms must be > 0 ohms when set")


@dataclass(frozen=True)
class DacConfig:
    """Ordered stage specifications plus load, switch and tolerance parameters.

    ``load_ohms`` may be ``inf`` for an open output port. ``element_overrides``
    maps element labels (see :func:`enumerate_elements`) to explicit ohm
    values; it is how :func:`perturb` represents component mismatch.
    """

    stages: tuple[StageSpec, ...]
    load_ohms: float = 32.0
    r_on: float = 0.0
    tolerance: float = 0.0
    element_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "element_overrides", dict(self.element_overrides))
        if not self.stages:
            raise ConfigError("config needs at least one stage")
        if not self.load_ohms > 0:
            raise ConfigError(f"load_ohms must be > 0 (inf = open port), got {self.load_ohms}")
        if self.r_on < 0:
            raise ConfigError("r_on must be >= 0 ohms")
        if not 0.0 <= self.tolerance < 1.0:
            raise ConfigError("tolerance must be a fraction in [0, 1)")
        seen_ladder = False
        for k, st in enumerate(self.stages):
            if st.kind is StageKind.LADDER_4R3R:
                seen_ladder = True
            elif seen_ladder:
                raise ConfigError(
                    f"stage {k + 1}: power-of-3 weighted stages must precede ladder stages"
                )

    @property
    def n_digits(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class _Section:
    kind: StageKind
    indices: tuple[int, ...]


def _sections(config: DacConfig) -> list[_Section]:
    """Group stages: one power-of-3 bank, then ladder runs split on (R, supply)."""
    out: list[_Section] = []
    current: list[int] = []
    current_key: tuple | None = None
    for k, st in enumerate(config.stages):
        if st.kind is StageKind.POWER3_WEIGHTED:
            key = (StageKind.POWER3_WEIGHTED,)
        else:
            key = (StageKind.LADDER_4R3R, st.r_base, st.supply_v)
        if key != current_key:
            if current:
                out.append(_Section(kind=current_key[0], indices=tuple(current)))
            current = []
            current_key = key
        current.append(k)
    out.append(_Section(kind=current_key[0], indices=tuple(current)))
    return out


@dataclass
class _Assembly:
    net: ResistiveNetwork
    elements: list[tuple[str, float]]  # (label, effective ohms) in build order


def _parallel(values: Iterable[float]) -> float:
    return 1.0 / sum(1.0 / v for v in values)


def _build_half(
    config: DacConfig,
    half: str,
    out_node: int,
    next_node: int,
    resistors: list[Resistor],
    sources: list[VoltageSource],
    elements: list[tuple[str, float]],
) -> int:
    stages = config.stages
    overrides = config.element_overrides

    def element(label: str, nominal: float) -> float:
        value = overrides.get(label, nominal)
        elements.append((label, value))
        return value

    sections = _sections(config)
    for si, sec in enumerate(sections):
        if sec.kind is StageKind.POWER3_WEIGHTED:
            for k in sec.indices:
                st = stages[k]
                strings = [
                    element(f"{half}.s{k + 1:02d}.string{j + 1}", st.r_base)
                    for j in range(st.parallel_strings)
                ]
                sources.append(
                    VoltageSource(node=out_node, series_ohms=config.r_on + _parallel(strings))
                )
            if len(sections) == 1:
                # Standalone bank: terminate with the resistance of the missing
                # geometric tail so the port impedance matches the infinite ladder.
                last = stages[sec.indices[-1]]
                nominal = 2.0 * last.r_base / last.parallel_strings
                resistors.append(
                    Resistor(out_node, 0, element(f"{half}.star.term", nominal))
                )
        else:
            first = sec.indices[0]
            if si == 0:
                node = out_node
            else:
                node = next_node
                next_node += 1
                st = stages[first]
                nominal = st.entry_ohms if st.entry_ohms is not None else 4.0 * st.r_base
                resistors.append(
                    Resistor(out_node, node, element(f"{half}.s{first + 1:02d}.entry", nominal))
                )
            for pos, k in enumerate(sec.indices):
                st = stages[k]
                if pos > 0:
                    prev = sec.indices[pos - 1]
                    nxt = next_node
                    next_node += 1
                    resistors.append(
                        Resistor(
                            node,
                            nxt,
                            element(f"{half}.s{prev + 1:02d}.series", 4.0 * stages[prev].r_base),
                        )
                    )
                    node = nxt
                shunts = [
                    element(f"{half}.s{k + 1:02d}.shunt{j + 1}", 3.0 * st.r_base)
                    for j in range(st.parallel_strings)
                ]
                sources.append(
                    VoltageSource(node=node, series_ohms=config.r_on + _parallel(shunts))
                )
            last = sec.indices[-1]
            resistors.append(
                Resistor(node, 0, element(f"{half}.s{last + 1:02d}.term", 6.0 * stages[last].r_base))
            )
    return next_node


def _assemble(config: DacConfig, include_load: bool) -> _Assembly:
    """Build the differential network: node 1 = upper output, node 2 = lower.

    Source order is upper stages 0..n-1 followed by lower stages 0..n-1.
    """
    resistors: list[Resistor] = []
    sources: list[VoltageSource] = []
    elements: list[tuple[str, float]] = []
    next_node = _build_half(config, "upper", 1, 3, resistors, sources, elements)
    _build_half(config, "lower", 2, next_node, resistors, sources, elements)
    if include_load and math.isfinite(config.load_ohms):
        resistors.append(Resistor(1, 2, config.load_ohms))
    net = ResistiveNetwork(
        resistors=tuple(resistors),
        sources=tuple(sources),
        port=(1, 2),
        name="dac" + (" loaded" if include_load else " open"),
    )
    return _Assembly(net=net, elements=elements)


def enumerate_elements(config: DacConfig) -> list[tuple[str, float]]:
    """All physical resistor elements as (label, effective ohms), build order.

    The order is deterministic (upper half then lower half, stages ascending),
    which is what makes seeded perturbations reproducible. The load and the
    switch on-resistance are not converter components and are not listed.
    """
    return _assemble(config, include_load=False).elements


@dataclass(frozen=True)
class WeightTable:
    """Per-stage differential output volts per digit, plus port impedance.

    Positive and negative digit weights are stored separately; they are equal
    on a symmetric (unperturbed) converter. ``w_open``/``w_loaded`` are the
    symmetrised views.
    """

    w_pos_open: np.ndarray
    w_neg_open: np.ndarray
    w_pos_loaded: np.ndarray
    w_neg_loaded: np.ndarray
    z_out: float
    load_ohms: float

    @property
    def n_digits(self) -> int:
        return len(self.w_pos_open)

    @property
    def w_open(self) -> np.ndarray:
        return 0.5 * (self.w_pos_open + self.w_neg_open)

    @property
    def w_loaded(self) -> np.ndarray:
        return 0.5 * (self.w_pos_loaded + self.w_neg_loaded)

    @property
    def v_full_scale(self) -> float:
        """Open-circuit peak differential volts with every digit at +1."""
        return float(self.w_pos_open.sum())


class Dac:
    """Assembled converter with cached solvers and digit-state fast paths.

    Immutable after construction; concurrent evaluation over disjoint digit
    arrays is safe.
    """

    def __init__(self, config: DacConfig):
        self.config = config
        self._open = NetworkSolver(_assemble(config, include_load=False).net)
        if math.isfinite(config.load_ohms):
            self._loaded = NetworkSolver(_assemble(config, include_load=True).net)
        else:
            self._loaded = self._open
        n = config.n_digits
        volts = np.array([st.supply_v for st in config.stages])
        u_open = self._open.port_weights
        u_loaded = self._loaded.port_weights
        self._w_pos_open = volts * u_open[:n]
        self._w_neg_open = -volts * u_open[n:]
        self._w_pos_loaded = volts * u_loaded[:n]
        self._w_neg_loaded = -volts * u_loaded[n:]
        self._volts = volts
        self.z_out = float(self._open.output_impedance())
        self.rail_voltages: tuple[float, ...] = tuple(sorted(set(volts), reverse=True))
        self._rail_columns = {
            v: np.concatenate([np.flatnonzero(volts == v), n + np.flatnonzero(volts == v)])
            for v in self.rail_voltages
        }

    @property
    def n_digits(self) -> int:
        return self.config.n_digits

    def weight_table(self) -> WeightTable:
        return WeightTable(
            w_pos_open=self._w_pos_open.copy(),
            w_neg_open=self._w_neg_open.copy(),
            w_pos_loaded=self._w_pos_loaded.copy(),
            w_neg_loaded=self._w_neg_loaded.copy(),
            z_out=self.z_out,
            load_ohms=self.config.load_ohms,
        )

    def _check_digits(self, d: DigitVector) -> None:
        if len(d) != self.n_digits:
            raise RangeError(f"digit count {len(d)} does not match {self.n_digits} stages")

    def source_levels(self, d: DigitVector) -> np.ndarray:
        """Per-source volts for one digit word, by the differential split rule."""
        self._check_digits(d)
        states = split_differential(d)
        upper = [self._volts[k] * s.value for k, s in enumerate(states.upper)]
        lower = [self._volts[k] * s.value for k, s in enumerate(states.lower)]
        return np.array(upper + lower, dtype=float)

    def output(self, d: DigitVector, loaded: bool = True) -> float:
        """Differential output volts via the weight-table fast path."""
        self._check_digits(d)
        w_pos = self._w_pos_loaded if loaded else self._w_pos_open
        w_neg = self._w_neg_loaded if loaded else self._w_neg_open
        return float(
            sum(w_pos[k] if dk == 1 else -w_neg[k] if dk == -1 else 0.0 for k, dk in enumerate(d))
        )

    def output_direct(self, d: DigitVector, loaded: bool = True) -> float:
        """Reference path: full network solve of the switch state."""
        solver = self._loaded if loaded else self._open
        return float(solver.port_voltage(self.source_levels(d)))

    def output_array(self, digits: np.ndarray, loaded: bool = True) -> np.ndarray:
        """Fast-path outputs for an array of digit words, shape (count, n_digits)."""
        digits = np.asarray(digits)
        if digits.shape[1] != self.n_digits:
            raise RangeError(
                f"digit count {digits.shape[1]} does not match {self.n_digits} stages"
            )
        pos = (digits == 1).astype(float)
        neg = (digits == -1).astype(float)
        if loaded:
            return pos @ self._w_pos_loaded - neg @ self._w_neg_loaded
        return pos @ self._w_pos_open - neg @ self._w_neg_open

    def supply_currents(self, d: DigitVector) -> dict[float, float]:
        """Signed amps drawn from each supply rail for one digit word.

        Only sources whose switch is HIGH count toward their rail; a grounded
        switch conducts to ground, not to the supply.
        """
        levels = self.source_levels(d)
        sol = self._loaded.solve(levels)
        out: dict[float, float] = {}
        for v in self.rail_voltages:
            cols = self._rail_columns[v]
            active = levels[cols] > 0
            out[v] = float(sol.source_currents[cols][active].sum())
        return out

    def rail_currents_array(
        self, digits: np.ndarray, chunk: int = 65536
    ) -> dict[float, np.ndarray]:
        """Per-sample signed rail currents for an array of digit words."""
        digits = np.asarray(digits)
        count = digits.shape[0]
        j_t = self._loaded.source_current_matrix.T
        out = {v: np.empty(count) for v in self.rail_voltages}
        scale = np.concatenate([self._volts, self._volts])
        for start in range(0, count, chunk):
            block = digits[start : start + chunk]
            pos = (block == 1).astype(float)
            neg = (block == -1).astype(float)
            levels = np.hstack([pos, neg]) * scale
            currents = levels @ j_t
            active = levels > 0
            contrib = currents * active
            for v in self.rail_voltages:
                out[v][start : start + block.shape[0]] = contrib[:, self._rail_columns[v]].sum(
                    axis=1
                )
        return out


# --- spec-level operations ---------------------------------------------------


def build_topology(
    kind: TopologyKind, stage_count: int, r: float = 1000.0, v: float = 90.0
) -> ResistiveNetwork:
    """Build one of the four reference topologies as a raw network.

    Sources appear in stage order, most significant first (for differential
    kinds: all upper-half stages, then all lower-half stages); excitation
    levels are chosen per solve, ``v`` documents the intended reference rail.
    Single-ended ports are (output node, ground); differential ports span the
    two half-ladder output nodes.
    """
    if stage_count < 1:
        raise RangeError("stage_count must be >= 1")
    if not r > 0:
        raise RangeError("r must be > 0 ohms")
    resistors: list[Resistor] = []
    sources: list[VoltageSource] = []
    name = f"{kind.value} n={stage_count} r={r:g} v={v:g}"

    def chain(first_node: int) -> None:
        # 4R-3R ladder: 3R source shunts, 4R series elements, 6R terminator.
        node = first_node
        for k in range(stage_count):
            if k > 0:
                resistors.append(Resistor(node, node + 1, 4.0 * r))
                node += 1
            sources.append(VoltageSource(node=node, series_ohms=3.0 * r))
        resistors.append(Resistor(node, 0, 6.0 * r))

    if kind is TopologyKind.R2R:
        # 2R source shunts, R series elements, 2R terminator.
        node = 1
        for k in range(stage_count):
            if k > 0:
                resistors.append(Resistor(node, node + 1, r))
                node += 1
            sources.append(VoltageSource(node=node, series_ohms=2.0 * r))
        resistors.append(Resistor(node, 0, 2.0 * r))
        port = (1, 0)
    elif kind is TopologyKind.TERNARY_4R3R:
        chain(1)
        port = (1, 0)
    elif kind is TopologyKind.DIFFERENTIAL_4R3R:
        chain(1)
        upper_top = 1
        lower_top = stage_count + 1
        chain(lower_top)
        port = (upper_top, lower_top)
    elif kind is TopologyKind.POWER3_DIFFERENTIAL:
        for out_node in (1, 2):
            for k in range(stage_count):
                sources.append(VoltageSource(node=out_node, series_ohms=r * 3.0**k))
            resistors.append(Resistor(out_node, 0, 2.0 * r * 3.0 ** (stage_count - 1)))
        port = (1, 2)
    else:  # pragma: no cover
        raise RangeError(f"unknown topology kind {kind}")
    return ResistiveNetwork(
        resistors=tuple(resistors), sources=tuple(sources), port=port, name=name
    )


def build_prototype() -> DacConfig:
    """Default 20-stage differential converter.

    Six high-voltage power-of-3 weighted stages (the two most significant
    built from parallel 100-ohm strings), six high-voltage 4R-3R ladder
    stages and eight low-voltage ladder stages; 90 V and 12 V rails, 32-ohm
    load, 5 % component tolerance for Monte-Carlo studies. Run
    :func:`calibrate` to pin the section-boundary weight ratios to exactly 3.
    """
    hv = 90.0
    lv = 12.0
    p3 = StageKind.POWER3_WEIGHTED
    ladder = StageKind.LADDER_4R3R
    stages = [
        StageSpec(p3, 100.0, hv, parallel_strings=9),  # 3 high-current sections of 3 strings
        StageSpec(p3, 100.0, hv, parallel_strings=3),
        StageSpec(p3, 100.0, hv),
        StageSpec(p3, 300.0, hv),
        StageSpec(p3, 900.0, hv),
        StageSpec(p3, 2700.0, hv),
    ]
    stages += [StageSpec(ladder, 2000.0, hv) for _ in range(6)]  # 3R=6000, 4R=8000
    stages += [StageSpec(ladder, 5000.0, lv) for _ in range(8)]  # 3R=15000, 4R=20000
    return DacConfig(stages=tuple(stages), load_ohms=32.0, r_on=0.0, tolerance=0.05)


def _stage_weights_open(config: DacConfig) -> np.ndarray:
    """Open-circuit differential volts per +1 digit, one entry per stage."""
    solver = NetworkSolver(_assemble(config, include_load=False).net)
    n = config.n_digits
    volts = np.array([st.supply_v for st in config.stages])
    return volts * solver.port_weights[:n]


def calibrate(config: DacConfig) -> DacConfig:
    """Adjust section-boundary entry resistors for exact power-of-3 weighting.

    Each boundary has one free element (the downstream section's entry
    resistor). The boundary ratios depend lower-triangularly on the entry
    values, so one sequential pass of monotone one-dimensional root-finding
    calibrates every boundary; ratios interior to a section are exact by
    construction on nominal element values.
    """
    sections = _sections(config)
    if len(sections) < 2:
        return config
    cfg = config
    for b in range(1, len(sections)):
        upstream = sections[b - 1].indices[-1]
        downstream = sections[b].indices[0]

        def ratio_error(entry: float) -> float:
            stages = list(cfg.stages)
            stages[downstream] = dataclasses.replace(stages[downstream], entry_ohms=entry)
            w = _stage_weights_open(dataclasses.replace(cfg, stages=tuple(stages)))
            return w[upstream] / w[downstream] - WEIGHT_RATIO

        lo, hi = 1e-9, 1e15
        if ratio_error(lo) > 0 or ratio_error(hi) < 0:
            raise CalibrationError(
                f"weight-ratio target at the stage {upstream + 1} -> {downstream + 1} "
                "boundary is unreachable with a positive entry resistance"
            )
        entry = float(brentq(ratio_error, lo, hi, xtol=1e-12, rtol=8.9e-16))
        stages = list(cfg.stages)
        stages[downstream] = dataclasses.replace(stages[downstream], entry_ohms=entry)
        cfg = dataclasses.replace(cfg, stages=tuple(stages))

    w = _stage_weights_open(cfg)
    for b in range(1, len(sections)):
        upstream = sections[b - 1].indices[-1]
        downstream = sections[b].indices[0]
        ratio = w[upstream] / w[downstream]
        if abs(ratio - WEIGHT_RATIO) > 10 * RATIO_RTOL * WEIGHT_RATIO:
            raise CalibrationError(
                f"calibration failed to converge at the stage {upstream + 1} -> "
                f"{downstream + 1} boundary (ratio {ratio!r})"
            )
    return cfg


def weights(config: DacConfig) -> WeightTable:
    """Per-stage differential weights, port impedance and full-scale summary."""
    return Dac(config).weight_table()


def dac_output(d: DigitVector, wt: WeightTable, loaded: bool = True) -> float:
    """Digit-weighted sum of the table; matches the full network solve."""
    if len(d) != wt.n_digits:
        raise RangeError(f"digit count {len(d)} does not match {wt.n_digits} stages")
    w_pos = wt.w_pos_loaded if loaded else wt.w_pos_open
    w_neg = wt.w_neg_loaded if loaded else wt.w_neg_open
    return float(
        sum(w_pos[k] if dk == 1 else -w_neg[k] if dk == -1 else 0.0 for k, dk in enumerate(d))
    )


def supply_currents(d: DigitVector, config: DacConfig) -> dict[float, float]:
    """Signed amps out of each rail's sources for one digit word."""
    return Dac(config).supply_currents(d)


def perturb(config: DacConfig, seed) -> DacConfig:
    """Multiply every resistor element independently by (1 + u), u ~ U[-tol, +tol].

    Deterministic for a given seed; the draw order follows
    :func:`enumerate_elements`. The two half ladders are perturbed
    independently, as physically distinct components. A zero tolerance
    returns the config unchanged.
    """
    tol = config.tolerance
    if tol == 0.0:
        return config
    elements = enumerate_elements(config)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-tol, tol, size=len(elements))
    overrides = {label: float(value * (1.0 + ui)) for (label, value), ui in zip(elements, u)}
    return dataclasses.replace(config, element_overrides=overrides)


# --- config file format --------------------------------------------------
#
# Structured key-value text (configparser syntax): a [dac] section with
# load_ohms / r_on / tolerance, one [stage.NN] section per stage in order
# with kind / r_base / supply_v / parallel_strings (and entry_ohms once
# calibrated), plus an optional [elements] section of explicit ohm values
# for perturbed converters.


def write_config(config: DacConfig, path) -> None:
    """Write a config in the textual format read back by :func:`read_config`."""
    import configparser

    parser = configparser.ConfigParser()
    parser["dac"] = {
        "load_ohms": repr(config.load_ohms),
        "r_on": repr(config.r_on),
        "tolerance": repr(config.tolerance),
    }
    for k, st in enumerate(config.stages):
        section = {
            "kind": st.kind.value,
            "r_base": repr(st.r_base),
            "supply_v": repr(st.supply_v),
            "parallel_strings": str(st.parallel_strings),
        }
        if st.entry_ohms is not None:
            section["entry_ohms"] = repr(st.entry_ohms)
        parser[f"stage.{k + 1:02d}"] = section
    if config.element_overrides:
        parser["elements"] = {
            label: repr(value) for label, value in sorted(config.element_overrides.items())
        }
    with open(path, "w", encoding="ascii") as fh:
        parser.write(fh)


def _config_float(section, sec_name: str, key: str, default: float | None = None) -> float:
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"[{sec_name}] is missing required field '{key}'")
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec_name}] field '{key}': not a number: {raw!r}") from None


def read_config(path) -> DacConfig:
    """Parse a config file; raises ConfigError naming the offending field."""
    import configparser
    import re

    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="ascii") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    if "dac" not in parser:
        raise ConfigError("config is missing its [dac] section")
    dac_sec = parser["dac"]
    load_ohms = _config_float(dac_sec, "dac", "load_ohms", 32.0)
    r_on = _config_float(dac_sec, "dac", "r_on", 0.0)
    tolerance = _config_float(dac_sec, "dac", "tolerance", 0.0)

    stage_names: list[tuple[int, str]] = []
    for name in parser.sections():
        match = re.fullmatch(r"stage\.(\d+)", name)
        if match:
            stage_names.append((int(match.group(1)), name))
    if not stage_names:
        raise ConfigError("config defines no [stage.NN] sections")
    stage_names.sort()
    expected = list(range(1, len(stage_names) + 1))
    if [num for num, _ in stage_names] != expected:
        raise ConfigError("stage sections must be numbered consecutively from stage.01")

    stages: list[StageSpec] = []
    for num, name in stage_names:
        sec = parser[name]
        kind_raw = sec.get("kind")
        if kind_raw is None:
            raise ConfigError(f"[{name}] is missing required field 'kind'")
        try:
            kind = StageKind(kind_raw.strip().upper())
        except ValueError:
            valid = ", ".join(k.value for k in StageKind)
            raise ConfigError(f"[{name}] field 'kind': {kind_raw!r} is not one of {valid}") from None
        entry = sec.get("entry_ohms")
        stages.append(
            StageSpec(
                kind=kind,
                r_base=_config_float(sec, name, "r_base"),
                supply_v=_config_float(sec, name, "supply_v"),
                parallel_strings=int(_config_float(sec, name, "parallel_strings", 1)),
                entry_ohms=_config_float(sec, name, "entry_ohms") if entry is not None else None,
            )
        )

    overrides: dict[str, float] = {}
    if "elements" in parser:
        for label, raw in parser["elements"].items():
            try:
                overrides[label] = float(raw)
            except ValueError:
                raise ConfigError(f"[elements] field '{label}': not a number: {raw!r}") from None

    return DacConfig(
        stages=tuple(stages),
        load_ohms=load_ohms,
        r_on=r_on,
        tolerance=tolerance,
        element_overrides=overrides,
    )
