"""Declarative scenario configuration (YAML).

Example::

    name: experiment-b
    analysis_frequency_hz: 10.25e6
    source:
      type: squeezed          # vacuum | modulated_coherent | squeezed
      v_plus_db: 4.0          # squeezing, positive dB below QNL
      v_minus_db: 4.0         # anti-squeezing, positive dB above QNL
      excess_phase_db: 0.0    # extra phase noise on top of v_minus
    umzi:
      lock: +pi/2             # +pi/2 | -pi/2 | angle in radians
      visibility: 0.95        # or eta_mm: 0.9025
      # tau_s: ... or delta_l_m: ...; default is Omega*tau = pi/2
    detection:
      homodyne: {input_visibility: 1.0, output_visibility: 1.0,
                 quantum_efficiency: 1.0, sweep_points: 32}
      direct: true
      joint: true
      bell: {visibility: 0.90}
    oracle: {samples: 1000000, seed: 1}

Validation failures raise :class:`ConfigError` carrying the line of the
offending key.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, replace

import yaml

from .core import from_db
from .errors import ConfigError
from .spectrum import FabryPerotSpec
from .umzi import LOCK_MINUS, LOCK_PLUS, UmziConfig

SOURCE_KINDS = ("vacuum", "modulated_coherent", "squeezed")


@dataclass(frozen=True)
class SourceConfig:
    kind: str = "vacuum"
    beta: float = 0.1
    modulation: str = "phase"
    carrier: float = 1.0
    v_plus_db: float = 0.0
    v_minus_db: float | None = None
    excess_phase_db: float = 0.0

    def variances(self) -> tuple[float, float]:
        """Linear ``(V+, V-)`` of the source noise.

        Squeezed sources read ``v_plus_db`` as squeezing (below QNL) and
        ``v_minus_db`` as anti-squeezing; modulated sources read both as
        plain noise levels relative to the QNL.
        """
        v_minus_db = self.v_plus_db if self.v_minus_db is None else self.v_minus_db
        if self.kind == "squeezed":
            v_plus, v_minus = from_db(-self.v_plus_db), from_db(v_minus_db)
        elif self.kind == "modulated_coherent":
            v_plus, v_minus = from_db(self.v_plus_db), from_db(v_minus_db)
        else:
            return 1.0, 1.0
        return v_plus, v_minus * from_db(self.excess_phase_db)

    def to_dict(self) -> dict:
        d = {
            "type": self.kind,
            "beta": self.beta,
            "modulation": self.modulation,
            "carrier": self.carrier,
            "v_plus_db": self.v_plus_db,
        }
        if self.v_minus_db is not None:
            d["v_minus_db"] = self.v_minus_db
        d["excess_phase_db"] = self.excess_phase_db
        return d


@dataclass(frozen=True)
class UmziSection:
    lock: float = LOCK_PLUS
    visibility: float = 1.0
    tau_s: float | None = None
    delta_l_m: float | None = None

    def build(self, analysis_frequency_hz: float) -> UmziConfig:
        if self.tau_s is not None:
            return UmziConfig(self.tau_s, self.lock, self.visibility)
        if self.delta_l_m is not None:
            return UmziConfig.from_path_difference(self.delta_l_m, self.lock, self.visibility)
        return UmziConfig.for_frequency(analysis_frequency_hz, self.lock, self.visibility)

    def to_dict(self) -> dict:
        d = {"lock": _lock_text(self.lock), "visibility": self.visibility}
        if self.tau_s is not None:
            d["tau_s"] = self.tau_s
        if self.delta_l_m is not None:
            d["delta_l_m"] = self.delta_l_m
        return d


@dataclass(frozen=True)
class HomodyneSection:
    input_visibility: float = 1.0
    output_visibility: float = 1.0
    quantum_efficiency: float = 1.0
    sweep_points: int = 32


@dataclass(frozen=True)
class DetectionSection:
    homodyne: HomodyneSection | None = field(default_factory=HomodyneSection)
    direct: bool = True
    joint: bool = True
    bell_visibility: float | None = None

    def to_dict(self) -> dict:
        d = {"homodyne": None if self.homodyne is None else asdict(self.homodyne)}
        d["direct"] = self.direct
        d["joint"] = self.joint
        if self.bell_visibility is not None:
            d["bell"] = {"visibility": self.bell_visibility}
        return d


@dataclass(frozen=True)
class OracleSection:
    samples: int = 1_000_000
    seed: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    analysis_frequency_hz: float = 10.25e6
    source: SourceConfig = field(default_factory=SourceConfig)
    umzi: UmziSection = field(default_factory=UmziSection)
    detection: DetectionSection = field(default_factory=DetectionSection)
    spectrum: FabryPerotSpec = field(default_factory=FabryPerotSpec)
    oracle: OracleSection | None = None

    def umzi_config(self) -> UmziConfig:
        return self.umzi.build(self.analysis_frequency_hz)

    def with_oracle(self, samples: int | None, seed: int | None) -> "ScenarioConfig":
        if samples is None and seed is None:
            return self
        base = self.oracle or OracleSection()
        return replace(
            self,
            oracle=OracleSection(
                samples if samples is not None else base.samples, seed if seed is not None else base.seed
            ),
        )

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "analysis_frequency_hz": self.analysis_frequency_hz,
            "source": self.source.to_dict(),
            "umzi": self.umzi.to_dict(),
            "detection": self.detection.to_dict(),
            "spectrum": {
                "fsr_hz": self.spectrum.fsr,
                "linewidth_hz": self.spectrum.linewidth,
                "scan_range_hz": self.spectrum.scan_range,
                "resolution": self.spectrum.resolution,
                "mismatch_fraction": self.spectrum.mismatch_fraction,
            },
        }
        if self.oracle is not None:
            d["oracle"] = asdict(self.oracle)
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def experiment_a_defaults() -> ScenarioConfig:
    """Classical separation of 90.5 MHz phase-modulation side-bands."""
    return ScenarioConfig(
        name="experiment-a",
        analysis_frequency_hz=90.5e6,
        source=SourceConfig(kind="modulated_coherent", beta=0.1, modulation="phase"),
        umzi=UmziSection(lock=LOCK_PLUS, visibility=0.98),
        detection=DetectionSection(
            homodyne=HomodyneSection(input_visibility=0.89, output_visibility=0.92), direct=False, joint=False
        ),
        spectrum=FabryPerotSpec(mismatch_fraction=0.005),
    )


def experiment_b_defaults() -> ScenarioConfig:
    """Entanglement from 4 dB of amplitude squeezing at 10.25 MHz."""
    return ScenarioConfig(
        name="experiment-b",
        analysis_frequency_hz=10.25e6,
        source=SourceConfig(kind="squeezed", v_plus_db=4.0),
        umzi=UmziSection(lock=LOCK_PLUS, visibility=0.95),
        detection=DetectionSection(homodyne=None, direct=True, joint=True, bell_visibility=0.90),
    )


# --- parsing -----------------------------------------------------------------

_LOCKS = {"+pi/2": LOCK_PLUS, "pi/2": LOCK_PLUS, "-pi/2": LOCK_MINUS}


def _lock_text(lock: float):
    if lock == LOCK_PLUS:
        return "+pi/2"
    if lock == LOCK_MINUS:
        return "-pi/2"
    return lock


def _line_map(node, path=(), out=None) -> dict:
    """Map key paths of a composed YAML tree to 1-based line numbers."""
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = path + (key.value,)
            out[sub] = key.start_mark.line + 1
            _line_map(value, sub, out)
    return out


class _Reader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path, message):
        line = None
        for k in range(len(path), -1, -1):
            if tuple(path[:k]) in self.lines:
                line = self.lines[tuple(path[:k])]
                break
        raise ConfigError(f"{'.'.join(map(str, path)) or '<root>'}: {message}", line)

    def mapping(self, data, path, allowed):
        if data is None:
            return {}
        if not isinstance(data, dict):
            self.fail(path, "expected a mapping")
        for key in data:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key (allowed: {', '.join(allowed)})")
        return data

    def number(self, data, path, key, default=None, lo=None, hi=None, positive=False, integer=False):
        if key not in data or data[key] is None:
            return default
        value = data[key]
        if isinstance(value, bool):
            self.fail(path + (key,), "expected a number")
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                self.fail(path + (key,), f"expected a number, got {value!r}")
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(path + (key,), f"expected a finite number, got {value!r}")
        if integer:
            if value != int(value):
                self.fail(path + (key,), f"expected an integer, got {value!r}")
            value = int(value)
        else:
            value = float(value)
        if positive and not value > 0:
            self.fail(path + (key,), f"must be positive, got {value}")
        if lo is not None and value < lo or hi is not None and value > hi:
            self.fail(path + (key,), f"must lie in [{lo}, {hi}], got {value}")
        return value

    def flag(self, data, path, key, default):
        if key not in data:
            return default
        if not isinstance(data[key], bool):
            self.fail(path + (key,), "expected true or false")
        return data[key]

    def choice(self, data, path, key, options, default):
        value = data.get(key, default)
        if value not in options:
            self.fail(path + (key,), f"expected one of {', '.join(options)}, got {value!r}")
        return value


def _lock(reader, data, path):
    value = data.get("lock", "+pi/2")
    if isinstance(value, str):
        text = re.sub(r"\s+", "", value.lower())
        if text in _LOCKS:
            return _LOCKS[text]
    return reader.number(data, path, "lock")


def config_from_dict(data, lines: dict | None = None) -> ScenarioConfig:
    r = _Reader(lines or {})
    root = r.mapping(
        data, (), ("name", "analysis_frequency_hz", "source", "umzi", "detection", "spectrum", "oracle")
    )
    name = str(root.get("name", "scenario"))
    freq = r.number(root, (), "analysis_frequency_hz", 10.25e6, positive=True)

    p = ("source",)
    src = r.mapping(
        root.get("source"), p,
        ("type", "beta", "modulation", "carrier", "v_plus_db", "v_minus_db", "excess_phase_db"),
    )
    kind = r.choice(src, p, "type", SOURCE_KINDS, "vacuum")
    source = SourceConfig(
        kind=kind,
        beta=r.number(src, p, "beta", 0.1),
        modulation=r.choice(src, p, "modulation", ("phase", "amplitude"), "phase"),
        carrier=r.number(src, p, "carrier", 1.0),
        v_plus_db=r.number(src, p, "v_plus_db", 0.0),
        v_minus_db=r.number(src, p, "v_minus_db", None),
        excess_phase_db=r.number(src, p, "excess_phase_db", 0.0, lo=0.0),
    )
    if kind == "squeezed" and source.v_plus_db < 0:
        r.fail(p + ("v_plus_db",), "squeezing is entered as positive dB below the QNL")

    p = ("umzi",)
    um = r.mapping(root.get("umzi"), p, ("lock", "visibility", "eta_mm", "tau_s", "delta_l_m"))
    if "visibility" in um and "eta_mm" in um:
        r.fail(p + ("eta_mm",), "give either visibility or eta_mm, not both")
    if "eta_mm" in um:
        visibility = math.sqrt(r.number(um, p, "eta_mm", lo=0.0, hi=1.0))
    else:
        visibility = r.number(um, p, "visibility", 1.0, lo=0.0, hi=1.0)
    if "tau_s" in um and "delta_l_m" in um:
        r.fail(p + ("delta_l_m",), "give either tau_s or delta_l_m, not both")
    umzi = UmziSection(
        lock=_lock(r, um, p),
        visibility=visibility,
        tau_s=r.number(um, p, "tau_s", None, lo=0.0),
        delta_l_m=r.number(um, p, "delta_l_m", None, lo=0.0),
    )

    p = ("detection",)
    det = r.mapping(root.get("detection"), p, ("homodyne", "direct", "joint", "bell"))
    homodyne = None
    if "homodyne" not in det or det["homodyne"] is not None:
        hp = p + ("homodyne",)
        h = r.mapping(
            det.get("homodyne"), hp, ("input_visibility", "output_visibility", "quantum_efficiency", "sweep_points")
        )
        homodyne = HomodyneSection(
            input_visibility=r.number(h, hp, "input_visibility", 1.0, lo=0.0, hi=1.0),
            output_visibility=r.number(h, hp, "output_visibility", 1.0, lo=0.0, hi=1.0),
            quantum_efficiency=r.number(h, hp, "quantum_efficiency", 1.0, lo=0.0, hi=1.0),
            sweep_points=r.number(h, hp, "sweep_points", 32, lo=1, integer=True),
        )
    bell_visibility = None
    if det.get("bell") is not None:
        bp = p + ("bell",)
        bell = r.mapping(det["bell"], bp, ("visibility",))
        bell_visibility = r.number(bell, bp, "visibility", 1.0, lo=0.0, hi=1.0)
    detection = DetectionSection(
        homodyne=homodyne,
        direct=r.flag(det, p, "direct", True),
        joint=r.flag(det, p, "joint", True),
        bell_visibility=bell_visibility,
    )

    p = ("spectrum",)
    sp = r.mapping(
        root.get("spectrum"), p, ("fsr_hz", "linewidth_hz", "scan_range_hz", "resolution", "mismatch_fraction")
    )
    d = FabryPerotSpec()
    fsr = r.number(sp, p, "fsr_hz", d.fsr, positive=True)
    linewidth = r.number(sp, p, "linewidth_hz", d.linewidth, positive=True)
    if not fsr > linewidth:
        r.fail(p + ("linewidth_hz",), "linewidth must be below the free spectral range")
    spectrum = FabryPerotSpec(
        fsr=fsr,
        linewidth=linewidth,
        scan_range=r.number(sp, p, "scan_range_hz", d.scan_range, positive=True),
        resolution=r.number(sp, p, "resolution", d.resolution, lo=2, integer=True),
        mismatch_fraction=r.number(sp, p, "mismatch_fraction", 0.0, lo=0.0, hi=0.999),
    )

    oracle = None
    if root.get("oracle") is not None:
        p = ("oracle",)
        o = r.mapping(root["oracle"], p, ("samples", "seed"))
        oracle = OracleSection(
            samples=r.number(o, p, "samples", 1_000_000, lo=10_000, integer=True),
            seed=r.number(o, p, "seed", 0, lo=0, integer=True),
        )
    return ScenarioConfig(name, freq, source, umzi, detection, spectrum, oracle)


def parse_config(text: str) -> ScenarioConfig:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {exc}", mark.line + 1 if mark else None) from None
    lines = _line_map(node) if node is not None else {}
    return config_from_dict(data, lines)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

