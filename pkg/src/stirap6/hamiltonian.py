"""Pulse model and the 6x6 interaction Hamiltonian (hbar = 1).

Basis order, used everywhere in the package::

    0: |0,0>   1: |1,-1>   2: |1,+1>   3: |2,-2>   4: |2,0>   5: |2,+2>

The spectator levels |1,0> and |2,+-1> are never coupled and are left out.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from stirap6.angular import Q
from stirap6.errors import ConfigError

BASIS_LABELS = ("|0,0>", "|1,-1>", "|1,+1>", "|2,-2>", "|2,0>", "|2,+2>")
STOKES_NORM = np.sqrt(1.0 + Q * Q)

# key in the config file -> PulseConfig attribute
CONFIG_KEYS = {
    "rp_amp": "pump_amplitude",
    "rs_amp": "stokes_amplitude",
    "tp": "pump_center",
    "ts": "stokes_center",
    "taup": "pump_width",
    "taus": "stokes_width",
    "eta": "eta",
    "nu": "nu",
    "phia": "phi_a",
    "phib": "phi_b",
    "phic": "phi_c",
    "phid": "phi_d",
    "delta": "detuning",
}


class TabulatedEnvelope:
    """Envelope given as (time, value) samples, linearly interpolated, zero outside."""

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("envelope values must be non-negative")

    def __call__(self, t):
        return np.interp(t, self.times, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class PulseConfig:
    """Pump/Stokes pulse pair, polarizations, phases and detuning.

    Amplitudes and detuning are angular frequencies, centers and widths are
    times, all in matching arbitrary units. ``stokes_amplitude`` is the total
    Stokes scale R_S, so C and D carry an extra ``1/sqrt(1+q^2)``.
    """

    pump_amplitude: float = 10.0
    stokes_amplitude: float = 10.0 * float(STOKES_NORM)
    pump_center: float = 1.6
    stokes_center: float = -1.6
    pump_width: float = 2.8
    stokes_width: float = 2.8
    eta: float = 0.0
    nu: float = 0.0
    phi_a: float = 0.0
    phi_b: float = 0.0
    phi_c: float = 0.0
    phi_d: float = 0.0
    detuning: float = 0.0
    pump_table: TabulatedEnvelope | None = field(default=None, compare=False)
    stokes_table: TabulatedEnvelope | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.pump_amplitude < 0 or self.stokes_amplitude < 0:
            raise ConfigError("pulse amplitudes must be non-negative")
        if self.pump_width <= 0 or self.stokes_width <= 0:
            raise ConfigError("pulse widths must be positive")
        for name in ("eta", "nu"):
            value = getattr(self, name)
            if not 0.0 <= value <= np.pi / 2:
                raise ConfigError(f"{name}={value} outside [0, pi/2]")

    @property
    def phases(self):
        return (self.phi_a, self.phi_b, self.phi_c, self.phi_d)

    @property
    def phi(self) -> float:
        """The one phase combination that survives the U1 transformation."""
        return residual_phase(*self.phases)

    @property
    def is_gaussian(self) -> bool:
        return self.pump_table is None and self.stokes_table is None

    def pump(self, t):
        if self.pump_table is not None:
            return self.pump_table(t)
        return self.pump_amplitude * np.exp(-(((t - self.pump_center) / self.pump_width) ** 2))

    def stokes(self, t):
        if self.stokes_table is not None:
            return self.stokes_table(t)
        return self.stokes_amplitude * np.exp(-(((t - self.stokes_center) / self.stokes_width) ** 2))

    def pump_rate(self, t):
        """Time derivative of the Gaussian pump envelope."""
        return -2.0 * (t - self.pump_center) / self.pump_width**2 * self.pump(t)

    def stokes_rate(self, t):
        return -2.0 * (t - self.stokes_center) / self.stokes_width**2 * self.stokes(t)

    def replace(self, **changes) -> PulseConfig:
        return dataclasses.replace(self, **changes)

    def default_span(self) -> tuple[float, float]:
        """Window where both Gaussian tails have dropped below ~2e-9 of peak."""
        t0 = min(self.stokes_center - 4.5 * self.stokes_width, self.pump_center - 4.5 * self.pump_width)
        t1 = max(self.pump_center + 4.5 * self.pump_width, self.stokes_center + 4.5 * self.stokes_width)
        return t0, t1

    def to_mapping(self) -> dict[str, float]:
        return {key: float(getattr(self, attr)) for key, attr in CONFIG_KEYS.items()}


class EnvelopeSample(NamedTuple):
    A: float
    B: float
    C: float
    D: float


def residual_phase(phi_a, phi_b, phi_c, phi_d) -> float:
    return float(np.mod(phi_b - phi_a + phi_c - phi_d, 2 * np.pi))


def envelopes(t, cfg: PulseConfig) -> EnvelopeSample:
    """Split the pump and Stokes envelopes into the four circular components.

    Works elementwise when ``t`` is an array.
    """
    rp = cfg.pump(t)
    rs = cfg.stokes(t) / STOKES_NORM
    return EnvelopeSample(
        rp * np.cos(cfg.eta),
        rp * np.sin(cfg.eta),
        rs * np.cos(cfg.nu),
        rs * np.sin(cfg.nu),
    )


def build_hamiltonian(env: EnvelopeSample, phases=(0.0, 0.0, 0.0, 0.0), detuning: float = 0.0) -> np.ndarray:
    A, B, C, D = env
    pa, pb, pc, pd = phases
    H = np.zeros((6, 6), dtype=complex)
    H[0, 1] = A * np.exp(1j * pa)
    H[0, 2] = B * np.exp(1j * pb)
    H[1, 3] = Q * C * np.exp(1j * pc)
    H[1, 4] = D * np.exp(1j * pd)
    H[2, 4] = C * np.exp(1j * pc)
    H[2, 5] = Q * D * np.exp(1j * pd)
    H = H + H.conj().T
    H[1, 1] = H[2, 2] = detuning
    return 0.5 * H


def hamiltonian_at(t: float, cfg: PulseConfig) -> np.ndarray:
    return build_hamiltonian(envelopes(t, cfg), cfg.phases, cfg.detuning)


def phase_reduction_diagonal(phi_a, phi_b, phi_c, phi_d) -> np.ndarray:
    """Diagonal of U1; ``phi_b`` does not enter."""
    return np.exp(1j * np.array([
        -(phi_a + phi_c),
        -phi_c,
        phi_d - 2 * phi_c,
        0.0,
        phi_d - phi_c,
        2 * phi_d - 2 * phi_c,
    ]))


def reduce_phases(cfg: PulseConfig) -> tuple[np.ndarray, float]:
    """Return ``(U1, phi)`` such that ``U1 H U1^dagger`` is real except the B coupling."""
    return np.diag(phase_reduction_diagonal(*cfg.phases)), cfg.phi


def reduced_hamiltonian(env: EnvelopeSample, phi: float, detuning: float = 0.0) -> np.ndarray:
    """H1: the Hamiltonian in the phase-reduced frame."""
    return build_hamiltonian(env, (0.0, phi, 0.0, 0.0), detuning)


def parse_config_text(text: str, base: PulseConfig | None = None) -> tuple[PulseConfig, dict[str, str]]:
    """Parse ``key = value`` lines.

    Pulse keys go into the returned ``PulseConfig``; any other key is
    returned untouched in the second element so callers (integrator
    settings, CLI options) can claim them. Blank lines and ``#`` comments
    are ignored.
    """
    values: dict[str, float] = {}
    extra: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in CONFIG_KEYS:
            try:
                values[CONFIG_KEYS[key]] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} needs a number, got {value!r}") from None
        else:
            extra[key] = value
    cfg = dataclasses.replace(base or PulseConfig(), **values)
    return cfg, extra


def load_config(path: str | Path, base: PulseConfig | None = None) -> tuple[PulseConfig, dict[str, str]]:
    return parse_config_text(Path(path).read_text(), base)


def format_config(cfg: PulseConfig, extra: dict[str, object] | None = None) -> str:
    lines = [f"{key} = {value!r}" for key, value in cfg.to_mapping().items()]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def builtin_config_path(name: str) -> Path:
    """Path of a shipped configuration (``fig2``, ``fig3``, ``sweep``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    path = Path(__file__).parent / "configs" / f"{stem}.cfg"
    if not path.exists():
        raise ConfigError(f"no built-in configuration named {name!r}")
    return path
