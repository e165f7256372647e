"""System configuration, per-slot random environment, and the rate equation.

Users are indexed globally: real-time (RT) users come first
(0 .. n_rt - 1), non-real-time (NRT) users after (n_rt .. n_rt + n_nrt - 1).
"""

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid or unparsable system configuration."""


def _per_user(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ConfigError(f"{name} must be a scalar or length-{n} list, got shape {arr.shape}")
    return arr


@dataclass
class SystemConfig:
    """All scenario parameters for one simulation run.

    Per-user fields accept a scalar (broadcast) or a length-matched list.
    ``lambda_`` and ``mean_gain`` cover all users (RT first, then NRT);
    ``q`` covers RT users only. The config-file key for ``lambda_`` is
    ``lambda`` (reserved word in Python).
    """

    n_rt: int = 4
    n_nrt: int = 2
    lambda_: np.ndarray | float | list = None  # arrival rate per user, packets/slot
    q: np.ndarray | float | list = 0.9         # RT delivery-ratio target
    packet_bits: float = 1.0                   # L
    slot_seconds: float = 5.0                  # T_s
    p_avg: float = 10.0                        # average power budget
    p_max: float = 20.0                        # per-transmission power cap
    b_max: float = 100.0                       # admission threshold / reward weight
    mean_gain: np.ndarray | float | list = 1.0
    gain_cap: float = 50.0
    horizon_slots: int = 10_000
    rng_seed: int = 1
    phi_tol: float = None                      # airtime-packing tolerance; default 1e-9 * T_s
    phi_max: float = 1e12                      # multiplier search ceiling

    def __post_init__(self):
        self.n_rt = int(self.n_rt)
        self.n_nrt = int(self.n_nrt)
        if self.n_rt < 0 or self.n_nrt < 0:
            raise ConfigError("user counts must be nonnegative")
        n = self.n_users
        if self.lambda_ is None:
            # default load: light RT traffic, saturated NRT buffers
            self.lambda_ = np.concatenate([np.full(self.n_rt, 0.3), np.full(self.n_nrt, 1.0)])
        self.lambda_ = _per_user(self.lambda_, n, "lambda")
        self.q = _per_user(self.q, self.n_rt, "q")
        self.mean_gain = _per_user(self.mean_gain, n, "mean_gain")
        if self.phi_tol is None:
            self.phi_tol = 1e-9 * float(self.slot_seconds)
        for name in ("packet_bits", "slot_seconds", "p_avg", "p_max", "b_max",
                     "gain_cap", "phi_tol", "phi_max"):
            setattr(self, name, float(getattr(self, name)))
        self.horizon_slots = int(self.horizon_slots)
        self.rng_seed = int(self.rng_seed)
        self._validate()

    def _validate(self):
        if np.any(self.lambda_ < 0.0) or np.any(self.lambda_ > 1.0):
            raise ConfigError("arrival rates must lie in [0, 1]")
        if np.any(self.q < 0.0) or np.any(self.q > 1.0):
            raise ConfigError("delivery-ratio targets must lie in [0, 1]")
        if not (0.0 < self.p_avg <= self.p_max):
            raise ConfigError("need 0 < p_avg <= p_max")
        if np.any(self.mean_gain <= 0.0):
            raise ConfigError("mean gains must be positive")
        if not math.isfinite(self.gain_cap) or self.gain_cap <= 0.0:
            raise ConfigError("gain_cap must be finite and positive")
        if self.packet_bits <= 0.0 or self.slot_seconds <= 0.0:
            raise ConfigError("packet_bits and slot_seconds must be positive")
        if self.b_max <= 0.0:
            raise ConfigError("b_max must be positive")
        if self.horizon_slots < 0:
            raise ConfigError("horizon_slots must be nonnegative")
        if self.phi_tol <= 0.0 or self.phi_max <= 0.0:
            raise ConfigError("phi_tol and phi_max must be positive")

    @property
    def n_users(self) -> int:
        return self.n_rt + self.n_nrt

    @property
    def rt_ids(self) -> range:
        return range(self.n_rt)

    @property
    def nrt_ids(self) -> range:
        return range(self.n_rt, self.n_users)

    def replace(self, **kwargs) -> "SystemConfig":
        """Copy with fields changed. Changing user counts re-broadcasts the
        per-user vectors from their first RT / first NRT entries."""
        if "n_rt" in kwargs or "n_nrt" in kwargs:
            n_rt = int(kwargs.get("n_rt", self.n_rt))
            n_nrt = int(kwargs.get("n_nrt", self.n_nrt))
            lam_rt = float(self.lambda_[0]) if self.n_rt else 0.3
            lam_nrt = float(self.lambda_[self.n_rt]) if self.n_nrt else 1.0
            kwargs.setdefault("lambda_", [lam_rt] * n_rt + [lam_nrt] * n_nrt)
            kwargs.setdefault("q", float(self.q[0]) if self.n_rt else 0.9)
            g_rt = float(self.mean_gain[0]) if self.n_rt else 1.0
            g_nrt = float(self.mean_gain[self.n_rt]) if self.n_nrt else 1.0
            kwargs.setdefault("mean_gain", [g_rt] * n_rt + [g_nrt] * n_nrt)
        return dataclasses.replace(self, **kwargs)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SystemConfig":
        kwargs = {}
        for key, value in mapping.items():
            key = key.strip()
            if key == "lambda":
                key = "lambda_"
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key: {key!r}")
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "SystemConfig":
        """Load from a flat key=value file. '#' starts a comment; values are
        numbers or comma-separated number lists."""
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        mapping = {}
        for lineno, raw in enumerate(path.read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            mapping[key.strip()] = _parse_value(value.strip())
        return cls.from_mapping(mapping)


_CONFIG_KEYS = frozenset({
    "n_rt", "n_nrt", "lambda_", "q", "packet_bits", "slot_seconds", "p_avg",
    "p_max", "b_max", "mean_gain", "gain_cap", "horizon_slots", "rng_seed",
    "phi_tol", "phi_max",
})


def _parse_value(text: str):
    if "," in text:
        return [float(part) for part in text.split(",") if part.strip()]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse config value {text!r}") from exc


@dataclass
class SlotObservation:
    """Per-slot randomness: channel power gains and packet arrivals."""

    gains: np.ndarray     # length n_users, in [0, gain_cap]
    arrivals: np.ndarray  # length n_users, values in {0, 1}


def draw_slot(config: SystemConfig, rng: np.random.Generator) -> SlotObservation:
    """Draw one slot of the environment.

    Gains are per-user exponential with the configured means (Rayleigh
    power fading), clipped at gain_cap. Arrivals are per-user Bernoulli.
    The draw order (gains, then arrivals) is fixed so that equal seeds
    give bit-identical streams.
    """
    gains = np.minimum(rng.exponential(config.mean_gain), config.gain_cap)
    arrivals = (rng.random(config.n_users) < config.lambda_).astype(np.int64)
    return SlotObservation(gains=gains, arrivals=arrivals)


def rate(power: float, gain: float) -> float:
    """Channel rate log(1 + power * gain), in nats per second."""
    if power <= 0.0 or gain <= 0.0:
        return 0.0
    return math.log1p(power * gain)


def rt_airtime(power: float, gain: float, packet_bits: float) -> float:
    """Seconds needed to ship one fixed-length packet at this power/gain.

    Raises:
        ValueError: if the resulting rate is zero (packet cannot be sent).
    """
    r = rate(power, gain)
    if r <= 0.0:
        raise ValueError(f"infeasible rate: power={power!r} gain={gain!r}")
    return packet_bits / r
