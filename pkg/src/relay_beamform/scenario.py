"""Network instances: scalar parameters plus one channel realization."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Invalid scenario parameters or a malformed scenario file."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Scalar parameters of one underlay relay network.

    Powers are linear (watts). ``sigma_n2`` is shared by relays and receivers.
    Secondary transmitter ``i`` is paired with secondary receiver ``i``, hence
    ``M == N``.
    """

    R: int
    M: int
    N: int
    P_p: float
    P_s: float
    sigma_n2: float = 1.0
    I_p: float = 1.0
    P_t: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("R", "M", "N"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ScenarioError(f"{name} must be a positive integer, got {v!r}")
        if self.M != self.N:
            raise ScenarioError(f"M and N must be equal (paired links), got M={self.M}, N={self.N}")
        for name in ("P_p", "P_s", "sigma_n2", "I_p", "P_t"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ScenarioError(f"{name} must be positive and finite, got {v!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ScenarioError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    def replace(self, **changes) -> "ScenarioConfig":
        d = asdict(self)
        d.update(changes)
        return ScenarioConfig(**d)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Complex channel blocks of one realization.

    H[r, m]: SU-TX m -> relay r, shape (R, M).
    g[r]: PU-TX -> relay r, shape (R,).
    Hhat[j, r]: relay r -> SU-RX j, shape (N, R).
    ghat[r]: relay r -> PU-RX, shape (R,).
    """

    H: np.ndarray
    g: np.ndarray
    Hhat: np.ndarray
    ghat: np.ndarray

    def __post_init__(self):
        for f in fields(self):
            a = np.array(getattr(self, f.name), dtype=complex)
            a.setflags(write=False)
            object.__setattr__(self, f.name, a)
        R, M = self.H.shape if self.H.ndim == 2 else (-1, -1)
        if self.H.ndim != 2:
            raise ScenarioError(f"H must be 2-D, got shape {self.H.shape}")
        if self.g.shape != (R,) or self.ghat.shape != (R,):
            raise ScenarioError(
                f"g and ghat must have length R={R}, got {self.g.shape} and {self.ghat.shape}")
        if self.Hhat.ndim != 2 or self.Hhat.shape[1] != R:
            raise ScenarioError(f"Hhat must have shape (N, {R}), got {self.Hhat.shape}")
        for f in fields(self):
            if not np.all(np.isfinite(getattr(self, f.name))):
                raise ScenarioError(f"{f.name} has non-finite entries")

    @property
    def shape(self) -> tuple[int, int, int]:
        """(R, M, N)."""
        return self.H.shape[0], self.H.shape[1], self.Hhat.shape[0]

    def check(self, config: ScenarioConfig) -> None:
        if self.shape != (config.R, config.M, config.N):
            raise ScenarioError(
                f"channel dimensions (R, M, N)={self.shape} do not match config "
                f"({config.R}, {config.M}, {config.N})")

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return all(
            getattr(self, f.name).shape == getattr(other, f.name).shape
            and np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    # CN(0, 1): real and imaginary parts each N(0, 1/2)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channels(config: ScenarioConfig) -> ChannelSet:
    """Draw i.i.d. CN(0, 1) Rayleigh coefficients for every link.

    The draw is a pure function of ``config`` (through ``config.seed``).
    """
    rng = np.random.default_rng(int(config.seed))
    R, M, N = config.R, config.M, config.N
    H = _cn(rng, (R, M))
    g = _cn(rng, R)
    Hhat = _cn(rng, (N, R))
    ghat = _cn(rng, R)
    return ChannelSet(H=H, g=g, Hhat=Hhat, ghat=ghat)


def _split(a: np.ndarray) -> tuple[list, list]:
    return np.real(a).tolist(), np.imag(a).tolist()


def scenario_to_dict(config: ScenarioConfig, channels: ChannelSet) -> dict:
    channels.check(config)
    ch = {}
    for f in fields(channels):
        re, im = _split(getattr(channels, f.name))
        ch[f"{f.name}_re"] = re
        ch[f"{f.name}_im"] = im
    return {"schema_version": SCHEMA_VERSION, "config": asdict(config), "channels": ch}


def scenario_from_dict(doc: dict) -> tuple[ScenarioConfig, ChannelSet]:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    try:
        config = ScenarioConfig(**doc["config"])
        raw = doc["channels"]
        arrays = {}
        for f in fields(ChannelSet):
            re = np.asarray(raw[f"{f.name}_re"], dtype=float)
            im = np.asarray(raw[f"{f.name}_im"], dtype=float)
            if re.shape != im.shape:
                raise ScenarioError(f"{f.name}: real and imaginary parts differ in shape")
            arrays[f.name] = re + 1j * im
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
    channels = ChannelSet(**arrays)
    channels.check(config)
    return config, channels


def save_scenario(config: ScenarioConfig, channels: ChannelSet, path) -> None:
    """Write a scenario as JSON.

    Floats are written with ``repr`` precision, so reading back is exact.
    The file is written to a temporary sibling and renamed into place.
    """
    doc = scenario_to_dict(config, channels)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def load_scenario(path) -> tuple[ScenarioConfig, ChannelSet]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(doc)
