"""Problem instances: radio formulas, Zipf catalogs, topology generation and
candidate transmissions (communication tuples)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

PRIMARY_CHANNEL = 0
BITS_PER_BYTE = 8


class ScenarioError(ValueError):
    """Raised for malformed configurations or scenarios."""


class NodeKind(str, Enum):
    MBS = "mbs"
    SBS = "sbs"
    USER = "user"


# -- radio formulas ---------------------------------------------------------

def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value!r}")


def transmission_range(power: float, threshold: float, gain: float, path_loss: float) -> float:
    """Distance at which received power drops to ``threshold``: (g P / P_T)^(1/gamma)."""
    _require_positive(power=power, threshold=threshold, gain=gain, path_loss=path_loss)
    return (gain * power / threshold) ** (1.0 / path_loss)


def interference_range(power: float, threshold: float, gain: float, path_loss: float) -> float:
    """Same law as :func:`transmission_range`, evaluated at the interference threshold."""
    return transmission_range(power, threshold, gain, path_loss)


def power_for_range(range_m: float, threshold: float, gain: float, path_loss: float) -> float:
    """Inverse of :func:`transmission_range`."""
    _require_positive(range_m=range_m, threshold=threshold, gain=gain, path_loss=path_loss)
    return threshold * range_m ** path_loss / gain


def link_capacity(bandwidth_hz: float, distance_m: float, power: float,
                  gain: float, path_loss: float, noise: float) -> float:
    """Shannon capacity in bit/s under the SNR of a single, interference-free link."""
    _require_positive(bandwidth_hz=bandwidth_hz, distance_m=distance_m, noise=noise,
                      path_loss=path_loss)
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power!r}")
    snr = gain * distance_m ** (-path_loss) * power / noise
    return bandwidth_hz * math.log2(1.0 + snr)


def zipf_distribution(zeta: float, n_files: int) -> np.ndarray:
    """Popularity of ranks 1..n_files, normalised to sum to one."""
    if n_files < 1:
        raise ValueError("n_files must be >= 1")
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    weights = 1.0 / np.arange(1, n_files + 1, dtype=float) ** zeta
    return weights / weights.sum()


def zipf_popularity(rank: int, zeta: float, n_files: int) -> float:
    if not 1 <= rank <= n_files:
        raise ValueError(f"rank {rank} outside 1..{n_files}")
    return float(zipf_distribution(zeta, n_files)[rank - 1])


# -- domain types -----------------------------------------------------------

@dataclass(frozen=True)
class RadioConstants:
    gain: float = 1.0
    path_loss: float = 3.0
    noise_w: float = 1e-13
    # per-channel thresholds, indexed by channel id
    rx_threshold_w: tuple[float, ...] = ()
    interference_threshold_w: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.path_loss <= 0 or self.noise_w <= 0 or self.gain <= 0:
            raise ScenarioError("gain, path_loss and noise must be positive")
        if len(self.rx_threshold_w) != len(self.interference_threshold_w):
            raise ScenarioError("threshold tuples must cover the same channels")
        for p_t, p_i in zip(self.rx_threshold_w, self.interference_threshold_w):
            if not 0 < p_i <= p_t:
                raise ScenarioError("need 0 < P_I <= P_T on every channel")


@dataclass(frozen=True)
class Channel:
    id: int
    bandwidth_hz: float

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ScenarioError(f"channel {self.id} bandwidth must be positive")


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind
    x: float
    y: float
    channels: frozenset[int]
    antennas: int = 1
    cache_bits: float = 0.0
    tx_power_w: float = 0.0

    def __post_init__(self) -> None:
        if self.antennas < 1:
            raise ScenarioError(f"{self.name}: antennas must be >= 1")
        if self.kind is NodeKind.USER and self.cache_bits:
            raise ScenarioError(f"{self.name}: users have no cache")
        if self.kind is not NodeKind.MBS and PRIMARY_CHANNEL in self.channels:
            raise ScenarioError(f"{self.name}: channel 0 is reserved for the MBS")

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class FileCatalog:
    sizes_bits: tuple[float, ...]
    popularity: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.sizes_bits) != len(self.popularity):
            raise ScenarioError("sizes and popularity must have equal length")
        if any(s <= 0 for s in self.sizes_bits):
            raise ScenarioError("file sizes must be positive")
        if self.popularity and abs(sum(self.popularity) - 1.0) > 1e-9:
            raise ScenarioError("popularity must sum to one")

    def __len__(self) -> int:
        return len(self.sizes_bits)


@dataclass(frozen=True)
class CommTuple:
    """Candidate transmission ((tx, rx), channel) with its capacity in bit/s."""
    tx: int
    rx: int
    channel: int
    capacity: float
    distance: float


@dataclass(frozen=True, eq=False)
class Scenario:
    """A full problem instance.

    ``transmitters`` holds the MBS first (when present) followed by the SBSs;
    ``requests`` is the (users x files) matrix of requests per slot.
    """
    transmitters: tuple[Node, ...]
    users: tuple[Node, ...]
    channels: tuple[Channel, ...]
    catalog: FileCatalog
    requests: np.ndarray
    radio: RadioConstants
    radius_m: float
    slot_s: float = 1.0
    seed: int | None = None

    def __post_init__(self) -> None:
        ids = [c.id for c in self.channels]
        if ids != list(range(len(ids))):
            raise ScenarioError("channel ids must be 0..C-1 in order")
        if len(self.radio.rx_threshold_w) != len(self.channels):
            raise ScenarioError("radio thresholds must be given for every channel")
        req = np.array(self.requests, dtype=float)
        if req.shape != (len(self.users), len(self.catalog)):
            raise ScenarioError(f"requests shape {req.shape} does not match users x files")
        if (req < 0).any():
            raise ScenarioError("request rates must be nonnegative")
        req.setflags(write=False)
        object.__setattr__(self, "requests", req)
        mbs = [i for i, n in enumerate(self.transmitters) if n.kind is NodeKind.MBS]
        if mbs not in ([], [0]):
            raise ScenarioError("at most one MBS, listed first")
        if any(n.kind is NodeKind.USER for n in self.transmitters):
            raise ScenarioError("users cannot transmit")
        if any(n.kind is not NodeKind.USER for n in self.users):
            raise ScenarioError("receivers must be users")
        for u in self.users:
            for t in self.transmitters:
                if u.position == t.position:
                    raise ScenarioError(f"{u.name} is colocated with {t.name}")

    # -- accessors --

    @property
    def mbs(self) -> int | None:
        if self.transmitters and self.transmitters[0].kind is NodeKind.MBS:
            return 0
        return None

    @property
    def sbs(self) -> list[int]:
        return [i for i, n in enumerate(self.transmitters) if n.kind is NodeKind.SBS]

    @property
    def n_files(self) -> int:
        return len(self.catalog)

    def distance(self, tx: int, rx: int) -> float:
        a, b = self.transmitters[tx], self.users[rx]
        return math.hypot(a.x - b.x, a.y - b.y)

    def tx_range(self, tx: int, channel: int) -> float:
        node = self.transmitters[tx]
        return transmission_range(node.tx_power_w, self.radio.rx_threshold_w[channel],
                                  self.radio.gain, self.radio.path_loss)

    def interference_range(self, tx: int, channel: int) -> float:
        node = self.transmitters[tx]
        return interference_range(node.tx_power_w, self.radio.interference_threshold_w[channel],
                                  self.radio.gain, self.radio.path_loss)

    def receives(self, rx: int, channel: int) -> bool:
        # every user listens on the MBS primary channel
        return channel == PRIMARY_CHANNEL or channel in self.users[rx].channels

    def demand_bits(self) -> float:
        """Total requested bits per slot."""
        return float((self.requests @ np.asarray(self.catalog.sizes_bits)).sum())

    def with_requests(self, requests: np.ndarray) -> "Scenario":
        return replace(self, requests=np.array(requests, dtype=float))

    # -- serialization --

    def to_dict(self) -> dict:
        def node(n: Node) -> dict:
            d = asdict(n)
            d["kind"] = n.kind.value
            d["channels"] = sorted(n.channels)
            return d

        return {
            "transmitters": [node(n) for n in self.transmitters],
            "users": [node(n) for n in self.users],
            "channels": [asdict(c) for c in self.channels],
            "catalog": {"sizes_bits": list(self.catalog.sizes_bits),
                        "popularity": list(self.catalog.popularity)},
            "requests": self.requests.tolist(),
            "radio": asdict(self.radio),
            "radius_m": self.radius_m,
            "slot_s": self.slot_s,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        def node(nd: dict) -> Node:
            return Node(**{**nd, "kind": NodeKind(nd["kind"]), "channels": frozenset(nd["channels"])})

        radio = d["radio"]
        return cls(
            transmitters=tuple(node(n) for n in d["transmitters"]),
            users=tuple(node(n) for n in d["users"]),
            channels=tuple(Channel(**c) for c in d["channels"]),
            catalog=FileCatalog(tuple(d["catalog"]["sizes_bits"]), tuple(d["catalog"]["popularity"])),
            requests=np.array(d["requests"], dtype=float).reshape(len(d["users"]), -1),
            radio=RadioConstants(
                gain=radio["gain"], path_loss=radio["path_loss"], noise_w=radio["noise_w"],
                rx_threshold_w=tuple(radio["rx_threshold_w"]),
                interference_threshold_w=tuple(radio["interference_threshold_w"])),
            radius_m=d["radius_m"],
            slot_s=d.get("slot_s", 1.0),
            seed=d.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


# -- configuration & generation ----------------------------------------------

@dataclass
class ScenarioConfig:
    """Generation parameters. Defaults follow the paper's simulation table."""
    radius_m: float = 400.0
    n_sbs: int = 14
    n_users: int = 200
    n_files: int = 200
    cache_bytes: float | list[float] = 4e9
    cache_spread: float = 0.0
    zipf_zeta: float = 0.8
    n_secondary_channels: int = 10
    secondary_bw_hz: float = 400e3
    primary_bw_hz: float = 1e6
    channels_per_sbs: int = 5
    channels_per_user: int = 5
    avg_file_bytes: float = 400e6
    file_size_spread: float = 0.0
    tx_range_m: float = 100.0
    ir_factor: float = 2.0
    antennas_mbs: int = 1
    antennas_sbs: int = 1
    antennas_user: int = 1
    requests_per_user: int = 1
    request_rate: float = 1.0
    gain: float = 1.0
    path_loss: float = 3.0
    noise_w: float = 1e-13
    rx_threshold_w: float = 1e-10
    slot_s: float = 1.0
    # solver settings travel with the config file
    epsilon: float = 0.03
    seed: int = 0
    objective: str = "min_schedule"
    pricer: str = "sequential_fixing"

    def validate(self) -> None:
        if self.n_users < 1:
            raise ScenarioError("config needs at least one user")
        if self.n_secondary_channels < 0 or self.primary_bw_hz <= 0:
            raise ScenarioError("config needs a primary channel")
        if self.n_sbs < 0 or self.n_files < 1:
            raise ScenarioError("n_sbs must be >= 0 and n_files >= 1")
        for name in ("radius_m", "secondary_bw_hz", "avg_file_bytes", "tx_range_m",
                     "request_rate", "slot_s"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"{name} must be positive")
        if self.ir_factor < 1:
            raise ScenarioError("ir_factor must be >= 1 (interference range >= transmission range)")
        if self.n_sbs and self.n_secondary_channels < 1:
            raise ScenarioError("SBSs need at least one secondary channel")
        if not 0 <= self.channels_per_sbs <= self.n_secondary_channels:
            raise ScenarioError("channels_per_sbs exceeds the secondary channel count")
        if not 0 <= self.channels_per_user <= self.n_secondary_channels:
            raise ScenarioError("channels_per_user exceeds the secondary channel count")
        if not 0 <= self.cache_spread < 1 or not 0 <= self.file_size_spread < 1:
            raise ScenarioError("spreads must lie in [0, 1)")
        if isinstance(self.cache_bytes, (list, tuple)):
            if len(self.cache_bytes) != self.n_sbs:
                raise ScenarioError("per-SBS cache list must have n_sbs entries")
            if any(c < 0 for c in self.cache_bytes):
                raise ScenarioError("cache sizes must be nonnegative")
        elif self.cache_bytes < 0:
            raise ScenarioError("cache size must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ScenarioError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


# independent RNG streams so that adding SBSs/users leaves the others untouched
_STREAM_SBS, _STREAM_USER, _STREAM_FILES = 1, 2, 3


def _rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, stream, index])


def _point_in_disc(rng: np.random.Generator, radius: float) -> tuple[float, float]:
    r = radius * math.sqrt(rng.random())
    theta = 2.0 * math.pi * rng.random()
    return (r * math.cos(theta), r * math.sin(theta))


def _pick_channels(rng: np.random.Generator, n_secondary: int, k: int) -> frozenset[int]:
    if k == 0:
        return frozenset()
    return frozenset(int(c) for c in rng.choice(np.arange(1, n_secondary + 1), size=k, replace=False))


def _cache_sizes_bits(cfg: ScenarioConfig, seed: int) -> list[float]:
    if isinstance(cfg.cache_bytes, (list, tuple)):
        return [float(c) * BITS_PER_BYTE for c in cfg.cache_bytes]
    mean = float(cfg.cache_bytes) * BITS_PER_BYTE
    if cfg.cache_spread == 0 or cfg.n_sbs == 0:
        return [mean] * cfg.n_sbs
    # uniform +-spread around the mean, rescaled so the mean is preserved exactly
    factors = np.array([1.0 + cfg.cache_spread * (2.0 * _rng(seed, _STREAM_SBS, i).random() - 1.0)
                        for i in range(cfg.n_sbs)])
    factors *= cfg.n_sbs / factors.sum()
    return [mean * f for f in factors]


def generate_scenario(cfg: ScenarioConfig, seed: int | None = None) -> Scenario:
    """Draw a random instance; a pure function of ``(cfg, seed)``.

    Every SBS and user has its own RNG stream, so growing ``n_sbs`` or
    ``n_users`` keeps the previously drawn nodes in place.
    """
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    n_channels = cfg.n_secondary_channels + 1
    p_t = cfg.rx_threshold_w
    p_i = p_t / cfg.ir_factor ** cfg.path_loss
    radio = RadioConstants(cfg.gain, cfg.path_loss, cfg.noise_w,
                           rx_threshold_w=(p_t,) * n_channels,
                           interference_threshold_w=(p_i,) * n_channels)
    channels = (Channel(PRIMARY_CHANNEL, cfg.primary_bw_hz),) + tuple(
        Channel(c, cfg.secondary_bw_hz) for c in range(1, n_channels))

    # MBS reaches the whole cell: TR = 2 * radius, so its IR >= TR also covers it
    mbs = Node("MBS", NodeKind.MBS, 0.0, 0.0, frozenset(range(n_channels)),
               antennas=cfg.antennas_mbs,
               tx_power_w=power_for_range(2.0 * cfg.radius_m, p_t, cfg.gain, cfg.path_loss))
    sbs_power = power_for_range(cfg.tx_range_m, p_t, cfg.gain, cfg.path_loss)
    caches = _cache_sizes_bits(cfg, seed)
    transmitters = [mbs]
    for i in range(cfg.n_sbs):
        rng = _rng(seed, _STREAM_SBS, i + 1)
        x, y = _point_in_disc(rng, cfg.radius_m)
        transmitters.append(Node(f"SBS{i + 1}", NodeKind.SBS, x, y,
                                 _pick_channels(rng, cfg.n_secondary_channels, cfg.channels_per_sbs),
                                 antennas=cfg.antennas_sbs, cache_bits=caches[i],
                                 tx_power_w=sbs_power))

    popularity = zipf_distribution(cfg.zipf_zeta, cfg.n_files)
    cdf = np.cumsum(popularity)
    frng = _rng(seed, _STREAM_FILES)
    if cfg.file_size_spread:
        factors = 1.0 + cfg.file_size_spread * (2.0 * frng.random(cfg.n_files) - 1.0)
        factors *= cfg.n_files / factors.sum()
    else:
        factors = np.ones(cfg.n_files)
    sizes = tuple(float(cfg.avg_file_bytes * BITS_PER_BYTE * f) for f in factors)

    users = []
    requests = np.zeros((cfg.n_users, cfg.n_files))
    for k in range(cfg.n_users):
        rng = _rng(seed, _STREAM_USER, k)
        while True:
            x, y = _point_in_disc(rng, cfg.radius_m)
            if all(math.hypot(x - t.x, y - t.y) > 1e-6 for t in transmitters):
                break
        chans = _pick_channels(rng, cfg.n_secondary_channels, cfg.channels_per_user)
        for _ in range(cfg.requests_per_user):
            j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            requests[k, min(j, cfg.n_files - 1)] += cfg.request_rate
        users.append(Node(f"U{k + 1}", NodeKind.USER, x, y, chans, antennas=cfg.antennas_user))

    return Scenario(tuple(transmitters), tuple(users), channels,
                    FileCatalog(sizes, tuple(float(p) for p in popularity)),
                    requests, radio, cfg.radius_m, cfg.slot_s, seed)


def enumerate_tuples(scenario: Scenario) -> list[CommTuple]:
    """All single-hop candidate links, ordered by (transmitter, user, channel)."""
    out = []
    radio = scenario.radio
    for n, node in enumerate(scenario.transmitters):
        for k in range(len(scenario.users)):
            d = scenario.distance(n, k)
            for c in sorted(node.channels):
                if not scenario.receives(k, c) or d > scenario.tx_range(n, c):
                    continue
                cap = link_capacity(scenario.channels[c].bandwidth_hz, d, node.tx_power_w,
                                    radio.gain, radio.path_loss, radio.noise_w)
                out.append(CommTuple(n, k, c, cap, d))
    return out


def manual_scenario(transmitters: Sequence[Node], users: Sequence[Node],
                    bandwidths_hz: Iterable[float], requests, file_sizes_bits: Sequence[float],
                    *, gain: float = 1.0, path_loss: float = 3.0, noise_w: float = 1e-13,
                    rx_threshold_w: float = 1e-10, ir_factor: float = 2.0,
                    radius_m: float = 1000.0, slot_s: float = 1.0) -> Scenario:
    """Hand-built instance with uniform thresholds (tests, examples)."""
    bws = list(bandwidths_hz)
    p_i = rx_threshold_w / ir_factor ** path_loss
    radio = RadioConstants(gain, path_loss, noise_w, (rx_threshold_w,) * len(bws), (p_i,) * len(bws))
    n_files = len(file_sizes_bits)
    return Scenario(tuple(transmitters), tuple(users),
                    tuple(Channel(i, bw) for i, bw in enumerate(bws)),
                    FileCatalog(tuple(float(s) for s in file_sizes_bits),
                                tuple(float(p) for p in zipf_distribution(0.0, n_files))),
                    np.array(requests, dtype=float).reshape(len(users), n_files),
                    radio, radius_m, slot_s)


__all__ = [
    "PRIMARY_CHANNEL", "Channel", "CommTuple", "FileCatalog", "Node", "NodeKind", "RadioConstants",
    "Scenario", "ScenarioConfig", "ScenarioError", "enumerate_tuples", "generate_scenario",
    "interference_range", "link_capacity", "manual_scenario", "power_for_range",
    "transmission_range", "zipf_distribution", "zipf_popularity",
]
