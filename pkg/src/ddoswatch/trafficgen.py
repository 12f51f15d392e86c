"""Seedable synthesis of labeled traces: background traffic plus botnet floods.

Traces are generated lazily, one second at a time, as columnar
PacketBatch blocks. Every second draws from its own generator derived from
``(seed, stream, second)``, so any second can be regenerated on demand and
a multi-million-packet scenario never has to sit in memory.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from ipaddress import IPv4Address
from typing import Iterator, Optional, Sequence

import numpy as np

from .ingest import (MIN_SIZE, TCP_ACK, TCP_FIN, TCP_PSH, TCP_SYN, IntervalAggregate, PacketBatch,
                     PacketMeta, Protocol, count_batch)

US = 1_000_000


class InvalidProfile(ValueError):
    pass


class InvalidSpec(ValueError):
    pass


class OverlapError(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


def _rng(seed, *stream) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *stream])


def _pair(value) -> tuple:
    if isinstance(value, (int, float)):
        return (value, value)
    lo, hi = value
    return (lo, hi)


def _ip(text: str) -> int:
    return int(IPv4Address(text))


@dataclass(frozen=True)
class BaselineProfile:
    """Background traffic model.

    Pair shares follow a Zipf-like law ``rank ** -heavy_tail_exponent`` with
    per-second lognormal jitter, and the total rate follows a slow AR(1)
    walk in log space. Two kinds of benign episodes perturb it: short
    multi-connection bursts (one host opening many connections at
    ``burst_rate``) and dominant-flow episodes in which one bulk transfer
    takes a share of the traffic without raising the total rate.
    """

    mean_rate: float = 500.0
    pair_pool_size: int = 300
    burst_rate: float = 5000.0
    burst_probability: float = 0.003
    burst_duration: tuple = (1, 5)
    heavy_tail_exponent: float = 0.6
    share_jitter: float = 0.5
    rate_jitter: float = 0.03
    rate_memory: float = 0.98
    burst_connections: tuple = (10, 50)
    dominant_probability: float = 0.006
    dominant_duration: tuple = (10, 20)
    dominant_share: tuple = (0.25, 0.40)
    tcp_share: float = 0.80
    udp_share: float = 0.15
    syn_share: float = 0.02
    synack_share: float = 0.02
    hosts: int = 320
    external_hosts: int = 200

    def __post_init__(self):
        for name in ("burst_duration", "burst_connections", "dominant_duration", "dominant_share"):
            object.__setattr__(self, name, tuple(_pair(getattr(self, name))))
        if self.mean_rate < 1 or self.pair_pool_size < 1:
            raise InvalidProfile("mean_rate and pair_pool_size must be >= 1")
        for name in ("burst_probability", "dominant_probability", "tcp_share", "udp_share"):
            if not 0 <= getattr(self, name) <= 1:
                raise InvalidProfile(f"{name} must lie in [0, 1]")
        if self.tcp_share + self.udp_share > 1:
            raise InvalidProfile("tcp_share + udp_share must not exceed 1")
        if self.syn_share + self.synack_share > self.tcp_share:
            raise InvalidProfile("SYN shares exceed tcp_share")
        if self.burst_rate < 0 or self.heavy_tail_exponent < 0 or self.share_jitter < 0:
            raise InvalidProfile("rates, exponents and jitter must be non-negative")
        if not 0 <= self.rate_memory < 1:
            raise InvalidProfile("rate_memory must lie in [0, 1)")
        lo, hi = self.burst_duration
        if not 1 <= lo <= hi:
            raise InvalidProfile("burst_duration must be 1 <= min <= max")
        lo, hi = self.dominant_duration
        if not 1 <= lo <= hi:
            raise InvalidProfile("dominant_duration must be 1 <= min <= max")
        lo, hi = self.dominant_share
        if not 0 <= lo <= hi < 1:
            raise InvalidProfile("dominant_share must satisfy 0 <= min <= max < 1")
        lo, hi = self.burst_connections
        if not 1 <= lo <= hi:
            raise InvalidProfile("burst_connections must be 1 <= min <= max")
        if self.hosts < 2 or self.external_hosts < 1:
            raise InvalidProfile("need at least two hosts and one external host")
        max_pairs = (self.hosts + self.external_hosts) * (self.hosts + self.external_hosts - 1)
        if self.pair_pool_size > max_pairs:
            raise InvalidProfile("pair_pool_size exceeds the number of distinct host pairs")

    @classmethod
    def from_dict(cls, data) -> "BaselineProfile":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidProfile(f"unknown baseline fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidProfile(str(exc)) from None


def internal_host(i: int) -> int:
    return _ip("10.1.0.0") + (i // 250) * 256 + i % 250 + 1


def external_host(i: int) -> int:
    return _ip("100.64.0.0") + (i // 250) * 256 + i % 250 + 1


def bot_host(i: int) -> int:
    return _ip("10.50.0.0") + (i // 250) * 256 + i % 250 + 1


class BaselineTrace:
    """Lazily generated background traffic over ``[0, duration)``."""

    def __init__(self, profile: BaselineProfile, duration: int, seed: int):
        if int(duration) != duration or duration < 1:
            raise InvalidProfile("duration must be a positive whole number of seconds")
        self.profile = p = profile
        self.duration = int(duration)
        self.seed = int(seed)
        rng = _rng(seed, 1)

        hosts = np.array([internal_host(i) for i in range(p.hosts)]
                         + [external_host(i) for i in range(p.external_hosts)], dtype=np.uint32)
        self.hosts = hosts
        picked: set = set()
        pairs = []
        while len(pairs) < p.pair_pool_size:
            s, d = rng.integers(0, len(hosts), 2)
            if s != d and (s, d) not in picked:
                picked.add((s, d))
                pairs.append((s, d))
        pairs = np.array(pairs)
        self.pair_src = hosts[pairs[:, 0]]
        self.pair_dst = hosts[pairs[:, 1]]
        shares = (np.arange(p.pair_pool_size) + 1.0) ** -p.heavy_tail_exponent
        self.shares = rng.permutation(shares / shares.sum())

        n = self.duration
        # log-rate AR(1), stationary start
        eps = rng.normal(0.0, p.rate_jitter, n)
        logm = np.empty(n)
        sd = p.rate_jitter / np.sqrt(1 - p.rate_memory ** 2) if p.rate_jitter else 0.0
        prev = rng.normal(0.0, sd) if sd else 0.0
        for t in range(n):
            prev = p.rate_memory * prev + eps[t]
            logm[t] = prev
        self.rate = p.mean_rate * np.exp(logm - sd ** 2 / 2)
        self.counts = rng.poisson(self.rate)

        # Burst episodes: (start, length, host index, connection count), non-overlapping.
        self.bursts = []
        self.burst_counts = np.zeros(n, dtype=np.int64)
        t = 0
        starts = rng.random(n) < p.burst_probability
        while t < n:
            if starts[t]:
                length = int(rng.integers(p.burst_duration[0], p.burst_duration[1] + 1))
                length = min(length, n - t)
                host = int(rng.integers(0, p.hosts))
                conns = int(rng.integers(p.burst_connections[0], p.burst_connections[1] + 1))
                self.bursts.append((t, length, host, conns))
                self.burst_counts[t:t + length] = rng.poisson(p.burst_rate, length)
                t += length
            else:
                t += 1

        # Dominant-flow episodes: (start, length, pair index, share).
        self.dominant = []
        self.dominant_share = np.zeros(n)
        self.dominant_pair = np.full(n, -1, dtype=np.int64)
        starts = rng.random(n) < p.dominant_probability
        t = 0
        while t < n:
            if starts[t]:
                length = int(rng.integers(p.dominant_duration[0], p.dominant_duration[1] + 1))
                length = min(length, n - t)
                pair = int(rng.integers(0, p.pair_pool_size))
                share = float(rng.uniform(*p.dominant_share))
                self.dominant.append((t, length, pair, share))
                self.dominant_share[t:t + length] = share
                self.dominant_pair[t:t + length] = pair
                t += length
            else:
                t += 1

    @property
    def packet_count(self) -> int:
        return int(self.counts.sum() + self.burst_counts.sum())

    def per_second_counts(self) -> np.ndarray:
        return self.counts + self.burst_counts

    def chunk(self, t: int) -> PacketBatch:
        p = self.profile
        rng = _rng(self.seed, 2, t)
        n = int(self.counts[t])
        shares = self.shares * rng.lognormal(0.0, p.share_jitter, len(self.shares)) if p.share_jitter \
            else self.shares
        shares = shares / shares.sum()
        n_dom = 0
        if self.dominant_pair[t] >= 0:
            n_dom = int(round(n * self.dominant_share[t]))
        per_pair = rng.multinomial(n - n_dom, shares)
        if n_dom:
            per_pair[self.dominant_pair[t]] += n_dom
        idx = np.repeat(np.arange(len(shares)), per_pair)
        src = self.pair_src[idx]
        dst = self.pair_dst[idx]
        proto, flags, size = self._headers(rng, len(idx))

        b = int(self.burst_counts[t])
        if b:
            start, _length, host, conns = next(x for x in self.bursts if x[0] <= t < x[0] + x[1])
            ext = _rng(self.seed, 3, start).integers(0, self.profile.external_hosts, conns)
            conn = rng.integers(0, conns, b)
            bsrc = np.full(b, internal_host(host), dtype=np.uint32)
            bdst = np.array([external_host(int(e)) for e in ext], dtype=np.uint32)[conn]
            bproto = np.full(b, int(Protocol.TCP), dtype=np.uint8)
            bflags = np.full(b, TCP_ACK | TCP_PSH, dtype=np.uint8)
            if t == start:
                # one connection-opening SYN per connection in the first second
                bflags[:min(conns, b)] = TCP_SYN
            bsize = rng.integers(60, 1515, b).astype(np.uint16)
            src = np.concatenate([src, bsrc])
            dst = np.concatenate([dst, bdst])
            proto = np.concatenate([proto, bproto])
            flags = np.concatenate([flags, bflags])
            size = np.concatenate([size, bsize])

        m = len(src)
        ts = t * US + rng.integers(0, US, m)
        return PacketBatch(ts.astype(np.int64), src.astype(np.uint32), dst.astype(np.uint32),
                           proto, flags, size)

    def _headers(self, rng, n):
        p = self.profile
        u = rng.random(n)
        proto = np.full(n, int(Protocol.ICMP), dtype=np.uint8)
        proto[u < p.tcp_share + p.udp_share] = int(Protocol.UDP)
        tcp = u < p.tcp_share
        proto[tcp] = int(Protocol.TCP)
        flags = np.zeros(n, dtype=np.uint8)
        v = rng.random(n)
        tcp_flags = np.where(v < 0.85, TCP_ACK | TCP_PSH, TCP_ACK)
        tcp_flags = np.where(v > 0.97, TCP_FIN | TCP_ACK, tcp_flags)
        flags[tcp] = tcp_flags[tcp]
        flags[u < p.syn_share] = TCP_SYN
        flags[(u >= p.syn_share) & (u < p.syn_share + p.synack_share)] = TCP_SYN | TCP_ACK
        size = rng.integers(60, 1515, n)
        size[rng.random(n) < 0.4] = 60
        size[proto == Protocol.UDP] = rng.integers(60, 1201, n)[proto == Protocol.UDP]
        size[proto == Protocol.ICMP] = rng.integers(70, 99, n)[proto == Protocol.ICMP]
        small = (proto == Protocol.TCP) & (flags & TCP_SYN != 0)
        size[small] = 60
        return proto, flags, size.astype(np.uint16)


def gen_baseline(profile: BaselineProfile, duration: int, seed: int) -> BaselineTrace:
    return BaselineTrace(profile, duration, seed)


class AttackKind(Enum):
    ICMP_FLOOD = "ICMP_FLOOD"
    SYN_FLOOD = "SYN_FLOOD"


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind
    attackers: tuple
    per_attacker_rate: int
    packet_size: int
    start: int
    duration: int
    max_start_delay: float = 10.0
    target: str = "10.2.0.1"
    churn: bool = False
    churn_period: int = 60
    spoof: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", AttackKind(self.kind))
        except ValueError:
            raise InvalidSpec(f"unknown attack kind {self.kind!r}") from None
        lo, hi = _pair(self.attackers)
        object.__setattr__(self, "attackers", (int(lo), int(hi)))
        if not 1 <= lo <= hi:
            raise InvalidSpec("attackers must satisfy 1 <= min <= max")
        if self.per_attacker_rate <= 0 or int(self.per_attacker_rate) != self.per_attacker_rate:
            raise InvalidSpec("per_attacker_rate must be a positive integer")
        if self.duration <= 0 or int(self.duration) != self.duration or int(self.start) != self.start:
            raise InvalidSpec("start/duration must be whole seconds, duration > 0")
        if self.max_start_delay < 0 or self.max_start_delay >= self.duration:
            raise InvalidSpec("max_start_delay must lie in [0, duration)")
        if self.churn_period < 1:
            raise InvalidSpec("churn_period must be >= 1")
        proto = Protocol.ICMP if self.kind is AttackKind.ICMP_FLOOD else Protocol.TCP
        if self.packet_size < MIN_SIZE[proto]:
            raise InvalidSpec("packet_size below the protocol minimum")
        try:
            IPv4Address(self.target)
        except ValueError:
            raise InvalidSpec(f"bad target {self.target!r}") from None

    @property
    def end(self) -> int:
        return int(self.start + self.duration)

    @classmethod
    def from_dict(cls, data) -> "AttackSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidSpec(f"unknown attack fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["attackers"] = list(self.attackers)
        return d


class AttackFragment:
    """Packets of one botnet attack plus its per-second activity labels.

    Each bot emits an evenly spaced packet train starting at
    ``start + delay``; with integer microsecond spacing every whole second
    of activity holds exactly ``per_attacker_rate`` packets.
    """

    def __init__(self, spec: AttackSpec, seed: int, bot_offset: int = 0):
        self.spec = spec
        self.seed = int(seed)
        rng = _rng(seed, 10)
        lo, hi = spec.attackers
        self.n_pool = hi if spec.churn else int(rng.integers(lo, hi + 1))
        self.bots = np.array([bot_host(bot_offset + i) for i in range(self.n_pool)], dtype=np.uint32)
        delay_us = rng.uniform(0.0, spec.max_start_delay, self.n_pool) * US
        self.onset_us = spec.start * US + delay_us.astype(np.int64)
        n_sec = spec.duration
        # active[i, s] for second start+s
        self.active = np.ones((self.n_pool, n_sec), dtype=bool)
        if spec.churn:
            for p0 in range(0, n_sec, spec.churn_period):
                k = int(rng.integers(lo, hi + 1))
                members = np.zeros(self.n_pool, dtype=bool)
                members[rng.choice(self.n_pool, k, replace=False)] = True
                self.active[:, p0:p0 + spec.churn_period] = members[:, None]
        self.attackers_per_second = np.zeros(n_sec, dtype=np.int64)
        self.counts = np.zeros(n_sec, dtype=np.int64)
        for s in range(n_sec):
            for i in np.flatnonzero(self.active[:, s]):
                c = self._bounds(i, spec.start + s)
                if c[1] > c[0]:
                    self.attackers_per_second[s] += 1
                    self.counts[s] += c[1] - c[0]

    def _bounds(self, i: int, t: int) -> tuple:
        r = self.spec.per_attacker_rate
        onset = int(self.onset_us[i])
        lo_d = t * US - onset
        hi_d = min((t + 1) * US, self.spec.end * US) - onset
        j_lo = 0 if lo_d <= 0 else -(-lo_d * r // US)
        j_hi = 0 if hi_d <= 0 else -(-hi_d * r // US)
        return j_lo, j_hi

    @property
    def packet_count(self) -> int:
        return int(self.counts.sum())

    def labels(self) -> np.ndarray:
        """Per-second activity over ``[spec.start, spec.end)``."""
        return self.counts > 0

    def chunk(self, t: int) -> PacketBatch:
        spec = self.spec
        s = t - spec.start
        if not 0 <= s < spec.duration or not self.counts[s]:
            return PacketBatch.empty()
        r = spec.per_attacker_rate
        ts, src = [], []
        for i in np.flatnonzero(self.active[:, s]):
            j_lo, j_hi = self._bounds(i, t)
            if j_hi <= j_lo:
                continue
            j = np.arange(j_lo, j_hi, dtype=np.int64)
            ts.append(self.onset_us[i] + j * US // r)
            src.append(np.full(len(j), self.bots[i], dtype=np.uint32))
        ts = np.concatenate(ts)
        src = np.concatenate(src)
        n = len(ts)
        if spec.spoof:
            src = _rng(self.seed, 11, t).integers(1 << 24, 0xDF000000, n, dtype=np.uint32)
        if spec.kind is AttackKind.ICMP_FLOOD:
            proto, flags = int(Protocol.ICMP), 0
        else:
            proto, flags = int(Protocol.TCP), TCP_SYN
        return PacketBatch(ts, src, np.full(n, _ip(spec.target), dtype=np.uint32),
                           np.full(n, proto, dtype=np.uint8), np.full(n, flags, dtype=np.uint8),
                           np.full(n, spec.packet_size, dtype=np.uint16))


def gen_attack(spec: AttackSpec, seed: int, bot_offset: int = 0) -> AttackFragment:
    return AttackFragment(spec, seed, bot_offset)


class LabeledTrace:
    """Baseline plus attacks over ``[0, duration)`` with a per-second reference."""

    def __init__(self, baseline: BaselineTrace, fragments: Sequence[AttackFragment]):
        self.baseline = baseline
        self.fragments = list(fragments)
        self.duration = baseline.duration
        self.reference = np.zeros(self.duration, dtype=bool)
        for f in self.fragments:
            self.reference[f.spec.start:f.spec.end] |= f.labels()

    @property
    def attacks(self) -> list[AttackSpec]:
        return [f.spec for f in self.fragments]

    @property
    def packet_count(self) -> int:
        return self.baseline.packet_count + sum(f.packet_count for f in self.fragments)

    def segments(self) -> list[tuple]:
        """Attack segments as half-open (first_second, end_second) runs."""
        return runs(self.reference)

    def chunk(self, t: int, sort: bool = True) -> PacketBatch:
        parts = [self.baseline.chunk(t)]
        parts += [f.chunk(t) for f in self.fragments if f.spec.start <= t < f.spec.end]
        batch = PacketBatch.concat(parts)
        return batch.sorted() if sort else batch

    def chunks(self) -> Iterator[PacketBatch]:
        for t in range(self.duration):
            yield self.chunk(t)

    def aggregates(self) -> Iterator[IntervalAggregate]:
        for t in range(self.duration):
            yield count_batch(t, self.chunk(t, sort=False))

    def packets(self) -> Iterator[PacketMeta]:
        for batch in self.chunks():
            yield from batch.packets()

    def write(self, path) -> int:
        n = 0
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# timestamp,src,dst,protocol,tcp_flags_hex,size\n")
            for batch in self.chunks():
                lines = batch.lines()
                if lines:
                    fh.write("\n".join(lines))
                    fh.write("\n")
                n += len(lines)
        return n

    def write_labels(self, path) -> None:
        write_labels(path, self.reference)


def write_labels(path, reference, start: int = 0) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("second,is_attack\n")
        for i, v in enumerate(reference):
            fh.write(f"{start + i},{int(bool(v))}\n")


def read_labels(path) -> tuple[int, np.ndarray]:
    """Return (first_second, per-second boolean array) from a labels CSV."""
    seconds, values = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "second,is_attack":
            raise ValueError(f"{path}: unexpected labels header {header!r}")
        for line_no, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                sec, val = line.split(",")
                seconds.append(int(sec))
                values.append(bool(int(val)))
            except ValueError:
                raise ValueError(f"{path}: line {line_no}: bad label row") from None
    if not seconds:
        return 0, np.zeros(0, dtype=bool)
    if seconds != list(range(seconds[0], seconds[0] + len(seconds))):
        raise ValueError(f"{path}: label seconds must be contiguous")
    return seconds[0], np.array(values, dtype=bool)


def runs(mask) -> list[tuple]:
    """Half-open (start, end) index runs where ``mask`` is true."""
    m = np.asarray(mask, dtype=bool)
    if not m.size:
        return []
    d = np.diff(np.concatenate([[0], m.astype(np.int8), [0]]))
    return list(zip(np.flatnonzero(d == 1).tolist(), np.flatnonzero(d == -1).tolist()))


def _child_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 7, i]).generate_state(1)[0])


def compose_scenario(baseline: BaselineTrace, attacks: Sequence[AttackSpec], seed: int) -> LabeledTrace:
    ordered = sorted(attacks, key=lambda a: a.start)
    for a in ordered:
        if a.start < 0 or a.end > baseline.duration:
            raise OutOfRangeError(f"attack [{a.start}, {a.end}) outside [0, {baseline.duration})")
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise OverlapError(f"attack [{a.start}, {a.end}) overlaps [{b.start}, {b.end})")
    fragments = []
    offset = 0
    for i, spec in enumerate(attacks):
        fragments.append(gen_attack(spec, _child_seed(seed, i), bot_offset=offset))
        # distinct bots per attack keep each attack's sources unique
        offset += spec.attackers[1]
    return LabeledTrace(baseline, fragments)


def schedule_attacks(template: dict, count: int, duration_range, window: int, seed: int,
                     lead_in: int = 120, min_gap: int = 30) -> list[AttackSpec]:
    """Place ``count`` non-overlapping attacks of random length inside ``[lead_in, window)``.

    Every attack is followed by at least ``min_gap`` quiet seconds.
    """
    rng = _rng(seed, 20)
    lo, hi = _pair(duration_range)
    if window - lead_in - count * (lo + min_gap) < 0:
        raise OutOfRangeError("attacks do not fit in the window")
    # redraw until the durations fit; always terminates since the minimum fits
    for _ in range(10_000):
        durations = rng.integers(lo, hi + 1, count)
        slack = window - lead_in - int(durations.sum()) - count * min_gap
        if slack >= 0:
            break
    else:
        durations = np.full(count, lo)
        slack = window - lead_in - count * (lo + min_gap)
    cuts = np.sort(rng.integers(0, slack + 1, count))
    extra = np.diff(np.concatenate([[0], cuts]))
    specs = []
    t = lead_in
    for d, e in zip(durations.tolist(), extra.tolist()):
        t += e
        specs.append(AttackSpec.from_dict({**template, "start": int(t), "duration": int(d)}))
        t += d + min_gap
    return specs


# --------------------------------------------------------------------------
# Scenario configs

@dataclass
class Scenario:
    seed: int
    duration: int
    baseline: BaselineProfile = field(default_factory=BaselineProfile)
    attacks: list = field(default_factory=list)

    def build(self) -> LabeledTrace:
        base = gen_baseline(self.baseline, self.duration, self.seed)
        return compose_scenario(base, self.attacks, self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        unknown = set(data) - {"seed", "duration", "baseline", "attacks", "schedule", "name"}
        if unknown:
            raise ValueError(f"unknown scenario fields {sorted(unknown)}")
        seed = int(data.get("seed", 0))
        duration = int(data["duration"])
        profile = BaselineProfile.from_dict(data.get("baseline", {}))
        attacks = [AttackSpec.from_dict(a) for a in data.get("attacks", [])]
        sched = data.get("schedule")
        if sched:
            sched = dict(sched)
            count = sched.pop("count")
            dur = sched.pop("duration")
            lead_in = sched.pop("lead_in", 120)
            min_gap = sched.pop("min_gap", 30)
            attacks += schedule_attacks(sched, count, dur, duration, seed, lead_in, min_gap)
        return cls(seed, duration, profile, attacks)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def syn_flood_config(seed: int = 1) -> dict:
    """Sixty minutes, 21 SYN floods of 60-180 s from 55-60 bots at 20 SYN/s each."""
    return {
        "name": "syn-flood",
        "seed": seed,
        "duration": 3600,
        "baseline": {},
        "schedule": {"kind": "SYN_FLOOD", "count": 21, "duration": [60, 180], "attackers": [55, 60],
                     "per_attacker_rate": 20, "packet_size": 60, "max_start_delay": 10,
                     "target": "10.2.0.1", "lead_in": 120, "min_gap": 30},
    }


def icmp_flood_config(seed: int = 2, churn: bool = True) -> dict:
    """One 1800 s ICMP flood from 33-42 bots at 1000 pps, 70-byte packets."""
    return {
        "name": "icmp-flood",
        "seed": seed,
        "duration": 3000,
        "baseline": {},
        "attacks": [{"kind": "ICMP_FLOOD", "attackers": [33, 42], "per_attacker_rate": 1000,
                     "packet_size": 70, "start": 600, "duration": 1800, "max_start_delay": 10,
                     "target": "10.2.0.1", "churn": churn}],
    }
