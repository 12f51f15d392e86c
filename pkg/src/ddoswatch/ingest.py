"""Packet ingestion: canonical trace files, TZSP datagrams and per-second aggregation.

A trace file is UTF-8 CSV with one packet per line::

    timestamp,src,dst,protocol,tcp_flags_hex,size
    12.000000,10.0.0.1,10.0.0.9,TCP,0x02,60

Lines starting with ``#`` are comments. Packets are aggregated into
half-open one-second intervals ``[floor(t), floor(t) + 1)`` keyed by the
ordered (src, dst) address pair.
"""
from __future__ import annotations

import logging
import math
import socket
import struct
import time
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from ipaddress import IPv4Address
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Optional

import numpy as np

log = logging.getLogger(__name__)

TZSP_PORT = 37008

TCP_FIN = 0x01
TCP_SYN = 0x02
TCP_RST = 0x04
TCP_PSH = 0x08
TCP_ACK = 0x10


class Protocol(IntEnum):
    OTHER = 0
    ICMP = 1
    TCP = 6
    UDP = 17

    @classmethod
    def from_ip_proto(cls, number: int) -> "Protocol":
        try:
            return cls(number)
        except ValueError:
            return cls.OTHER


# Smallest on-wire size for a packet carrying the protocol's header.
MIN_SIZE = {Protocol.TCP: 40, Protocol.UDP: 28, Protocol.ICMP: 28, Protocol.OTHER: 20}

_PROTO_BY_NAME = {p.name: p for p in Protocol}


class IngestError(ValueError):
    """Base class for ingestion failures."""


class MalformedDatagram(IngestError):
    """A TZSP datagram that must be dropped."""


class ParseError(IngestError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TimestampRegression(ParseError):
    pass


class PacketMeta(NamedTuple):
    """Layer-3/4 summary of one observed packet."""

    timestamp: float
    src: IPv4Address
    dst: IPv4Address
    protocol: Protocol
    tcp_flags: int
    size: int

    @property
    def is_syn(self) -> bool:
        """SYN set and ACK clear, i.e. a connection-opening packet."""
        return (self.protocol is Protocol.TCP
                and self.tcp_flags & TCP_SYN != 0
                and self.tcp_flags & TCP_ACK == 0)


class PairKey(NamedTuple):
    src: IPv4Address
    dst: IPv4Address


@dataclass(frozen=True)
class IntervalAggregate:
    """Packet counts per (src, dst) pair for one second."""

    interval_start: int
    pair_counts: Mapping[PairKey, int] = field(default_factory=dict)
    total_packets: int = 0
    syn_count: int = 0

    def __post_init__(self):
        if self.total_packets != sum(self.pair_counts.values()):
            raise ValueError("total_packets must equal the sum of pair counts")
        if any(c <= 0 for c in self.pair_counts.values()):
            raise ValueError("pair counts must be positive")
        if not 0 <= self.syn_count <= self.total_packets:
            raise ValueError("syn_count must lie in [0, total_packets]")

    @classmethod
    def from_counts(cls, interval_start: int, pair_counts: Mapping, syn_count: int = 0):
        counts = {PairKey(*k): int(v) for k, v in pair_counts.items() if v}
        return cls(interval_start, counts, sum(counts.values()), syn_count)


def check_packet(pkt: PacketMeta) -> None:
    if pkt.size < MIN_SIZE[pkt.protocol]:
        raise ValueError(f"size {pkt.size} below minimum for {pkt.protocol.name}")
    if pkt.protocol is not Protocol.TCP and pkt.tcp_flags:
        raise ValueError("tcp_flags must be zero for non-TCP packets")
    if not 0 <= pkt.tcp_flags <= 0xFF:
        raise ValueError("tcp_flags must fit in 8 bits")


# --------------------------------------------------------------------------
# TZSP

TZSP_TAG_PADDING = 0x00
TZSP_TAG_END = 0x01
TZSP_ENCAP_ETHERNET = 0x0001

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_VLAN = (0x8100, 0x88A8)


def decode_tzsp(datagram: bytes, timestamp: Optional[float] = None) -> PacketMeta:
    """Decode one TZSP v1 datagram carrying an Ethernet/IPv4 frame.

    Raises MalformedDatagram for anything that cannot be decoded; the caller
    is expected to drop and count it.
    """
    data = memoryview(datagram)
    n = len(data)
    if n < 5:
        raise MalformedDatagram("truncated TZSP header")
    version, _type, encap = data[0], data[1], (data[2] << 8) | data[3]
    if version != 1:
        raise MalformedDatagram(f"unsupported TZSP version {version}")
    if encap != TZSP_ENCAP_ETHERNET:
        raise MalformedDatagram(f"unsupported encapsulation 0x{encap:04x}")

    pos = 4
    while True:
        if pos >= n:
            raise MalformedDatagram("tagged fields not terminated")
        tag = data[pos]
        pos += 1
        if tag == TZSP_TAG_END:
            break
        if tag == TZSP_TAG_PADDING:
            # single-byte filler, no length field
            continue
        if pos >= n:
            raise MalformedDatagram("truncated tag length")
        pos += 1 + data[pos]
    frame = data[pos:]
    if timestamp is None:
        timestamp = time.time()
    return _decode_ethernet(frame, timestamp)


def _decode_ethernet(frame: memoryview, timestamp: float) -> PacketMeta:
    n = len(frame)
    if n < 14:
        raise MalformedDatagram("truncated Ethernet header")
    off = 12
    ethertype = (frame[off] << 8) | frame[off + 1]
    while ethertype in ETHERTYPE_VLAN:
        off += 4
        if off + 2 > n:
            raise MalformedDatagram("truncated VLAN tag")
        ethertype = (frame[off] << 8) | frame[off + 1]
    if ethertype != ETHERTYPE_IPV4:
        raise MalformedDatagram(f"non-IPv4 ethertype 0x{ethertype:04x}")
    ip = off + 2
    if ip + 20 > n:
        raise MalformedDatagram("truncated IPv4 header")
    version, ihl = frame[ip] >> 4, (frame[ip] & 0x0F) * 4
    if version != 4:
        raise MalformedDatagram(f"IP version {version}")
    if ihl < 20 or ip + ihl > n:
        raise MalformedDatagram("IPv4 header shorter than IHL claims")
    frag_offset = ((frame[ip + 6] & 0x1F) << 8) | frame[ip + 7]
    proto = Protocol.from_ip_proto(frame[ip + 9])
    src = _ip_from_int(struct.unpack_from("!I", frame, ip + 12)[0])
    dst = _ip_from_int(struct.unpack_from("!I", frame, ip + 16)[0])

    l4 = ip + ihl
    flags = 0
    if frag_offset == 0:
        avail = n - l4
        if proto is Protocol.TCP:
            if avail < 20:
                raise MalformedDatagram("truncated TCP header")
            doff = (frame[l4 + 12] >> 4) * 4
            if doff < 20 or doff > avail:
                raise MalformedDatagram("bad TCP data offset")
            flags = frame[l4 + 13]
        elif proto is Protocol.UDP and avail < 8:
            raise MalformedDatagram("truncated UDP header")
        elif proto is Protocol.ICMP and avail < 4:
            raise MalformedDatagram("truncated ICMP header")
    return PacketMeta(timestamp, src, dst, proto, flags, n)


def encode_tzsp(frame: bytes, tags: bytes = b"", tzsp_type: int = 0) -> bytes:
    """Wrap an Ethernet frame in a TZSP v1 header (used for replay and tests)."""
    return bytes([1, tzsp_type]) + TZSP_ENCAP_ETHERNET.to_bytes(2, "big") + tags + bytes([TZSP_TAG_END]) + frame


def build_frame(src: str, dst: str, protocol: Protocol = Protocol.TCP,
                tcp_flags: int = 0, size: int = 60) -> bytes:
    """Assemble a minimal Ethernet/IPv4 frame padded to ``size`` bytes."""
    eth = b"\x02\x00\x00\x00\x00\x02" + b"\x02\x00\x00\x00\x00\x01" + b"\x08\x00"
    if protocol is Protocol.TCP:
        l4 = struct.pack("!HHIIBBHHH", 40000, 80, 1, 0, 5 << 4, tcp_flags, 65535, 0, 0)
    elif protocol is Protocol.UDP:
        l4 = struct.pack("!HHHH", 40000, 53, 8, 0)
    elif protocol is Protocol.ICMP:
        l4 = struct.pack("!BBHHH", 8, 0, 0, 1, 1)
    else:
        l4 = b""
    total = max(size - len(eth), 20 + len(l4))
    ip = struct.pack("!BBHHHBBH4s4s", 0x45, 0, total, 0, 0, 64, int(protocol) or 255, 0,
                     IPv4Address(src).packed, IPv4Address(dst).packed)
    frame = eth + ip + l4
    return frame + b"\x00" * max(0, size - len(frame))


class TzspListener:
    """Receive TZSP datagrams on a UDP port and yield decoded packets.

    Malformed datagrams are dropped and counted in ``dropped``.
    """

    def __init__(self, port: int = TZSP_PORT, host: str = "0.0.0.0",
                 timeout: Optional[float] = None):
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, port))
        self.sock.settimeout(timeout)
        self.port = self.sock.getsockname()[1]
        self.received = 0
        self.dropped = 0

    def __iter__(self) -> Iterator[PacketMeta]:
        while True:
            try:
                datagram = self.sock.recv(65535)
            except socket.timeout:
                return
            self.received += 1
            try:
                yield decode_tzsp(datagram)
            except MalformedDatagram as exc:
                self.dropped += 1
                log.debug("dropped datagram: %s", exc)

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# --------------------------------------------------------------------------
# Trace files

@lru_cache(maxsize=1 << 16)
def parse_ipv4(text: str) -> IPv4Address:
    return IPv4Address(text)


@lru_cache(maxsize=1 << 16)
def _ip_from_int(value: int) -> IPv4Address:
    return IPv4Address(value)


def parse_trace_line(line: str, line_no: int = 0) -> PacketMeta:
    fields = line.split(",")
    if len(fields) != 6:
        raise ParseError(line_no, f"expected 6 fields, got {len(fields)}")
    ts, src, dst, proto, flags, size = fields
    try:
        pkt = PacketMeta(float(ts), parse_ipv4(src.strip()), parse_ipv4(dst.strip()),
                         _PROTO_BY_NAME[proto.strip().upper()], int(flags, 16), int(size))
    except (ValueError, KeyError) as exc:
        raise ParseError(line_no, f"bad field ({exc})") from None
    if not math.isfinite(pkt.timestamp) or pkt.timestamp < 0:
        raise ParseError(line_no, "bad timestamp")
    try:
        check_packet(pkt)
    except ValueError as exc:
        raise ParseError(line_no, str(exc)) from None
    return pkt


def read_trace(path, on_error: Optional[Callable[[ParseError], None]] = None) -> Iterator[PacketMeta]:
    """Yield packets from a trace file in file order.

    With ``on_error`` set, bad lines are reported to the callback and skipped
    instead of raising.
    """
    last = -math.inf
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line[0] == "#":
                continue
            try:
                pkt = parse_trace_line(line, line_no)
                if pkt.timestamp < last:
                    raise TimestampRegression(line_no, f"timestamp {pkt.timestamp} < {last}")
            except ParseError as exc:
                if on_error is None:
                    raise
                on_error(exc)
                continue
            last = pkt.timestamp
            yield pkt


def format_packet(pkt: PacketMeta) -> str:
    return (f"{pkt.timestamp:.6f},{pkt.src},{pkt.dst},{pkt.protocol.name},"
            f"0x{pkt.tcp_flags:02x},{pkt.size}")


def write_trace(path, packets: Iterable[PacketMeta]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pkt in packets:
            fh.write(format_packet(pkt) + "\n")
            n += 1
    return n


# --------------------------------------------------------------------------
# Columnar batches

_PROTO_NAMES = {int(p): p.name for p in Protocol}


@dataclass
class PacketBatch:
    """Columnar packet block; timestamps are integer microseconds."""

    ts_us: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    proto: np.ndarray
    flags: np.ndarray
    size: np.ndarray

    def __len__(self):
        return len(self.ts_us)

    @classmethod
    def empty(cls) -> "PacketBatch":
        return cls(np.empty(0, np.int64), np.empty(0, np.uint32), np.empty(0, np.uint32),
                   np.empty(0, np.uint8), np.empty(0, np.uint8), np.empty(0, np.uint16))

    @classmethod
    def concat(cls, batches: Iterable["PacketBatch"]) -> "PacketBatch":
        batches = [b for b in batches if len(b)]
        if not batches:
            return cls.empty()
        if len(batches) == 1:
            return batches[0]
        return cls(*(np.concatenate([getattr(b, f) for b in batches]) for f in _BATCH_FIELDS))

    def sorted(self) -> "PacketBatch":
        order = np.argsort(self.ts_us, kind="stable")
        return PacketBatch(*(getattr(self, f)[order] for f in _BATCH_FIELDS))

    def packets(self) -> Iterator[PacketMeta]:
        for ts, s, d, p, f, z in zip(self.ts_us.tolist(), self.src.tolist(), self.dst.tolist(),
                                     self.proto.tolist(), self.flags.tolist(), self.size.tolist()):
            yield PacketMeta(ts / 1e6, _ip_from_int(s), _ip_from_int(d), Protocol(p), f, z)

    def lines(self) -> list[str]:
        ipstr = {}
        for v in np.unique(np.concatenate([self.src, self.dst])).tolist():
            ipstr[v] = str(_ip_from_int(v))
        return [f"{t // 1000000}.{t % 1000000:06d},{ipstr[s]},{ipstr[d]},{_PROTO_NAMES[p]},0x{f:02x},{z}"
                for t, s, d, p, f, z in zip(self.ts_us.tolist(), self.src.tolist(), self.dst.tolist(),
                                            self.proto.tolist(), self.flags.tolist(), self.size.tolist())]

    def syn_mask(self) -> np.ndarray:
        return ((self.proto == Protocol.TCP) & (self.flags & TCP_SYN != 0)
                & (self.flags & TCP_ACK == 0))


_BATCH_FIELDS = ("ts_us", "src", "dst", "proto", "flags", "size")


# --------------------------------------------------------------------------
# Aggregation

def _gap_fill(start: int, stop: int) -> Iterator[IntervalAggregate]:
    for sec in range(start, stop):
        yield IntervalAggregate(sec)


def aggregate(packets: Iterable[PacketMeta], start: Optional[int] = None,
              end: Optional[int] = None) -> Iterator[IntervalAggregate]:
    """Group packets into contiguous one-second IntervalAggregates.

    ``start``/``end`` optionally extend the output with empty seconds so that
    it covers ``[start, end)`` even when the first or last seconds are silent.
    """
    current = None
    counts: dict = {}
    syn = 0
    for pkt in packets:
        sec = math.floor(pkt.timestamp)
        if sec != current:
            if current is None:
                if start is not None:
                    yield from _gap_fill(start, sec)
            elif sec < current:
                raise TimestampRegression(0, f"timestamp {pkt.timestamp} precedes second {current}")
            else:
                yield IntervalAggregate(current, {PairKey(*k): v for k, v in counts.items()},
                                        sum(counts.values()), syn)
                yield from _gap_fill(current + 1, sec)
                counts = {}
                syn = 0
            current = sec
        key = (pkt.src, pkt.dst)
        counts[key] = counts.get(key, 0) + 1
        if pkt.protocol is Protocol.TCP and pkt.tcp_flags & TCP_SYN and not pkt.tcp_flags & TCP_ACK:
            syn += 1
    if current is not None:
        yield IntervalAggregate(current, {PairKey(*k): v for k, v in counts.items()},
                                sum(counts.values()), syn)
        next_sec = current + 1
    else:
        next_sec = start
    if end is not None and next_sec is not None:
        yield from _gap_fill(next_sec, end)


def count_batch(second: int, batch: PacketBatch) -> IntervalAggregate:
    """Aggregate a batch whose packets all fall in ``second``."""
    if not len(batch):
        return IntervalAggregate(second)
    keys = (batch.src.astype(np.uint64) << np.uint64(32)) | batch.dst.astype(np.uint64)
    uniq, cnt = np.unique(keys, return_counts=True)
    counts = {PairKey(_ip_from_int(k >> 32), _ip_from_int(k & 0xFFFFFFFF)): c
              for k, c in zip(uniq.tolist(), cnt.tolist())}
    return IntervalAggregate(second, counts, len(batch), int(batch.syn_mask().sum()))
