"""Wire format of the classical (authenticated) channel.

Frame layout, all integers big-endian::

    +----------------+--------+-----------------+
    | length : u32   | tag:u8 | payload[length] |
    +----------------+--------+-----------------+

Tags and payloads:

    0 MonitorReveal  count:u32, positions:u64[count], outcomes:u8[count]
    1 BerAnnounce    ber:f64
    2 SiftIndices    count:u32, positions:u64[count]
    3 Ack            (empty)

Monitor outcomes are 0 or 1, or ``NO_CLICK`` (255) for a monitored window in
which Alice's detector stayed silent or was dead.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

HEADER = struct.Struct(">IB")
NO_CLICK = 255
MAX_PAYLOAD = 2**32 - 1

_U32 = struct.Struct(">I")
_F64 = struct.Struct(">d")
_POS = np.dtype(">u8")


class FrameError(ValueError):
    """Base class of all decode failures."""


class TruncatedFrame(FrameError):
    pass


class UnknownMessageType(FrameError):
    pass


class LengthMismatch(FrameError):
    pass


class MalformedPayload(FrameError):
    pass


class MessageType(IntEnum):
    MONITOR_REVEAL = 0
    BER_ANNOUNCE = 1
    SIFT_INDICES = 2
    ACK = 3


def _positions(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size and (arr.min() < 0):
        raise ValueError("positions must be non-negative")
    return np.ascontiguousarray(arr, dtype=np.uint64).reshape(-1)


@dataclass(eq=False, frozen=True)
class MonitorReveal:
    positions: np.ndarray
    outcomes: np.ndarray
    type_tag = MessageType.MONITOR_REVEAL

    def __post_init__(self):
        pos = _positions(self.positions)
        out = np.ascontiguousarray(self.outcomes, dtype=np.uint8).reshape(-1)
        if pos.shape != out.shape:
            raise ValueError("positions and outcomes differ in length")
        if not np.all((out <= 1) | (out == NO_CLICK)):
            raise ValueError("outcomes must be 0, 1 or NO_CLICK")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "outcomes", out)

    def __eq__(self, other):
        return (isinstance(other, MonitorReveal)
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.outcomes, other.outcomes))

    def payload(self) -> bytes:
        return (_U32.pack(len(self.positions)) + self.positions.astype(_POS).tobytes()
                + self.outcomes.tobytes())

    @classmethod
    def from_payload(cls, body: bytes) -> "MonitorReveal":
        count = _read_count(body)
        if len(body) != 4 + 9 * count:
            raise MalformedPayload(f"MonitorReveal with count {count} needs {4 + 9 * count} bytes, got {len(body)}")
        pos = np.frombuffer(body, dtype=_POS, count=count, offset=4).astype(np.uint64)
        out = np.frombuffer(body, dtype=np.uint8, count=count, offset=4 + 8 * count)
        try:
            return cls(pos, out)
        except ValueError as exc:
            raise MalformedPayload(str(exc)) from None


@dataclass(frozen=True)
class BerAnnounce:
    ber: float
    type_tag = MessageType.BER_ANNOUNCE

    def __post_init__(self):
        if not (math.isfinite(self.ber) and 0.0 <= self.ber <= 1.0):
            raise ValueError(f"ber must be a finite value in [0, 1], got {self.ber}")

    def payload(self) -> bytes:
        return _F64.pack(self.ber)

    @classmethod
    def from_payload(cls, body: bytes) -> "BerAnnounce":
        if len(body) != _F64.size:
            raise MalformedPayload(f"BerAnnounce payload must be 8 bytes, got {len(body)}")
        try:
            return cls(_F64.unpack(body)[0])
        except ValueError as exc:
            raise MalformedPayload(str(exc)) from None


@dataclass(eq=False, frozen=True)
class SiftIndices:
    positions: np.ndarray
    type_tag = MessageType.SIFT_INDICES

    def __post_init__(self):
        object.__setattr__(self, "positions", _positions(self.positions))

    def __eq__(self, other):
        return isinstance(other, SiftIndices) and np.array_equal(self.positions, other.positions)

    def payload(self) -> bytes:
        return _U32.pack(len(self.positions)) + self.positions.astype(_POS).tobytes()

    @classmethod
    def from_payload(cls, body: bytes) -> "SiftIndices":
        count = _read_count(body)
        if len(body) != 4 + 8 * count:
            raise MalformedPayload(f"SiftIndices with count {count} needs {4 + 8 * count} bytes, got {len(body)}")
        return cls(np.frombuffer(body, dtype=_POS, count=count, offset=4).astype(np.uint64))


@dataclass(frozen=True)
class Ack:
    type_tag = MessageType.ACK

    def payload(self) -> bytes:
        return b""

    @classmethod
    def from_payload(cls, body: bytes) -> "Ack":
        if body:
            raise MalformedPayload(f"Ack carries no payload, got {len(body)} bytes")
        return cls()


ClassicalMessage = MonitorReveal | BerAnnounce | SiftIndices | Ack

_DECODERS = {
    MessageType.MONITOR_REVEAL: MonitorReveal.from_payload,
    MessageType.BER_ANNOUNCE: BerAnnounce.from_payload,
    MessageType.SIFT_INDICES: SiftIndices.from_payload,
    MessageType.ACK: Ack.from_payload,
}


def frame_encode(msg: ClassicalMessage) -> bytes:
    body = msg.payload()
    if len(body) > MAX_PAYLOAD:
        raise ValueError("payload exceeds the 4-byte length field")
    return HEADER.pack(len(body), int(msg.type_tag)) + body


def frame_decode(data: bytes) -> ClassicalMessage:
    """Decode exactly one frame; trailing bytes are a :class:`LengthMismatch`."""
    data = bytes(data)
    if len(data) < HEADER.size:
        raise TruncatedFrame(f"frame header needs {HEADER.size} bytes, got {len(data)}")
    length, tag = HEADER.unpack_from(data)
    available = len(data) - HEADER.size
    if length > available:
        raise TruncatedFrame(f"declared payload {length} bytes, only {available} present")
    if length < available:
        raise LengthMismatch(f"declared payload {length} bytes, frame carries {available}")
    try:
        decoder = _DECODERS[MessageType(tag)]
    except ValueError:
        raise UnknownMessageType(f"unknown type tag {tag}") from None
    return decoder(data[HEADER.size:])


class FrameReader:
    """Incremental decoder for a byte stream carrying back-to-back frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> list[ClassicalMessage]:
        self._buf.extend(chunk)
        messages = []
        while len(self._buf) >= HEADER.size:
            length, _ = HEADER.unpack_from(self._buf)
            end = HEADER.size + length
            if len(self._buf) < end:
                break
            frame = bytes(self._buf[:end])
            del self._buf[:end]
            messages.append(frame_decode(frame))
        return messages

    @property
    def pending(self) -> int:
        return len(self._buf)


def _read_count(body: bytes) -> int:
    if len(body) < _U32.size:
        raise MalformedPayload(f"payload needs a 4-byte count, got {len(body)} bytes")
    return _U32.unpack_from(body)[0]
