"""Shared primitives for the checksummed binary containers."""

from __future__ import annotations

import struct
import zlib

import numpy as np


class FormatError(Exception):
    """Base class for binary container problems."""


class MagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class TruncatedError(FormatError):
    pass


class ChecksumError(FormatError):
    pass


def finalize(payload: bytes) -> bytes:
    """Append a little-endian CRC32 of the payload."""
    return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


def verify(raw: bytes, magic: bytes) -> bytes:
    """Check size, magic, and trailing CRC32; return the payload bytes."""
    if len(raw) < len(magic) + 8:
        raise TruncatedError(f"file too small ({len(raw)} bytes)")
    if raw[:len(magic)] != magic:
        raise MagicError(f"bad magic {raw[:len(magic)]!r}")
    payload, stored = raw[:-4], struct.unpack("<I", raw[-4:])[0]
    actual = zlib.crc32(payload) & 0xFFFFFFFF
    if actual != stored:
        raise ChecksumError(f"crc mismatch: stored 0x{stored:08x}, computed 0x{actual:08x}")
    return payload


class Reader:
    """Bounds-checked little-endian reader over a byte buffer."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedError(
                f"needed {n} bytes at offset {self.pos}, buffer ends at {len(self.buf)}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def expect_end(self) -> None:
        if self.pos != len(self.buf):
            raise FormatError(f"{len(self.buf) - self.pos} unparsed trailing bytes")
