"""Sectioned little-endian binary container with a trailing CRC32.

Layout: 8-byte magic, u32 version, then sections of (4-byte ASCII tag,
u64 payload length, payload bytes), terminated by the tag ``END!`` whose
payload is the CRC32 (u32) of every byte that precedes it.  Files are read
fully into memory; the formats built on top of this stay in the tens to a
few hundreds of MB for the corpora this package targets.
"""

import struct
import zlib

from .errors import FormatError

_END_TAG = b"END!"


def write_sections(path, magic: bytes, version: int, sections) -> None:
    """Write `sections` (iterable of (tag, payload) pairs) to `path`."""
    if len(magic) != 8:
        raise ValueError("magic must be 8 bytes")
    crc = 0
    with open(path, "wb") as fh:
        head = magic + struct.pack("<I", version)
        fh.write(head)
        crc = zlib.crc32(head, crc)
        for tag, payload in sections:
            if len(tag) != 4:
                raise ValueError(f"section tag must be 4 bytes, got {tag!r}")
            hdr = tag + struct.pack("<Q", len(payload))
            fh.write(hdr)
            crc = zlib.crc32(hdr, crc)
            fh.write(payload)
            crc = zlib.crc32(payload, crc)
        fh.write(_END_TAG + struct.pack("<Q", 4) + struct.pack("<I", crc))


def read_sections(path, magic: bytes, version: int) -> dict:
    """Read a sectioned file back into {tag: payload bytes}.

    Raises FormatError on bad magic, version mismatch, truncation (naming
    the section where the file ends), checksum failure, or a missing
    terminator.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12:
        raise FormatError(f"{path}: file shorter than the fixed header")
    if data[:8] != magic:
        raise FormatError(f"{path}: bad magic {data[:8]!r}, expected {magic!r}")
    (ver,) = struct.unpack_from("<I", data, 8)
    if ver != version:
        raise FormatError(f"{path}: format version {ver}, this build reads version {version}")
    sections: dict[bytes, bytes] = {}
    pos = 12
    while True:
        if pos + 12 > len(data):
            raise FormatError(f"{path}: truncated file, no terminator section")
        tag = data[pos : pos + 4]
        (length,) = struct.unpack_from("<Q", data, pos + 4)
        start = pos + 12
        end = start + length
        if end > len(data):
            raise FormatError(f"{path}: truncated file in section {tag.decode('ascii', 'replace')!r}")
        payload = data[start:end]
        if tag == _END_TAG:
            if length != 4:
                raise FormatError(f"{path}: malformed terminator section")
            (stored_crc,) = struct.unpack("<I", payload)
            actual_crc = zlib.crc32(data[:pos])
            if stored_crc != actual_crc:
                raise FormatError(f"{path}: checksum mismatch (stored {stored_crc:#010x}, computed {actual_crc:#010x})")
            return sections
        sections[tag] = payload
        pos = end


def require(sections: dict, tag: bytes, path) -> bytes:
    if tag not in sections:
        raise FormatError(f"{path}: missing section {tag.decode('ascii', 'replace')!r}")
    return sections[tag]
