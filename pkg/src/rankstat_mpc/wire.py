"""
Wire Codec

Fixed-width big-endian encoding of group elements and the frame format used
on the simulated message bus. Elements of Z_n take ceil(bits/8) bytes,
elements of Z_{n^2} twice that.
"""

from dataclasses import dataclass
from enum import IntEnum

FRAME_HEADER_BYTES = 13
WIDE_SLOT_EXTRA_BYTES = 32


class WireFormatError(Exception):
    """Exception raised when bytes cannot be encoded or decoded."""
    pass


def base_width(bits: int) -> int:
    """Byte width of an element of Z_n."""
    return (bits + 7) // 8


def squared_width(bits: int) -> int:
    """Byte width of an element of Z_{n^2}."""
    return 2 * base_width(bits)


def wide_width(bits: int) -> int:
    """Byte width of an integer response over an unknown-order group."""
    return squared_width(bits) + WIDE_SLOT_EXTRA_BYTES


def int_to_fixed(value: int, width: int) -> bytes:
    value = int(value)
    if value < 0:
        raise WireFormatError(f"cannot encode negative value in a {width}-byte slot")
    try:
        return value.to_bytes(width, "big")
    except OverflowError as e:
        raise WireFormatError(f"value of {value.bit_length()} bits exceeds {width}-byte slot") from e


def fixed_to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


class ByteWriter:
    """Accumulates fixed-width fields."""

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def write_int(self, value: int, width: int) -> "ByteWriter":
        self._parts.append(int_to_fixed(value, width))
        return self

    def write_bytes(self, data: bytes) -> "ByteWriter":
        self._parts.append(bytes(data))
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    """Consumes fixed-width fields from a buffer."""

    def __init__(self, data: bytes) -> None:
        self._data = bytes(data)
        self._offset = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._offset

    def read_bytes(self, count: int) -> bytes:
        if count > self.remaining:
            raise WireFormatError(
                f"truncated input: wanted {count} bytes, {self.remaining} left"
            )
        chunk = self._data[self._offset : self._offset + count]
        self._offset += count
        return chunk

    def read_int(self, width: int) -> int:
        return fixed_to_int(self.read_bytes(width))

    def ensure_consumed(self) -> None:
        if self.remaining:
            raise WireFormatError(f"{self.remaining} trailing bytes after decoding")


class MessageKind(IntEnum):
    """Frame kinds exchanged between actors."""

    GUESS = 1
    REGISTRATION = 2
    SIGN_SUBMISSION = 3
    PARTIAL_DECRYPTION = 4
    MASKED_PRODUCT = 5
    RESHARE_MASK = 6
    PREP_STEP = 7
    MOMENTS = 8
    ATTESTATION = 9
    PLAINTEXT = 10


def user_actor(index: int) -> str:
    return f"user-{index}"


def worker_actor(index: int) -> str:
    return f"worker-{index}"


def actor_code(actor: str) -> int:
    """Map an actor id to the 4-byte sender code carried in frame headers."""
    role, _, index = actor.partition("-")
    if role == "user":
        return int(index)
    if role == "worker":
        return 0x80000000 | int(index)
    if actor == "dealer":
        return 0xFFFFFFFF
    raise WireFormatError(f"unknown actor id {actor!r}")


@dataclass(frozen=True)
class Frame:
    """One message on the bus: a 13-byte header followed by the payload."""

    kind: MessageKind
    sender: str
    receivers: tuple[str, ...]
    round: int
    payload: bytes

    def encode(self) -> bytes:
        header = (
            ByteWriter()
            .write_int(int(self.kind), 1)
            .write_int(actor_code(self.sender), 4)
            .write_int(self.round, 4)
            .write_int(len(self.payload), 4)
            .getvalue()
        )
        return header + self.payload

    @property
    def size(self) -> int:
        return FRAME_HEADER_BYTES + len(self.payload)
