"""
Unit tests for the fixed-width wire codec.
"""

import pytest

from src.rankstat_mpc.wire import (
    ByteReader,
    ByteWriter,
    Frame,
    MessageKind,
    WireFormatError,
    actor_code,
    base_width,
    int_to_fixed,
    squared_width,
    wide_width,
)


@pytest.mark.unit
class TestWidths:
    def test_widths(self):
        assert base_width(512) == 64
        assert squared_width(512) == 128
        assert wide_width(512) == 160
        assert base_width(2048) == 256

    def test_negative_value(self):
        with pytest.raises(WireFormatError):
            int_to_fixed(-1, 4)

    def test_overflow(self):
        with pytest.raises(WireFormatError):
            int_to_fixed(1 << 32, 4)


@pytest.mark.unit
class TestReaderWriter:
    def test_fields_in_order(self):
        data = ByteWriter().write_int(7, 2).write_bytes(b"ab").write_int(1, 1).getvalue()
        assert data == b"\x00\x07ab\x01"
        reader = ByteReader(data)
        assert reader.read_int(2) == 7
        assert reader.read_bytes(2) == b"ab"
        assert reader.remaining == 1

    def test_truncated(self):
        with pytest.raises(WireFormatError):
            ByteReader(b"\x00").read_int(2)

    def test_trailing_bytes(self):
        reader = ByteReader(b"\x00\x01")
        reader.read_int(1)
        with pytest.raises(WireFormatError):
            reader.ensure_consumed()


@pytest.mark.unit
class TestFrames:
    def test_actor_codes(self):
        assert actor_code("user-7") == 7
        assert actor_code("worker-2") == 0x80000002
        assert actor_code("dealer") == 0xFFFFFFFF
        with pytest.raises(WireFormatError):
            actor_code("observer")

    def test_header_layout(self):
        frame = Frame(MessageKind.GUESS, "worker-1", ("user-1",), 3, b"\xaa\xbb")
        encoded = frame.encode()
        assert frame.size == len(encoded) == 15
        assert encoded[0] == MessageKind.GUESS
        assert encoded[1:5] == bytes.fromhex("80000001")
        assert encoded[5:9] == (3).to_bytes(4, "big")
        assert encoded[9:13] == (2).to_bytes(4, "big")
        assert encoded[13:] == b"\xaa\xbb"
