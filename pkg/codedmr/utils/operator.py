"""This module collects operations on symbol tensors used in codedmr."""


import zlib
import torch
import numpy as np

from .. import _constants as const
from ..exceptions import DecodeError


__all__ = [
    "frame_payload",
    "unframe_payload",
    "encoded_length",
    "bytes_to_symbols",
    "symbols_to_bytes",
    "encode_payload",
    "decode_payload",
    "stack_padded",
    "count_symbol_errors",
]


_LEVEL_MAX = const.SYMBOL_LEVELS - 1


def frame_payload(payload):
    """Prefix the payload length and append its CRC32."""
    length = len(payload).to_bytes(const.LENGTH_BYTES, "big")
    crc = zlib.crc32(payload).to_bytes(const.CRC_BYTES, "big")
    return length + payload + crc


def unframe_payload(frame):
    """Strip the framing added by :func:`frame_payload`."""
    if len(frame) < const.LENGTH_BYTES + const.CRC_BYTES:
        raise DecodeError("The frame is shorter than its header.")

    length = int.from_bytes(frame[: const.LENGTH_BYTES], "big")
    end = const.LENGTH_BYTES + length
    if end + const.CRC_BYTES > len(frame):
        msg = "The frame announces {} payload bytes but only holds {}."
        raise DecodeError(msg.format(length, len(frame) - end))

    payload = frame[const.LENGTH_BYTES : end]  # noqa: E203
    crc = int.from_bytes(frame[end : end + const.CRC_BYTES], "big")  # noqa
    if zlib.crc32(payload) != crc:
        raise DecodeError("The payload fails its checksum.")

    return payload


def encoded_length(payload):
    """Return the number of symbols needed to carry ``payload``."""
    return len(payload) + const.LENGTH_BYTES + const.CRC_BYTES


def bytes_to_symbols(data, length=None):
    """
    Map every byte to one complex symbol whose real and imaginary parts are
    its high and low nibble, zero padded to ``length`` symbols.
    """
    if length is None:
        length = len(data)
    if length < len(data):
        msg = "Cannot pad {} bytes into {} symbols."
        raise ValueError(msg.format(len(data), length))

    raw = np.zeros(length, dtype=np.uint8)
    raw[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    real = torch.from_numpy((raw >> 4).astype(np.float64))
    imag = torch.from_numpy((raw & 0x0F).astype(np.float64))

    return torch.complex(real, imag)


def _round_to_lattice(symbols):
    real = torch.round(symbols.real).clamp(0, _LEVEL_MAX)
    imag = torch.round(symbols.imag).clamp(0, _LEVEL_MAX)
    return real.to(torch.uint8), imag.to(torch.uint8)


def symbols_to_bytes(symbols):
    """Round symbols to the nearest lattice point and rebuild the bytes."""
    real, imag = _round_to_lattice(symbols)
    raw = (real.numpy().astype(np.uint8) << 4) | imag.numpy()
    return raw.astype(np.uint8).tobytes()


def encode_payload(payload, length=None):
    """Frame ``payload`` and map it to a zero padded symbol tensor."""
    return bytes_to_symbols(frame_payload(payload), length)


def decode_payload(symbols):
    """Invert :func:`encode_payload`, raising on a checksum failure."""
    return unframe_payload(symbols_to_bytes(symbols))


def stack_padded(vectors, length):
    """Stack symbol vectors into a ``len(vectors) x length`` matrix."""
    out = torch.zeros((len(vectors), length), dtype=torch.complex128)
    for row, vector in enumerate(vectors):
        out[row, : vector.size(0)] = vector
    return out


def count_symbol_errors(received, reference):
    """Count symbols that land on a different lattice point."""
    real, imag = _round_to_lattice(received)
    ref_real, ref_imag = _round_to_lattice(reference)
    wrong = (real != ref_real) | (imag != ref_imag)
    return int(wrong.sum().item())
