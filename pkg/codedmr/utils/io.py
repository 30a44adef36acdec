"""Reading and writing datasets, size profiles, traces, CSV and configs."""


import os
import csv
import json
from fractions import Fraction

import numpy as np


__all__ = [
    "read_records",
    "synthetic_records",
    "read_profile",
    "write_profile",
    "format_trace_record",
    "write_trace",
    "write_csv",
    "read_config",
]


_ALPHABET = np.array(list(b"abcdefghijklmnopqrstuvwxyz"), dtype=np.uint8)


def read_records(path):
    """Read newline-delimited records from ``path`` as byte strings."""
    if not os.path.exists(path):
        raise FileNotFoundError("`{}` does not exist".format(path))

    with open(path, "rb") as f:
        lines = [line.rstrip(b"\r") for line in f.read().split(b"\n")]

    return [line for line in lines if line]


def synthetic_records(
    n_records, record_length=32, seed=0, skew=1.1, vocab_size=256
):
    """
    Draw ``n_records`` records of space separated lowercase words. Words
    come from a seeded vocabulary with Zipf weights ``rank ** -skew``, so
    ``skew=0`` gives a uniform vocabulary. Every record holds at least
    ``record_length`` bytes.
    """
    if not n_records > 0:
        msg = "The number of records should be positive, but got {}."
        raise ValueError(msg.format(n_records))
    if not record_length > 0:
        msg = "The record length should be positive, but got {}."
        raise ValueError(msg.format(record_length))

    rng = np.random.RandomState(seed)
    lengths = rng.randint(2, 9, size=vocab_size)
    vocab = [
        _ALPHABET[rng.randint(0, len(_ALPHABET), size=n)].tobytes()
        for n in lengths
    ]
    weights = np.arange(1, vocab_size + 1, dtype=np.float64) ** -skew
    weights /= weights.sum()

    records = []
    for _ in range(n_records):
        words, size = [], -1
        while size < record_length:
            word = vocab[rng.choice(vocab_size, p=weights)]
            words.append(word)
            size += len(word) + 1
        records.append(b" ".join(words))

    return records


def read_profile(path):
    """
    Read a size profile. Every non-comment line is one of::

        size <q> <packet id> <fraction>
        need <q> <packet id>
        slot <q>:<packet id> <q>:<packet id> ...

    Returns the sizes keyed by ``(q, packet id)`` and the needs and slots,
    which are ``None`` when the file declares none.
    """
    sizes, needs, slots = {}, [], []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kind, *fields = line.split()
            try:
                if kind == "size" and len(fields) == 3:
                    size = Fraction(fields[2])
                    if size < 0:
                        raise ValueError("negative size")
                    sizes[(int(fields[0]), fields[1])] = size
                elif kind == "need" and len(fields) == 2:
                    needs.append((int(fields[0]), fields[1]))
                elif kind == "slot" and fields:
                    slots.append([_parse_member(m) for m in fields])
                else:
                    raise ValueError("unknown record")
            except (ValueError, ZeroDivisionError) as e:
                msg = "Invalid profile line {} in `{}`: {} ({})."
                raise ValueError(msg.format(lineno, path, line, e))

    return sizes, needs or None, slots or None


def _parse_member(token):
    q, packet = token.split(":", 1)
    return int(q), packet


def write_profile(path, sizes, needs=None, slots=None):
    """Write a size profile readable by :func:`read_profile`."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# q packet size\n")
        for (q, packet), size in sorted(sizes.items()):
            f.write("size {} {} {}\n".format(q, packet, Fraction(size)))
        for q, packet in needs or []:
            f.write("need {} {}\n".format(q, packet))
        for slot in slots or []:
            members = " ".join("{}:{}".format(q, p) for q, p in slot)
            f.write("slot {}\n".format(members))


def format_trace_record(record):
    """Render one trace record as a single JSON line."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_trace(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(format_trace_record(record) + "\n")


def write_csv(stream, header, rows):
    """Write ``rows`` under ``header`` to an open text stream."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)


def read_config(path):
    """Read a flat ``key=value`` config file into a dictionary of strings."""
    if not os.path.exists(path):
        raise FileNotFoundError("`{}` does not exist".format(path))

    config = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                msg = "Invalid config line {} in `{}`: expected key=value."
                raise ValueError(msg.format(lineno, path))
            key, value = line.split("=", 1)
            config[key.strip()] = value.strip()

    return config
