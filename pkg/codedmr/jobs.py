"""
  Built-in decomposable jobs and the registry used to look them up by name.
  Every job splits its output into ``Q`` functions, maps each packet into
  one byte string per function and reduces the per-packet byte strings of
  a function into its output value.
"""


import json
import heapq
import zlib
from collections import Counter

from ._base import BaseJob, codedmr_doc


__all__ = [
    "WordCountJob",
    "SortBucketJob",
    "SumJob",
    "register_job",
    "get_job",
    "available_jobs",
]


_JOBS = {}
_DIGIT_CHUNK = 1000


def register_job(cls):
    """Register a job class under its ``name`` attribute."""
    if not (isinstance(cls, type) and issubclass(cls, BaseJob)):
        msg = "A registered job should inherit from BaseJob, got {}."
        raise ValueError(msg.format(cls))
    if not cls.name:
        msg = "The job class {} does not define a name."
        raise ValueError(msg.format(cls.__name__))

    _JOBS[cls.name] = cls
    return cls


def available_jobs():
    return sorted(_JOBS)


def get_job(job_name, n_functions):
    """Instantiate the registered job ``job_name`` with ``Q`` functions."""
    if job_name not in _JOBS:
        msg = "Unrecognized job: {}, should be one of {}."
        raise NotImplementedError(
            msg.format(job_name, ",".join(available_jobs()))
        )

    return _JOBS[job_name](n_functions=n_functions)


def _to_text(word):
    return word.decode("latin-1")


@register_job
@codedmr_doc(
    """Count words, function ``q`` owning the words hashing to ``q``.""",
    "job",
)
class WordCountJob(BaseJob):

    name = "word-count"

    def bucket(self, word):
        return zlib.crc32(word) % self.n_functions + 1

    def _count(self, q, records):
        counts = Counter()
        for record in records:
            for word in record.split():
                if self.bucket(word) == q:
                    counts[_to_text(word)] += 1
        return counts

    @codedmr_doc("""Count the words of bucket ``q`` in a packet.""", "map")
    def map_fn(self, q, records):
        counts = self._count(q, records)
        return json.dumps(
            counts, sort_keys=True, separators=(",", ":")
        ).encode("latin-1")

    @codedmr_doc("""Add up the per-packet counts of bucket ``q``.""", "reduce")
    def reduce_fn(self, q, payloads):
        total = Counter()
        for payload in payloads:
            total.update(json.loads(payload.decode("latin-1")))
        return tuple(sorted(total.items()))

    @codedmr_doc("""Count the words of bucket ``q`` directly.""", "oracle")
    def oracle_fn(self, q, records):
        return tuple(sorted(self._count(q, records).items()))


@register_job
@codedmr_doc(
    """
    Sort records, function ``q`` owning the ``q``-th range of first bytes
    (a TeraSort-style partition).""",
    "job",
)
class SortBucketJob(BaseJob):

    name = "sort-bucket"

    def bucket(self, record):
        first = record[0] if record else 0
        return first * self.n_functions // 256 + 1

    @codedmr_doc("""Sort the records of range ``q`` in a packet.""", "map")
    def map_fn(self, q, records):
        chosen = sorted(r for r in records if self.bucket(r) == q)
        return json.dumps([_to_text(r) for r in chosen]).encode("latin-1")

    @codedmr_doc("""Merge the sorted runs of range ``q``.""", "reduce")
    def reduce_fn(self, q, payloads):
        runs = [
            [r.encode("latin-1") for r in json.loads(p.decode("latin-1"))]
            for p in payloads
        ]
        return tuple(heapq.merge(*runs))

    @codedmr_doc("""Sort the records of range ``q`` directly.""", "oracle")
    def oracle_fn(self, q, records):
        return tuple(sorted(r for r in records if self.bucket(r) == q))


@register_job
@codedmr_doc(
    """
    Sum record values, function ``q`` owning the values congruent to
    ``q - 1`` modulo ``Q``. A decimal record is read as its integer value,
    any other record as the sum of its bytes.""",
    "job",
)
class SumJob(BaseJob):

    name = "sum"
    payload_bytes = 16

    @staticmethod
    def value(record):
        if record.isdigit():
            value = 0
            # Chunks stay below the int() digit limit
            for i in range(0, len(record), _DIGIT_CHUNK):
                chunk = record[i : i + _DIGIT_CHUNK]  # noqa: E203
                value = value * 10 ** len(chunk) + int(chunk)
            return value
        return sum(record)

    def bucket(self, record):
        return self.value(record) % self.n_functions + 1

    def _sum(self, q, records):
        return sum(self.value(r) for r in records if self.bucket(r) == q)

    @codedmr_doc("""Sum the values of class ``q`` in a packet.""", "map")
    def map_fn(self, q, records):
        total = self._sum(q, records)
        # Fixed width unless the sum needs more bytes
        width = max(self.payload_bytes, (total.bit_length() + 7) // 8)
        return total.to_bytes(width, "big")

    @codedmr_doc("""Add up the per-packet sums of class ``q``.""", "reduce")
    def reduce_fn(self, q, payloads):
        return sum(int.from_bytes(p, "big") for p in payloads)

    @codedmr_doc("""Sum the values of class ``q`` directly.""", "oracle")
    def oracle_fn(self, q, records):
        return self._sum(q, records)
