"""
  Dataset representation and the map and reduce engines. The dataset is
  split into the packets of the assignment plan, every group maps its
  packets for all output functions, and every node reduces the values of
  its own function once the shuffle phase has delivered the missing ones.
"""


import logging
from dataclasses import dataclass
from typing import List

from joblib import Parallel, delayed

from .exceptions import DatasetTooSmallError, IncompleteShuffleError
from .planner import PacketIndex
from .utils import io
from .utils.logging import log_phase
from .utils.operator import encoded_length


__all__ = [
    "Dataset",
    "IntermediateValue",
    "ReduceOutput",
    "split_dataset",
    "map_group",
    "map_phase",
    "reduce_node",
    "centralized_oracle",
]


@dataclass(frozen=True)
class Dataset:
    """An ordered list of opaque byte-string records."""

    elements: List[bytes]

    @property
    def F(self):
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    @classmethod
    def from_file(cls, path):
        """Read newline-delimited records, skipping empty lines."""
        return cls(elements=io.read_records(path))

    @classmethod
    def synthetic(cls, n_records, record_length=32, seed=0, skew=1.1):
        """Draw a seeded dataset of Zipf-distributed lowercase words."""
        return cls(
            elements=io.synthetic_records(
                n_records, record_length, seed=seed, skew=skew
            )
        )


@dataclass(frozen=True)
class IntermediateValue:
    """The mapped output ``W^q_{tau,sigma}`` of one packet and function."""

    q: int
    packet: PacketIndex
    payload: bytes

    @property
    def key(self):
        return (self.q, self.packet)

    @property
    def numeric_len(self):
        """The number of symbols of the framed payload."""
        return encoded_length(self.payload)


@dataclass(frozen=True)
class ReduceOutput:
    q: int
    value: object


def split_dataset(dataset, packets):
    """
    Split the records into disjoint contiguous packets following the order
    of ``packets``. The first ``F mod S`` packets receive one extra record.
    """
    n_packets = len(packets)
    if dataset.F < n_packets:
        msg = (
            "The dataset holds {} records but must be split into {}"
            " packets."
        )
        raise DatasetTooSmallError(msg.format(dataset.F, n_packets))

    base, extra = divmod(dataset.F, n_packets)
    split, start = {}, 0
    for idx, packet in enumerate(packets):
        size = base + 1 if idx < extra else base
        split[packet] = list(dataset.elements[start : start + size])  # noqa
        start += size

    return split


def map_group(group, plan, split, job):
    """
    Return the intermediate values of every packet in ``M_group`` for all
    ``Q`` output functions, keyed by ``(q, packet)``. All nodes of the group
    share this output.
    """
    values = {}
    for packet in plan.packets:
        if not plan.owns(group, packet):
            continue
        records = split[packet]
        for q in job.functions:
            value = IntermediateValue(
                q=q, packet=packet, payload=job.map_fn(q, records)
            )
            values[value.key] = value

    return values


def map_phase(plan, split, job, n_jobs=None):
    """Map all groups, in parallel when ``n_jobs`` is larger than one."""
    logger = logging.getLogger()

    rets = Parallel(n_jobs=n_jobs)(
        delayed(map_group)(group, plan, split, job)
        for group in plan.layout.group_ids
    )
    mapped = dict(zip(plan.layout.group_ids, rets))

    log_phase(
        logger,
        "map",
        job=job.name,
        groups=len(mapped),
        values_per_group=len(rets[0]) if rets else 0,
    )

    return mapped


def reduce_node(node, local_values, shuffled_values, job, plan):
    """
    Reduce the values of the function assigned to ``node``. Values are
    looked up by ``(q, packet)`` first among the locally mapped ones and
    then among the shuffled ones.
    """
    q = plan.reduce_assignment[node]
    payloads, missing = [], []
    for packet in plan.packets:
        key = (q, packet)
        if key in local_values:
            payloads.append(local_values[key].payload)
        elif key in shuffled_values:
            payloads.append(shuffled_values[key].payload)
        else:
            missing.append(packet)

    if missing:
        msg = "Node {} cannot reduce function {}: missing packets {}."
        labels = ", ".join(str(p) for p in missing)
        logging.getLogger().error(msg.format(node, q, labels))
        raise IncompleteShuffleError(msg.format(node, q, labels), missing)

    return ReduceOutput(q=q, value=job.reduce_fn(q, payloads))


def centralized_oracle(job, dataset):
    """Evaluate every output function on the whole dataset."""
    return [
        ReduceOutput(q=q, value=job.oracle_fn(q, dataset.elements))
        for q in job.functions
    ]
