"""
  Zero-padding losses of coded slots. Every value combined into a coded
  slot is padded to the longest one, so uneven intermediate-value sizes
  shrink the gain of the coded shuffle below its theoretical value.
"""


import logging
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .exceptions import CoverageMismatchError
from .mapreduce import split_dataset
from .utils import io
from .utils.logging import log_phase


__all__ = [
    "SizeProfile",
    "GainReport",
    "padded_slot_cost",
    "effective_gain",
    "measure_profile",
    "gcmr_slots",
    "analyze_profile",
    "read_size_profile",
    "write_size_profile",
]


@dataclass(frozen=True)
class SizeProfile:
    """
    Sizes of intermediate values keyed by ``(q, packet id)``, in units of
    ``Tc``. A profile may carry its own needs and coded slots.
    """

    sizes: Dict[Tuple[int, str], Fraction]
    source: str = "explicit"
    needs: Optional[List[Tuple[int, str]]] = None
    slots: Optional[List[List[Tuple[int, str]]]] = None

    def __post_init__(self):
        if self.source not in ("explicit", "measured"):
            msg = "Unrecognized profile source: {}."
            raise ValueError(msg.format(self.source))
        for key, size in self.sizes.items():
            if size < 0:
                msg = "The size of {} should be non-negative, but got {}."
                raise ValueError(msg.format(key, size))

    @property
    def total(self):
        return sum(self.sizes.values(), Fraction(0))

    def unevenness(self):
        """Return the max/mean ratio of the value sizes of every packet."""
        per_packet = {}
        for (_, packet), size in self.sizes.items():
            per_packet.setdefault(packet, []).append(size)

        ratios = {}
        for packet, sizes in per_packet.items():
            mean = Fraction(sum(sizes), len(sizes))
            ratios[packet] = max(sizes) / mean if mean > 0 else Fraction(1)
        return ratios

    @property
    def relative_unevenness(self):
        """The mean over packets of :meth:`unevenness`."""
        ratios = self.unevenness()
        if not ratios:
            return Fraction(1)
        return sum(ratios.values(), Fraction(0)) / len(ratios)


@dataclass(frozen=True)
class GainReport:
    uncoded_delay: Fraction
    coded_delay_padded: Fraction
    effective_gain: Fraction
    theoretical_gain: Fraction
    padding_waste: List[Fraction] = field(default_factory=list)


def padded_slot_cost(sizes):
    """Return the cost of a coded slot, the largest of its member sizes."""
    sizes = list(sizes)
    if not sizes:
        raise ValueError("A coded slot needs at least one member.")
    return max(sizes)


def _check_coverage(slots, needs):
    need_set = set(needs)
    seen = set()
    for slot_id, slot in enumerate(slots):
        for member in slot:
            if member not in need_set:
                msg = "Slot {} carries {}, which no node needs."
                raise CoverageMismatchError(
                    msg.format(slot_id, member), slot_id
                )
            if member in seen:
                msg = "Slot {} delivers {} a second time."
                raise CoverageMismatchError(
                    msg.format(slot_id, member), slot_id
                )
            seen.add(member)

    missing = [need for need in needs if need not in seen]
    if missing:
        msg = "No slot delivers {}."
        raise CoverageMismatchError(msg.format(missing[0]))


def effective_gain(slots, sizes, needs, Tc=1):
    """
    Compare the uncoded delay of ``needs`` with the padded delay of the
    coded ``slots`` that deliver them.

    Parameters
    ----------
    slots : list of list
        Every coded slot as the ``(q, packet id)`` keys combined in it.
    sizes : dict
        The size of every value, keyed by ``(q, packet id)``.
    needs : list
        The ``(q, packet id)`` keys some node must receive.
    Tc : Fraction, default=1
        The reference time the sizes are expressed in.

    Returns
    -------
    report : GainReport
    """
    _check_coverage(slots, needs)
    Tc = Fraction(Tc)

    uncoded = sum((sizes[need] for need in needs), Fraction(0)) * Tc
    coded, waste = Fraction(0), []
    for slot in slots:
        member_sizes = [sizes[m] for m in slot]
        cost = padded_slot_cost(member_sizes)
        coded += cost * Tc
        waste.append(sum((cost - s for s in member_sizes), Fraction(0)) * Tc)

    theoretical = Fraction(len(needs), len(slots)) if slots else Fraction(1)
    gain = uncoded / coded if coded > 0 else theoretical

    return GainReport(
        uncoded_delay=uncoded,
        coded_delay_padded=coded,
        effective_gain=gain,
        theoretical_gain=theoretical,
        padding_waste=waste,
    )


def measure_profile(job, dataset, plan):
    """
    Map every packet of ``plan`` once for every function and record the
    payload sizes as fractions of the whole mapped volume.
    """
    split = split_dataset(dataset, plan.packets)
    raw = {}
    for packet in plan.packets:
        for q in job.functions:
            raw[(q, packet.label)] = len(job.map_fn(q, split[packet]))

    total = sum(raw.values())
    if total == 0:
        sizes = {key: Fraction(1, len(raw)) for key in raw}
    else:
        sizes = {key: Fraction(n, total) for key, n in raw.items()}

    profile = SizeProfile(sizes=sizes, source="measured")
    log_phase(
        logging.getLogger(),
        "profile",
        job=job.name,
        packets=len(plan.packets),
        relative_unevenness=float(profile.relative_unevenness),
    )
    return profile


def gcmr_slots(plan, schedule):
    """Express a coded schedule as ``(slots, needs)`` over packet labels."""
    slots = [
        [(node, packet.label) for node, packet in slot.deliveries]
        for slot in schedule
    ]
    needs = [
        (node, packet.label)
        for node in plan.nodes
        for packet in plan.missing(node)
    ]
    return slots, needs


def analyze_profile(profile, plan=None, schedule=None, Tc=1):
    """
    Score ``profile`` against its own slots when it carries them, and
    against the coded schedule of ``plan`` otherwise.
    """
    if profile.slots is not None and profile.needs is not None:
        slots, needs = profile.slots, profile.needs
    elif plan is not None and schedule is not None:
        slots, needs = gcmr_slots(plan, schedule)
    else:
        msg = (
            "The profile carries no slots; a plan and a schedule are"
            " needed to score it."
        )
        raise ValueError(msg)

    return effective_gain(slots, profile.sizes, needs, Tc=Tc)


def read_size_profile(path):
    sizes, needs, slots = io.read_profile(path)
    return SizeProfile(
        sizes=sizes, source="explicit", needs=needs, slots=slots
    )


def write_size_profile(path, profile):
    io.write_profile(
        path, profile.sizes, needs=profile.needs, slots=profile.slots
    )
