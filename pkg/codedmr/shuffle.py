"""
  The cooperative coded shuffle. For every subset ``Q`` of ``K'gamma + 1``
  groups, each group ``i`` in ``Q`` acts as one distributed transmitter and
  sends

      x = sum_{k' in Q \\ {i}} H_{i,k'}^{-1} [W^{G_k'(1)}, ..., W^{G_k'(L)}]

  where the values for group ``k'`` come from packet ``(Q \\ {k'}, i)``. A
  receiver ``G_p(j)`` subtracts the terms it can rebuild from its own map
  output and is left with its own coordinate of the ``p`` term.
"""


import logging
import itertools
from math import comb
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from joblib import Parallel, delayed

from . import _constants as const
from .channel import zf_precoder
from .exceptions import DecodeError
from .mapreduce import IntermediateValue
from .planner import PacketIndex, shuffle_delay_closed_form
from .utils.logging import get_tb_logger, log_phase
from .utils.operator import (
    encode_payload,
    decode_payload,
    stack_padded,
    count_symbol_errors,
)


__all__ = [
    "SlotTarget",
    "TransmissionSlot",
    "Schedule",
    "DelayReport",
    "CoverageReport",
    "build_schedule",
    "precode",
    "receive_and_decode",
    "run_shuffle",
    "verify_coverage",
    "count_delay",
    "schedule_delay",
    "slot_count_formula",
]


@dataclass(frozen=True)
class SlotTarget:
    """The values one slot carries to one receiving group."""

    group: int
    nodes: Tuple[int, ...]
    packet: PacketIndex


@dataclass(frozen=True)
class TransmissionSlot:
    slot_id: int
    Q: Tuple[int, ...]
    tx_group: int
    tx_nodes: Tuple[int, ...]
    targets: Tuple[SlotTarget, ...]

    def target(self, group):
        for target in self.targets:
            if target.group == group:
                return target
        msg = "Group {} is not a receiver of slot {}."
        raise ValueError(msg.format(group, self.slot_id))

    @property
    def deliveries(self):
        """Return the ``(node, packet)`` pairs delivered by this slot."""
        return [
            (node, target.packet)
            for target in self.targets
            for node in target.nodes
        ]

    @property
    def nodes_served(self):
        return sum(len(target.nodes) for target in self.targets)

    @property
    def csi_exchanges(self):
        """Active nodes that exchange channel state for this slot."""
        return len(self.tx_nodes) * len(self.Q)

    def padded_len(self, values):
        """
        Return the longest encoded payload among the slot's values, looked
        up by ``(q, packet)`` in ``values``.
        """
        return max(
            values[(node, packet)].numeric_len
            for node, packet in self.deliveries
        )


@dataclass(frozen=True)
class Schedule:
    slots: Tuple[TransmissionSlot, ...]

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __getitem__(self, index):
        return self.slots[index]

    def find(self, Q, tx_group):
        """Return the slot of subset ``Q`` sent by ``tx_group``."""
        Q = tuple(sorted(Q))
        for slot in self.slots:
            if slot.Q == Q and slot.tx_group == tx_group:
                return slot
        return None

    def without(self, slot_id):
        """Return a copy with one slot removed."""
        return Schedule(
            slots=tuple(s for s in self.slots if s.slot_id != slot_id)
        )


def slot_count_formula(K_prime, groups_per_packet):
    """Return ``(K'gamma + 1) C(K', K'gamma + 1)``."""
    size = groups_per_packet + 1
    if size > K_prime:
        return 0
    return size * comb(K_prime, size)


def build_schedule(plan, params):
    """
    Enumerate one slot per subset ``Q`` (lexicographic) and transmitter
    ``i`` in ``Q`` (ascending).
    """
    if plan.n_groups != params.K_prime:
        msg = "The plan has {} groups but the parameters imply K'={}."
        raise ValueError(msg.format(plan.n_groups, params.K_prime))

    layout = plan.layout
    size = params.groups_per_packet + 1
    slots = []
    for Q in itertools.combinations(layout.group_ids, size):
        for i in Q:
            targets = []
            for k in Q:
                if k == i:
                    continue
                packet = PacketIndex(
                    tau=tuple(g for g in Q if g != k), sigma=i
                )
                if not plan.owns(i, packet) or plan.owns(k, packet):
                    msg = "Packet {} breaks the assignment of slot {}->{}."
                    raise ValueError(msg.format(packet, i, Q))
                targets.append(
                    SlotTarget(
                        group=k, nodes=layout.members(k), packet=packet
                    )
                )
            slots.append(
                TransmissionSlot(
                    slot_id=len(slots),
                    Q=Q,
                    tx_group=i,
                    tx_nodes=layout.members(i),
                    targets=tuple(targets),
                )
            )

    return Schedule(slots=tuple(slots))


def _payload_matrix(target, values, padded_len):
    """Stack the encoded values of one target, one row per node."""
    rows = []
    for node in target.nodes:
        value = values[(node, target.packet)]
        rows.append(encode_payload(value.payload))
    return stack_padded(rows, padded_len)


def precode(slot, matrices, payloads, cond_bound=const.COND_BOUND):
    """
    Build the transmitted ``L x padded_len`` signal of one slot.

    Parameters
    ----------
    slot : TransmissionSlot
        The slot to transmit.
    matrices : dict
        Maps every receiving group ``k'`` to ``H_{i,k'}``.
    payloads : dict
        Maps every receiving group ``k'`` to its ``L x padded_len`` matrix
        of encoded symbols.

    Returns
    -------
    x : tensor of shape (L, padded_len)
        Row ``j`` is transmitted by node ``G_i(j)``.
    """
    x = None
    for target in slot.targets:
        term = zf_precoder(matrices[target.group], cond_bound) @ (
            payloads[target.group]
        )
        x = term if x is None else x + term
    return x


def _interference(slot, matrices, p, local_values, padded_len, cond_bound):
    """Rebuild every term of the slot not intended for group ``p``."""
    total = None
    for target in slot.targets:
        if target.group == p:
            continue
        missing = [
            node
            for node in target.nodes
            if (node, target.packet) not in local_values
        ]
        if missing:
            msg = (
                "Group {} cannot cancel packet {} in slot {}: it was not"
                " mapped locally."
            )
            raise RuntimeError(msg.format(p, target.packet, slot.slot_id))
        term = zf_precoder(matrices[target.group], cond_bound) @ (
            _payload_matrix(target, local_values, padded_len)
        )
        total = term if total is None else total + term
    return total


def _residual(slot, matrices, y, p, j, local_values, padded_len, power):
    """Return ``y / sqrt(P) - h^T (interference)`` for receiver ``G_p(j)``."""
    h = matrices[p][j - 1]
    r = y / (power ** 0.5)
    interference = _interference(
        slot, matrices, p, local_values, padded_len, const.COND_BOUND
    )
    if interference is not None:
        r = r - h @ interference
    return r


def receive_and_decode(
    slot, matrices, y, p, j, local_values, padded_len, power=1.0
):
    """
    Decode the value intended for receiver ``G_p(j)`` from its received
    signal ``y``, cancelling the terms meant for other groups with the
    receiver's own map output ``local_values``.

    Returns
    -------
    value : IntermediateValue
        The value ``W^{G_p(j)}_{(Q \\ {p}, i)}``.
    """
    target = slot.target(p)
    r = _residual(slot, matrices, y, p, j, local_values, padded_len, power)
    payload = decode_payload(r)
    return IntermediateValue(
        q=target.nodes[j - 1], packet=target.packet, payload=payload
    )


def _serve_receiver(
    slot, matrices, y, p, j, local_values, padded_len, power, reference
):
    """Decode one receiver, reporting failures instead of raising."""
    r = _residual(slot, matrices, y, p, j, local_values, padded_len, power)
    errors = count_symbol_errors(r, reference)
    target = slot.target(p)
    try:
        payload = decode_payload(r)
    except DecodeError:
        return target.nodes[j - 1], None, errors
    value = IntermediateValue(
        q=target.nodes[j - 1], packet=target.packet, payload=payload
    )
    return value.q, value, errors


@dataclass
class DelayReport:
    """Measured shuffle delay, reconciled against the closed form."""

    slot_count: int
    even_delay: Fraction
    padded_delay: Fraction
    closed_form: Fraction
    nodes_served_per_slot: int
    uncoded_slot_count: int
    uncoded_delay: Fraction
    uncoded_padded_delay: Fraction
    csi_exchanges: int = 0
    symbol_errors: int = 0
    checksum_failures: int = 0
    tx_power: List[float] = field(default_factory=list)

    @property
    def reconciled(self):
        return self.even_delay == self.closed_form

    @property
    def mean_tx_power(self):
        if not self.tx_power:
            return None
        return sum(self.tx_power) / len(self.tx_power)

    def combine(self, other):
        """Return the report of two shuffles run one after the other."""
        return DelayReport(
            slot_count=self.slot_count + other.slot_count,
            even_delay=self.even_delay + other.even_delay,
            padded_delay=self.padded_delay + other.padded_delay,
            closed_form=self.closed_form + other.closed_form,
            nodes_served_per_slot=max(
                self.nodes_served_per_slot, other.nodes_served_per_slot
            ),
            uncoded_slot_count=self.uncoded_slot_count
            + other.uncoded_slot_count,
            uncoded_delay=self.uncoded_delay + other.uncoded_delay,
            uncoded_padded_delay=self.uncoded_padded_delay
            + other.uncoded_padded_delay,
            csi_exchanges=self.csi_exchanges + other.csi_exchanges,
            symbol_errors=self.symbol_errors + other.symbol_errors,
            checksum_failures=self.checksum_failures
            + other.checksum_failures,
            tx_power=self.tx_power + other.tx_power,
        )


def _batch_closed_form(params, n_nodes, n_functions):
    """Closed-form delay of one batch of ``n_nodes`` out of ``Q``."""
    if params.gamma == 1:
        return Fraction(0)
    unconstrained = params.replace(S_max=None)
    per_node = shuffle_delay_closed_form("gcmr", unconstrained)
    return per_node * Fraction(n_nodes, n_functions)


def count_delay(params):
    """
    Return the unconstrained delay report from counting formulas only,
    without enumerating the schedule.
    """
    K_prime, g = params.K_prime, params.groups_per_packet
    S = params.subpacketization
    slots = slot_count_formula(K_prime, g)
    unit = params.Tc / (params.K * S)
    n_needs = params.K * g * comb(K_prime - 1, g)

    return DelayReport(
        slot_count=slots,
        even_delay=slots * unit,
        padded_delay=slots * unit,
        closed_form=_batch_closed_form(params, params.K, params.K),
        nodes_served_per_slot=g * params.L if slots else 0,
        uncoded_slot_count=n_needs,
        uncoded_delay=n_needs * unit,
        uncoded_padded_delay=n_needs * unit,
        csi_exchanges=slots * params.L * (g + 1),
    )


def schedule_delay(plan, schedule, params, n_functions=None):
    """
    Return the delay report of an enumerated schedule when every
    intermediate value has the same size.
    """
    if n_functions is None:
        n_functions = params.K
    unit = params.Tc / (n_functions * len(plan.packets))
    n_needs = sum(len(plan.missing(node)) for node in plan.nodes)
    slots = len(schedule)

    return DelayReport(
        slot_count=slots,
        even_delay=slots * unit,
        padded_delay=slots * unit,
        closed_form=_batch_closed_form(
            params, len(plan.nodes), n_functions
        ),
        nodes_served_per_slot=max(
            (s.nodes_served for s in schedule), default=0
        ),
        uncoded_slot_count=n_needs,
        uncoded_delay=n_needs * unit,
        uncoded_padded_delay=n_needs * unit,
        csi_exchanges=sum(s.csi_exchanges for s in schedule),
    )


def _all_values(mapped):
    values = {}
    for group_values in mapped.values():
        values.update(group_values)
    return values


def run_shuffle(
    plan,
    schedule,
    channel,
    mapped,
    params,
    n_jobs=None,
    on_decode_failure="raise",
    trace=None,
):
    """
    Transmit every slot of ``schedule`` over ``channel`` and decode it at
    every receiver.

    Parameters
    ----------
    plan : AssignmentPlan
        The assignment the map phase followed.
    schedule : Schedule
        The slots to transmit, in order.
    channel : ChannelModel
        The medium; it owns all randomness of the shuffle.
    mapped : dict
        Maps every group id to its intermediate values keyed by
        ``(q, packet)``.
    params : SystemParams
        The parameters of this batch of nodes, used for ``gamma`` and
        ``Tc``.
    n_jobs : int, default=None
        The number of workers decoding the receivers of one slot.
    on_decode_failure : {"raise", "count"}, default="raise"

        - If ``"raise"``, the first checksum failure raises
          :class:`DecodeError` naming the slot.
        - If ``"count"``, failures are counted in the report and the
          value is not delivered.
    trace : list, default=None
        If given, one record per slot is appended to it.

    Returns
    -------
    delivered : dict
        Maps every node to the values it received, keyed by
        ``(q, packet)``.
    report : DelayReport
        The measured delays of this shuffle.
    """
    if on_decode_failure not in ("raise", "count"):
        msg = "`on_decode_failure` should be one of {{raise, count}}, got {}."
        raise ValueError(msg.format(on_decode_failure))

    logger = logging.getLogger()
    tb_logger = get_tb_logger()

    values = _all_values(mapped)
    n_functions = len(values) // len(plan.packets)
    total_symbols = sum(v.numeric_len for v in values.values())
    unit = params.Tc / len(values)
    symbol_time = params.Tc / total_symbols

    delivered = {node: {} for node in plan.nodes}
    padded_symbols, symbol_errors, failures = 0, 0, 0
    tx_power = []

    with Parallel(n_jobs=n_jobs) as parallel:
        for slot in schedule:
            tx_values = mapped[slot.tx_group]
            padded_len = slot.padded_len(tx_values)
            rx_groups = {t.group: t.nodes for t in slot.targets}
            matrices = channel.slot_matrices(slot.tx_nodes, rx_groups)
            payloads = {
                t.group: _payload_matrix(t, tx_values, padded_len)
                for t in slot.targets
            }
            x = precode(slot, matrices, payloads, channel.cond_bound)
            power = float((x.abs() ** 2).sum(dim=0).mean())
            tx_power.append(power)

            jobs = []
            for t in slot.targets:
                for j in range(1, len(t.nodes) + 1):
                    y = channel.propagate(matrices[t.group][j - 1], x)
                    jobs.append(
                        delayed(_serve_receiver)(
                            slot,
                            matrices,
                            y,
                            t.group,
                            j,
                            mapped[t.group],
                            padded_len,
                            channel.power,
                            payloads[t.group][j - 1],
                        )
                    )
            rets = parallel(jobs)

            for node, value, errors in rets:
                symbol_errors += errors
                if value is None:
                    failures += 1
                    msg = "Node {} failed to decode slot {} (Q={}, tx={})."
                    msg = msg.format(node, slot.slot_id, slot.Q, slot.tx_group)
                    if on_decode_failure == "raise":
                        logger.error(msg)
                        raise DecodeError(msg, slot.slot_id, node)
                    logger.warning(msg)
                    continue
                if value.key in delivered[node]:
                    msg = "Value {} reached node {} twice (slot {})."
                    msg = msg.format(value.packet, node, slot.slot_id)
                    logger.error(msg)
                    raise RuntimeError(msg)
                delivered[node][value.key] = value

            padded_symbols += padded_len
            if trace is not None:
                trace.append(
                    {
                        "slot": slot.slot_id,
                        "Q": list(slot.Q),
                        "tx": slot.tx_group,
                        "delivered": [
                            "{}:{}".format(n, p.label)
                            for n, p in slot.deliveries
                        ],
                        "padded_len": padded_len,
                        "tx_power": round(power, 9),
                        "csi_exchanges": slot.csi_exchanges,
                    }
                )
            if tb_logger:
                tb_logger.add_scalar(
                    "shuffle/padded_len", padded_len, slot.slot_id
                )
                tb_logger.add_scalar("shuffle/tx_power", power, slot.slot_id)
            logger.debug(
                "Slot {:04d} | Q: {} | tx: {} | padded_len: {}".format(
                    slot.slot_id, slot.Q, slot.tx_group, padded_len
                )
            )

    needs = [
        (node, packet) for node in plan.nodes for packet in plan.missing(node)
    ]
    uncoded_symbols = sum(values[(n, p)].numeric_len for n, p in needs)

    report = DelayReport(
        slot_count=len(schedule),
        even_delay=len(schedule) * unit,
        padded_delay=padded_symbols * symbol_time,
        closed_form=_batch_closed_form(
            params, len(plan.nodes), n_functions
        ),
        nodes_served_per_slot=max(
            (s.nodes_served for s in schedule), default=0
        ),
        uncoded_slot_count=len(needs),
        uncoded_delay=len(needs) * unit,
        uncoded_padded_delay=uncoded_symbols * symbol_time,
        csi_exchanges=sum(s.csi_exchanges for s in schedule),
        symbol_errors=symbol_errors,
        checksum_failures=failures,
        tx_power=tx_power,
    )

    log_phase(
        logger,
        "shuffle",
        slots=report.slot_count,
        even_delay=report.even_delay,
        padded_delay=report.padded_delay,
        closed_form=report.closed_form,
    )

    return delivered, report


@dataclass
class CoverageReport:
    """Which slot delivers every needed ``(node, packet)`` value."""

    deliveries: Dict[Tuple[int, PacketIndex], List[int]]
    missing: List[Tuple[int, PacketIndex]]
    duplicates: List[Tuple[int, PacketIndex]]
    misrouted: List[Tuple[int, PacketIndex]]
    unexpected: List[Tuple[int, PacketIndex]]
    expected_slot: Dict[Tuple[int, PacketIndex], Optional[int]] = field(
        default_factory=dict
    )

    @property
    def violations(self):
        return (
            len(self.missing)
            + len(self.duplicates)
            + len(self.misrouted)
            + len(self.unexpected)
        )

    @property
    def ok(self):
        return self.violations == 0


def verify_coverage(plan, schedule):
    """
    Audit that every needed value is delivered exactly once, by the slot
    ``(Q = tau + {p}, tx = sigma)``.
    """
    layout = plan.layout
    deliveries = {}
    for slot in schedule:
        for node, packet in slot.deliveries:
            deliveries.setdefault((node, packet), []).append(slot.slot_id)

    needs = [
        (node, packet) for node in plan.nodes for packet in plan.missing(node)
    ]
    missing, duplicates, misrouted, expected_slot = [], [], [], {}
    for node, packet in needs:
        p = layout.group_of(node)
        Q = tuple(sorted(packet.tau + (p,)))
        expected = schedule.find(Q, packet.sigma)
        expected_slot[(node, packet)] = (
            expected.slot_id if expected is not None else None
        )
        got = deliveries.get((node, packet), [])
        if not got:
            missing.append((node, packet))
        elif len(got) > 1:
            duplicates.append((node, packet))
        elif expected is None or got[0] != expected.slot_id:
            misrouted.append((node, packet))

    need_set = set(needs)
    unexpected = [key for key in deliveries if key not in need_set]

    return CoverageReport(
        deliveries=deliveries,
        missing=missing,
        duplicates=duplicates,
        misrouted=misrouted,
        unexpected=unexpected,
        expected_slot=expected_slot,
    )
