"""
  Combinatorics and closed-form analysis of group-based coded MapReduce.
  The ``K`` nodes are split into ``K' = K / L`` groups of ``L`` nodes, the
  dataset is split into ``S = K'gamma * C(K', K'gamma)`` packets indexed by
  ``(tau, sigma)``, and every group maps the packets whose ``tau`` contains
  it. All delays are exact fractions of the reference time ``Tc``.
"""


import itertools
from math import comb
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

from .exceptions import InvalidParamsError, InfeasibleError


__all__ = [
    "SCHEMES",
    "SystemParams",
    "GroupLayout",
    "PacketIndex",
    "AssignmentPlan",
    "AffineCost",
    "PlanReport",
    "build_groups",
    "enumerate_packets",
    "assign",
    "subpacketization",
    "feasible_speedup",
    "shuffle_delay_closed_form",
    "batched_shuffle_delay",
    "total_execution_time",
    "make_plan_report",
    "parse_label",
]


SCHEMES = ("uncoded", "cmr", "gcmr")


def _validate_structure(K, L, gamma):
    """Check the invariants shared by all planner operations."""
    if not (isinstance(K, int) and K > 0):
        msg = "The node count K should be a positive integer, but got {}."
        raise InvalidParamsError(msg.format(K))

    if not (isinstance(L, int) and L > 0):
        msg = "The group size L should be a positive integer, but got {}."
        raise InvalidParamsError(msg.format(L))

    if K % L != 0:
        msg = "The group size L={} does not divide the node count K={}."
        raise InvalidParamsError(msg.format(L, K))

    if not 0 < gamma <= 1:
        msg = "The redundancy gamma should be in (0, 1], but got {}."
        raise InvalidParamsError(msg.format(gamma))

    K_prime = K // L
    if (K_prime * gamma).denominator != 1:
        msg = (
            "The redundancy gamma={} is not in {{1/K', 2/K', ..., 1}} for"
            " K'=K/L={}, so K'gamma is not an integer."
        )
        raise InvalidParamsError(msg.format(gamma, K_prime))


@dataclass(frozen=True)
class SystemParams:
    """
    The tuple ``(K, L, gamma, S_max, Tc)`` governing a run.

    Parameters
    ----------
    K : int
        The number of computing nodes, which is also the number of output
        functions ``Q``.
    L : int
        The number of nodes per group. ``L=1`` is plain coded MapReduce.
    gamma : Fraction
        The fraction of the dataset mapped by every node.
    S_max : int, default=None
        The maximum number of packets the dataset may be split into.
        ``None`` means unconstrained.
    Tc : Fraction, default=1
        The time to transmit the entire mapped dataset from one node to
        another.
    """

    K: int
    L: int
    gamma: Fraction
    S_max: Optional[int] = None
    Tc: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        object.__setattr__(self, "Tc", Fraction(self.Tc))
        _validate_structure(self.K, self.L, self.gamma)

        if self.S_max is not None and not (
            isinstance(self.S_max, int) and self.S_max >= 1
        ):
            msg = (
                "The maximum subpacketization should be a positive integer"
                ", but got {} instead."
            )
            raise InvalidParamsError(msg.format(self.S_max))

        if not self.Tc > 0:
            msg = "The reference time Tc should be positive, but got {}."
            raise InvalidParamsError(msg.format(self.Tc))

    @classmethod
    def from_redundancy(cls, K, L, t, S_max=None, Tc=1):
        """Build parameters from the integer redundancy ``t = K * gamma``."""
        if not (isinstance(t, int) and 0 < t <= K):
            msg = "The redundancy t should be an integer in [1, K={}], got {}."
            raise InvalidParamsError(msg.format(K, t))
        return cls(K, L, Fraction(t, K), S_max, Fraction(Tc))

    @property
    def K_prime(self):
        return self.K // self.L

    @property
    def t(self):
        """The number of nodes mapping every dataset element."""
        return int(self.K * self.gamma)

    @property
    def groups_per_packet(self):
        """The number ``K'gamma`` of groups holding every packet."""
        return int(self.K_prime * self.gamma)

    @property
    def n_functions(self):
        return self.K

    @property
    def subpacketization(self):
        return subpacketization(self.K, self.L, self.gamma)

    def replace(self, **changes):
        """Return a copy with some fields changed, validated again."""
        fields = {
            "K": self.K,
            "L": self.L,
            "gamma": self.gamma,
            "S_max": self.S_max,
            "Tc": self.Tc,
        }
        fields.update(changes)
        return SystemParams(**fields)


@dataclass(frozen=True)
class GroupLayout:
    """
    The ordered groups ``G_1, ..., G_K'`` of node ids. ``offset`` shifts
    every node id, which is how node batches reuse the same layout.
    """

    groups: Tuple[Tuple[int, ...], ...]
    offset: int = 0

    def __len__(self):
        return len(self.groups)

    def members(self, i):
        """Return the nodes of group ``i`` (1-based)."""
        return self.groups[i - 1]

    @property
    def group_ids(self):
        return range(1, len(self.groups) + 1)

    @property
    def nodes(self):
        return tuple(sorted(k for group in self.groups for k in group))

    @property
    def group_size(self):
        return len(self.groups[0])

    def group_of(self, node):
        """Return the id of the group containing ``node``."""
        local = node - self.offset
        n_groups = len(self.groups)
        if not 1 <= local <= n_groups * self.group_size:
            msg = "Node {} does not belong to this layout."
            raise ValueError(msg.format(node))
        return (local - 1) % n_groups + 1

    def position(self, node):
        """Return ``j`` such that ``node`` is ``G_i(j)`` (1-based)."""
        local = node - self.offset
        return (local - 1) // len(self.groups) + 1


def build_groups(params, offset=0):
    """Split the nodes into ``K'`` groups ``{i, i+K', ..., i+(L-1)K'}``."""
    K_prime = params.K_prime
    groups = tuple(
        tuple(offset + i + l * K_prime for l in range(params.L))
        for i in range(1, K_prime + 1)
    )
    return GroupLayout(groups=groups, offset=offset)


@dataclass(frozen=True)
class PacketIndex:
    """The double index ``(tau, sigma)`` of a dataset packet."""

    tau: Tuple[int, ...]
    sigma: int

    def __post_init__(self):
        tau = tuple(sorted(self.tau))
        object.__setattr__(self, "tau", tau)
        if len(set(tau)) != len(tau):
            msg = "The group set tau={} contains duplicates."
            raise ValueError(msg.format(tau))
        if self.sigma not in tau:
            msg = "sigma={} should be an element of tau={}."
            raise ValueError(msg.format(self.sigma, tau))

    @property
    def label(self):
        """Render as ``"12,1"``, or ``"1-2-10,1"`` past single digits."""
        sep = "" if max(self.tau) < 10 else "-"
        return "{},{}".format(sep.join(str(i) for i in self.tau), self.sigma)

    def __str__(self):
        return "W_{{{}}}".format(self.label)


def parse_label(label):
    """Invert :attr:`PacketIndex.label`."""
    try:
        tau_part, sigma_part = label.strip().split(",")
        if "-" in tau_part:
            tau = tuple(int(i) for i in tau_part.split("-"))
        else:
            tau = tuple(int(i) for i in tau_part)
        return PacketIndex(tau=tau, sigma=int(sigma_part))
    except ValueError:
        msg = "Cannot parse `{}` as a packet label."
        raise ValueError(msg.format(label))


def enumerate_packets(params):
    """
    Return all packet indices in canonical order: ``tau`` lexicographic on
    sorted group ids, then ``sigma`` ascending.
    """
    group_ids = range(1, params.K_prime + 1)
    return [
        PacketIndex(tau=tau, sigma=sigma)
        for tau in itertools.combinations(group_ids, params.groups_per_packet)
        for sigma in tau
    ]


@dataclass(frozen=True)
class AssignmentPlan:
    """The packets ``M_i`` of every group and the reduce assignment."""

    layout: GroupLayout
    packets: Tuple[PacketIndex, ...]
    packet_sets: Dict[int, FrozenSet[PacketIndex]]
    reduce_assignment: Dict[int, int]

    @property
    def n_groups(self):
        return len(self.layout)

    @property
    def groups_per_packet(self):
        return len(self.packets[0].tau)

    @property
    def nodes(self):
        return self.layout.nodes

    def owns(self, group, packet):
        return packet in self.packet_sets[group]

    def missing(self, node):
        """Return the packets whose values ``node`` must receive."""
        group = self.layout.group_of(node)
        return [p for p in self.packets if group not in p.tau]


def assign(layout, packets):
    """
    Assign ``M_i = {(tau, sigma) : i in tau}`` to every group ``i`` and the
    reduce function ``q = k`` to every node ``k``.
    """
    packets = tuple(packets)
    n_groups = len(layout)
    for packet in packets:
        if not set(packet.tau) <= set(layout.group_ids):
            msg = "Packet {} refers to groups outside [1, {}]."
            raise ValueError(msg.format(packet, n_groups))

    packet_sets = {
        i: frozenset(p for p in packets if i in p.tau)
        for i in layout.group_ids
    }
    reduce_assignment = {k: k for k in layout.nodes}

    return AssignmentPlan(
        layout=layout,
        packets=packets,
        packet_sets=packet_sets,
        reduce_assignment=reduce_assignment,
    )


def subpacketization(K, L, gamma):
    """Return ``S = K'gamma * C(K', K'gamma)`` with ``K' = K / L``."""
    gamma = Fraction(gamma)
    _validate_structure(K, L, gamma)
    K_prime = K // L
    n = int(K_prime * gamma)
    return n * comb(K_prime, n)


def _is_admissible(K, L, gamma):
    return K % L == 0 and ((K // L) * gamma).denominator == 1


def feasible_speedup(K, gamma, L, S_max):
    """
    Return the largest node count ``K_bar <= K`` the scheme can encode over
    with at most ``S_max`` packets, and the effective speedup
    ``t_bar = gamma * K_bar``.

    Only node counts with integer ``K_bar / L`` and ``K_bar * gamma / L``
    are admissible.
    """
    gamma = Fraction(gamma)
    if not (isinstance(S_max, int) and S_max >= 1):
        msg = (
            "The maximum subpacketization should be a positive integer"
            ", but got {} instead."
        )
        raise InvalidParamsError(msg.format(S_max))
    if not 0 < gamma <= 1:
        msg = "The redundancy gamma should be in (0, 1], but got {}."
        raise InvalidParamsError(msg.format(gamma))

    admissible = [
        k for k in range(L, K + 1, L) if _is_admissible(k, L, gamma)
    ]
    feasible = [
        k for k in admissible if subpacketization(k, L, gamma) <= S_max
    ]

    if not feasible:
        if admissible:
            msg = (
                "No admissible node count satisfies S_max={}: the smallest"
                " one, K={}, already needs {} packets (L={}, gamma={})."
            )
            smallest = admissible[0]
            raise InfeasibleError(
                msg.format(
                    S_max,
                    smallest,
                    subpacketization(smallest, L, gamma),
                    L,
                    gamma,
                )
            )
        msg = "No node count K <= {} is admissible for L={}, gamma={}."
        raise InfeasibleError(msg.format(K, L, gamma))

    K_bar = max(feasible)
    return K_bar, gamma * K_bar


def _effective_speedup(params, L):
    if params.S_max is None:
        return params.gamma * params.K
    return feasible_speedup(params.K, params.gamma, L, params.S_max)[1]


def shuffle_delay_closed_form(scheme, params):
    """
    Return the shuffle delay of ``scheme`` in the same units as ``Tc``.

    - ``uncoded``: ``(1 - gamma) Tc``
    - ``cmr``: ``(1 - gamma) / t_bar Tc``
    - ``gcmr``: ``(1 - gamma) / t_bar_L Tc``
    """
    scheme = scheme.lower()
    if scheme not in SCHEMES:
        msg = "Unrecognized scheme: {}, should be one of {}."
        raise ValueError(msg.format(scheme, ",".join(SCHEMES)))

    if params.gamma == 1:
        return Fraction(0)

    if scheme == "uncoded":
        return (1 - params.gamma) * params.Tc

    L = 1 if scheme == "cmr" else params.L
    t_bar = _effective_speedup(params, L)

    return (1 - params.gamma) / t_bar * params.Tc


def batched_shuffle_delay(params):
    """
    Return the exact GCMR shuffle delay when nodes are served in batches of
    ``K_bar_L`` with the ``K mod K_bar_L`` leftover nodes served uncoded.
    It equals :func:`shuffle_delay_closed_form` when ``K_bar_L`` divides
    ``K``.
    """
    if params.gamma == 1:
        return Fraction(0)

    if params.S_max is None:
        K_bar = params.K
    else:
        K_bar, _ = feasible_speedup(
            params.K, params.gamma, params.L, params.S_max
        )

    n_batches, n_left = divmod(params.K, K_bar)
    one_minus = (1 - params.gamma) * params.Tc

    coded = Fraction(n_batches * K_bar, params.K) * one_minus
    coded /= params.gamma * K_bar
    uncoded = Fraction(n_left, params.K) * one_minus

    return coded + uncoded


@dataclass(frozen=True)
class AffineCost:
    """Phase cost ``fixed + per_unit * volume``."""

    fixed: Fraction = Fraction(0)
    per_unit: Fraction = Fraction(1)

    def __call__(self, volume):
        return Fraction(self.fixed) + Fraction(self.per_unit) * volume


def total_execution_time(
    params, map_cost, reduce_cost, scheme="gcmr", dataset_size=1
):
    """
    Return ``T_map(gamma F) + T_com + T_red(F / K)`` for ``scheme``, where
    ``T_com`` is :func:`shuffle_delay_closed_form`.
    """
    F = Fraction(dataset_size)
    return (
        map_cost(params.gamma * F)
        + shuffle_delay_closed_form(scheme, params)
        + reduce_cost(F / params.K)
    )


@dataclass(frozen=True)
class PlanReport:
    """Everything the planner derives from one parameter point."""

    params: SystemParams
    S: int
    S_cmr: int
    K_bar: int
    t_bar: Fraction
    K_bar_L: int
    t_bar_L: Fraction
    delay_uncoded: Fraction
    delay_cmr: Fraction
    delay_gcmr: Fraction


def make_plan_report(params):
    """Evaluate subpacketization, speedups and the three closed forms."""
    if params.S_max is None:
        K_bar, t_bar = params.K, params.gamma * params.K
        K_bar_L, t_bar_L = K_bar, t_bar
    else:
        K_bar, t_bar = feasible_speedup(
            params.K, params.gamma, 1, params.S_max
        )
        K_bar_L, t_bar_L = feasible_speedup(
            params.K, params.gamma, params.L, params.S_max
        )

    return PlanReport(
        params=params,
        S=params.subpacketization,
        S_cmr=subpacketization(params.K, 1, params.gamma),
        K_bar=K_bar,
        t_bar=Fraction(t_bar),
        K_bar_L=K_bar_L,
        t_bar_L=Fraction(t_bar_L),
        delay_uncoded=shuffle_delay_closed_form("uncoded", params),
        delay_cmr=shuffle_delay_closed_form("cmr", params),
        delay_gcmr=shuffle_delay_closed_form("gcmr", params),
    )
