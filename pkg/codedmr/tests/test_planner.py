import pytest
from math import comb
from fractions import Fraction

from codedmr import planner
from codedmr.exceptions import InvalidParamsError, InfeasibleError
from codedmr.utils.logging import set_logger


set_logger("pytest_planner")


golden_labels = [
    "12,1",
    "12,2",
    "13,1",
    "13,3",
    "14,1",
    "14,4",
    "23,2",
    "23,3",
    "24,2",
    "24,4",
    "34,3",
    "34,4",
]


def _golden_params(S_max=None):
    return planner.SystemParams.from_redundancy(32, 8, 16, S_max=S_max)


def test_build_groups():
    params = _golden_params()
    layout = planner.build_groups(params)

    assert len(layout) == 4
    assert layout.members(1) == (1, 5, 9, 13, 17, 21, 25, 29)
    assert layout.members(4) == (4, 8, 12, 16, 20, 24, 28, 32)
    assert layout.nodes == tuple(range(1, 33))
    assert layout.group_of(30) == 2
    assert layout.position(30) == 8


def test_build_groups_offset():
    params = planner.SystemParams(4, 2, Fraction(1, 2))
    layout = planner.build_groups(params, offset=4)

    assert layout.members(1) == (5, 7)
    assert layout.members(2) == (6, 8)
    assert layout.group_of(7) == 1

    with pytest.raises(ValueError) as excinfo:
        layout.group_of(1)
    assert "does not belong" in str(excinfo.value)


def test_enumerate_packets_golden():
    packets = planner.enumerate_packets(_golden_params())
    assert [p.label for p in packets] == golden_labels
    assert str(packets[0]) == "W_{12,1}"


@pytest.mark.parametrize(
    "K, L, t", [(4, 1, 2), (8, 2, 4), (12, 3, 6), (16, 4, 8), (6, 1, 6)]
)
def test_assignment_counts(K, L, t):
    params = planner.SystemParams.from_redundancy(K, L, t)
    layout = planner.build_groups(params)
    packets = planner.enumerate_packets(params)
    plan = planner.assign(layout, packets)

    S = params.subpacketization
    assert len(packets) == S
    assert len(set(packets)) == S

    for i in layout.group_ids:
        assert len(plan.packet_sets[i]) == params.gamma * S
        assert all(i in p.tau for p in plan.packet_sets[i])

    for packet in packets:
        holders = [i for i in layout.group_ids if plan.owns(i, packet)]
        assert len(holders) == params.groups_per_packet

    # every element reaches t nodes
    assert params.groups_per_packet * L == t
    assert plan.reduce_assignment == {k: k for k in range(1, K + 1)}


def test_subpacketization():
    assert planner.subpacketization(32, 8, Fraction(1, 2)) == 12
    assert planner.subpacketization(32, 1, Fraction(1, 2)) == 9617286240
    assert planner.subpacketization(4, 4, 1) == 1


def test_subpacketization_without_grouping():
    for K in range(1, 17):
        for t in range(1, K + 1):
            gamma = Fraction(t, K)
            assert planner.subpacketization(K, 1, gamma) == t * comb(K, t)

            params = planner.SystemParams(K, 1, gamma)
            expected = (1 - gamma) / t
            assert planner.shuffle_delay_closed_form("cmr", params) == expected
            assert planner.shuffle_delay_closed_form("gcmr", params) == (
                expected
            )


def test_invalid_params():
    with pytest.raises(InvalidParamsError) as excinfo:
        planner.SystemParams(32, 5, Fraction(1, 2))
    assert "does not divide" in str(excinfo.value)

    with pytest.raises(InvalidParamsError) as excinfo:
        planner.SystemParams(32, 8, Fraction(1, 3))
    assert "is not in" in str(excinfo.value)

    with pytest.raises(InvalidParamsError) as excinfo:
        planner.SystemParams(32, 8, 0)
    assert "(0, 1]" in str(excinfo.value)

    with pytest.raises(InvalidParamsError) as excinfo:
        planner.SystemParams(32, 8, Fraction(1, 2), S_max=0)
    assert "maximum subpacketization" in str(excinfo.value)

    with pytest.raises(InvalidParamsError) as excinfo:
        planner.SystemParams.from_redundancy(8, 1, 9)
    assert "redundancy t" in str(excinfo.value)


def test_packet_index():
    packet = planner.PacketIndex(tau=(10, 2, 1), sigma=1)
    assert packet.tau == (1, 2, 10)
    assert packet.label == "1-2-10,1"
    assert planner.parse_label(packet.label) == packet
    assert planner.parse_label("12,2") == planner.PacketIndex((1, 2), 2)

    with pytest.raises(ValueError) as excinfo:
        planner.PacketIndex(tau=(1, 2), sigma=3)
    assert "should be an element" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        planner.parse_label("12")
    assert "Cannot parse" in str(excinfo.value)


def test_feasible_speedup_golden():
    assert planner.feasible_speedup(32, Fraction(1, 2), 1, 12) == (4, 2)
    assert planner.feasible_speedup(32, Fraction(1, 2), 8, 12) == (32, 16)


def test_feasible_speedup_infeasible():
    with pytest.raises(InfeasibleError) as excinfo:
        planner.feasible_speedup(32, Fraction(1, 2), 1, 1)
    assert "No admissible node count" in str(excinfo.value)


def _brute_force_speedup(K, gamma, L, S_max):
    best = None
    for k in range(1, K + 1):
        if k % L or ((k // L) * gamma).denominator != 1:
            continue
        if planner.subpacketization(k, L, gamma) <= S_max:
            best = k
    return best


@pytest.mark.parametrize("S_max", [2, 12, 100, 5000])
@pytest.mark.parametrize("L", [1, 2, 4])
def test_feasible_speedup_matches_brute_force(S_max, L):
    for K in range(L, 25, L):
        for j in range(1, K // L + 1):
            gamma = Fraction(j, K // L)
            expected = _brute_force_speedup(K, gamma, L, S_max)
            if expected is None:
                with pytest.raises(InfeasibleError):
                    planner.feasible_speedup(K, gamma, L, S_max)
                continue
            K_bar, t_bar = planner.feasible_speedup(K, gamma, L, S_max)
            assert K_bar == expected
            assert t_bar == gamma * expected


@pytest.mark.parametrize("S_max", [12, 1000])
def test_grouping_gain(S_max):
    for K in range(8, 65, 8):
        for L in (2, 4, 8):
            K_prime = K // L
            for j in range(1, K_prime + 1):
                gamma = Fraction(j, K_prime)
                try:
                    K_bar_1, _ = planner.feasible_speedup(K, gamma, 1, S_max)
                except InfeasibleError:
                    continue
                if L * K_bar_1 > K:
                    continue
                K_bar_L, _ = planner.feasible_speedup(K, gamma, L, S_max)
                assert K_bar_L >= L * K_bar_1


def test_closed_forms_golden():
    params = _golden_params(S_max=12)
    assert planner.shuffle_delay_closed_form("uncoded", params) == Fraction(
        1, 2
    )
    assert planner.shuffle_delay_closed_form("cmr", params) == Fraction(1, 4)
    assert planner.shuffle_delay_closed_form("gcmr", params) == Fraction(
        1, 32
    )

    with pytest.raises(ValueError) as excinfo:
        planner.shuffle_delay_closed_form("foo", params)
    assert "Unrecognized scheme" in str(excinfo.value)


@pytest.mark.parametrize("S_max", [1, 2, 12, 100, 10**6])
@pytest.mark.parametrize("L", [1, 2, 4, 8])
def test_delay_ordering(S_max, L):
    for K in range(L, 65, L):
        K_prime = K // L
        for j in range(1, K_prime + 1):
            params = planner.SystemParams(K, L, Fraction(j, K_prime), S_max)
            try:
                report = planner.make_plan_report(params)
            except InfeasibleError:
                continue

            assert report.delay_gcmr <= report.delay_cmr
            assert report.delay_cmr <= report.delay_uncoded
            assert report.t_bar <= report.t_bar_L


@pytest.mark.parametrize("K, L, t", [(8, 1, 4), (16, 4, 4), (12, 2, 6)])
def test_closed_forms_unconstrained(K, L, t):
    params = planner.SystemParams.from_redundancy(K, L, t)
    expected = (1 - params.gamma) / (K * params.gamma)
    assert planner.shuffle_delay_closed_form("gcmr", params) == expected
    assert planner.shuffle_delay_closed_form("cmr", params) == expected


def test_closed_forms_full_redundancy():
    params = planner.SystemParams.from_redundancy(4, 4, 4)
    for scheme in planner.SCHEMES:
        assert planner.shuffle_delay_closed_form(scheme, params) == 0


def test_batched_shuffle_delay():
    params = _golden_params(S_max=12)
    assert planner.batched_shuffle_delay(params) == Fraction(1, 32)

    # K_bar = 4 does not divide K = 10: two coded batches, two leftovers
    params = planner.SystemParams.from_redundancy(10, 1, 5, S_max=12)
    assert planner.batched_shuffle_delay(params) == Fraction(3, 10)
    assert planner.shuffle_delay_closed_form("gcmr", params) == Fraction(
        1, 4
    )


def test_total_execution_time():
    params = _golden_params(S_max=12)
    cost = planner.AffineCost()

    gcmr = planner.total_execution_time(params, cost, cost, scheme="gcmr")
    uncoded = planner.total_execution_time(
        params, cost, cost, scheme="uncoded"
    )
    assert gcmr == Fraction(9, 16)
    assert uncoded == Fraction(33, 32)

    fixed = planner.AffineCost(fixed=1, per_unit=0)
    assert planner.total_execution_time(
        params, fixed, fixed, scheme="gcmr"
    ) == Fraction(2) + Fraction(1, 32)


def test_make_plan_report():
    report = planner.make_plan_report(_golden_params(S_max=12))

    assert report.S == 12
    assert report.K_bar == 4
    assert report.t_bar == 2
    assert report.K_bar_L == 32
    assert report.t_bar_L == 16
    assert report.delay_gcmr * 8 == report.delay_cmr


def test_replace():
    params = _golden_params(S_max=12)
    assert params.replace(S_max=None).S_max is None

    with pytest.raises(InvalidParamsError):
        params.replace(L=5)
