import pytest

import codedmr
from codedmr import mapreduce
from codedmr.exceptions import DatasetTooSmallError, IncompleteShuffleError
from codedmr.utils.logging import set_logger


set_logger("pytest_mapreduce")


params = codedmr.SystemParams.from_redundancy(4, 1, 2)
layout = codedmr.build_groups(params)
packets = codedmr.enumerate_packets(params)
plan = codedmr.assign(layout, packets)
dataset = mapreduce.Dataset.synthetic(30, record_length=16, seed=1)
job = codedmr.WordCountJob(n_functions=params.K)


def test_split_dataset():
    split = mapreduce.split_dataset(dataset, packets)

    # 30 records over 12 packets: six packets of three, six of two
    sizes = [len(split[p]) for p in packets]
    assert sizes == [3] * 6 + [2] * 6

    joined = [r for p in packets for r in split[p]]
    assert joined == dataset.elements


def test_split_dataset_too_small():
    small = mapreduce.Dataset(elements=[b"a"] * 5)
    with pytest.raises(DatasetTooSmallError) as excinfo:
        mapreduce.split_dataset(small, packets)
    assert "must be split into 12 packets" in str(excinfo.value)


def test_dataset_from_file(tmp_path):
    path = tmp_path / "records.txt"
    path.write_bytes(b"alpha beta\n\ngamma\n")
    loaded = mapreduce.Dataset.from_file(str(path))
    assert loaded.elements == [b"alpha beta", b"gamma"]
    assert loaded.F == 2


def test_map_group():
    split = mapreduce.split_dataset(dataset, packets)
    values = mapreduce.map_group(1, plan, split, job)

    assert len(values) == len(plan.packet_sets[1]) * params.K
    for (q, packet), value in values.items():
        assert plan.owns(1, packet)
        assert value.q == q
        assert value.numeric_len == len(value.payload) + 8


@pytest.mark.parametrize("n_jobs", [None, 2])
def test_map_phase(n_jobs):
    split = mapreduce.split_dataset(dataset, packets)
    mapped = mapreduce.map_phase(plan, split, job, n_jobs=n_jobs)

    assert sorted(mapped) == list(layout.group_ids)
    assert mapped[2] == mapreduce.map_group(2, plan, split, job)


def _all_values(split):
    values = {}
    for group in layout.group_ids:
        values.update(mapreduce.map_group(group, plan, split, job))
    return values


def test_reduce_node_matches_oracle():
    split = mapreduce.split_dataset(dataset, packets)
    values = _all_values(split)
    oracle = {
        out.q: out.value
        for out in mapreduce.centralized_oracle(job, dataset)
    }

    for node in layout.nodes:
        local = mapreduce.map_group(layout.group_of(node), plan, split, job)
        shuffled = {
            (node, p): values[(node, p)] for p in plan.missing(node)
        }
        out = mapreduce.reduce_node(node, local, shuffled, job, plan)
        assert out.q == node
        assert out.value == oracle[node]


def test_reduce_node_incomplete():
    split = mapreduce.split_dataset(dataset, packets)
    values = _all_values(split)
    node = 1
    local = mapreduce.map_group(layout.group_of(node), plan, split, job)
    missing = plan.missing(node)
    shuffled = {(node, p): values[(node, p)] for p in missing[1:]}

    with pytest.raises(IncompleteShuffleError) as excinfo:
        mapreduce.reduce_node(node, local, shuffled, job, plan)
    assert "missing packets" in str(excinfo.value)
    assert excinfo.value.missing == [missing[0]]
