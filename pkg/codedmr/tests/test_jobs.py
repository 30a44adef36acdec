import json
import pytest

import codedmr
from codedmr import jobs
from codedmr._base import BaseJob
from codedmr.mapreduce import Dataset
from codedmr.utils.logging import set_logger


all_jobs = [
    codedmr.WordCountJob,
    codedmr.SortBucketJob,
    codedmr.SumJob,
]


set_logger("pytest_jobs")


records = Dataset.synthetic(40, record_length=16, seed=0).elements


def test_registry():
    assert jobs.available_jobs() == ["sort-bucket", "sum", "word-count"]
    assert isinstance(jobs.get_job("word-count", 4), codedmr.WordCountJob)

    with pytest.raises(NotImplementedError) as excinfo:
        jobs.get_job("grep", 4)
    assert "Unrecognized job" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        jobs.register_job(dict)
    assert "should inherit from BaseJob" in str(excinfo.value)


def test_invalid_n_functions():
    with pytest.raises(ValueError) as excinfo:
        codedmr.SumJob(n_functions=0)
    assert "strictly positive" in str(excinfo.value)


def test_docstrings():
    assert "n_functions" in codedmr.WordCountJob.__doc__
    assert "Returns" in codedmr.SumJob.map_fn.__doc__


@pytest.mark.parametrize("job_cls", all_jobs)
@pytest.mark.parametrize("n_functions", [1, 3, 8])
def test_decomposable(job_cls, n_functions):
    """Reducing per-chunk map outputs equals evaluating the whole data."""
    job = job_cls(n_functions=n_functions)
    assert isinstance(job, BaseJob)
    chunks = [records[i : i + 7] for i in range(0, len(records), 7)]  # noqa

    for q in job.functions:
        payloads = [job.map_fn(q, chunk) for chunk in chunks]
        assert all(isinstance(p, bytes) for p in payloads)
        assert job.reduce_fn(q, payloads) == job.oracle_fn(q, records)


def test_word_count_payload():
    job = codedmr.WordCountJob(n_functions=4)
    q = job.bucket(b"a")
    counts = json.loads(job.map_fn(q, [b"a b a"]).decode("latin-1"))
    assert counts["a"] == 2


def test_sort_bucket_ranges():
    job = codedmr.SortBucketJob(n_functions=4)
    assert job.bucket(b"\x00abc") == 1
    assert job.bucket(b"\xff") == 4
    assert job.bucket(b"") == 1

    q = job.bucket(b"m")
    out = job.reduce_fn(
        q, [job.map_fn(q, [b"mz", b"ma"]), job.map_fn(q, [b"mm"])]
    )
    assert out == (b"ma", b"mm", b"mz")


def test_sum_values():
    job = codedmr.SumJob(n_functions=5)
    assert job.value(b"12") == 12
    assert job.value(b"ab") == 97 + 98
    assert job.bucket(b"12") == 3

    payload = job.map_fn(3, [b"12", b"7", b"2"])
    assert len(payload) == job.payload_bytes
    assert job.reduce_fn(3, [payload]) == 21


def test_sum_large_values():
    job = codedmr.SumJob(n_functions=4)
    big = b"1" * 40
    q = job.bucket(big)

    payload = job.map_fn(q, [big, big])
    assert len(payload) > job.payload_bytes
    assert job.reduce_fn(q, [payload, job.map_fn(q, [])]) == 2 * int(big)

    # Beyond the digit limit of int()
    huge = b"7" * 5000
    assert job.value(huge) % 10**6 == 777777
    assert job.value(huge).bit_length() > 16000
