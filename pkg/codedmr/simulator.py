"""
  End-to-end execution of one job: plan the packets, map them, run the
  coded shuffle over the simulated channel, reduce at every node and check
  the outputs against a centralized evaluation of the job.

  When the subpacketization constraint ``S_max`` binds, the nodes are
  served in consecutive batches of ``K_bar_L`` nodes that each run the
  coded scheme, and the ``K mod K_bar_L`` leftover nodes are served by
  uncoded unicasts.
"""


import logging
import dataclasses
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import _constants as const
from ._base import BaseJob, codedmr_doc
from .channel import ChannelModel, zf_precoder
from .exceptions import (
    CoverageMismatchError,
    DecodeError,
    IncompleteShuffleError,
)
from .jobs import get_job
from .mapreduce import (
    IntermediateValue,
    split_dataset,
    map_phase,
    reduce_node,
    centralized_oracle,
)
from .planner import (
    SystemParams,
    assign,
    build_groups,
    enumerate_packets,
    feasible_speedup,
    batched_shuffle_delay,
)
from .shuffle import DelayReport, build_schedule, run_shuffle, verify_coverage
from .utils.logging import log_phase
from .utils.operator import encode_payload, decode_payload


__all__ = ["RunResult", "GroupCodedMapReduce"]


@dataclass
class RunResult:
    """Outputs and measurements of one end-to-end run."""

    params: SystemParams
    outputs: Dict[int, object]
    oracle: Optional[Dict[int, object]]
    delay: DelayReport
    batch_size: int
    n_batches: int
    leftover_nodes: Tuple[int, ...] = ()
    failed_nodes: List[int] = field(default_factory=list)
    trace: List[dict] = field(default_factory=list)

    @property
    def matches(self):
        """Whether every output equals the oracle, ``None`` if unchecked."""
        if self.oracle is None:
            return None
        return not self.mismatches

    @property
    def mismatches(self):
        if self.oracle is None:
            return []
        return [
            q
            for q, value in sorted(self.oracle.items())
            if self.outputs.get(q) != value
        ]

    @property
    def closed_form(self):
        return batched_shuffle_delay(self.params)


@codedmr_doc(
    """Simulate group-based coded MapReduce on a dataset.""", "simulator"
)
class GroupCodedMapReduce(object):
    def __init__(
        self,
        params,
        job="word-count",
        mode="wireless",
        seed=const.DEFAULT_SEED,
        noise_variance=0.0,
        power=1.0,
        identity_channel=False,
        n_jobs=None,
        on_decode_failure="raise",
    ):
        if isinstance(job, str):
            job = get_job(job, n_functions=params.n_functions)
        if not isinstance(job, BaseJob):
            msg = "The job should be a BaseJob or a job name, got {}."
            raise ValueError(msg.format(type(job).__name__))
        if job.n_functions != params.n_functions:
            msg = (
                "The job has {} output functions but the system has K={}"
                " nodes."
            )
            raise ValueError(msg.format(job.n_functions, params.K))

        self.params = params
        self.job = job
        self.mode = mode
        self.seed = seed
        self.noise_variance = noise_variance
        self.power = power
        self.identity_channel = identity_channel
        self.n_jobs = n_jobs
        self.on_decode_failure = on_decode_failure
        self.logger = logging.getLogger()

        if params.S_max is None or params.subpacketization <= params.S_max:
            self.batch_size_ = params.K
        else:
            self.batch_size_, _ = feasible_speedup(
                params.K, params.gamma, params.L, params.S_max
            )

    def __repr__(self):
        return "{}(K={}, L={}, gamma={}, job={}, mode={})".format(
            type(self).__name__,
            self.params.K,
            self.params.L,
            self.params.gamma,
            self.job.name,
            self.mode,
        )

    def _make_channel(self):
        return ChannelModel(
            mode=self.mode,
            seed=self.seed,
            noise_variance=self.noise_variance,
            power=self.power,
            identity=self.identity_channel,
        )

    def _batch_params(self):
        return SystemParams(
            K=self.batch_size_,
            L=self.params.L,
            gamma=self.params.gamma,
            Tc=self.params.Tc,
        )

    def _run_batch(self, offset, batch_params, split, channel, trace):
        """Map, shuffle and reduce one batch of coded nodes."""
        layout = build_groups(batch_params, offset=offset)
        plan = assign(layout, split.keys())
        schedule = build_schedule(plan, batch_params)

        coverage = verify_coverage(plan, schedule)
        if not coverage.ok:
            msg = (
                "The schedule of nodes {}..{} has {} coverage violations."
            )
            msg = msg.format(
                layout.nodes[0], layout.nodes[-1], coverage.violations
            )
            self.logger.error(msg)
            raise CoverageMismatchError(msg)

        mapped = map_phase(plan, split, self.job, n_jobs=self.n_jobs)
        delivered, report = run_shuffle(
            plan,
            schedule,
            channel,
            mapped,
            batch_params,
            n_jobs=self.n_jobs,
            on_decode_failure=self.on_decode_failure,
            trace=trace,
        )

        outputs, failed = {}, []
        for node in plan.nodes:
            local = mapped[layout.group_of(node)]
            try:
                out = reduce_node(node, local, delivered[node], self.job, plan)
            except IncompleteShuffleError:
                if self.on_decode_failure == "raise":
                    raise
                failed.append(node)
                continue
            outputs[out.q] = out.value

        return plan, mapped, outputs, failed, report

    def _serve_leftovers(self, plan, mapped, leftovers, channel, unit):
        """
        Serve every leftover node by uncoded unicasts. The ``m``-th leftover
        node maps the same packets as the ``m``-th node of the first batch
        and receives every missing value from the first node of the group
        ``sigma`` of its packet.
        """
        layout = plan.layout
        values = {}
        for group_values in mapped.values():
            values.update(group_values)
        symbol_time = self.params.Tc / sum(
            v.numeric_len for v in values.values()
        )

        outputs, failed = {}, []
        n_unicasts, n_symbols, failures = 0, 0, 0
        for m, node in enumerate(leftovers, start=1):
            shadow = layout.nodes[m - 1]
            local = mapped[layout.group_of(shadow)]
            received = {}
            for packet in plan.missing(shadow):
                value = mapped[packet.sigma][(node, packet)]
                tx = layout.members(packet.sigma)[0]
                H = channel.slot_matrices((tx,), {0: (node,)})[0]
                symbols = encode_payload(value.payload)
                x = zf_precoder(H, channel.cond_bound) @ symbols.unsqueeze(0)
                y = channel.propagate(H[0], x) / (channel.power ** 0.5)
                n_unicasts += 1
                n_symbols += value.numeric_len
                try:
                    payload = decode_payload(y)
                except DecodeError:
                    failures += 1
                    msg = "Leftover node {} failed to decode {}."
                    msg = msg.format(node, packet)
                    if self.on_decode_failure == "raise":
                        self.logger.error(msg)
                        raise DecodeError(msg, None, node)
                    self.logger.warning(msg)
                    continue
                received[value.key] = IntermediateValue(
                    q=node, packet=packet, payload=payload
                )

            try:
                out = self._reduce_leftover(node, local, received, plan)
            except IncompleteShuffleError:
                if self.on_decode_failure == "raise":
                    raise
                failed.append(node)
                continue
            outputs[out.q] = out.value

        gamma, K = self.params.gamma, self.params.K
        report = DelayReport(
            slot_count=n_unicasts,
            even_delay=n_unicasts * unit,
            padded_delay=n_symbols * symbol_time,
            closed_form=Fraction(len(leftovers), K)
            * (1 - gamma)
            * self.params.Tc,
            nodes_served_per_slot=1 if n_unicasts else 0,
            uncoded_slot_count=n_unicasts,
            uncoded_delay=n_unicasts * unit,
            uncoded_padded_delay=n_symbols * symbol_time,
            checksum_failures=failures,
        )
        log_phase(
            self.logger,
            "leftover",
            nodes=len(leftovers),
            unicasts=n_unicasts,
            delay=report.even_delay,
        )

        return outputs, failed, report

    def _reduce_leftover(self, node, local, received, plan):
        shadow_plan = dataclasses.replace(
            plan, reduce_assignment={node: node}
        )
        return reduce_node(node, local, received, self.job, shadow_plan)

    def run(self, dataset, trace=None):
        """
        Run the job on ``dataset``.

        Parameters
        ----------
        dataset : Dataset
            The records to process.
        trace : list, default=None
            If given, one record per transmission slot is appended to it.

        Returns
        -------
        result : RunResult
            The reduced outputs, the oracle outputs and the delay report.
        """
        params = self.params
        batch_params = self._batch_params()
        packets = enumerate_packets(batch_params)
        split = split_dataset(dataset, packets)
        channel = self._make_channel()

        n_batches, n_left = divmod(params.K, self.batch_size_)
        log_phase(
            self.logger,
            "plan",
            K=params.K,
            L=params.L,
            gamma=params.gamma,
            S=len(packets),
            batch_size=self.batch_size_,
            batches=n_batches,
            leftover=n_left,
        )

        outputs, failed, report, first = {}, [], None, None
        for b in range(n_batches):
            plan, mapped, batch_out, batch_failed, batch_report = (
                self._run_batch(
                    b * self.batch_size_, batch_params, split, channel, trace
                )
            )
            if first is None:
                first = (plan, mapped)
            outputs.update(batch_out)
            failed.extend(batch_failed)
            report = (
                batch_report
                if report is None
                else report.combine(batch_report)
            )

        leftovers = tuple(
            range(n_batches * self.batch_size_ + 1, params.K + 1)
        )
        if leftovers:
            unit = params.Tc / (params.n_functions * len(packets))
            left_out, left_failed, left_report = self._serve_leftovers(
                first[0], first[1], leftovers, channel, unit
            )
            outputs.update(left_out)
            failed.extend(left_failed)
            report = report.combine(left_report)

        oracle = None
        if channel.noisy:
            self.logger.warning(
                "The channel is noisy; skipping the oracle comparison."
            )
        else:
            oracle = {
                out.q: out.value
                for out in centralized_oracle(self.job, dataset)
            }

        result = RunResult(
            params=params,
            outputs=outputs,
            oracle=oracle,
            delay=report,
            batch_size=self.batch_size_,
            n_batches=n_batches,
            leftover_nodes=leftovers,
            failed_nodes=sorted(failed),
            trace=trace if trace is not None else [],
        )

        if result.mismatches:
            self.logger.error(
                "Outputs differ from the oracle for functions {}.".format(
                    result.mismatches
                )
            )
        log_phase(
            self.logger,
            "reduce",
            outputs=len(outputs),
            failed=len(failed),
            matches=result.matches,
        )
        log_phase(
            self.logger,
            "delay",
            even=report.even_delay,
            padded=report.padded_delay,
            closed_form=report.closed_form,
            reconciled=report.reconciled,
        )

        return result
