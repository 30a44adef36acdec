from .planner import SystemParams
from .planner import GroupLayout
from .planner import PacketIndex
from .planner import AssignmentPlan
from .planner import build_groups
from .planner import enumerate_packets
from .planner import assign
from .planner import subpacketization
from .planner import feasible_speedup
from .planner import shuffle_delay_closed_form
from .planner import batched_shuffle_delay
from .planner import total_execution_time
from .planner import make_plan_report
from .mapreduce import Dataset
from .mapreduce import IntermediateValue
from .mapreduce import split_dataset
from .mapreduce import map_phase
from .mapreduce import reduce_node
from .mapreduce import centralized_oracle
from .jobs import WordCountJob
from .jobs import SortBucketJob
from .jobs import SumJob
from .jobs import get_job
from .channel import ChannelModel
from .shuffle import build_schedule
from .shuffle import run_shuffle
from .shuffle import verify_coverage
from .shuffle import count_delay
from .shuffle import schedule_delay
from .simulator import GroupCodedMapReduce
from .uneven import SizeProfile
from .uneven import padded_slot_cost
from .uneven import effective_gain
from .uneven import measure_profile


__all__ = [
    "SystemParams",
    "GroupLayout",
    "PacketIndex",
    "AssignmentPlan",
    "build_groups",
    "enumerate_packets",
    "assign",
    "subpacketization",
    "feasible_speedup",
    "shuffle_delay_closed_form",
    "batched_shuffle_delay",
    "total_execution_time",
    "make_plan_report",
    "Dataset",
    "IntermediateValue",
    "split_dataset",
    "map_phase",
    "reduce_node",
    "centralized_oracle",
    "WordCountJob",
    "SortBucketJob",
    "SumJob",
    "get_job",
    "ChannelModel",
    "build_schedule",
    "run_shuffle",
    "verify_coverage",
    "count_delay",
    "schedule_delay",
    "GroupCodedMapReduce",
    "SizeProfile",
    "padded_slot_cost",
    "effective_gain",
    "measure_profile",
]
