"""
  Command-line surface: ``plan``, ``run``, ``sweep`` and ``uneven``.

  Options are resolved with the precedence flags > config file > defaults.
  The config file is flat ``key=value`` text whose keys are the flag names
  without dashes; its path comes from ``--config`` or the
  ``CODEDMR_CONFIG`` environment variable.
"""


import os
import sys
import logging
import functools
from io import StringIO
from fractions import Fraction
from dataclasses import dataclass, fields, replace
from typing import Optional

import click

from . import _constants as const
from .exceptions import (
    CoverageMismatchError,
    DatasetTooSmallError,
    DecodeError,
    IncompleteShuffleError,
    InfeasibleError,
    InvalidParamsError,
)
from .mapreduce import Dataset
from .jobs import available_jobs, get_job
from .planner import (
    SystemParams,
    assign,
    build_groups,
    enumerate_packets,
    make_plan_report,
    batched_shuffle_delay,
)
from .shuffle import build_schedule
from .simulator import GroupCodedMapReduce
from .uneven import (
    analyze_profile,
    gcmr_slots,
    measure_profile,
    read_size_profile,
    write_size_profile,
)
from .utils import io
from .utils.logging import get_tb_logger, set_logger


__all__ = ["RunConfig", "main", "bundled_profile"]


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DECODE = 3
EXIT_ORACLE = 4
EXIT_RECONCILE = 5
EXIT_COVERAGE = 6

SWEEP_HEADER = [
    "K",
    "L",
    "gamma",
    "S",
    "K_bar_L",
    "t_bar_L",
    "delay_uncoded",
    "delay_cmr",
    "delay_gcmr",
    "delay_uncoded_float",
    "delay_cmr_float",
    "delay_gcmr_float",
]

_DATASET_DIR = os.path.join(os.path.dirname(__file__), "datasets")


def bundled_profile(name):
    """Return the path of a size profile shipped with the package."""
    path = os.path.join(_DATASET_DIR, name + ".profile")
    if not os.path.exists(path):
        msg = "Unknown bundled profile: {}."
        raise FileNotFoundError(msg.format(name))
    return path


def _fmt(value):
    """Render an exact fraction as ``p/q (decimal)``."""
    value = Fraction(value)
    return "{} ({:.6f})".format(value, float(value))


def _parse_synthetic(spec):
    """Parse ``"F=<n>,len=<n>"`` into the arguments of a synthetic dataset."""
    keys = {"F": "n_records", "len": "record_length", "skew": "skew"}
    out = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            msg = "Invalid synthetic spec `{}`: expected key=value items."
            raise InvalidParamsError(msg.format(spec))
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in keys:
            msg = "Unknown synthetic key `{}`, should be one of {}."
            raise InvalidParamsError(msg.format(key, ",".join(keys)))
        out[keys[key]] = float(value) if key == "skew" else int(value)
    if "n_records" not in out:
        msg = "The synthetic spec `{}` does not set F."
        raise InvalidParamsError(msg.format(spec))
    return out


@dataclass
class RunConfig:
    """Every option of the command-line surface, after precedence."""

    K: Optional[int] = None
    L: int = 1
    t: Optional[int] = None
    smax: Optional[int] = None
    tc: Fraction = Fraction(1)
    job: str = "word-count"
    dataset: Optional[str] = None
    synthetic: Optional[str] = None
    seed: int = const.DEFAULT_SEED
    mode: str = "wireless"
    noise: float = 0.0
    power: float = 1.0
    identity: bool = False
    out: Optional[str] = None
    csv: Optional[str] = None
    trace: Optional[str] = None
    n_jobs: Optional[int] = None

    _casts = {
        "K": int,
        "L": int,
        "t": int,
        "smax": int,
        "tc": Fraction,
        "seed": int,
        "noise": float,
        "power": float,
        "n_jobs": int,
        "identity": lambda v: str(v).lower() in ("1", "true", "yes"),
    }

    @classmethod
    def resolve(cls, config_path=None, **flags):
        """
        Merge defaults, the config file and the flags that were given,
        in increasing order of precedence.
        """
        names = {f.name for f in fields(cls)}
        values = {}

        if config_path:
            for key, raw in io.read_config(config_path).items():
                if key not in names:
                    msg = "Unknown config key `{}` in `{}`."
                    raise InvalidParamsError(msg.format(key, config_path))
                cast = cls._casts.get(key, str)
                try:
                    values[key] = cast(raw)
                except (TypeError, ValueError, ZeroDivisionError):
                    msg = "Invalid value `{}` for config key `{}`."
                    raise InvalidParamsError(msg.format(raw, key))

        for key, value in flags.items():
            if key in names and value is not None:
                values[key] = value

        return cls(**values)

    def params(self):
        """Build the validated :class:`SystemParams`."""
        for name in ("K", "t"):
            if getattr(self, name) is None:
                msg = "The option --{} is required."
                raise InvalidParamsError(msg.format(name))
        return SystemParams.from_redundancy(
            self.K, self.L, self.t, S_max=self.smax, Tc=self.tc
        )

    def load_dataset(self):
        if self.dataset is not None:
            return Dataset.from_file(self.dataset)
        if self.synthetic is not None:
            spec = _parse_synthetic(self.synthetic)
            return Dataset.synthetic(seed=self.seed, **spec)
        raise InvalidParamsError("Either --dataset or --synthetic is needed.")


def _exit_on_error(func):
    """Map the error taxonomy onto the exit codes of the CLI."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CoverageMismatchError as e:
            click.echo("Error: {}".format(e), err=True)
            sys.exit(EXIT_COVERAGE)
        except (DecodeError, IncompleteShuffleError) as e:
            click.echo("Error: {}".format(e), err=True)
            sys.exit(EXIT_DECODE)
        except (
            InvalidParamsError,
            InfeasibleError,
            DatasetTooSmallError,
            NotImplementedError,
            FileNotFoundError,
            ValueError,
        ) as e:
            click.echo("Error: {}".format(e), err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


def _emit(lines, out=None):
    text = "\n".join(lines)
    click.echo(text)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")


def _param_options(func):
    options = [
        click.option("--K", "K", type=int, help="Number of nodes."),
        click.option("--L", "L", type=int, help="Nodes per group."),
        click.option("--t", "t", type=int, help="Redundancy t = K gamma."),
        click.option("--smax", type=int, help="Maximum subpacketization."),
        click.option("--tc", type=str, help="Reference time Tc."),
        click.option("--out", type=click.Path(), help="Report file."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_options(func):
    options = [
        click.option("--job", type=click.Choice(available_jobs())),
        click.option("--dataset", type=click.Path(), help="Record file."),
        click.option("--synthetic", help='Synthetic data, "F=<n>,len=<n>".'),
        click.option("--seed", type=int, help="Seed of all randomness."),
        click.option(
            "--mode", type=click.Choice(["wireless", "wired"]), default=None
        ),
        click.option("--noise", type=float, help="Receiver noise variance."),
        click.option("--power", type=float, help="Transmit power."),
        click.option(
            "--identity/--no-identity",
            default=None,
            help="Use identity channel matrices.",
        ),
        click.option("--trace", type=click.Path(), help="Slot trace file."),
        click.option("--n-jobs", "n_jobs", type=int, help="Worker count."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config(ctx, **flags):
    if flags.get("tc") is not None:
        try:
            flags["tc"] = Fraction(flags["tc"])
        except (ValueError, ZeroDivisionError):
            msg = "Invalid value `{}` for --tc."
            raise InvalidParamsError(msg.format(flags["tc"]))
    return RunConfig.resolve(ctx.obj.get("config_path"), **flags)


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(),
    envvar=const.CONFIG_ENV_VAR,
    help="Flat key=value config file.",
)
@click.option(
    "--log-level",
    default="warning",
    type=click.Choice(["debug", "info", "warning", "error", "critical"]),
)
@click.pass_context
def main(ctx, config_path, log_level):
    """Plan, simulate and analyze group-based coded MapReduce."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    set_logger(log_console_level=log_level)


@main.command()
@_param_options
@click.pass_context
@_exit_on_error
def plan(ctx, **flags):
    """Print the subpacketization, speedups and closed-form delays."""
    config = _config(ctx, **flags)
    params = config.params()
    report = make_plan_report(params)

    lines = [
        "K: {} | L: {} | gamma: {} | S_max: {}".format(
            params.K,
            params.L,
            params.gamma,
            "none" if params.S_max is None else params.S_max,
        ),
        "S: {}".format(report.S),
        "S_cmr: {}".format(report.S_cmr),
        "K_bar: {}".format(report.K_bar),
        "t_bar: {}".format(report.t_bar),
        "K_bar_L: {}".format(report.K_bar_L),
        "t_bar_L: {}".format(report.t_bar_L),
        "delay_uncoded: {}".format(_fmt(report.delay_uncoded)),
        "delay_cmr: {}".format(_fmt(report.delay_cmr)),
        "delay_gcmr: {}".format(_fmt(report.delay_gcmr)),
        "delay_gcmr_batched: {}".format(_fmt(batched_shuffle_delay(params))),
    ]
    _emit(lines, config.out)


@main.command()
@_param_options
@_run_options
@click.pass_context
@_exit_on_error
def run(ctx, **flags):
    """Run a job end to end and check it against the oracle."""
    config = _config(ctx, **flags)
    params = config.params()
    dataset = config.load_dataset()

    model = GroupCodedMapReduce(
        params,
        job=config.job,
        mode=config.mode,
        seed=config.seed,
        noise_variance=config.noise,
        power=config.power,
        identity_channel=config.identity,
        n_jobs=config.n_jobs,
        on_decode_failure="count" if config.noise > 0 else "raise",
    )
    trace = [] if config.trace else None
    result = model.run(dataset, trace=trace)
    if config.trace:
        io.write_trace(config.trace, result.trace)

    delay = result.delay
    reconciled = delay.reconciled and delay.closed_form == result.closed_form
    if result.matches is None:
        match = "skipped"
    else:
        match = "true" if result.matches else "false"
    power = delay.mean_tx_power

    lines = [
        "job: {} | F: {} | mode: {}".format(
            model.job.name, dataset.F, config.mode
        ),
        "batches: {} x {} nodes | leftover: {}".format(
            result.n_batches, result.batch_size, len(result.leftover_nodes)
        ),
        "slots: {}".format(delay.slot_count),
        "nodes_served_per_slot: {}".format(delay.nodes_served_per_slot),
        "even_delay: {}".format(_fmt(delay.even_delay)),
        "padded_delay: {}".format(_fmt(delay.padded_delay)),
        "closed_form: {}".format(_fmt(result.closed_form)),
        "uncoded_delay: {}".format(_fmt(delay.uncoded_delay)),
        "uncoded_padded_delay: {}".format(_fmt(delay.uncoded_padded_delay)),
        "csi_exchanges: {}".format(delay.csi_exchanges),
        "mean_tx_power: {}".format(
            "n/a" if power is None else "{:.6f}".format(power)
        ),
        "symbol_errors: {}".format(delay.symbol_errors),
        "checksum_failures: {}".format(delay.checksum_failures),
        "failed_nodes: {}".format(len(result.failed_nodes)),
        "reconciled: {}".format("true" if reconciled else "false"),
        "oracle_match: {}".format(match),
    ]
    _emit(lines, config.out)

    if result.matches is False:
        sys.exit(EXIT_ORACLE)
    if not reconciled:
        sys.exit(EXIT_RECONCILE)


def _split_ints(value, name, allow_none=False):
    items = []
    for token in str(value).split(","):
        token = token.strip()
        if not token:
            continue
        if allow_none and token.lower() in ("none", "inf"):
            items.append(None)
            continue
        try:
            items.append(int(token))
        except ValueError:
            msg = "Invalid value `{}` in the --{} list."
            raise InvalidParamsError(msg.format(token, name))
    return items


def sweep_rows(Ks, Ls, ts, smaxes, Tc=1):
    """Return one CSV row per admissible parameter point."""
    rows = []
    for K in Ks:
        for L in Ls:
            for t in ts:
                for S_max in smaxes:
                    try:
                        params = SystemParams.from_redundancy(
                            K, L, t, S_max=S_max, Tc=Tc
                        )
                        report = make_plan_report(params)
                    except (InvalidParamsError, InfeasibleError):
                        continue
                    delays = [
                        report.delay_uncoded,
                        report.delay_cmr,
                        report.delay_gcmr,
                    ]
                    rows.append(
                        [
                            K,
                            L,
                            str(params.gamma),
                            report.S,
                            report.K_bar_L,
                            str(report.t_bar_L),
                        ]
                        + [str(d) for d in delays]
                        + ["{:.9f}".format(float(d)) for d in delays]
                    )
    return rows


@main.command()
@click.option("--K", "K", help="Comma separated node counts.")
@click.option("--L", "L", help="Comma separated group sizes.")
@click.option("--t", "t", help="Comma separated redundancies.")
@click.option("--smax", help='Comma separated S_max values, "none" for none.')
@click.option("--tc", type=str, help="Reference time Tc.")
@click.option("--csv", type=click.Path(), help="CSV file, stdout if unset.")
@click.pass_context
@_exit_on_error
def sweep(ctx, K, L, t, smax, tc, csv):
    """Tabulate the closed-form delays over a parameter grid."""
    file_config = {}
    if ctx.obj.get("config_path"):
        file_config = io.read_config(ctx.obj["config_path"])

    def pick(flag, key, default=None):
        if flag is not None:
            return flag
        return file_config.get(key, default)

    K, L, t = pick(K, "K"), pick(L, "L", "1"), pick(t, "t")
    if K is None or t is None:
        raise InvalidParamsError("The options --K and --t are required.")
    Ks, Ls, ts = _split_ints(K, "K"), _split_ints(L, "L"), _split_ints(t, "t")
    smaxes = _split_ints(pick(smax, "smax", "none"), "smax", allow_none=True)
    Tc = Fraction(pick(tc, "tc", "1"))
    csv = pick(csv, "csv")

    rows = sweep_rows(Ks, Ls, ts, smaxes or [None], Tc=Tc)
    if not rows:
        raise InvalidParamsError(
            "The sweep has no admissible parameter point."
        )

    tb_logger = get_tb_logger()
    if tb_logger:
        for idx, row in enumerate(rows):
            for name, value in zip(SWEEP_HEADER[-3:], row[-3:]):
                tb_logger.add_scalar("sweep/" + name, float(value), idx)

    if csv:
        with open(csv, "w", encoding="utf-8", newline="") as f:
            io.write_csv(f, SWEEP_HEADER, rows)
        logging.getLogger().info(
            "Wrote {} sweep rows to {}".format(len(rows), csv)
        )
    else:
        buffer = StringIO()
        io.write_csv(buffer, SWEEP_HEADER, rows)
        click.echo(buffer.getvalue(), nl=False)


@main.command()
@_param_options
@_run_options
@click.option("--profile", type=click.Path(), help="Size profile file.")
@click.option("--fixture", help="Name of a bundled size profile.")
@click.option("--csv", type=click.Path(), help="Per-slot padding waste.")
@click.option(
    "--write-profile",
    type=click.Path(),
    help="Save the measured size profile with its slots.",
)
@click.pass_context
@_exit_on_error
def uneven(ctx, profile, fixture, write_profile, **flags):
    """Report the effective gain under zero padding."""
    config = _config(ctx, **flags)
    plan_, schedule = None, None

    if write_profile is not None and (profile, fixture) != (None, None):
        raise ValueError(
            "--write-profile only applies to profiles measured from a"
            " dataset."
        )

    if fixture is not None:
        size_profile = read_size_profile(bundled_profile(fixture))
        source = "fixture {}".format(fixture)
    elif profile is not None:
        size_profile = read_size_profile(profile)
        source = profile
    else:
        params = config.params()
        dataset = config.load_dataset()
        job = get_job(config.job, n_functions=params.n_functions)
        plan_ = assign(build_groups(params), enumerate_packets(params))
        schedule = build_schedule(plan_, params)
        size_profile = measure_profile(job, dataset, plan_)
        source = "{} on F={}".format(job.name, dataset.F)

        if write_profile is not None:
            slots, needs = gcmr_slots(plan_, schedule)
            write_size_profile(
                write_profile,
                replace(size_profile, slots=slots, needs=needs),
            )
            logging.getLogger().info(
                "Wrote the size profile to {}".format(write_profile)
            )

    report = analyze_profile(
        size_profile, plan=plan_, schedule=schedule, Tc=config.tc
    )

    lines = [
        "profile: {}".format(source),
        "relative_unevenness: {}".format(
            _fmt(size_profile.relative_unevenness)
        ),
        "uncoded_delay: {}".format(_fmt(report.uncoded_delay)),
        "coded_delay_padded: {}".format(_fmt(report.coded_delay_padded)),
        "effective_gain: {}".format(_fmt(report.effective_gain)),
        "theoretical_gain: {}".format(_fmt(report.theoretical_gain)),
    ]
    _emit(lines, config.out)

    if config.csv:
        rows = [
            [idx, str(w), "{:.9f}".format(float(w))]
            for idx, w in enumerate(report.padding_waste)
        ]
        with open(config.csv, "w", encoding="utf-8", newline="") as f:
            io.write_csv(
                f, ["slot", "padding_waste", "padding_waste_float"], rows
            )


if __name__ == "__main__":
    main()
