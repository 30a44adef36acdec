"""
  Logging for codedmr runs: a console handler on stderr (reports go to
  stdout), an optional per-run log file and an optional TensorBoard writer
  for per-slot and per-sweep scalars.
"""


import os
import time
import logging


__all__ = [
    "set_logger",
    "get_tb_logger",
    "init_tb_logger",
    "format_fields",
    "log_phase",
]


_tb_logger = None

_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL,
}

_CONSOLE_FORMAT = "%(asctime)s - %(levelname)s: %(message)s"
_FILE_FORMAT = (
    "%(asctime)s - %(filename)s[line:%(lineno)d] - %(levelname)s: %(message)s"
)


def _get_level(level):
    try:
        return _LEVELS[str(level).lower()]
    except KeyError:
        msg = (
            "The log level must be one of {{DEBUG, INFO, WARNING, ERROR,"
            " CRITICAL}}, but got {} instead."
        )
        raise ValueError(msg.format(str(level).upper()))


def _handler(handler, level, fmt):
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt))
    return handler


def set_logger(
    log_file=None,
    log_console_level="info",
    log_file_level=None,
    use_tb_logger=False,
    log_dir=None,
):
    """
    Bind the root logger used by every codedmr module.

    Parameters
    ----------
    log_file : str, default=None
        The run name. If given, DEBUG and above is also written to
        ``<log_dir>/<log_file>-<timestamp>.log``.
    log_console_level : str, default="info"
        The lowest level printed on stderr.
    log_file_level : str, default=None
        The lowest level written to the log file, DEBUG when ``None``.
    use_tb_logger : bool, default=False
        Whether to open a TensorBoard writer next to the log file.
    log_dir : str, default=None
        The directory of log files, ``./logs`` when ``None``.
    """
    console_level = _get_level(log_console_level)
    file_level = (
        logging.DEBUG if log_file_level is None else _get_level(log_file_level)
    )

    logger = logging.getLogger()
    for h in list(logger.handlers):
        logger.removeHandler(h)
    logger.setLevel(logging.DEBUG)
    logger.addHandler(
        _handler(logging.StreamHandler(), console_level, _CONSOLE_FORMAT)
    )

    stamp = time.strftime("%Y_%m_%d_%H_%M", time.localtime())
    if log_dir is None:
        log_dir = os.path.join(os.getcwd(), "logs")
    run_name = "{}-{}".format(log_file or "codedmr", stamp)

    if log_file is not None:
        os.makedirs(log_dir, exist_ok=True)
        path = os.path.join(log_dir, run_name + ".log")
        logger.addHandler(
            _handler(
                logging.FileHandler(path, mode="w"), file_level, _FILE_FORMAT
            )
        )

    if use_tb_logger:
        tb_dir = os.path.join(log_dir, run_name + "_tb_logger")
        os.makedirs(tb_dir, exist_ok=True)
        init_tb_logger(log_dir=tb_dir)

    return logger


def init_tb_logger(log_dir):
    """Open the process-wide TensorBoard writer if none is open yet."""
    try:
        import tensorboard  # noqa: F401
    except ModuleNotFoundError:
        msg = (
            "Cannot load the module tensorboard. Please install it to log"
            " slot and sweep scalars."
        )
        raise ModuleNotFoundError(msg)

    from torch.utils.tensorboard import SummaryWriter

    global _tb_logger

    if _tb_logger is None:
        _tb_logger = SummaryWriter(log_dir=log_dir)
    return _tb_logger


def get_tb_logger():
    return _tb_logger


def format_fields(phase, **fields):
    """Render one phase summary as ``phase: map | groups: 4 | ...``."""
    items = ["phase: {}".format(phase)]
    items.extend("{}: {}".format(k, v) for k, v in fields.items())
    return " | ".join(items)


def log_phase(logger, phase, level=logging.INFO, **fields):
    """Log a phase summary line on ``logger``."""
    logger.log(level, format_fields(phase, **fields))
