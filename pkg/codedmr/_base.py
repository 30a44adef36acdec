import abc
import logging

from . import _constants as const


def codedmr_doc(header="", item="job"):
    """
    Prepend ``header`` to the shared numpydoc fragment named by ``item``,
    so jobs and the simulator document their arguments in one place.

    Parameters
    ----------
    header: string
       Introduction to the decorated class or method.
    item : string
       Type of the docstring item.
    """

    def get_doc(item):
        """Return the selected item."""
        __doc = {
            "job": const.__job_doc,
            "map": const.__map_doc,
            "reduce": const.__reduce_doc,
            "oracle": const.__oracle_doc,
            "simulator": const.__simulator_doc,
        }
        return __doc[item]

    def adddoc(obj):
        doc = [header + "\n\n"]
        doc.extend(get_doc(item))
        obj.__doc__ = "".join(doc)
        return obj

    return adddoc


class BaseJob(abc.ABC):
    """Base class for all decomposable jobs.

    A job computes ``Q`` output values ``u_q = phi_q(dataset)``, each of
    which decomposes as ``r_q(m_q(W_1), ..., m_q(W_S))`` over any split of
    the dataset into packets ``W_s``.

    WARNING: This class cannot be used directly.
    Please use the derived classes instead.
    """

    name = None

    def __init__(self, n_functions):
        if not n_functions > 0:
            msg = (
                "The number of output functions should be strictly"
                " positive, but got {} instead."
            )
            raise ValueError(msg.format(n_functions))

        self.n_functions = n_functions
        self.logger = logging.getLogger()

    def __repr__(self):
        return "{}(n_functions={})".format(
            type(self).__name__, self.n_functions
        )

    @property
    def functions(self):
        """Return the output function ids ``1, ..., Q``."""
        return range(1, self.n_functions + 1)

    @abc.abstractmethod
    def map_fn(self, q, records):
        """Docstrings decorated by downstream jobs."""

    @abc.abstractmethod
    def reduce_fn(self, q, payloads):
        """Docstrings decorated by downstream jobs."""

    @abc.abstractmethod
    def oracle_fn(self, q, records):
        """Docstrings decorated by downstream jobs."""
