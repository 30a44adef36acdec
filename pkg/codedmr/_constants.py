COND_BOUND = 1e4
ZF_TOLERANCE = 1e-9
SYMBOL_LEVELS = 16
LENGTH_BYTES = 4
CRC_BYTES = 4
DEFAULT_SEED = 0
MAX_CHANNEL_REDRAWS = 1000
CONFIG_ENV_VAR = "CODEDMR_CONFIG"


__job_doc = """
    Parameters
    ----------
    n_functions : int
        The number of output functions ``Q`` of the job. The coded scheme
        assigns one function per node, so ``n_functions`` equals the number
        of computing nodes ``K``.

    Attributes
    ----------
    name : string
        The name under which the job is registered.
"""


__map_doc = """
    Map one packet into the intermediate value of one output function.

    Parameters
    ----------
    q : int
        The output function id, in ``{1, ..., n_functions}``.
    records : list of bytes
        The content of the packet.

    Returns
    -------
    payload : bytes
        The serialized intermediate value. It must only depend on ``q``
        and ``records``.
"""


__reduce_doc = """
    Reduce the per-packet intermediate values of one output function.

    Parameters
    ----------
    q : int
        The output function id.
    payloads : list of bytes
        The intermediate values of function ``q``, one per packet, in the
        canonical packet order.

    Returns
    -------
    value : object
        The output value ``u_q``.
"""


__oracle_doc = """
    Compute the output value of one function on the whole dataset,
    without splitting it into packets.

    Parameters
    ----------
    q : int
        The output function id.
    records : list of bytes
        All records of the dataset.

    Returns
    -------
    value : object
        The output value ``u_q``, comparable with the value returned by
        :meth:`reduce_fn`.
"""


__simulator_doc = """
    Parameters
    ----------
    params : SystemParams
        The system parameters ``(K, L, gamma, S_max, Tc)``.
    job : {string, BaseJob}
        The job to run. A string is looked up in the job registry and
        instantiated with ``n_functions=K``.
    mode : {"wireless", "wired"}, default="wireless"
        The channel mode used in the shuffle phase.
    seed : int, default=0
        The seed from which all channel and noise randomness is drawn.
    noise_variance : float, default=0
        The variance of the receiver noise. Zero gives exact decoding.
    power : float, default=1
        The transmit power ``P``, only used when ``noise_variance > 0``.
    identity_channel : bool, default=False
        If ``True``, every channel matrix is the identity (wired test
        mode).
    n_jobs : int, default=None
        The number of workers used by the map phase and by the receivers
        of one slot. ``None`` runs sequentially.

    Attributes
    ----------
    batch_size_ : int
        The number of nodes the coded scheme encodes over, ``K`` when the
        subpacketization constraint does not bind.
"""
