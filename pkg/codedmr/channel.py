"""
  The fully connected D2D medium. A transmitting group of ``L`` nodes
  reaches the ``L`` nodes of a receiving group through an ``L x L`` complex
  matrix whose row ``j`` is the channel seen by the ``j``-th receiver.
  Wireless channels are redrawn for every slot; wired channels are fixed
  pseudo-random network coding coefficients drawn once per run.
"""


import math
import logging

import torch

from . import _constants as const
from .exceptions import SingularChannelError


__all__ = ["CHANNEL_MODES", "ChannelModel", "zf_precoder", "zf_residual"]


CHANNEL_MODES = ("wireless", "wired")


def zf_precoder(H, cond_bound=const.COND_BOUND):
    """Return the zero-forcing precoder ``H^{-1}`` of a group pair."""
    cond = float(torch.linalg.cond(H))
    if not math.isfinite(cond) or cond > cond_bound:
        msg = (
            "The channel matrix has condition number {:.3e}, above the"
            " bound {:.1e}; zero-forcing is not applicable."
        )
        raise SingularChannelError(msg.format(cond, cond_bound))

    return torch.linalg.inv(H)


def zf_residual(H):
    """
    Return ``max_j |h_j^T H^{-1} - e_j^T|``, the worst deviation of any
    receiver from seeing only its own stream.
    """
    eye = torch.eye(H.size(0), dtype=H.dtype)
    return float((H @ torch.linalg.inv(H) - eye).abs().max())


class ChannelModel(object):
    """
    Parameters
    ----------
    mode : {"wireless", "wired"}, default="wireless"

        - If ``"wireless"``, fading matrices are redrawn for every slot.
        - If ``"wired"``, the coefficient matrix of every ordered group
          pair is drawn once and reused for the whole run.
    seed : int, default=0
        The seed of the generator behind all channel and noise draws.
    noise_variance : float, default=0
        The variance of the circularly-symmetric receiver noise.
    power : float, default=1
        The transmit power ``P``, only used when ``noise_variance > 0``.
    cond_bound : float, default=1e4
        Matrices with a larger condition number are redrawn.
    identity : bool, default=False
        If ``True``, every matrix is the identity, which turns the
        precoded signal into a plain superposition.
    """

    def __init__(
        self,
        mode="wireless",
        seed=const.DEFAULT_SEED,
        noise_variance=0.0,
        power=1.0,
        cond_bound=const.COND_BOUND,
        identity=False,
    ):
        if mode not in CHANNEL_MODES:
            msg = "Unrecognized channel mode: {}, should be one of {}."
            raise ValueError(msg.format(mode, ",".join(CHANNEL_MODES)))
        if not noise_variance >= 0:
            msg = "The noise variance should be non-negative, but got {}."
            raise ValueError(msg.format(noise_variance))
        if not power > 0:
            msg = "The transmit power should be positive, but got {}."
            raise ValueError(msg.format(power))

        self.mode = mode
        self.seed = seed
        self.noise_variance = float(noise_variance)
        self.power = float(power)
        self.cond_bound = cond_bound
        self.identity = identity
        self.logger = logging.getLogger()

        self.generator = torch.Generator().manual_seed(seed)
        self.n_redraws_ = 0
        self._fixed = {}

    @property
    def noisy(self):
        return self.noise_variance > 0

    def draw_matrix(self, size):
        """
        Draw an ``size x size`` matrix of unit-variance complex Gaussian
        entries, redrawing until it meets the condition bound.
        """
        for _ in range(const.MAX_CHANNEL_REDRAWS):
            H = torch.randn(
                (size, size), dtype=torch.complex128, generator=self.generator
            )
            if float(torch.linalg.cond(H)) <= self.cond_bound:
                return H
            self.n_redraws_ += 1

        msg = "No {}x{} channel met the condition bound after {} draws."
        raise SingularChannelError(
            msg.format(size, size, const.MAX_CHANNEL_REDRAWS)
        )

    def _matrix(self, tx_nodes, rx_nodes):
        size = len(tx_nodes)
        if self.identity:
            return torch.eye(size, dtype=torch.complex128)
        if self.mode == "wired":
            key = (tuple(tx_nodes), tuple(rx_nodes))
            if key not in self._fixed:
                self._fixed[key] = self.draw_matrix(size)
            return self._fixed[key]
        return self.draw_matrix(size)

    def slot_matrices(self, tx_nodes, rx_groups):
        """
        Return ``H_{i,p}`` for every receiving group ``p`` of one slot.

        Parameters
        ----------
        tx_nodes : tuple of int
            The nodes of the transmitting group, in antenna order.
        rx_groups : dict
            Maps every receiving group id to its nodes.
        """
        return {
            p: self._matrix(tx_nodes, nodes)
            for p, nodes in sorted(rx_groups.items())
        }

    def propagate(self, h, x):
        """Return ``y = sqrt(P) h^T x + w`` for one receiver."""
        y = math.sqrt(self.power) * (h @ x)
        if self.noisy:
            noise = torch.randn(
                y.size(), dtype=torch.complex128, generator=self.generator
            )
            y = y + math.sqrt(self.noise_variance) * noise
        return y
