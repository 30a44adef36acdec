import torch
import pytest

from codedmr import _constants as const
from codedmr.channel import ChannelModel, zf_precoder, zf_residual
from codedmr.exceptions import SingularChannelError
from codedmr.utils.logging import set_logger


set_logger("pytest_channel")


@pytest.mark.parametrize("size", [1, 4, 8])
def test_zero_forcing_residual(size):
    channel = ChannelModel(seed=0)
    for _ in range(1000):
        H = channel.draw_matrix(size)
        assert float(torch.linalg.cond(H)) <= const.COND_BOUND
        assert zf_residual(H) < const.ZF_TOLERANCE


def test_singular_matrix():
    H = torch.ones((2, 2), dtype=torch.complex128)
    with pytest.raises(SingularChannelError) as excinfo:
        zf_precoder(H)
    assert "condition number" in str(excinfo.value)


def test_seeded_draws():
    a, b = ChannelModel(seed=7), ChannelModel(seed=7)
    for _ in range(5):
        assert torch.equal(a.draw_matrix(3), b.draw_matrix(3))
    other = ChannelModel(seed=8).draw_matrix(3)
    assert not torch.equal(other, ChannelModel(seed=7).draw_matrix(3))


def test_channel_modes():
    rx = {2: (2, 4), 3: (3, 5)}

    wired = ChannelModel(mode="wired", seed=0)
    first = wired.slot_matrices((1, 6), rx)
    second = wired.slot_matrices((1, 6), rx)
    assert torch.equal(first[2], second[2])
    assert not torch.equal(first[2], first[3])

    wireless = ChannelModel(mode="wireless", seed=0)
    first = wireless.slot_matrices((1, 6), rx)
    second = wireless.slot_matrices((1, 6), rx)
    assert not torch.equal(first[2], second[2])

    identity = ChannelModel(identity=True)
    H = identity.slot_matrices((1, 6), rx)[2]
    assert torch.equal(H, torch.eye(2, dtype=torch.complex128))


def test_propagate():
    h = torch.tensor([1 + 1j, 2], dtype=torch.complex128)
    x = torch.ones((2, 3), dtype=torch.complex128)

    channel = ChannelModel(power=4.0)
    assert not channel.noisy
    assert torch.allclose(channel.propagate(h, x), 2 * (h @ x))

    noisy = ChannelModel(noise_variance=0.5, seed=0)
    assert noisy.noisy
    assert not torch.allclose(noisy.propagate(h, x), h @ x)


def test_invalid_arguments():
    with pytest.raises(ValueError) as excinfo:
        ChannelModel(mode="optical")
    assert "Unrecognized channel mode" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        ChannelModel(noise_variance=-1)
    assert "noise variance" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        ChannelModel(power=0)
    assert "transmit power" in str(excinfo.value)
