"""
Tests for the residual U-Net: shapes, initialisation, batch norm and gradients
"""
import math

import pytest
import torch

from app.schemas.config import NetworkConfig
from app.services.recon_net import (
    NetworkShapeError,
    count_parameters,
    forward_backward,
    init_params,
    to_channels,
    zero_head,
)


def expected_parameter_count(depth: int, base: int) -> int:
    """Kernels, biases and batch-norm scale/shift of every block plus the 1x1 head."""
    widths = [base * 2 ** level for level in range(depth)]

    def double_block(c_in: int, c_out: int) -> int:
        return 9 * c_out * (c_in + c_out) + 6 * c_out

    total = 0
    c_in = 2
    for width in widths:
        total += double_block(c_in, width)
        c_in = width
    for width in reversed(widths[:-1]):
        total += double_block(c_in + width, width)
        c_in = width
    return total + widths[0] + 1


def _aliased(batch: int, size: int, seed: int, dtype=torch.complex128) -> torch.Tensor:
    generator = torch.Generator().manual_seed(seed)
    real = torch.randn((batch, size, size), generator=generator, dtype=torch.float64)
    imag = torch.randn((batch, size, size), generator=generator, dtype=torch.float64)
    return torch.complex(real, imag).to(dtype)


@pytest.mark.parametrize("depth,base", [(1, 4), (2, 4), (3, 16), (4, 8)])
def test_parameter_count_closed_form(depth, base):
    net = init_params(NetworkConfig(depth=depth, base_channels=base), torch.Generator().manual_seed(0))
    assert count_parameters(net) == expected_parameter_count(depth, base)


def test_small_network_parameter_count():
    net = init_params(NetworkConfig(depth=2, base_channels=4), torch.Generator().manual_seed(0))
    assert count_parameters(net) == 1757


def test_output_shapes(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(0), torch.float64)
    assert net(_aliased(3, 8, 0)).shape == (3, 8, 8)
    assert net(_aliased(1, 8, 1)[0]).shape == (8, 8)


def test_indivisible_grid_rejected():
    net = init_params(NetworkConfig(depth=3, base_channels=4), torch.Generator().manual_seed(0), torch.float64)
    with pytest.raises(NetworkShapeError):
        net(_aliased(1, 18, 0))


def test_zero_head_reduces_to_input_magnitude(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(0), torch.float64)
    zero_head(net)
    aliased = _aliased(2, 8, 3)
    assert torch.equal(net(aliased), aliased.abs())


def test_initialisation_statistics():
    net = init_params(NetworkConfig(depth=3, base_channels=16), torch.Generator().manual_seed(0))
    conv = net.encoders[2][1][0]
    fan_in = conv.in_channels * 9
    assert conv.weight.std().item() == pytest.approx(math.sqrt(2.0 / fan_in), rel=0.05)
    assert conv.weight.mean().item() == pytest.approx(0.0, abs=0.01)
    for module in net.modules():
        if isinstance(module, torch.nn.Conv2d):
            assert torch.all(module.bias == 0)
        if isinstance(module, torch.nn.BatchNorm2d):
            assert torch.all(module.weight == 1) and torch.all(module.bias == 0)
            assert torch.all(module.running_mean == 0) and torch.all(module.running_var == 1)


def test_initialisation_is_seeded(tiny_net_config):
    a = init_params(tiny_net_config, torch.Generator().manual_seed(5))
    b = init_params(tiny_net_config, torch.Generator().manual_seed(5))
    c = init_params(tiny_net_config, torch.Generator().manual_seed(6))
    for (name, pa), pb, pc in zip(a.state_dict().items(), b.state_dict().values(), c.state_dict().values()):
        assert torch.equal(pa, pb), name
    assert not torch.equal(a.head.weight, c.head.weight)


def test_batch_norm_running_statistics(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(0), torch.float64)
    block = net.encoders[0][0]
    conv, act, bn = block[0], block[1], block[2]
    x = to_channels(_aliased(6, 8, 2))

    with torch.no_grad():
        pre = act(conv(x))
        out = block(x)

    batch_mean = pre.mean(dim=(0, 2, 3))
    batch_var = pre.var(dim=(0, 2, 3), unbiased=True)
    torch.testing.assert_close(bn.running_mean, 0.01 * batch_mean)
    torch.testing.assert_close(bn.running_var, 0.99 + 0.01 * batch_var)
    torch.testing.assert_close(out.mean(dim=(0, 2, 3)), torch.zeros_like(batch_mean), atol=1e-10, rtol=0)

    block.eval()
    with torch.no_grad():
        inferred = block(x)
    expected = (pre - bn.running_mean[None, :, None, None]) / torch.sqrt(bn.running_var[None, :, None, None] + 1e-5)
    torch.testing.assert_close(inferred, expected)


def test_train_mode_batch_norm_standardises_each_channel(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(3), torch.float64)
    outputs = []
    for module in net.modules():
        if isinstance(module, torch.nn.BatchNorm2d):
            module.register_forward_hook(lambda _m, _inputs, out: outputs.append(out.detach()))

    with torch.no_grad():
        net(_aliased(6, 8, 6))

    assert outputs
    for out in outputs:
        mean = out.mean(dim=(0, 2, 3))
        var = out.var(dim=(0, 2, 3), unbiased=False)
        assert mean.abs().max().item() < 1e-6
        assert (var - 1).abs().max().item() < 1e-4


def test_inference_is_independent_of_batch(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(0), torch.float64)
    net.train()
    with torch.no_grad():
        net(_aliased(8, 8, 4))
    net.eval()
    batch = _aliased(4, 8, 5)
    with torch.no_grad():
        together = net(batch)
        alone = net(batch[1:2])
    torch.testing.assert_close(together[1:2], alone)


def test_forward_backward_matches_finite_differences(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(1), torch.float64)
    net.eval()
    aliased = _aliased(2, 8, 6)
    upstream = torch.randn((2, 8, 8), generator=torch.Generator().manual_seed(7), dtype=torch.float64)
    param_grads, input_grads = forward_backward(net, aliased, upstream)

    def objective() -> float:
        with torch.no_grad():
            return float((net(aliased) * upstream).sum().item())

    eps = 1e-6
    picker = torch.Generator().manual_seed(8)
    for name, param in net.named_parameters():
        flat = param.data.view(-1)
        for index in torch.randint(flat.numel(), (5,), generator=picker).tolist():
            original = flat[index].item()
            flat[index] = original + eps
            plus = objective()
            flat[index] = original - eps
            minus = objective()
            flat[index] = original
            numeric = (plus - minus) / (2 * eps)
            analytic = param_grads[name].view(-1)[index].item()
            assert abs(numeric - analytic) <= 1e-4 * max(1.0, abs(numeric)), name

    assert input_grads.shape == (2, 2, 8, 8)
    for b, c, i, j in [(0, 0, 1, 2), (1, 1, 5, 3), (0, 1, 7, 7)]:
        shifted = to_channels(aliased).clone()
        shifted[b, c, i, j] += eps
        with torch.no_grad():
            plus = float((net.forward_channels(shifted) * upstream).sum().item())
        shifted[b, c, i, j] -= 2 * eps
        with torch.no_grad():
            minus = float((net.forward_channels(shifted) * upstream).sum().item())
        numeric = (plus - minus) / (2 * eps)
        assert abs(numeric - input_grads[b, c, i, j].item()) <= 1e-4 * max(1.0, abs(numeric))


def test_forward_backward_in_training_mode_uses_batch_statistics(tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(2), torch.float64)
    aliased = _aliased(3, 8, 9)
    upstream = torch.ones((3, 8, 8), dtype=torch.float64)
    param_grads, _ = forward_backward(net, aliased, upstream)
    assert set(param_grads) == {name for name, _ in net.named_parameters()}
    assert all(torch.isfinite(g).all() for g in param_grads.values())
