import numpy as np
import pytest

from difflab import ContractError
from difflab.datasets import gen_smiley, gen_three_dots
from difflab.diffusion import Objective, linear_schedule
from difflab.nn import MlpParams
from difflab.training import (TrainConfig, flow_loss_given,
                              loss_flow_matching, loss_noise_prediction,
                              noise_loss_given, preview_sampler_steps, train)


def zero_net(embed_dim=16):
    # always predicts (0, 0)
    d = 2 + embed_dim
    return MlpParams([np.zeros((4, d)), np.zeros((2, 4))],
                     [np.zeros(4), np.zeros(2)], "silu")


def perturb(params, eps_scale, seed):
    rng = np.random.default_rng(seed)
    return MlpParams([w + eps_scale * rng.standard_normal(w.shape) for w in params.weights],
                     [b + eps_scale * rng.standard_normal(b.shape) for b in params.biases],
                     params.activation)


class TestNoiseLoss:
    def test_zero_net_expectation(self):
        # predicting 0 makes the loss E||eps||^2 = 2
        sched = linear_schedule()
        N = 4096
        batch = gen_three_dots(N, 0).points
        loss, _ = loss_noise_prediction(zero_net(), batch, sched,
                                        np.random.default_rng(1))
        assert abs(loss - 2.0) < 4 * np.sqrt(8.0 / N)

    def test_nonnegative(self):
        sched = linear_schedule()
        batch = gen_three_dots(16, 0).points
        loss, _ = loss_noise_prediction(zero_net(), batch, sched,
                                        np.random.default_rng(2))
        assert loss >= 0.0

    def test_empty_batch(self):
        with pytest.raises(ContractError):
            loss_noise_prediction(zero_net(), np.zeros((0, 2)),
                                  linear_schedule(), np.random.default_rng(0))

    def test_grads_finite_differences(self):
        sched = linear_schedule()
        rng = np.random.default_rng(3)
        batch = rng.standard_normal((3, 2))
        k = np.array([1, 25, 50])
        eps = rng.standard_normal((3, 2))
        params = perturb(zero_net(4), 0.3, 7)

        _, grads = noise_loss_given(params, batch, k, eps, sched, embed_dim=4)
        h = 1e-5
        for t_idx, tensor in enumerate(params.weights + params.biases):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + h
                hi, _ = noise_loss_given(params, batch, k, eps, sched, embed_dim=4)
                tensor[idx] = orig - h
                lo, _ = noise_loss_given(params, batch, k, eps, sched, embed_dim=4)
                tensor[idx] = orig
                num = (hi - lo) / (2 * h)
                ana = (grads.weights + grads.biases)[t_idx][idx]
                assert abs(ana - num) / max(abs(ana) + abs(num), 1e-6) < 1e-5


class TestFlowLoss:
    def test_zero_net_expectation(self):
        # data at the origin: target velocity is -z, so loss -> E||z||^2 = 2
        N = 4096
        batch = np.zeros((N, 2))
        loss, _ = loss_flow_matching(zero_net(), batch, np.random.default_rng(4))
        assert abs(loss - 2.0) < 4 * np.sqrt(8.0 / N)

    def test_nonnegative_and_empty(self):
        loss, _ = loss_flow_matching(zero_net(), np.ones((8, 2)),
                                     np.random.default_rng(5))
        assert loss >= 0.0
        with pytest.raises(ContractError):
            loss_flow_matching(zero_net(), np.zeros((0, 2)),
                               np.random.default_rng(5))

    def test_grads_finite_differences(self):
        rng = np.random.default_rng(6)
        batch = rng.standard_normal((3, 2))
        z = rng.standard_normal((3, 2))
        s = rng.uniform(size=3)
        params = perturb(zero_net(4), 0.3, 8)
        _, grads = flow_loss_given(params, batch, z, s, embed_dim=4)
        h = 1e-5
        for t_idx, tensor in enumerate(params.weights + params.biases):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + h
                hi, _ = flow_loss_given(params, batch, z, s, embed_dim=4)
                tensor[idx] = orig - h
                lo, _ = flow_loss_given(params, batch, z, s, embed_dim=4)
                tensor[idx] = orig
                num = (hi - lo) / (2 * h)
                ana = (grads.weights + grads.biases)[t_idx][idx]
                assert abs(ana - num) / max(abs(ana) + abs(num), 1e-6) < 1e-5


class FakeCancel:
    def __init__(self, after):
        self.after = after
        self.calls = 0

    def is_set(self):
        self.calls += 1
        return self.calls > self.after


class TestTrain:
    def test_zero_steps_keeps_init(self):
        ds = gen_three_dots(100, 0)
        cfg = TrainConfig(epochs=1, steps_per_epoch=0, seed=11)
        model = train(ds, "flow_matching", cfg)
        from difflab.nn import mlp_init
        init = mlp_init(model.config, seed=11)
        for a, b in zip(model.params.weights, init.weights):
            assert np.array_equal(a, b)

    def test_snapshots_ordered_and_complete(self):
        ds = gen_three_dots(200, 0)
        cfg = TrainConfig(epochs=5, steps_per_epoch=3, batch_size=32,
                          preview_n=10, preview_steps=5, seed=1)
        snaps = []
        train(ds, "flow_matching", cfg, on_epoch=snaps.append)
        assert [s.epoch for s in snaps] == [1, 2, 3, 4, 5]
        assert all(np.isfinite(s.mean_loss) for s in snaps)
        assert all(s.preview.shape == (10, 2) for s in snaps)

    def test_bitwise_determinism(self):
        ds = gen_three_dots(200, 0)
        cfg = TrainConfig(epochs=3, steps_per_epoch=5, batch_size=32, seed=42)
        m1 = train(ds, "noise_prediction", cfg)
        m2 = train(ds, "noise_prediction", cfg)
        for a, b in zip(m1.params.weights + m1.params.biases,
                        m2.params.weights + m2.params.biases):
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("objective", ["flow_matching", "noise_prediction"])
    @pytest.mark.parametrize("dataset", ["three_dots", "smiley"])
    def test_loss_descends(self, objective, dataset):
        gen = gen_three_dots if dataset == "three_dots" else gen_smiley
        medians = []
        for seed in range(5):
            ds = gen(500, seed)
            cfg = TrainConfig(epochs=30, steps_per_epoch=10, batch_size=64,
                              preview_n=5, preview_steps=2, seed=seed)
            snaps = []
            train(ds, objective, cfg, on_epoch=snaps.append)
            losses = [s.mean_loss for s in snaps]
            first = np.median(losses[:3])
            last = np.median(losses[-3:])
            medians.append((first, last))
        assert all(last < first for first, last in medians)

    def test_cancellation_partial(self):
        ds = gen_three_dots(200, 0)
        cfg = TrainConfig(epochs=10, steps_per_epoch=2, batch_size=16,
                          preview_n=5, preview_steps=2, seed=0)
        snaps = []
        model = train(ds, "flow_matching", cfg, on_epoch=snaps.append,
                      cancel=FakeCancel(after=4))
        assert model.partial
        assert len(snaps) < 10

    def test_preview_steps_divide_schedule(self):
        sched = linear_schedule(50, 1e-4, 0.05)
        assert preview_sampler_steps(Objective.NOISE_PREDICTION, sched, 20) == 10
        assert preview_sampler_steps(Objective.NOISE_PREDICTION, sched, 25) == 25
        assert preview_sampler_steps(Objective.FLOW_MATCHING, None, 20) == 20
