"""Tests for losses, Adam, the training step and the training loop."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

import capsgan.training.trainer as trainer
from capsgan.data import Dataset, load_checkpoint, read_pgm
from capsgan.networks import build_gan
from capsgan.schemas import ArchitectureId, FeedSource, GeneratorLoss, RunConfig
from capsgan.tensor import Tensor, backward, parameter
from capsgan.training import (
    METRICS_HEADER,
    Adam,
    create_state,
    d_loss,
    g_loss,
    gan_from_checkpoint,
    generate_images,
    make_checkpoint,
    restore_optimizers,
    train,
    train_step,
)
from capsgan.utils.exceptions import (
    CheckpointArchitectureError,
    InvalidRunConfigError,
    MissingDigitCapsSourceError,
    NumericalFailureError,
)
from capsgan.utils.seeding import Stream, stream_rng
from tests.conftest import banded_dataset, random_dataset, small_spec


def run_config(tmp_path, arch, **overrides):
    values = dict(
        arch=arch, data=tmp_path / "images", out=tmp_path / "run", epochs=1, batch=4, seed=7,
        sample_grid=2, wall_clock=False,
    )
    values.update(overrides)
    return RunConfig(**values)


class TestLosses:
    def test_discriminator_at_half(self):
        loss = d_loss(Tensor([[0.5], [0.5]]), Tensor([[0.5], [0.5]]))
        assert loss.item() == pytest.approx(2 * math.log(2), abs=1e-4)
        assert loss.item() == pytest.approx(1.3863, abs=1e-4)

    def test_generator_variants_at_half(self):
        scores = Tensor([[0.5]])
        assert g_loss(scores, GeneratorLoss.NON_SATURATING).item() == pytest.approx(0.6931, abs=1e-4)
        assert g_loss(scores, GeneratorLoss.MINIMAX).item() == pytest.approx(-0.6931, abs=1e-4)

    def test_perfect_discriminator(self):
        assert d_loss(Tensor([[1.0]]), Tensor([[0.0]])).item() == pytest.approx(0.0, abs=1e-6)

    def test_saturated_scores_stay_finite(self):
        loss = d_loss(Tensor([[0.0]]), Tensor([[1.0]]))
        assert loss.is_finite()
        assert loss.item() == pytest.approx(-2 * math.log(1e-7), rel=1e-4)

    def test_nan_scores(self):
        with pytest.raises(NumericalFailureError):
            d_loss(Tensor([[np.nan]]), Tensor([[0.5]]))

    def test_non_saturating_gradient_at_small_scores(self):
        scores = parameter([[0.01]])
        backward(g_loss(scores))
        assert scores.grad[0, 0] == pytest.approx(-100.0, rel=1e-4)


class TestAdam:
    def test_zero_gradient_leaves_parameter(self):
        p = parameter([1.5, -2.0])
        optim = Adam([("p", p)])
        p.grad = np.zeros(2, np.float32)
        optim.step()
        np.testing.assert_array_equal(p.data, [1.5, -2.0])
        assert optim.state.t == 1

    def test_first_step_moves_by_learning_rate(self):
        p = parameter([1.0, 1.0])
        optim = Adam([("p", p)], lr=0.01)
        p.grad = np.array([3.0, -0.5], np.float32)
        optim.step()
        np.testing.assert_allclose(p.data, [0.99, 1.01], rtol=1e-6)

    def test_scalar_trajectory(self):
        lr, b1, b2, eps = 1e-2, 0.5, 0.999, 1e-8
        p = parameter([2.0])
        optim = Adam([("p", p)], lr, b1, b2, eps)
        x, m, v = 2.0, 0.0, 0.0
        for t in range(1, 11):
            p.grad = np.array([2.0 * p.data[0]], np.float32)
            optim.step()
            g = 2.0 * x
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            x -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
            assert p.data[0] == pytest.approx(x, rel=1e-5)

    def test_parameters_without_gradient_are_skipped(self):
        a, b = parameter([1.0]), parameter([1.0])
        optim = Adam([("a", a), ("b", b)], lr=0.1)
        a.grad = np.array([1.0], np.float32)
        optim.step()
        assert b.data[0] == 1.0 and optim.state.m["b"][0] == 0.0
        assert a.data[0] == pytest.approx(0.9, rel=1e-6)

    def test_non_finite_gradient_changes_nothing(self):
        a, b = parameter([1.0]), parameter([1.0])
        optim = Adam([("a", a), ("b", b)])
        a.grad = np.array([1.0], np.float32)
        b.grad = np.array([np.inf], np.float32)
        with pytest.raises(NumericalFailureError):
            optim.step()
        assert a.data[0] == 1.0 and optim.state.t == 0

    def test_state_tensors_round_trip(self):
        p = parameter([1.0, 2.0])
        optim = Adam([("w", p)])
        p.grad = np.array([0.5, -0.5], np.float32)
        optim.step()
        tensors = optim.state_tensors("optim/x")
        assert set(tensors) == {"optim/x/m/w", "optim/x/v/w"}
        other = Adam([("w", parameter([0.0, 0.0]))])
        other.load_state_tensors("optim/x", tensors, optim.state.t)
        np.testing.assert_array_equal(other.state.m["w"], optim.state.m["w"])
        assert other.state.t == 1


class TestTrainStep:
    def test_optimizers_cover_disjoint_parameter_sets(self):
        state = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0)
        d_ids = {id(p) for _, p in state.d_optim.params}
        g_ids = {id(p) for _, p in state.g_optim.params}
        assert d_ids == {id(p) for p in state.gan.discriminator.parameters()}
        assert g_ids == {id(p) for p in state.gan.generator.parameters()}
        assert not d_ids & g_ids

    @pytest.mark.parametrize("arch", list(ArchitectureId))
    def test_step_updates_both_networks(self, arch):
        state = create_state(small_spec(arch), seed=0)
        d_before = state.gan.discriminator.state_dict()
        g_before = state.gan.generator.state_dict()
        batch = random_dataset(4).images
        losses = train_step(state, batch, np.random.default_rng([0, 1]))
        assert np.isfinite(losses.d_loss) and np.isfinite(losses.g_loss)
        assert 0.0 < losses.d_real_mean < 1.0 and 0.0 < losses.d_fake_mean < 1.0
        d_after = state.gan.discriminator.state_dict()
        g_after = state.gan.generator.state_dict()
        assert any(not np.array_equal(d_before[k], d_after[k]) for k in d_before)
        assert any(not np.array_equal(g_before[k], g_after[k]) for k in g_before)
        assert all(p.grad is None for p in state.gan.discriminator.parameters())
        assert state.d_optim.state.t == 1 and state.g_optim.state.t == 1

    def test_capsgan2_records_real_feed(self):
        state = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0)
        losses = train_step(state, random_dataset(4).images, np.random.default_rng(1))
        assert losses.feed_source == FeedSource.REAL

    def test_capsgan2_generated_feed(self):
        state = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0, feed_source=FeedSource.GENERATED)
        losses = train_step(state, random_dataset(4).images, np.random.default_rng(1))
        assert losses.feed_source == FeedSource.GENERATED
        assert np.isfinite(losses.g_loss)

    def test_other_architectures_record_no_feed(self):
        state = create_state(small_spec(ArchitectureId.CAPSGAN1), seed=0)
        assert train_step(state, random_dataset(4).images, np.random.default_rng(1)).feed_source is None

    def test_tiny_learning_rate_does_not_raise_discriminator_loss(self, rng):
        state = create_state(small_spec(ArchitectureId.CAPSGAN1), seed=0, lr=1e-6)
        disc = state.gan.discriminator
        real = Tensor(random_dataset(8).images)
        fake = Tensor(rng.uniform(-1, 1, (8, 1, 28, 28)))
        before = d_loss(disc(real).score, disc(fake).score)
        state.d_optim.zero_grad()
        backward(before)
        state.d_optim.step()
        after = d_loss(disc(real).score, disc(fake).score)
        assert after.item() <= before.item() + 1e-6


class TestCheckpointState:
    def test_rebuilds_networks_and_optimizers(self, rng):
        spec = small_spec(ArchitectureId.CAPSGAN3)
        state = create_state(spec, seed=3)
        train_step(state, random_dataset(4).images, np.random.default_rng(2))
        state.step = 1
        checkpoint = make_checkpoint(state)
        assert checkpoint.attributes["kind"] == "gan"
        assert checkpoint.counters["optim/generator/t"] == 1

        gan = gan_from_checkpoint(checkpoint)
        for name, value in state.gan.generator.state_dict().items():
            np.testing.assert_array_equal(gan.generator.state_dict()[name], value)

        restored = create_state(spec, seed=3)
        restore_optimizers(restored, checkpoint)
        assert restored.step == 1 and restored.d_optim.state.t == 1
        np.testing.assert_array_equal(
            restored.g_optim.state.v["routing.weight"], state.g_optim.state.v["routing.weight"]
        )


class TestGenerateImages:
    def test_count_range_and_determinism(self):
        gan = create_state(small_spec(ArchitectureId.DCGAN), seed=0).gan
        first = generate_images(gan, 5, seed=1, chunk=2)
        second = generate_images(gan, 5, seed=1, chunk=3)
        assert first.shape == (5, 1, 28, 28)
        assert np.all(np.abs(first) <= 1.0)
        np.testing.assert_allclose(first, second, atol=1e-6)
        assert gan.generator.training

    def test_capsgan2_needs_reference(self):
        gan = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0).gan
        with pytest.raises(MissingDigitCapsSourceError):
            generate_images(gan, 4, seed=0)

    def test_capsgan2_cycles_reference(self):
        gan = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0).gan
        images = generate_images(gan, 5, seed=0, reference=random_dataset(2).images)
        assert images.shape == (5, 1, 28, 28)


class TestTrainLoop:
    def test_smoke_run_writes_outputs(self, tmp_path):
        config = run_config(tmp_path, ArchitectureId.CAPSGAN1, checkpoint_every=2)
        result = train(config, random_dataset(12), small_spec(ArchitectureId.CAPSGAN1))

        out = config.out
        lines = (out / "metrics.csv").read_text().splitlines()
        assert lines[0] == ",".join(METRICS_HEADER)
        assert len(lines) == 4
        assert lines[1].split(",")[:2] == ["1", "0"]
        assert lines[1].endswith(",0.000")
        assert (out / "ckpt-000002").exists()
        assert result.checkpoint == out / "ckpt-final"
        assert load_checkpoint(result.checkpoint).step == 3
        assert [p.name for p in result.samples] == ["samples-000003.pgm"]
        assert read_pgm(result.samples[0]).shape == (58, 58)

    def test_runs_are_byte_identical(self, tmp_path):
        dataset = random_dataset(8)
        spec = small_spec(ArchitectureId.CAPSGAN2)
        first = train(run_config(tmp_path / "a", ArchitectureId.CAPSGAN2), dataset, spec)
        second = train(run_config(tmp_path / "b", ArchitectureId.CAPSGAN2), dataset, spec)
        assert first.checkpoint.read_bytes() == second.checkpoint.read_bytes()
        assert (tmp_path / "a" / "run" / "metrics.csv").read_text() == (tmp_path / "b" / "run" / "metrics.csv").read_text()

    def test_max_steps_and_log_every(self, tmp_path):
        config = run_config(tmp_path, ArchitectureId.DCGAN, epochs=3, max_steps=4, log_every=2)
        result = train(config, random_dataset(8), small_spec(ArchitectureId.DCGAN))
        assert len(result.history) == 4
        lines = (config.out / "metrics.csv").read_text().splitlines()
        assert [line.split(",")[0] for line in lines[1:]] == ["2", "4"]

    def test_limit_below_one_batch(self, tmp_path):
        with pytest.raises(InvalidRunConfigError):
            train(run_config(tmp_path, ArchitectureId.DCGAN, limit=3), random_dataset(8), small_spec(ArchitectureId.DCGAN))

    def test_nan_images_fail_at_first_step(self, tmp_path):
        dataset = Dataset(np.full((4, 1, 28, 28), np.nan, np.float32))
        with pytest.raises(NumericalFailureError) as excinfo:
            train(run_config(tmp_path, ArchitectureId.CAPSGAN1), dataset, small_spec(ArchitectureId.CAPSGAN1))
        assert excinfo.value.step == 1
        assert excinfo.value.exit_code == 5

    def test_failure_keeps_earlier_checkpoints(self, tmp_path, monkeypatch):
        real_step = trainer.train_step

        def failing_step(state, batch, rng):
            if state.step == 3:
                raise NumericalFailureError("generator loss is not finite")
            return real_step(state, batch, rng)

        monkeypatch.setattr(trainer, "train_step", failing_step)
        config = run_config(tmp_path, ArchitectureId.DCGAN, checkpoint_every=1)
        with pytest.raises(NumericalFailureError) as excinfo:
            train(config, random_dataset(16), small_spec(ArchitectureId.DCGAN))
        assert excinfo.value.step == 3
        assert (config.out / "ckpt-000001").exists() and (config.out / "ckpt-000002").exists()
        assert not (config.out / "ckpt-final").exists()


class TestRunConfig:
    def test_capsgan3_latent_is_fixed(self, tmp_path):
        with pytest.raises(ValidationError):
            run_config(tmp_path, ArchitectureId.CAPSGAN3, latent=100)
        assert run_config(tmp_path, ArchitectureId.CAPSGAN3, latent=128).latent == 128

    def test_generated_feed_only_for_capsgan2(self, tmp_path):
        with pytest.raises(ValidationError):
            run_config(tmp_path, ArchitectureId.CAPSGAN1, feed_source=FeedSource.GENERATED)

    def test_header_is_json_ready(self, tmp_path):
        header = run_config(tmp_path, ArchitectureId.DCGAN).to_header()
        assert header["arch"] == "dcgan" and header["batch"] == 4 and header["out"].endswith("run")


class TestUpdateIsolation:
    def test_each_update_leaves_the_other_network(self):
        state = create_state(small_spec(ArchitectureId.CAPSGAN2), seed=0)
        params = lambda module: {n: p.data.tobytes() for n, p in module.named_parameters()}  # noqa: E731
        g_start = params(state.gan.generator)
        after_d = {}
        d_step = state.d_optim.step

        def recording_step():
            d_step()
            after_d["discriminator"] = params(state.gan.discriminator)
            after_d["generator"] = params(state.gan.generator)

        state.d_optim.step = recording_step
        train_step(state, random_dataset(4).images, stream_rng(0, Stream.TRAIN_STEP, 1))

        assert after_d["generator"] == g_start
        assert params(state.gan.discriminator) == after_d["discriminator"]
        assert params(state.gan.generator) != g_start


class TestRandomStreams:
    def test_stream_keys_never_collide(self):
        seen = set()
        for stream in Stream:
            for index in range(4):
                draw = stream_rng(7, stream, index).standard_normal(4).tobytes()
                assert draw not in seen, (stream, index)
                seen.add(draw)

    def test_step_latents_independent_of_initial_weights(self, tmp_path, monkeypatch):
        latents = []
        sample = trainer.sample_latent

        def recording(rng, batch, dim):
            z = sample(rng, batch, dim)
            latents.append(z.data.copy())
            return z

        monkeypatch.setattr(trainer, "sample_latent", recording)
        spec = small_spec(ArchitectureId.DCGAN)
        train(run_config(tmp_path, ArchitectureId.DCGAN, max_steps=1), random_dataset(8), spec)

        z = latents[0].ravel()
        initial = build_gan(spec, seed=7)
        for module in (initial.generator, initial.discriminator):
            for name, p in module.named_parameters():
                values = p.data.ravel()
                if values.size < z.size or values.std() == 0.0:
                    continue
                corr = np.corrcoef(z, values[:z.size])[0, 1]
                assert abs(corr) < 0.3, name

    def test_shuffle_differs_from_initial_weights(self):
        order = stream_rng(7, Stream.SHUFFLE, 0).standard_normal(16)
        init = stream_rng(7, Stream.DISCRIMINATOR_INIT).standard_normal(16)
        assert not np.array_equal(order, init)


class TestResume:
    def test_resumed_run_matches_uninterrupted_run(self, tmp_path):
        dataset = random_dataset(16)
        spec = small_spec(ArchitectureId.CAPSGAN2)
        arch = ArchitectureId.CAPSGAN2

        interrupted = run_config(tmp_path / "a", arch, epochs=2, max_steps=3, checkpoint_every=3)
        train(interrupted, dataset, spec)
        resumed = run_config(tmp_path / "a", arch, epochs=2, max_steps=6, checkpoint_every=3)
        result = train(resumed, dataset, spec, resume=load_checkpoint(interrupted.out / "ckpt-000003"))
        assert [losses.step for losses in result.history] == [4, 5, 6]
        assert [losses.epoch for losses in result.history] == [0, 1, 1]

        straight = run_config(tmp_path / "b", arch, epochs=2, max_steps=6, checkpoint_every=3)
        train(straight, dataset, spec)

        assert (resumed.out / "ckpt-final").read_bytes() == (straight.out / "ckpt-final").read_bytes()
        assert (resumed.out / "metrics.csv").read_text() == (straight.out / "metrics.csv").read_text()

    def test_resume_past_max_steps_trains_nothing(self, tmp_path):
        spec = small_spec(ArchitectureId.DCGAN)
        config = run_config(tmp_path, ArchitectureId.DCGAN, max_steps=2)
        train(config, random_dataset(8), spec)
        result = train(config, random_dataset(8), spec, resume=load_checkpoint(config.out / "ckpt-final"))
        assert result.history == []
        assert load_checkpoint(result.checkpoint).step == 2

    def test_rejects_another_seed(self, tmp_path):
        spec = small_spec(ArchitectureId.DCGAN)
        checkpoint = make_checkpoint(create_state(spec, seed=1))
        with pytest.raises(InvalidRunConfigError):
            train(run_config(tmp_path, ArchitectureId.DCGAN), random_dataset(8), spec, resume=checkpoint)

    def test_rejects_another_architecture(self, tmp_path):
        checkpoint = make_checkpoint(create_state(small_spec(ArchitectureId.CAPSGAN1), seed=7))
        with pytest.raises(CheckpointArchitectureError):
            train(run_config(tmp_path, ArchitectureId.DCGAN), random_dataset(8), small_spec(ArchitectureId.DCGAN),
                  resume=checkpoint)


@pytest.mark.slow
class TestLearningSignal:
    def test_capsgan2_moves_toward_data_intensity(self, tmp_path):
        data = banded_dataset(128)
        spec = small_spec(ArchitectureId.CAPSGAN2)
        config = run_config(tmp_path, ArchitectureId.CAPSGAN2, epochs=10, batch=16, lr=1e-3,
                            checkpoint_every=1000, sample_every=1000)
        before = generate_images(create_state(spec, config.seed).gan, 64, 0, reference=data.images)

        result = train(config, data, spec=spec)
        assert result.history[-1].step == 80
        after = generate_images(gan_from_checkpoint(load_checkpoint(result.checkpoint)), 64, 0,
                                reference=data.images)

        target = float(data.images.mean())
        assert abs(float(after.mean()) - target) < abs(float(before.mean()) - target)
