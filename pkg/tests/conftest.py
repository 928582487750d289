import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent.parent))

from models.train_models import AblationFlags, TrainConfig  # noqa: E402
from models.world_models import WorldConfig  # noqa: E402
from netcore.params import ModelParams  # noqa: E402
from synthworld.generator import generate_dataset  # noqa: E402

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=20, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale training runs, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


TINY_WORLD = WorldConfig(
    height=24, width=24, channels=3, num_classes=3,
    min_objects=1, max_objects=2, min_side=6, max_side=12, max_overlap=0.2,
    noise_sigma=0.05, proposals_per_image=16, proposal_jitter=0.1, proposal_fg_fraction=0.25,
)

ORACLE_WORLD = TINY_WORLD.model_copy(update={"noise_sigma": 0.0, "proposal_jitter": 0.0})


@pytest.fixture(scope="session")
def tiny_world():
    return TINY_WORLD


@pytest.fixture(scope="session")
def tiny_dataset():
    return generate_dataset(TINY_WORLD, n_train=24, n_test=8, shots=2, seed=3)


@pytest.fixture(scope="session")
def oracle_dataset():
    return generate_dataset(ORACLE_WORLD, n_train=30, n_test=10, shots=2, seed=11)


@pytest.fixture
def tiny_train_config():
    return TrainConfig(
        seed=7, epochs=2, iterations_per_epoch=3, base_lr=0.01, hidden_dim=8,
        proposal_batch=8, max_annotation_iters=6,
        flags=AblationFlags(shared_encoder=True, bbox_augmentation=True, oam_supervision=True),
    )


def make_params(world: WorldConfig, seed: int = 0, shared_encoder: bool = True, hidden_dim: int = 6,
                std: float = 0.5, pool_size: int = 2) -> ModelParams:
    """Параметры с крупной инициализацией, чтобы градиенты голов были заметны"""
    return ModelParams.initialize(
        num_classes=world.num_classes,
        feature_dim=pool_size * pool_size * world.channels,
        hidden_dim=hidden_dim,
        shared_encoder=shared_encoder,
        rng=np.random.default_rng(seed),
        init_std_cls=std,
        init_std_reg=std,
        pool_size=pool_size,
    )
