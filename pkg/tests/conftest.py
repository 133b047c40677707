from dataclasses import dataclass

import pytest

from misdiag.pipeline import classify_images, train_on_planted
from misdiag.planted import PlantedConfig, generate_planted_dataset

# Engineered so the corner patch drives misclassification of the
# interference subset while the glyph alone still classifies correctly:
# 30% of training images carry no patch, the glyph is dim and noisy.
INTERFERENCE_CFG = PlantedConfig(
    correlation=1.0,
    patched_fraction=0.7,
    glyph_intensity=100,
    noise_amplitude=30,
)

CLEAN_CFG = PlantedConfig(correlation=0.0)

SEED = 0
EPOCHS = 12


@dataclass
class TrainedSession:
    ds: object
    params: object
    stats: object
    records: list
    trace: list


def _train_session(cfg):
    ds = generate_planted_dataset(cfg, seed=SEED)
    params, stats, trace = train_on_planted(ds, seed=SEED, epochs=EPOCHS)
    records = classify_images(params, stats, ds.test)
    return TrainedSession(ds=ds, params=params, stats=stats, records=records,
                          trace=trace)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Flag call-phase failures on the item so reporting fixtures can see
    the outcome during teardown."""
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed:
        item.rep_failed = True
    if rep.skipped:
        item.rep_skipped = True


@pytest.fixture(scope="session")
def interference_session():
    return _train_session(INTERFERENCE_CFG)


@pytest.fixture(scope="session")
def clean_session():
    return _train_session(CLEAN_CFG)


@pytest.fixture(scope="session")
def session_bundle(interference_session, tmp_path_factory):
    """The interference session persisted to disk: dataset dir + model file,
    as the pipeline, CLI, and server consume them."""
    from misdiag.classifier import save_model
    from misdiag.planted import save_planted_dataset

    root = tmp_path_factory.mktemp("bundle")
    dataset_dir = root / "dataset"
    save_planted_dataset(interference_session.ds, dataset_dir)
    model_path = root / "model.bin"
    save_model(interference_session.params, model_path, metadata={
        "channel_mean": list(interference_session.stats.mean),
        "channel_std": list(interference_session.stats.std),
    })
    return {"root": root, "dataset_dir": dataset_dir, "model_path": model_path}
