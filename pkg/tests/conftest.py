import pytest

from actionseg import pipeline


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A tiny but complete dataset: 4 training and 2 test videos."""
    root = tmp_path_factory.mktemp("small_ds")
    manifest = pipeline.make_dataset(root, n_train=4, n_test=2, seed=1234,
                                     duration_cycles=(1, 1))
    return str(manifest)


@pytest.fixture(scope="session")
def small_config():
    return pipeline.PipelineConfig(k=16, seed=9)


@pytest.fixture(scope="session")
def small_trained(small_dataset, small_config):
    return pipeline.train_from_manifest(small_dataset, small_config)
