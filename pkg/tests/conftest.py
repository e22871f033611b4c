import numpy as np
import pytest

from coarcta import cli
from coarcta.config import config_from_dict
from coarcta.features import EncodingMap, ScalerParams, FeatureTransform
from coarcta.pipeline import ingest_traces, run_synth
from coarcta.traces import assemble_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_transform():
    """Transform with identity scaling, for fitting estimators on hand-made matrices."""
    return FeatureTransform(
        EncodingMap("vessel", ("ascending_aorta",)),
        EncodingMap("case", ("pre_intervention",)),
        ScalerParams(np.zeros(4), np.ones(4), np.zeros(4, dtype=bool)),
        log_target=True,
    )


@pytest.fixture(scope="session")
def corpus_dataset(tmp_path_factory):
    """The 3650-row synthetic corpus, ingested through the trace pipeline."""
    out = tmp_path_factory.mktemp("corpus")
    config = config_from_dict({"traces_dir": str(out / "traces"), "output_dir": str(out)})
    run_synth(config)
    return assemble_dataset(ingest_traces(config))


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    """One full command-line run on the synthetic corpus, shared by the end-to-end tests."""
    out = tmp_path_factory.mktemp("run")
    codes = {"synth": cli.main(["synth", "--out", str(out)])}
    codes["all"] = cli.main(["all", "--out", str(out)])
    return out, codes
