import warnings
from pathlib import Path

import pytest

from fuzzykb import dataset, granulation, prediction, rulebase, scoring

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

TOY_ARFF = """\
% toy dataset
@relation toy
@attribute Temp numeric
@attribute Wind {weak,strong}
@attribute Play {no,yes}
@data
10,weak,no
20,strong,no
30,weak,yes
40,strong,yes
"""


@pytest.fixture(scope="session")
def diabetes_raw():
    return dataset.parse_arff((DATA_DIR / "diabetes.arff").read_text())


@pytest.fixture(scope="session")
def diabetes_norm(diabetes_raw):
    return dataset.normalize(dataset.impute(diabetes_raw))


@pytest.fixture(scope="session")
def diabetes_predictions(diabetes_norm):
    train, _ = dataset.split(diabetes_norm, dataset.SplitConfig(0.8, seed=0))
    return prediction.baseline_classify(train, diabetes_norm, k=5)


@pytest.fixture(scope="session")
def diabetes_kb(diabetes_norm, diabetes_predictions):
    grans = granulation.granulate_dataset(
        diabetes_norm, granulation.FcmConfig(n_clusters=5))
    kb = rulebase.build_rules(diabetes_norm, grans, diabetes_predictions)
    scoring.score_rules(kb, scoring.ScoringConfig())
    return kb


@pytest.fixture()
def toy_dataset():
    return dataset.parse_arff(TOY_ARFF)


def build_kb_for(ds_norm, preds, n_clusters=5, implicator="lukasiewicz",
                 distance="fuzzy", smoothing=1.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grans = granulation.granulate_dataset(
            ds_norm, granulation.FcmConfig(n_clusters=n_clusters))
    kb = rulebase.build_rules(ds_norm, grans, preds)
    scoring.score_rules(kb, scoring.ScoringConfig(
        implicator=implicator, distance=distance, smoothing=smoothing))
    return kb
