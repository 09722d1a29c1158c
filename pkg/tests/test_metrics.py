import math

import numpy as np
import pytest

from cooppliable.coop import identity_preprocessing
from cooppliable.core import MultiViewData, PliableCoefs, TwoSourceModel
from cooppliable.metrics import (confusion, count_effects, round_half_up, selected_mask,
                                 selection_scores, summarize_experiment, test_mse)
from cooppliable.simgen import SimTruth


def _truth(main1, main2, K=2):
    b1, b2 = np.asarray(main1, float), np.asarray(main2, float)
    return SimTruth(b1, np.zeros((len(b1), K)), b2, np.zeros((len(b2), K)), 1.0, 1.0)


def test_count_effects_and_masks():
    c1 = PliableCoefs(np.array([1.0, 0.0, 2.0]), np.array([[0.0, 1.0], [0, 0], [3, 4]]))
    c2 = PliableCoefs(np.array([0.0, -1.0]), np.zeros((2, 2)))
    assert count_effects(c1) == (2, 3)
    data = MultiViewData(np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)), np.zeros(2))
    model = TwoSourceModel(c1, c2, identity_preprocessing(data))
    assert count_effects(model) == (3, 3)
    assert selected_mask(model).tolist() == [True, False, True, False, True]
    with pytest.raises(TypeError):
        count_effects(3)


def test_mse_on_raw_data():
    c = PliableCoefs(np.array([2.0]), np.zeros((1, 1)))
    data = MultiViewData(np.array([[1.0], [2.0]]), np.zeros((2, 1)), np.zeros((2, 1)),
                         np.array([2.0, 5.0]))
    model = TwoSourceModel(c, PliableCoefs.zeros(1, 1), identity_preprocessing(data))
    assert test_mse(model, data) == pytest.approx(0.5)


def test_confusion():
    assert confusion([1, 1, 0, 0], [1, 0, 1, 0]) == (1, 1, 1, 1)


def test_selection_cutoff_counts_strictly_over():
    truth = _truth([1, 1, 0], [0])
    masks = [np.array([1, 0, 1, 0], bool), np.array([1, 1, 0, 0], bool)]
    assert selection_scores(masks, truth, 0) == (1.0, 0.5)
    assert selection_scores(masks, truth, 1) == (0.5, 1.0)
    assert selection_scores(masks, truth, 2) == (0.0, 1.0)
    with pytest.raises(ValueError):
        selection_scores(masks, truth, 3)


@pytest.mark.parametrize("seed", range(5))
def test_selection_scores_are_monotone(seed):
    rng = np.random.default_rng(seed)
    truth = _truth(rng.random(20) < 0.3, rng.random(15) < 0.3)
    masks = [rng.random(35) < 0.4 for _ in range(7)]
    scores = [selection_scores(masks, truth, c) for c in range(8)]
    sens, spec = np.array(scores).T
    assert np.all(np.diff(sens) <= 0) and np.all(np.diff(spec) >= 0)
    assert spec[-1] == 1.0


def test_selection_nan_without_positives():
    sens, spec = selection_scores([np.zeros(3, bool)], _truth([0, 0], [0]), 0)
    assert math.isnan(sens) and spec == 1.0


def test_round_half_up():
    assert [round_half_up(v) for v in (0.5, 1.5, 2.5, 2.49)] == [1, 2, 3, 2]


def test_summary():
    rows = summarize_experiment([
        {"method": "coop", "mse": 1.0, "n_main": 3, "n_interaction": 1, "rho": 1.0},
        {"method": "coop", "mse": 3.0, "n_main": 4, "n_interaction": 2, "rho": 0.0},
        {"method": "early", "mse": 2.0, "n_main": 5, "n_interaction": 0},
    ])
    coop, early = rows
    assert coop["mse_mean"] == 2.0 and coop["mse_sd"] == pytest.approx(math.sqrt(2))
    assert (coop["n_main"], coop["n_interaction"]) == (4, 2)
    assert coop["rho_counts"] == {0.0: 1, 1.0: 1}
    assert early["mse_sd"] == 0.0 and early["rho_counts"] == {}
