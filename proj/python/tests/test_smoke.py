import math
import os
import pathlib

import pytest

import trish

DATA = pathlib.Path(os.environ.get("TRISH_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_step_cases():
    p = trish.TrishParams(2.0, 0.5)
    x, case = trish.trish_step([1.0, 1.0], [3.0, 4.0], 0.1, p)
    assert case == trish.StepCase.CASE3
    assert x == pytest.approx([0.85, 0.8])
    x, case = trish.trish_step([0.0], [1.0], 0.1, p)
    assert case == trish.StepCase.CASE2
    assert x == pytest.approx([-0.1])
    assert trish.sg_step([1.0], [2.0], 0.5) == pytest.approx([0.0])
    assert trish.step_norm(4.0, 1.0, p) == pytest.approx(2.0)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        trish.TrishParams(1.0, 2.0)
    with pytest.raises(RuntimeError, match="non-increasing index at line 1"):
        trish.parse_libsvm("1 5:0.1 2:0.3\n")


def test_closed_form():
    phi = 0.5 * math.erfc(-1.0 / math.sqrt(2.0))
    pdf = math.exp(-0.5) / math.sqrt(2.0 * math.pi)
    assert trish.gaussian_conditional_product(1.0, 1.0) == pytest.approx(phi + pdf, rel=1e-12)
    h1, h2 = trish.fixed_noise_h(2.0 * math.sqrt(2.0 * math.pi))
    assert (h1, h2) == pytest.approx((1.0, 2.0))


def test_libsvm_roundtrip():
    text = (DATA / "small_test.svm").read_text()
    assert trish.roundtrip_libsvm(text) == text
    rows = trish.parse_libsvm("1 3:0.5 7:-2\n-1\n")
    assert rows[0] == (1.0, [3, 7], [0.5, -2.0])
    assert rows[1] == (-1.0, [], [])
    golden = (DATA / "small_train.stats.golden").read_text()
    assert trish.dataset_stats(str(DATA / "small_train.svm")) == golden


def test_verify_small():
    rep = trish.verify(1, n_seeds=200, K=30)
    assert rep["violations"] == 0
    assert len(rep["rows"]) == 30
    assert rep["constants"]["alpha"] == pytest.approx(0.5)


def test_run_deterministic():
    cfg = {
        "method": "trish",
        "gamma1": "15",
        "alpha": "5",
        "batch": "10",
        "seeds": "2",
        "timing": "0",
        "dataset": str(DATA / "small_train.svm"),
        "test_dataset": str(DATA / "small_test.svm"),
    }
    a = trish.run(cfg)
    b = trish.run(cfg)
    assert a == b
    assert len(a) == 2
    assert a[0]["checkpoints"][-1]["fraction"] == 1.0
