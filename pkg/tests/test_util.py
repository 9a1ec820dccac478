import pytest

from qphase.output import config_hash, fmt
from qphase.util import thread_count


def test_thread_count(monkeypatch):
    monkeypatch.delenv("PHASE_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("PHASE_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("PHASE_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("PHASE_THREADS", "many")
    with pytest.raises(ValueError):
        thread_count()


def test_threaded_sweep_matches_serial(monkeypatch):
    import numpy as np

    from qphase.dynamics1 import jcm_trajectory

    T = np.linspace(0, 1, 9)
    monkeypatch.setenv("PHASE_THREADS", "1")
    a = jcm_trajectory(2.0, T).phase_variance
    monkeypatch.setenv("PHASE_THREADS", "3")
    b = jcm_trajectory(2.0, T).phase_variance
    assert np.array_equal(a, b)


def test_float_format_round_trips():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(3) == "3" and fmt(True) == "1"


def test_config_hash_order_independent():
    assert config_hash({"a": 1, "b": 2.5}) == config_hash({"b": 2.5, "a": 1})
    assert config_hash({"z": 1j}) != config_hash({"z": 2j})
