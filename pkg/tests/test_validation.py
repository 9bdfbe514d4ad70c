import math

import numpy as np
import pytest

from lossy_su11 import fock, validation


def test_fast_suite_passes():
    results = validation.run_suite("fast")
    failed = [(r.name, r.counterexample) for r in results if not r.passed]
    assert not failed
    assert {r.name for r in results} == set(validation.property_names())


def test_unknown_level():
    with pytest.raises(ValueError):
        validation.run_suite("medium")


def test_suite_is_seeded():
    a = validation.run_suite("fast", seed=3, only={"coincidence-dominance", "klyshko-roundtrip"})
    b = validation.run_suite("fast", seed=3, only={"coincidence-dominance", "klyshko-roundtrip"})
    assert [r.as_dict() | {"seconds": 0} for r in a] == [r.as_dict() | {"seconds": 0} for r in b]


def _flipped_kraus(T, d):
    # the loss amplitude enters with the wrong sign: sqrt(1 + T) instead of sqrt(1 - T)
    K = np.zeros((d, d, d))
    for k in range(d):
        for n in range(k, d):
            K[k, n - k, n] = math.sqrt(math.comb(n, k) * T ** (n - k) * (1.0 + T) ** k)
    return K


def test_fault_injection_names_trace_preservation(monkeypatch):
    monkeypatch.setattr(fock, "loss_kraus", _flipped_kraus)
    (res,) = validation.run_suite("fast", only={"trace-preservation"})
    assert not res.passed
    assert res.counterexample["channel"] == "loss"


def test_crash_inside_property_is_a_failure(monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(fock, "loss_channel", broken)
    (res,) = validation.run_suite("fast", only={"trace-preservation"})
    assert not res.passed and "boom" in res.counterexample["error"]
