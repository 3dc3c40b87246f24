import time

from lambda_repeater.validation import validate


def test_fast_level_passes_quickly():
    start = time.perf_counter()
    report = validate("fast")
    assert time.perf_counter() - start < 10.0
    failed = [c["name"] for c in report["checks"] if not c["pass"]]
    assert report["pass"], failed
    assert not any(c["name"].startswith("full_model") for c in report["checks"])


def test_full_level_adds_cavity_checks():
    report = validate("full")
    names = {c["name"] for c in report["checks"]}
    assert {"full_model_vs_effective_ge", "full_model_truncation_ef"} <= names
    assert report["pass"]


def test_flipped_lambda2_is_caught():
    report = validate("fast", flip_lambda2=True)
    assert not report["pass"]
    bad = {c["name"] for c in report["checks"] if not c["pass"]}
    assert "stage_two_closed_form_vs_propagator" in bad
