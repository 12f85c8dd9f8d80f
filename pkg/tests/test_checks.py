"""The verification registry itself: clean runs, filtering, fault injection."""

import numpy as np
import pytest

import rotgrad.rpmg as rpmg
from rotgrad.checks import (
    CHECK_NAMES,
    CHECKS,
    CheckResult,
    membership_residual,
    oracle_inverse_image_batch,
    run_checks,
    sample_projection_cases,
)
from rotgrad.representations import MANIFOLD_REPS, RepKind


def test_registry_is_ordered_and_named():
    assert len(CHECK_NAMES) == len(set(CHECK_NAMES))
    assert tuple(CHECKS) == CHECK_NAMES
    for rep in MANIFOLD_REPS:
        assert f"projection-optimality-{rep.value}" in CHECK_NAMES
        assert f"projection-membership-{rep.value}" in CHECK_NAMES
    assert "kkt-eigen-residual-10d" in CHECK_NAMES
    assert "tau-converge-s2" in CHECK_NAMES


def test_full_registry_passes():
    results = run_checks()
    assert [r.name for r in results] == list(CHECK_NAMES)
    failed = [r for r in results if not r.passed]
    assert not failed, [f"{r.name}: {r.detail}" for r in failed]
    assert all(not r.error for r in results)


def test_filter_selects_substring_matches():
    results = run_checks("projection")
    assert all("projection" in r.name for r in results)
    assert len(results) == 8
    only_10d = run_checks("10d")
    assert {r.name for r in only_10d} == {
        "projection-optimality-10d",
        "projection-membership-10d",
        "kkt-eigen-residual-10d",
    }


def test_unknown_filter_raises():
    with pytest.raises(ValueError, match="no check name contains"):
        run_checks("definitely-not-a-check")


def test_parallel_jobs_match_serial():
    serial = run_checks("lin-core")
    parallel = run_checks("lin-core", jobs=3)
    assert [r.name for r in serial] == [r.name for r in parallel]
    assert all(r.passed for r in parallel)


def test_injected_sign_bug_fails_by_name(monkeypatch):
    orig = rpmg.inverse_project

    def sign_bugged(rep, x, r_g):
        return -orig(rep, x, r_g)

    monkeypatch.setattr(rpmg, "inverse_project", sign_bugged)
    results = run_checks("projection-optimality")
    assert all(not r.passed for r in results)
    assert {r.name for r in results} == {
        f"projection-optimality-{rep.value}" for rep in MANIFOLD_REPS
    }
    # the report carries the measured excess, not just the verdict
    assert all("excess" in r.detail for r in results)


def test_injected_exception_marks_error(monkeypatch):
    def broken(rep, x, r_g):
        raise FloatingPointError("synthetic overflow")

    monkeypatch.setattr(rpmg, "inverse_project", broken)
    results = run_checks("projection-membership-quat")
    assert len(results) == 1
    assert not results[0].passed
    assert results[0].error
    assert "FloatingPointError" in results[0].detail


def test_check_result_is_frozen():
    r = CheckResult("x", True, "d")
    with pytest.raises(AttributeError):
        r.passed = False


def test_sample_projection_cases_deterministic():
    a_x, a_r = sample_projection_cases(RepKind.SIX_D, 10, seed=7)
    b_x, b_r = sample_projection_cases(RepKind.SIX_D, 10, seed=7)
    assert (a_x == b_x).all() and (a_r == b_r).all()


@pytest.mark.parametrize("rep", MANIFOLD_REPS)
def test_oracle_never_beats_closed_form(rep):
    xs, r_gs = sample_projection_cases(rep, 50, seed=23)
    closed = np.array([rpmg.inverse_project(rep, x, r_g) for x, r_g in zip(xs, r_gs)])
    oracle = oracle_inverse_image_batch(rep, xs, r_gs)
    d_closed = np.linalg.norm(closed - xs, axis=1)
    d_oracle = np.linalg.norm(oracle - xs, axis=1)
    assert (d_closed <= d_oracle + 1e-6).all()
    # both satisfy the membership constraint, so they chase the same set
    for x_gp, r_g in zip(oracle, r_gs):
        assert membership_residual(rep, x_gp, r_g) <= 1e-5


def test_membership_residual_rejects_non_manifold_rep():
    with pytest.raises(ValueError, match="no manifold inverse image"):
        membership_residual(RepKind.EULER3, np.zeros(3), np.eye(3))
