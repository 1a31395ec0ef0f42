import pytest

from convexlab.verify import SUITE_NAMES, run_suites


def test_all_suites_pass():
    suites = run_suites(SUITE_NAMES, seed=0)
    for name, checks in suites.items():
        failed = [c for c in checks if not c.passed]
        assert not failed, (name, failed)


def test_corrupt_frame_fails_orthonormality():
    suites = run_suites(["instance-core"], seed=0, corrupt_frame=True)
    by_name = {c.name: c for c in suites["instance-core"]}
    assert not by_name["frame_orthonormality"].passed


def test_unknown_suite_rejected():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suites(["bogus"])


def test_single_suite_selection():
    suites = run_suites(["softmax"], seed=1)
    assert list(suites) == ["softmax"]
