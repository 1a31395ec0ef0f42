import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from convexlab.frames import (OrthonormalFrame, complete_frame,
                              concentration_check, gram_defect, haar_frame,
                              load_frame, save_frame, sphere_component)
from convexlab.rng import substream


def test_full_frame_gram_identity():
    f = haar_frame(4, 4, seed=0)
    np.testing.assert_allclose(f.vectors @ f.vectors.T, np.eye(4), atol=1e-10)


def test_orthonormality_at_scale():
    f = haar_frame(5000, 12, seed=9)
    assert gram_defect(f.vectors) <= 1e-10


def test_determinism_bitwise():
    a = haar_frame(1000, 3, seed=1)
    b = haar_frame(1000, 3, seed=1)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_k_greater_than_n_rejected():
    with pytest.raises(ValueError):
        haar_frame(3, 4, seed=0)


def test_projection_concentration_paper_bound():
    # Pr(|<v, e_1>| >= 0.1) <= 2 exp(-n * 0.01 / 2) ~ 0.0135 at n=1000
    hits = 0
    trials = 4000
    rng = substream(5, "test-conc")
    comp = sphere_component(1000, trials, rng)
    hits = int((np.abs(comp) >= 0.1).sum())
    assert hits / trials <= 2 * math.exp(-1000 * 0.01 / 2)


def test_concentration_check_examples():
    rep = concentration_check(1000, 0.1, 100_000, seed=0)
    assert math.isclose(rep.bound, 0.013475893998170934)
    assert rep.passed
    rep0 = concentration_check(100, 0.0, 1000, seed=0)
    assert rep0.bound == 2.0 and rep0.passed  # vacuous
    rep2 = concentration_check(10_000, 0.05, 100_000, seed=0)
    assert math.isclose(rep2.bound, 7.453306344157342e-06)
    assert rep2.passed


def test_concentration_check_preconditions():
    with pytest.raises(ValueError):
        concentration_check(100, -0.1, 1000)
    with pytest.raises(ValueError):
        concentration_check(100, 0.1, 999)


def test_frame_immutable():
    f = haar_frame(16, 2, seed=0)
    with pytest.raises(ValueError):
        f.vectors[0, 0] = 1.0


def test_bad_vectors_rejected():
    v = np.eye(3)
    v[1, 0] = 0.5
    with pytest.raises(ValueError, match="orthonormal"):
        OrthonormalFrame(n=3, k=3, vectors=v, seed=0)


def test_serialization_roundtrip(tmp_path):
    f = haar_frame(257, 5, seed=77)
    path = tmp_path / "frame.clbf"
    save_frame(f, path)
    raw = path.read_bytes()
    assert raw[:4] == b"CLBF"
    assert len(raw) == 4 + 28 + 8 * 257 * 5
    g = load_frame(path)
    assert (g.n, g.k, g.seed) == (257, 5, 77)
    np.testing.assert_array_equal(f.vectors, g.vectors)


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.clbf"
    path.write_bytes(b"XXXX" + b"\0" * 64)
    with pytest.raises(ValueError, match="magic"):
        load_frame(path)


def test_complete_frame_orthogonal_to_prefix():
    prefix = haar_frame(64, 3, seed=1).vectors
    rng = substream(2, "suffix")
    suffix = complete_frame(prefix, 2, rng)
    full = np.vstack([prefix, suffix])
    assert gram_defect(full) <= 1e-10


def test_rotation_invariance_two_sample():
    # distribution of <v_1, u> for a fixed direction u matches the marginal
    # of a single coordinate of a uniform unit vector
    n, draws = 48, 4000
    rng = substream(11, "rot")
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    proj = np.array([haar_frame(n, 1, seed=100_000 + i).vectors[0] @ u
                     for i in range(draws)])
    ref = sphere_component(n, draws, rng)
    assert ks_2samp(proj, ref).pvalue > 0.01
