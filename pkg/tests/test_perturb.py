import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gcrwcs.perturb import Epsilon, apply_tau, build_epsilon, load_vector_csv, save_vector_csv

importance = arrays(np.float64, st.integers(1, 40),
                    elements=st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3)))


@given(importance, st.floats(0.01, 1.0), st.floats(0.1, 10))
def test_epsilon_shape_and_support(imp, j_frac, lam):
    assume(np.any(imp))
    e = build_epsilon(imp, j_frac, lam)
    J = int(np.floor(j_frac * imp.size + 1e-9))
    nz = np.flatnonzero(e.values)
    assert len(nz) == e.j_count == min(J, int(np.count_nonzero(imp)))
    np.testing.assert_allclose(np.abs(e.values[nz]), lam)
    assert (np.sign(e.values[nz]) == np.sign(imp[nz])).all()
    if nz.size:
        outside = np.setdiff1d(np.arange(imp.size), nz)
        assert np.abs(imp[outside]).max(initial=0) <= np.abs(imp[nz]).min()


@given(importance, st.floats(0.1, 5), st.floats(0.1, 5))
def test_scaling_keeps_direction(imp, lam, other):
    assume(np.any(imp))
    e = build_epsilon(imp, 0.5, lam)
    np.testing.assert_allclose(e.scaled(other).values, e.values / lam * other)
    assert not e.scaled(0).values.any()


def test_ties_go_to_lower_index():
    e = build_epsilon([1.0, -2.0, 2.0, 2.0], j_count=2)
    assert e.values.tolist() == [0.0, -1.0, 1.0, 0.0]


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_epsilon([1.0, 2.0], lam=0)
    with pytest.raises(ValueError):
        build_epsilon([1.0, 2.0], j_frac=0)
    with pytest.raises(ValueError):
        build_epsilon([0.0, 0.0])


def test_tau_only_touches_selected_rows():
    x = np.arange(12, dtype=float).reshape(4, 3)
    e = Epsilon(np.array([1.0, 0.0, -1.0]), 2, 1.0)
    out = apply_tau(x, [2, 0, 2], e)
    np.testing.assert_array_equal(out[[1, 3]], x[[1, 3]])
    np.testing.assert_array_equal(out[[0, 2]], x[[0, 2]] + e.values)
    np.testing.assert_array_equal(apply_tau(x, [], e), x)
    with pytest.raises(IndexError):
        apply_tau(x, [4], e)
    with pytest.raises(ValueError):
        apply_tau(x, [0], np.ones(2))


def test_vector_csv_roundtrip(tmp_path):
    v = np.array([0.1, -3.0, 1e-17])
    save_vector_csv(v, tmp_path / "v.csv")
    np.testing.assert_array_equal(load_vector_csv(tmp_path / "v.csv"), v)
