import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpopalg.errors import ValidationError
from lpopalg.jsonio import decode_complex_array, decode_operator, encode_operator
from lpopalg.lpcore import Operator, WeightedSpace


def test_real_rows_are_not_complex_pairs():
    m = decode_operator({"rows": [[0, 1], [1, 0]]}).matrix
    np.testing.assert_array_equal(m, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(decode_complex_array([[0, 1], 2], ndim=1), [1j, 2])


def test_weights_and_errors():
    op = decode_operator({"rows": [[1, 0], [0, 1]], "weights": [1, 2]})
    assert op.domain == WeightedSpace([1, 2])
    with pytest.raises(ValidationError):
        decode_operator({"rows": [[1, 0], [0]]})
    with pytest.raises(ValidationError):
        decode_operator([[1, 0], [0, 1]])
    with pytest.raises(ValidationError):
        decode_operator({"rows": [[1, 0], [0, 1]], "weights": [1, -1]})


@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_operator_roundtrip(n, seed, weighted):
    r = np.random.default_rng(seed)
    space = WeightedSpace(r.uniform(0.5, 2, n) if weighted else np.ones(n))
    op = Operator(r.standard_normal((n, n)) + 1j * r.standard_normal((n, n)), space, space)
    back = decode_operator(encode_operator(op))
    np.testing.assert_array_equal(back.matrix, op.matrix)
    assert back.domain == op.domain
