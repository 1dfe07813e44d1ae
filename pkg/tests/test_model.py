import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdpi.model import Channel, ChannelError, Distribution, bsc, dump_channel, parse_channel, validate_pair

from conftest import channels


def test_parse_identity():
    ch = parse_channel('{"rows": [[1.0, 0.0], [0.0, 1.0]]}')
    assert ch.input_size == ch.output_size == 2
    np.testing.assert_array_equal(ch.matrix, np.eye(2))


def test_parse_bsc_with_name():
    ch = parse_channel('{"rows": [[0.9, 0.1], [0.1, 0.9]], "name": "bsc"}')
    assert ch == Channel(np.array([[0.9, 0.1], [0.1, 0.9]]), "bsc")
    assert ch.name == "bsc"


@pytest.mark.parametrize("text", [
    '{"rows": [[0.5, 0.6]]}',                       # row sum 1.1
    '{"rows": [[0.5, 0.5], [1.0]]}',                # ragged
    '{"rows": [[1.5, -0.5]]}',                      # negative
    '{"rows": [[0.5, 0.5]], "extra": 1}',           # unknown key
    '{"name": "x"}',                                # missing rows
    '{"rows": [[0.5, 0.5]], "name": 3}',
    '{"rows": [["0.5", 0.5]]}',
    '{"rows": [[NaN, 1.0]]}',
    '{"rows": []}',
    '[[1.0]]',
    '{"rows": [[1.0, 0.0]',
])
def test_parse_rejects(text):
    with pytest.raises(ChannelError):
        parse_channel(text)


def test_normalize_is_opt_in():
    text = '{"rows": [[1, 3], [2, 2]]}'
    with pytest.raises(ChannelError):
        parse_channel(text)
    ch = parse_channel(text, normalize=True)
    np.testing.assert_allclose(ch.matrix, [[0.25, 0.75], [0.5, 0.5]])
    with pytest.raises(ChannelError):
        parse_channel('{"rows": [[0, 0], [1, 1]]}', normalize=True)


def test_row_sum_tolerance():
    parse_channel(json.dumps({"rows": [[0.5, 0.5 + 5e-10]]}))
    with pytest.raises(ChannelError):
        parse_channel(json.dumps({"rows": [[0.5, 0.5 + 5e-9]]}))


def test_channel_is_immutable():
    ch = bsc(0.1)
    with pytest.raises(ValueError):
        ch.matrix[0, 0] = 0.3


@given(channels(max_in=5, max_out=5))
def test_round_trip(ch):
    again = parse_channel(dump_channel(ch))
    np.testing.assert_array_equal(again.matrix, ch.matrix)
    assert parse_channel(dump_channel(again)) == again


@given(st.lists(st.lists(st.floats(0.01, 100.0), min_size=3, max_size=3), min_size=1, max_size=5))
def test_normalized_rows_sum_to_one(rows):
    ch = parse_channel(json.dumps({"rows": rows}), normalize=True)
    np.testing.assert_allclose(ch.matrix.sum(axis=1), 1.0, rtol=0, atol=1e-12)


def test_validate_pair():
    ch = bsc(0.1)
    assert validate_pair(Distribution([0.5, 0.5]), Distribution([0.5, 0.5]), ch) is False
    assert validate_pair(Distribution([1.0, 0.0]), Distribution([0.5, 0.5]), ch, "kl") is True
    assert validate_pair(Distribution([0.5, 0.5]), Distribution([1.0, 0.0]), ch, "kl") is False
    # finite slope at infinity: support violations are allowed
    assert validate_pair(Distribution([0.5, 0.5]), Distribution([1.0, 0.0]), ch, "hellinger2") is True
    with pytest.raises(ChannelError):
        validate_pair(Distribution([1.0]), Distribution([1.0]), ch)
