import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperselect.core import run_heuristic
from hyperselect.domains.partition import (
    EXAMPLE_INSTANCES,
    PartitionDomain,
    PartitionInstance,
    PartitionState,
    feature_f1,
    finished,
    heuristic_max_load,
    heuristic_min_load,
    load_partition_instances,
    quality,
)
from hyperselect.errors import ParseError

DOMAIN = PartitionDomain()
# standalone (MAX, MIN) quality per instance, worked out by hand
TABLE = [(0, 0), (15, 1), (14, 6)]


@pytest.mark.parametrize("items, expected", list(zip(EXAMPLE_INSTANCES, TABLE)))
def test_standalone_quality_table(items, expected):
    got = tuple(run_heuristic(h, PartitionInstance(items), DOMAIN).objective for h in (0, 1))
    assert got == expected


def test_first_instance_by_hand():
    state = PartitionState(list(EXAMPLE_INSTANCES[0]))
    assert feature_f1(state) == 0.0
    state.subset2.append(state.subset1.pop(heuristic_max_load(state)))
    assert state.subset2 == [10] and finished(state) is False
    assert feature_f1(state) == pytest.approx(10 / 22)


def test_heuristics_pick_first_occurrence():
    state = PartitionState([3, 10, 1, 10, 1])
    assert heuristic_max_load(state) == 1
    assert heuristic_min_load(state) == 2


def test_quality_and_stop():
    s = PartitionState([5, 2], [4, 3])
    assert quality(s) == 0 and finished(s)
    assert not finished(PartitionState([5, 2], [4]))


@given(st.lists(st.integers(1, 50), min_size=1, max_size=25), st.sampled_from([0, 1]))
def test_rollout_invariants(items, h):
    out = run_heuristic(h, PartitionInstance(items), DOMAIN)
    assert out.solved
    # before the last move 2(s2 - x) < total, so the final gap is below twice that item
    assert 0 <= out.objective < 2 * max(items)
    assert 1 <= out.steps <= len(items)


def test_invalid_items():
    with pytest.raises(ParseError):
        PartitionInstance(())
    with pytest.raises(ParseError):
        PartitionInstance((3, 0))


def test_loader(tmp_path):
    one = tmp_path / "one.json"
    one.write_text("[1, 2, 3]")
    many = tmp_path / "many.json"
    many.write_text(json.dumps([list(x) for x in EXAMPLE_INSTANCES]))
    assert load_partition_instances(one) == [PartitionInstance((1, 2, 3))]
    assert len(load_partition_instances(many)) == 3
    bad = tmp_path / "bad.json"
    for text in ("{", "[]", '["a"]'):
        bad.write_text(text)
        with pytest.raises(ParseError):
            load_partition_instances(bad)
