import pytest
from hypothesis import given
from hypothesis import strategies as st

from wildblender.eras import EraSeq, era_index, era_sequence
from wildblender.errors import DomainError


def test_greedy_examples():
    # era 2: 16 fails against 2*9, 16+25 passes; era 3: 149 fails against 3*50, 230 passes
    assert era_sequence(3, 3).ks == (3, 4, 6, 10)


@given(st.integers(1, 60), st.integers(1, 5))
def test_era_condition_and_minimality(k1, eras):
    ks = era_sequence(k1, eras).ks
    for s in range(1, eras + 1):
        earlier = sum(k * k for k in range(ks[0], ks[s - 1]))
        block = sum(k * k for k in range(ks[s - 1], ks[s]))
        # era s outweighs s times everything before it, and no shorter era does
        assert block > s * earlier
        assert not block - (ks[s] - 1) ** 2 > s * earlier


@given(st.integers(1, 40), st.integers(0, 300))
def test_era_index_agrees_with_sequence(k1, k):
    es = era_sequence(k1, 6)
    if k < es.ks[-1]:
        assert era_index(k1, k) == es.era_of(k)


def test_bad_inputs():
    with pytest.raises(DomainError):
        era_sequence(0, 2)
    with pytest.raises(DomainError):
        EraSeq((3, 3))
