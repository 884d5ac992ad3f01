import pytest

from oracles import FROZEN, derived_values


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_value_matches_oracle(name):
    assert derived_values()[name] == pytest.approx(FROZEN[name], abs=1e-6)
