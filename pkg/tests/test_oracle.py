from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from sfdarboux.oracle import SHAPES, generate_random_integrable
from sfdarboux.integrate import verify_first_integral

from fixtures import annihilates, sympy_form


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_instances_are_deterministic_and_integrable(seed):
    a = generate_random_integrable(seed)
    b = generate_random_integrable(seed)
    assert a.ode == b.ode and a.truth == b.truth
    assert a.shape in SHAPES
    assert verify_first_integral(a.ode, a.truth).is_zero
    assert max(a.ode.M0.degree(), a.ode.N0.degree()) <= 12
    # z' = g(z) would admit a second, unrelated elementary integral
    assert any(p.degree(v) > 0 for p in (a.ode.M0, a.ode.N0) for v in (0, 1))


def test_truth_checked_independently():
    for seed in (0, 3, 5):
        inst = generate_random_integrable(seed)
        assert annihilates(inst.ode, sympy_form(inst.truth))
