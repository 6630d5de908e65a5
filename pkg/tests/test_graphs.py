import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewfit import (
    GraphPoint,
    OperatorGraph,
    ParseError,
    ToleranceConfig,
    ValidationError,
    bimonotone_check,
    domain,
    inverse_graph,
    load_graph,
    make_fixture,
    save_graph,
    translate,
)
from skewfit.fixtures import FixtureSpec

import oracles


def simple_graph():
    return OperatorGraph.from_arrays(
        [[0.0, 0.0], [1.0, 2.0], [3.0, -1.0]],
        [[1.0, 1.0], [0.5, -2.0], [4.0, 0.0]],
    )


# ---------------------------------------------------------------------------
# construction invariants
# ---------------------------------------------------------------------------

def test_point_rejects_nan():
    with pytest.raises(ValidationError, match="non-finite"):
        GraphPoint([0.0, np.nan], [0.0, 0.0])


def test_point_rejects_inf():
    with pytest.raises(ValidationError):
        GraphPoint([0.0, 0.0], [np.inf, 0.0])


def test_point_dimension_mismatch():
    with pytest.raises(ValidationError, match="dimension"):
        GraphPoint([1.0, 2.0], [1.0])


def test_graph_requires_points():
    with pytest.raises(ValidationError, match="at least one point"):
        OperatorGraph(2, ())


def test_graph_dimension_positive():
    with pytest.raises(ValidationError):
        OperatorGraph(0, (GraphPoint([], []),))


def test_graph_point_dimension_checked():
    p = GraphPoint([1.0], [2.0])
    with pytest.raises(ValidationError, match=r"points\[0\]"):
        OperatorGraph(2, (p,))


def test_points_are_immutable():
    g = simple_graph()
    with pytest.raises(ValueError):
        g.points[0].x[0] = 99.0


def test_tolerance_rejects_negative():
    with pytest.raises(ValidationError):
        ToleranceConfig(abs_tol=-1e-9)


def test_tolerance_rejects_both_zero():
    with pytest.raises(ValidationError):
        ToleranceConfig(abs_tol=0.0, rel_tol=0.0)


def test_tolerance_one_sided_zero_allowed():
    ToleranceConfig(abs_tol=0.0, rel_tol=1e-12)
    ToleranceConfig(abs_tol=1e-12, rel_tol=0.0)


# ---------------------------------------------------------------------------
# domain
# ---------------------------------------------------------------------------

def test_domain_single_point():
    g = OperatorGraph.from_arrays([[1.0, 2.0]], [[0.0, 0.0]])
    reps = domain(g)
    assert len(reps) == 1
    np.testing.assert_array_equal(reps[0], [1.0, 2.0])


def test_domain_multivalued_duplicate():
    g = OperatorGraph.from_arrays(
        [[1.0, 2.0], [1.0, 2.0]], [[0.0, 0.0], [5.0, 5.0]]
    )
    assert len(domain(g)) == 1


def test_domain_three_distinct_of_five():
    # two pairs differ by ~1e-10, below the default tolerance
    a = np.array([0.3, 0.7])
    b = np.array([1.2, -0.4])
    c = np.array([5.0, 5.0])
    primal = [a, a + 7e-11, b, b - 4e-11, c]
    dual = [np.zeros(2)] * 5
    g = OperatorGraph.from_arrays(primal, dual)
    reps = domain(g)
    assert len(reps) == 3
    np.testing.assert_array_equal(reps[0], a)
    np.testing.assert_array_equal(reps[1], b)
    np.testing.assert_array_equal(reps[2], c)


def test_domain_first_appearance_order():
    g = OperatorGraph.from_arrays(
        [[2.0], [1.0], [2.0], [0.0]],
        [[0.0], [0.0], [9.0], [0.0]],
    )
    reps = domain(g)
    assert [float(r[0]) for r in reps] == [2.0, 1.0, 0.0]


# ---------------------------------------------------------------------------
# inverse and translate
# ---------------------------------------------------------------------------

def test_inverse_swaps_components():
    g = simple_graph()
    inv = inverse_graph(g)
    for p, q in zip(g.points, inv.points):
        np.testing.assert_array_equal(p.x, q.xstar)
        np.testing.assert_array_equal(p.xstar, q.x)


def test_inverse_is_involution():
    g = simple_graph()
    assert inverse_graph(inverse_graph(g)) == g


def test_inverse_preserves_bimonotone():
    for seed in range(5):
        fix = make_fixture(FixtureSpec(n=5, k=2, m=6, branches=2,
                                       noise_orthogonal=0.5, seed=seed))
        rep = bimonotone_check(fix.graph)
        rep_inv = bimonotone_check(inverse_graph(fix.graph))
        assert rep.verdict and rep_inv.verdict
        assert rep.worst_violation == rep_inv.worst_violation


def test_translate_moves_basepoint_to_zero():
    g = simple_graph()
    t = translate(g, g.points[1].x, g.points[1].xstar)
    np.testing.assert_array_equal(t.points[1].x, np.zeros(2))
    np.testing.assert_array_equal(t.points[1].xstar, np.zeros(2))


def test_translate_by_zero_is_identity():
    g = simple_graph()
    assert translate(g, np.zeros(2), np.zeros(2)) == g


def test_translate_dimension_error_names_argument():
    g = simple_graph()
    with pytest.raises(ValidationError, match=r"^u has dimension"):
        translate(g, np.zeros(3), np.zeros(2))
    with pytest.raises(ValidationError, match=r"^ustar has dimension"):
        translate(g, np.zeros(2), np.zeros(3))


def test_translate_round_trip_close():
    rng = np.random.Generator(np.random.Philox(3))
    g = OperatorGraph.from_arrays(rng.normal(size=(7, 3)), rng.normal(size=(7, 3)))
    u = rng.normal(size=3)
    ustar = rng.normal(size=3)
    back = translate(translate(g, u, ustar), -u, -ustar)
    for p, q in zip(g.points, back.points):
        np.testing.assert_allclose(q.x, p.x, rtol=0, atol=1e-12)
        np.testing.assert_allclose(q.xstar, p.xstar, rtol=0, atol=1e-12)


def test_translate_preserves_pairings():
    rng = np.random.Generator(np.random.Philox(4))
    g = OperatorGraph.from_arrays(rng.normal(size=(6, 3)), rng.normal(size=(6, 3)))
    t = translate(g, rng.normal(size=3), rng.normal(size=3))
    before = oracles.pairwise_products(g)
    after = oracles.pairwise_products(t)
    for key in before:
        assert abs(before[key] - after[key]) <= 1e-12


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_load_json_minimal():
    text = b'{"dimension": 2, "points": [{"x": [1, 0], "xstar": [0, 1]}]}'
    g = load_graph(text, "json")
    assert g.dimension == 2
    np.testing.assert_array_equal(g.points[0].x, [1.0, 0.0])
    np.testing.assert_array_equal(g.points[0].xstar, [0.0, 1.0])


def test_load_json_from_stream():
    text = b'{"dimension": 1, "points": [{"x": [2], "xstar": [3]}]}'
    g = load_graph(io.BytesIO(text), "json")
    assert g.dimension == 1


def test_load_json_unknown_top_key():
    text = b'{"dimension": 1, "points": [], "extra": 1}'
    with pytest.raises(ParseError, match="unknown key 'extra'"):
        load_graph(text, "json")


def test_load_json_unknown_point_key():
    text = b'{"dimension": 1, "points": [{"x": [1], "xstar": [2], "tag": 3}]}'
    with pytest.raises(ParseError, match="unknown key 'tag'"):
        load_graph(text, "json")


def test_load_json_wrong_vector_length():
    text = b'{"dimension": 2, "points": [{"x": [1, 2, 3], "xstar": [0, 0]}]}'
    with pytest.raises(ValidationError, match=r"points\[0\].x has length 3"):
        load_graph(text, "json")


def test_load_json_rejects_infinity_token():
    text = b'{"dimension": 1, "points": [{"x": [Infinity], "xstar": [0]}]}'
    with pytest.raises(ParseError, match="non-finite"):
        load_graph(text, "json")


def test_load_json_malformed_reports_position():
    with pytest.raises(ParseError, match="line"):
        load_graph(b'{"dimension": 2,', "json")


def test_load_json_empty_points_rejected():
    with pytest.raises(ValidationError, match="at least one point"):
        load_graph(b'{"dimension": 2, "points": []}', "json")


def test_load_csv_row_convention():
    g = load_graph(b"1,0,0,1\n", "csv")
    assert g.dimension == 2
    np.testing.assert_array_equal(g.points[0].x, [1.0, 0.0])
    np.testing.assert_array_equal(g.points[0].xstar, [0.0, 1.0])


def test_load_csv_header_detected():
    g = load_graph(b"x1,x2,s1,s2\n1,0,0,1\n", "csv")
    assert len(g.points) == 1


def test_load_csv_bad_field_names_line_and_field():
    with pytest.raises(ParseError, match="line 2, field 3"):
        load_graph(b"1,0,0,1\n2,0,oops,1\n", "csv")


def test_load_csv_inconsistent_columns():
    with pytest.raises(ParseError, match="line 2"):
        load_graph(b"1,0,0,1\n1,0,0\n", "csv")


def test_load_csv_odd_columns():
    with pytest.raises(ParseError, match="even number"):
        load_graph(b"1,0,0\n", "csv")


def test_load_csv_rejects_nan_token():
    with pytest.raises(ParseError, match="non-finite"):
        load_graph(b"nan,0,0,1\n", "csv")


def test_load_unknown_format():
    with pytest.raises(ValidationError, match="unknown format"):
        load_graph(b"", "xml")


def _random_wide_range_graph(seed, m=1000, n=3):
    rng = np.random.Generator(np.random.Philox(seed))
    mag = 10.0 ** rng.uniform(-12, 12, size=(m, 2 * n))
    vals = rng.normal(size=(m, 2 * n)) * mag
    return OperatorGraph.from_arrays(vals[:, :n], vals[:, n:])


def test_save_load_json_round_trip_exact():
    g = _random_wide_range_graph(10)
    assert load_graph(save_graph(g, "json"), "json") == g


def test_save_load_csv_round_trip_exact():
    g = _random_wide_range_graph(11)
    assert load_graph(save_graph(g, "csv"), "csv") == g


_coords = st.floats(
    min_value=-1e9, max_value=1e9, allow_nan=False, allow_infinity=False, width=64
)


@st.composite
def small_graphs(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 5))
    pts = []
    for _ in range(m):
        x = draw(st.lists(_coords, min_size=n, max_size=n))
        s = draw(st.lists(_coords, min_size=n, max_size=n))
        pts.append(GraphPoint(np.array(x), np.array(s)))
    return OperatorGraph(n, tuple(pts))


@settings(derandomize=True, max_examples=60)
@given(small_graphs())
def test_round_trip_property_json(g):
    assert load_graph(save_graph(g, "json"), "json") == g


@settings(derandomize=True, max_examples=60)
@given(small_graphs())
def test_round_trip_property_csv(g):
    assert load_graph(save_graph(g, "csv"), "csv") == g


@settings(derandomize=True, max_examples=60)
@given(small_graphs())
def test_involution_property(g):
    assert inverse_graph(inverse_graph(g)) == g
