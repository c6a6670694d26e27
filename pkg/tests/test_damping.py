import numpy as np
import pytest

from graphwave import (
    DampingProfile,
    build_graph,
    check_property_P,
    classify_continuity,
    load_network,
)
from graphwave.errors import InvalidDampingProfile, OutOfDomain

from util import as_graph_mode, random_tree_doc


class TestEvaluation:
    def test_zero_profile(self):
        p = DampingProfile.zero(1.0)
        for x in (0.0, 0.3, 1.0):
            assert p.eval(x) == 0.0
            assert p.eval_d1(x) == 0.0
            assert p.eval_d2(x) == 0.0

    def test_constant(self):
        p = DampingProfile.constant(2.0, 1.0)
        assert p.eval(0.7) == 2.0
        assert p.eval_d1(0.7) == 0.0
        assert p.eval_d2(0.7) == 0.0

    def test_quadratic_bump_by_hand(self):
        # a(x) = x(1-x): a(1/2) = 1/4, a'(1/2) = 0, a'' = -2
        p = DampingProfile.piecewise([0.0, 1.0], [[0.0, 1.0, -1.0]])
        assert p.eval(0.5) == pytest.approx(0.25, abs=1e-15)
        assert p.eval_d1(0.5) == pytest.approx(0.0, abs=1e-15)
        assert p.eval_d2(0.5) == pytest.approx(-2.0, abs=1e-14)

    def test_one_sided_rule_at_breaks(self):
        p = DampingProfile.piecewise([0.0, 0.5, 1.0], [[0.0, 1.0], [0.5]])
        assert p.eval(0.5) == 0.5  # right piece
        assert p.eval_d1(0.5) == 0.0  # right piece derivative
        assert p.eval_d1(1.0) == 0.0  # last piece from the left
        assert p.eval_d1(0.0) == 1.0

    def test_vectorized_eval(self):
        p = DampingProfile.piecewise([0.0, 0.5, 1.0], [[0.0, 1.0], [0.5]])
        x = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        assert np.allclose(p.eval(x), [0.0, 0.25, 0.5, 0.5, 0.5])

    def test_out_of_domain(self):
        p = DampingProfile.constant(1.0, 1.0)
        with pytest.raises(OutOfDomain):
            p.eval(1.5)
        with pytest.raises(OutOfDomain):
            p.eval_d1(-0.1)

    def test_integral_exact(self):
        p = DampingProfile.piecewise([0.0, 1.0], [[0.0, 1.0, -1.0]])
        assert p.integral(0.0, 1.0) == pytest.approx(1.0 / 6.0, rel=1e-14)


class TestAdmissibility:
    def test_negative_constant_rejected(self):
        with pytest.raises(InvalidDampingProfile):
            DampingProfile.constant(-1.0, 1.0)

    def test_constant_zero_degrades_to_elastic(self):
        assert DampingProfile.constant(0.0, 1.0).is_elastic

    def test_negative_piece_rejected(self):
        with pytest.raises(InvalidDampingProfile):
            DampingProfile.piecewise([0.0, 1.0], [[-0.5, 1.0]])

    def test_interior_zero_rejected(self):
        # (x - 1/2)^2 vanishes inside the piece
        with pytest.raises(InvalidDampingProfile):
            DampingProfile.piecewise([0.0, 1.0], [[0.25, -1.0, 1.0]])

    def test_endpoint_zeros_allowed(self):
        p = DampingProfile.piecewise([0.0, 1.0], [[0.0, 1.0, -1.0]])
        assert not p.is_elastic

    def test_nonincreasing_breaks_rejected(self):
        with pytest.raises(InvalidDampingProfile):
            DampingProfile.piecewise([0.0, 0.5, 0.5, 1.0], [[1.0], [1.0], [1.0]])

    def test_all_zero_pieces_degrade_to_elastic(self):
        assert DampingProfile.piecewise([0.0, 0.5, 1.0], [[0.0], [0.0]]).is_elastic


class TestSupBounds:
    def test_smooth_profile_bounds(self):
        p = DampingProfile.piecewise([0.0, 1.0], [[0.0, 1.0, -1.0]])
        assert p.sup_abs(0) == pytest.approx(0.25)
        assert p.sup_abs(1) == pytest.approx(1.0)
        assert p.sup_abs(2) == pytest.approx(2.0)

    def test_interior_kink_flags_second_derivative(self):
        # hat profile: a' jumps at 1/2, so a'' has a Dirac part
        p = DampingProfile.piecewise([0.0, 0.5, 1.0],
                                     [[0.0, 2.0], [1.0, -2.0]])
        assert np.isfinite(p.sup_abs(1))
        assert np.isinf(p.sup_abs(2))

    def test_interior_jump_flags_first_derivative(self):
        p = DampingProfile.piecewise([0.0, 0.5, 1.0], [[1.0], [2.0]])
        assert np.isinf(p.sup_abs(1))

    def test_c1_junction_is_fine(self):
        # 0 then (x-1/2)^2: a' continuous, a'' jumps but stays bounded
        p = DampingProfile.piecewise([0.0, 0.5, 1.0], [[0.0], [0.0, 0.0, 1.0]])
        assert np.isfinite(p.sup_abs(1))
        assert np.isfinite(p.sup_abs(2))


class TestMirrored:
    def test_mirror_matches_pointwise(self):
        rng = np.random.default_rng(5)
        p = DampingProfile.piecewise([0.0, 0.3, 1.0],
                                     [[0.2, 1.0, 0.5], [0.5, 0.1]])
        q = p.mirrored()
        for x in rng.uniform(0, 1, 25):
            assert q.eval(x) == pytest.approx(p.eval(1.0 - x), rel=1e-12, abs=1e-13)

    def test_double_mirror_is_identity(self):
        p = DampingProfile.piecewise([0.0, 0.5, 1.0], [[0.0, 2.0], [1.0, 0.5]])
        q = p.mirrored().mirrored()
        for x in np.linspace(0, 1, 11):
            assert q.eval(x) == pytest.approx(p.eval(x), rel=1e-12, abs=1e-14)


def two_edge_tree(parent_cfg, child_cfg):
    return {
        "mode": "tree",
        "vertices": [{"id": "R", "root": True}, {"id": "O"}, {"id": "L"}],
        "edges": [
            {"id": "par", "from": "R", "to": "O", "length": 1.0, "damping": parent_cfg},
            {"id": "ch", "from": "O", "to": "L", "length": 1.0, "damping": child_cfg},
        ],
    }


class TestPropertyCheck:
    def test_constant_profiles_give_zero(self):
        spec = load_network(two_edge_tree({"kind": "constant", "value": 1.0},
                                          {"kind": "constant", "value": 2.0}))
        report = check_property_P(spec.graph, spec.damping)
        assert list(report.node_values.values()) == [0.0]
        assert report.overall

    def test_hand_example_satisfied(self):
        # parent a = x (a'(l) = 1), child a = 2x (a'(0) = 2): 1 - 2 = -1 <= 0
        spec = load_network(two_edge_tree(
            {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 1.0]]},
            {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 2.0]]}))
        report = check_property_P(spec.graph, spec.damping)
        assert list(report.node_values.values())[0] == pytest.approx(-1.0, abs=1e-14)
        assert report.overall

    def test_hand_example_violated(self):
        # parent a = 2x, child a = x: 2 - 1 = +1 > 0
        spec = load_network(two_edge_tree(
            {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 2.0]]},
            {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 1.0]]}))
        report = check_property_P(spec.graph, spec.damping)
        assert list(report.node_values.values())[0] == pytest.approx(1.0, abs=1e-14)
        assert not report.overall

    def test_kink_violates_regularity(self):
        hat = {"kind": "pp", "breaks": [0.0, 0.5, 1.0],
               "coeffs": [[0.0, 2.0], [1.0, -2.0]]}
        spec = load_network(two_edge_tree(hat, {"kind": "constant", "value": 1.0}))
        report = check_property_P(spec.graph, spec.damping)
        assert not report.overall
        assert any("L-infinity" in m for m in report.messages)

    def test_tree_and_graph_modes_agree(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            doc = random_tree_doc(rng)
            tree = load_network(doc)
            graph = load_network(as_graph_mode(doc))
            rt = check_property_P(tree.graph, tree.damping)
            rg = check_property_P(graph.graph, graph.damping)
            assert rt.node_satisfied == rg.node_satisfied
            for v, val in rt.node_values.items():
                assert rg.node_values[v] == pytest.approx(-val, abs=1e-12)


class TestContinuity:
    def test_kv_meeting_elastic_zero_value_is_case_one(self):
        # the damped edge vanishes at the shared node, so values agree at 0
        spec = load_network(two_edge_tree(
            {"kind": "zero"},
            {"kind": "pp", "breaks": [0.0, 1.0], "coeffs": [[0.0, 1.0]]}))
        assert classify_continuity(spec.graph, spec.damping).case == "I"

    def test_constant_kv_meeting_elastic_is_case_two(self):
        spec = load_network(two_edge_tree({"kind": "zero"},
                                          {"kind": "constant", "value": 1.0}))
        report = classify_continuity(spec.graph, spec.damping)
        assert report.case == "II"
        vals = list(report.node_values.values())[0]
        assert sorted(vals) == [0.0, 1.0]

    def test_single_edge_case_one_vacuously(self):
        doc = {
            "mode": "tree",
            "vertices": [{"id": "R", "root": True}, {"id": "S"}],
            "edges": [{"id": "e", "from": "R", "to": "S", "length": 1.0,
                       "damping": {"kind": "constant", "value": 1.0}}],
        }
        spec = load_network(doc)
        assert classify_continuity(spec.graph, spec.damping).case == "I"

    def test_reorientation_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            doc = random_tree_doc(rng)
            a = load_network(as_graph_mode(doc))
            b = load_network(doc)  # tree mode flips scrambled edges
            ca = classify_continuity(a.graph, a.damping)
            cb = classify_continuity(b.graph, b.damping)
            assert ca.case == cb.case
            assert ca.node_continuous == cb.node_continuous


class TestEvalNonnegativity:
    def test_random_admissible_profiles_are_nonnegative(self):
        from util import random_profile_config
        rng = np.random.default_rng(123)
        xs = np.linspace(0.0, 1.0, 257)
        for _ in range(50):
            p = DampingProfile.from_config(random_profile_config(rng), 1.0)
            assert np.all(p.eval(xs) >= -1e-12)
