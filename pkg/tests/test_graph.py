import itertools

import numpy as np
import pytest

from relcast.graph import (
    AssignmentError,
    Document,
    Edge,
    FlatModel,
    GraphValidationError,
    TriadCensus,
    enumerate_triangles,
    gold_labels,
    joint_features,
    score,
    triad_census,
    triangle_components,
)

from conftest import make_document, random_labels, random_model


def doc_from_pairs(pairs, dim=1, labels=None, chars=None):
    if chars is None:
        chars = sorted({c for p in pairs for c in p})
    edges = []
    for i, (a, b) in enumerate(pairs):
        gold = labels[i] if labels is not None else None
        edges.append(Edge(a, b, np.zeros(dim), gold))
    return Document("d", tuple(chars), tuple(edges))


def census_by_hand(doc, labels):
    """Independent census: walk all character triples, classify by sign count."""
    counts = [0, 0, 0, 0]
    index = doc.pair_index
    for trio in itertools.combinations(doc.characters, 3):
        pairs = list(itertools.combinations(trio, 2))
        if not all(p in index for p in pairs):
            continue
        npos = sum(1 for p in pairs if labels[index[p]] > 0)
        counts[3 - npos] += 1
    return TriadCensus(*counts)


class TestEnumerateTriangles:
    def test_single_triangle(self):
        doc = doc_from_pairs([("A", "B"), ("A", "C"), ("B", "C")])
        assert enumerate_triangles(doc) == [(0, 1, 2)]

    def test_open_wedge_is_not_a_triangle(self):
        doc = doc_from_pairs([("A", "B"), ("B", "C")], chars=["A", "B", "C"])
        assert enumerate_triangles(doc) == []

    def test_complete_graph_on_five(self):
        chars = [f"c{i}" for i in range(5)]
        doc = doc_from_pairs(list(itertools.combinations(chars, 2)))
        triangles = enumerate_triangles(doc)
        assert len(triangles) == 10  # C(5,3)
        # brute force over all character triples
        expected = set()
        for trio in itertools.combinations(chars, 3):
            expected.add(tuple(sorted(doc.pair_index[p] for p in itertools.combinations(trio, 2))))
        assert {tuple(sorted(t)) for t in triangles} == expected

    def test_each_triangle_once_and_deterministic(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            doc = make_document(rng, max_chars=7, max_edges=15)
            triangles = enumerate_triangles(doc)
            assert len(set(map(tuple, triangles))) == len(triangles)
            assert triangles == enumerate_triangles(doc)


class TestTriadCensus:
    def test_all_positive_triangle_is_clique(self):
        doc = doc_from_pairs([("A", "B"), ("A", "C"), ("B", "C")])
        assert triad_census(doc, [1, 1, 1]) == TriadCensus(clique=1)

    def test_common_adversary(self):
        # A and T cooperate; both are hostile to M
        doc = doc_from_pairs([("A", "T"), ("A", "M"), ("T", "M")])
        labels = np.zeros(3, dtype=int)
        labels[doc.pair_index[("A", "T")]] = 1
        labels[doc.pair_index[("A", "M")]] = -1
        labels[doc.pair_index[("M", "T")]] = -1
        assert triad_census(doc, labels) == TriadCensus(common_enemy=1)

    def test_complete_four_matches_brute_force(self):
        rng = np.random.default_rng(5)
        chars = ["a", "b", "c", "d"]
        doc = doc_from_pairs(list(itertools.combinations(chars, 2)))
        for _ in range(20):
            labels = random_labels(rng, 6)
            census = triad_census(doc, labels)
            assert census == census_by_hand(doc, labels)
            assert census.total == 4

    def test_missing_label_in_triangle_rejected(self):
        doc = doc_from_pairs([("A", "B"), ("A", "C"), ("B", "C")])
        with pytest.raises(AssignmentError):
            triad_census(doc, [1, 0, 1])

    def test_wrong_length_rejected(self):
        doc = doc_from_pairs([("A", "B")], chars=["A", "B"])
        with pytest.raises(AssignmentError):
            triad_census(doc, [1, 1])

    def test_counts_sum_to_triangle_count(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            doc = make_document(rng, max_chars=7, max_edges=14)
            labels = random_labels(rng, len(doc.edges))
            census = triad_census(doc, labels)
            assert census.total == len(enumerate_triangles(doc))


class TestJointFeatures:
    def test_all_positive_sums_features(self):
        rng = np.random.default_rng(3)
        doc = make_document(rng, max_chars=5, max_edges=8, dim=4)
        phi = joint_features(doc, np.ones(len(doc.edges), dtype=int))
        if doc.edges:
            np.testing.assert_allclose(phi[:4], doc.feature_matrix.sum(axis=0))

    def test_global_flip_symmetry(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            doc = make_document(rng, max_chars=6, max_edges=12, dim=3)
            labels = random_labels(rng, len(doc.edges))
            phi = joint_features(doc, labels)
            flipped = joint_features(doc, -labels)
            np.testing.assert_array_equal(flipped[:3], -phi[:3])
            np.testing.assert_array_equal(flipped[3:], phi[3:][::-1])

    def test_two_edge_hand_example(self):
        doc = Document(
            "d", ("A", "B", "C"),
            (Edge("A", "B", [1.0, 0.0]), Edge("A", "C", [0.0, 2.0])),
        )
        phi = joint_features(doc, [1, -1])
        np.testing.assert_array_equal(phi, [1.0, -2.0, 0, 0, 0, 0])

    def test_incomplete_assignment_rejected(self):
        doc = doc_from_pairs([("A", "B")], chars=["A", "B"])
        with pytest.raises(AssignmentError):
            joint_features(doc, [0])


class TestScore:
    def test_zero_weights_score_zero(self):
        rng = np.random.default_rng(9)
        doc = make_document(rng, max_chars=5, max_edges=8, dim=3)
        model = FlatModel(np.zeros(3), np.zeros(4))
        labels = random_labels(rng, len(doc.edges))
        assert score(model, doc, labels) == 0.0

    def test_single_common_enemy_triangle(self):
        doc = doc_from_pairs([("A", "B"), ("A", "C"), ("B", "C")])
        model = FlatModel(np.zeros(1), np.array([-2.79, -0.84, 10.26, -5.49]))
        assert score(model, doc, [1, -1, -1]) == pytest.approx(10.26)

    def test_matches_joint_feature_dot_product(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            doc = make_document(rng, max_chars=6, max_edges=12, dim=3)
            model = random_model(rng, dim=3)
            labels = random_labels(rng, len(doc.edges))
            via_phi = float(model.weights @ joint_features(doc, labels, text_dim=3))
            assert score(model, doc, labels) == pytest.approx(via_phi, rel=1e-12, abs=1e-12)

    def test_dimension_mismatch_rejected(self):
        doc = doc_from_pairs([("A", "B")], dim=2, chars=["A", "B"])
        model = FlatModel(np.zeros(3), np.zeros(4))
        with pytest.raises(GraphValidationError):
            score(model, doc, [1])

    def test_standardization_applied(self):
        doc = Document("d", ("A", "B"), (Edge("A", "B", [3.0]),))
        model = FlatModel([1.0], np.zeros(4), feature_means=[1.0], feature_stds=[2.0])
        assert score(model, doc, [1]) == pytest.approx(1.0)  # (3-1)/2


class TestTriangleComponents:
    def test_path_graph_gives_singletons(self):
        doc = doc_from_pairs([("A", "B"), ("B", "C")], chars=["A", "B", "C"])
        assert triangle_components(doc) == [[0], [1]]

    def test_triangle_plus_pendant(self):
        doc = doc_from_pairs([("A", "B"), ("A", "C"), ("B", "C"), ("C", "D")])
        comps = triangle_components(doc)
        assert sorted(map(len, comps)) == [1, 3]
        assert [doc.edges[i].pair for i in comps[-1]] == [("C", "D")] or \
               [doc.edges[i].pair for i in comps[0]] != []

    def test_two_triangles_sharing_an_edge(self):
        doc = doc_from_pairs(
            [("A", "B"), ("A", "C"), ("B", "C"), ("B", "D"), ("C", "D")]
        )
        assert triangle_components(doc) == [[0, 1, 2, 3, 4]]

    def test_is_a_partition(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            doc = make_document(rng, max_chars=7, max_edges=16)
            comps = triangle_components(doc)
            flat = [e for comp in comps for e in comp]
            assert sorted(flat) == list(range(len(doc.edges)))
            # triangles never straddle components
            comp_of = {}
            for ci, comp in enumerate(comps):
                for e in comp:
                    comp_of[e] = ci
            for i, j, k in enumerate_triangles(doc):
                assert comp_of[i] == comp_of[j] == comp_of[k]


class TestValidation:
    def test_duplicate_characters_rejected(self):
        with pytest.raises(GraphValidationError):
            Document("d", ("A", "A"), ())

    def test_empty_character_id_rejected(self):
        with pytest.raises(GraphValidationError):
            Document("d", ("A", ""), ())

    def test_undeclared_endpoint_rejected(self):
        with pytest.raises(GraphValidationError, match="undeclared"):
            Document("d", ("A", "B"), (Edge("A", "Z", [0.0]),))

    def test_duplicate_pair_rejected(self):
        with pytest.raises(GraphValidationError, match="duplicate edge"):
            Document("d", ("A", "B"), (Edge("A", "B", [0.0]), Edge("B", "A", [1.0])))

    def test_self_edge_rejected(self):
        with pytest.raises(GraphValidationError):
            Edge("A", "A", [0.0])

    def test_feature_dim_mismatch_rejected(self):
        with pytest.raises(GraphValidationError):
            Document("d", ("A", "B", "C"), (Edge("A", "B", [0.0]), Edge("A", "C", [0.0, 1.0])))

    def test_edges_and_characters_sorted(self):
        doc = Document("d", ("C", "A", "B"), (Edge("C", "B", [0.0]), Edge("B", "A", [0.0])))
        assert doc.characters == ("A", "B", "C")
        assert [e.pair for e in doc.edges] == [("A", "B"), ("B", "C")]

    def test_endpoints_normalized(self):
        assert Edge("Z", "A", [0.0]).pair == ("A", "Z")

    def test_features_frozen(self):
        edge = Edge("A", "B", [1.0, 2.0])
        with pytest.raises(ValueError):
            edge.features[0] = 5.0

    def test_gold_labels_require_complete_annotation(self):
        doc = Document("d", ("A", "B"), (Edge("A", "B", [0.0], None),))
        with pytest.raises(AssignmentError):
            gold_labels(doc)

    def test_bad_gold_value_rejected(self):
        with pytest.raises(GraphValidationError):
            Edge("A", "B", [0.0], gold=2)
