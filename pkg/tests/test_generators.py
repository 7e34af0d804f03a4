from __future__ import annotations

import random

import pytest

from skelcov.galois import galois_audit, validate_galois
from skelcov.generators import (
    cyclic_voltage_model,
    dihedral_necklace,
    ramified_cyclic_star,
    random_cover,
    random_factored_polynomial,
    random_flow,
    random_galois_model,
    random_metric_graph,
    random_ultrametric_set,
    tn_oracle_input,
)
from skelcov.genus_audit import local_rh_report
from skelcov.metric_graph import VertexKind
from skelcov.pone_oracle import induced_cover
from skelcov.specdoc import CoverDocument, emit_document


class TestDeterminism:
    def test_random_cover_reproduces(self):
        a = random_cover(random.Random(42))
        b = random_cover(random.Random(42))
        assert emit_document(CoverDocument(a)) == emit_document(CoverDocument(b))

    def test_random_galois_model_reproduces(self):
        a = random_galois_model(random.Random(9))
        b = random_galois_model(random.Random(9))
        assert emit_document(
            CoverDocument(a.cover, galois=a.group)
        ) == emit_document(CoverDocument(b.cover, galois=b.group))

    def test_different_seeds_differ(self):
        docs = {
            emit_document(CoverDocument(random_cover(random.Random(seed))))
            for seed in range(12)
        }
        assert len(docs) > 1

    def test_tn_input_reproduces(self):
        a = tn_oracle_input(random.Random(3))
        b = tn_oracle_input(random.Random(3))
        assert a.points == b.points
        assert a.fibers == b.fibers
        assert a.base == b.base


class TestRandomMetricGraph:
    def test_valid_and_connected(self):
        # the MetricGraph constructor rejects disconnected or malformed input,
        # so surviving construction is already most of the contract
        rng = random.Random(11)
        for _ in range(60):
            g = random_metric_graph(rng)
            assert g.genus() >= 0
            for x in g.punctures():
                assert g.valence(x) == 1


class TestRandomCover:
    def test_valid_by_construction(self):
        rng = random.Random(12)
        for _ in range(60):
            c = random_cover(rng)
            assert c.validate() == []

    def test_local_books_balance(self):
        # genera are chosen to satisfy the local formula at every vertex
        rng = random.Random(13)
        for _ in range(40):
            c = random_cover(rng)
            assert local_rh_report(c).passed

    def test_explicit_target_and_degree(self):
        rng = random.Random(14)
        for _ in range(20):
            target = random_metric_graph(rng)
            c = random_cover(rng, target=target, degree=3)
            assert c.target is target
            assert c.validate() == []
            assert 1 <= c.global_degree() <= 3


class TestRandomFlow:
    def test_valid_and_protects_ramified_punctures(self):
        rng = random.Random(15)
        for _ in range(40):
            c = random_cover(rng)
            flow = random_flow(rng, c)
            assert flow.ambient is c.target
            for x in c.source.punctures():
                if c.puncture_ram[x] > 1:
                    img = c.vertex_map[x]
                    assert img in flow.core_vertices
                    (ray, _), = c.target.edge_ends_at(img)
                    assert ray in flow.core_edges


class TestCyclicVoltage:
    def test_unramified_circle_cover(self):
        m = cyclic_voltage_model(3)
        assert validate_galois(m) == []
        assert m.cover.global_degree() == 3
        assert len(m.group) == 3
        # one cycle, three times as long
        assert m.cover.source.genus() == 1

    def test_longer_cycle_with_rays(self):
        m = cyclic_voltage_model(2, cycle_len=3, rays=2)
        assert validate_galois(m) == []
        assert len(m.cover.source.punctures()) == 4

    def test_audit_passes(self):
        assert galois_audit(cyclic_voltage_model(2, cycle_len=2, rays=1)).passed

    def test_n_too_small(self):
        with pytest.raises(ValueError):
            cyclic_voltage_model(1)


class TestRamifiedCyclicStar:
    def test_galois_clean(self):
        for n in (2, 3, 5):
            m = ramified_cyclic_star(n)
            assert validate_galois(m) == []
            assert m.cover.global_degree() == n
            assert m.cover.ram["q1.0"] == n

    def test_audit_passes(self):
        assert galois_audit(ramified_cyclic_star(3)).passed
        assert galois_audit(ramified_cyclic_star(2, tame_rays=3)).passed

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            ramified_cyclic_star(1)
        with pytest.raises(ValueError):
            ramified_cyclic_star(3, tame_rays=0)


class TestDihedralNecklace:
    def test_galois_clean(self):
        for n in (1, 2, 4):
            m = dihedral_necklace(n)
            assert validate_galois(m) == []
            assert len(m.group) == 2 * n
            assert m.cover.global_degree() == 2 * n
            assert m.cover.source.genus() == 1

    def test_rotations_alone_fail_transitivity(self):
        # without the reflections the group cannot move a germ fiber onto
        # itself at the folding vertices
        m = dihedral_necklace(2)
        rotations = m.group[:2]
        bad = validate_galois(type(m)(m.cover, rotations))
        assert any(v.axiom == "galois-transitivity" for v in bad)

    def test_ramified_rays(self):
        m = dihedral_necklace(2, ramified_rays=True)
        assert validate_galois(m) == []
        assert all(
            m.cover.puncture_ram[x] == 2 for x in m.cover.source.punctures()
        )
        assert galois_audit(m).passed

    def test_audit_passes(self):
        assert galois_audit(dihedral_necklace(3)).passed

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            dihedral_necklace(0)


class TestRandomGaloisModel:
    def test_always_clean(self):
        rng = random.Random(16)
        for _ in range(25):
            m = random_galois_model(rng)
            assert validate_galois(m) == []


class TestUltrametricGenerators:
    def test_point_counts(self):
        rng = random.Random(17)
        for n in (2, 3, 6):
            p = random_ultrametric_set(rng, n_points=n)
            assert len(p.labels) == n

    def test_polynomials_are_well_formed(self):
        rng = random.Random(18)
        for _ in range(30):
            points = random_ultrametric_set(rng)
            f = random_factored_polynomial(rng, points)
            assert f.degree >= 1
            assert all(label in points.labels for label, _ in f.roots)

    def test_tn_inputs_induce(self):
        rng = random.Random(19)
        for _ in range(10):
            spec = tn_oracle_input(rng)
            cover = induced_cover(
                spec.points, spec.fibers, spec.base, spec.residue_char,
                spec.insep_degrees,
            )
            assert cover.validate() == []
            # the fiber over 0 is totally ramified along its ray
            assert cover.ram["arc(pt(a0))"] == cover.global_degree()
            assert all(
                v.kind is VertexKind.PUNCTURE or v.genus == 0
                for v in cover.source.vertices.values()
            )
