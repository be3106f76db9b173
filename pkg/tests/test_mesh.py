"""Mesh construction, invariants, refinement, and file round trips."""

import numpy as np
import pytest

import helfrich as hf
from helfrich.curvature import angle_defect_total
from helfrich.errors import MeshInputError, ParameterError, TopologyError, UnsupportedError
from helfrich.mesh import PrimitiveSpec, radial_profile


def test_icosphere_counts_and_topology():
    m = hf.icosphere(1.0, 3)
    assert m.n_vertices == 10 * 4**3 + 2 == 642
    assert m.closed
    assert m.euler_characteristic == 2
    d = hf.validate(m)
    assert d.ok and d.boundary_loops == 0


def test_catenoid_topology():
    m = hf.catenoid_mesh(1.0, 2.0, (64, 64))
    assert m.n_vertices == 64 * 64
    assert not m.closed
    assert m.euler_characteristic == 0
    d = hf.validate(m)
    assert d.ok
    assert d.boundary_loops == 2


def test_perturbed_sphere_amplitude_bound():
    m = hf.perturbed_sphere(2.0, 0.05, 4)
    assert m.closed and m.euler_characteristic == 2
    r = np.linalg.norm(m.vertices, axis=1)
    assert np.abs(r - 2.0).max() <= 0.1 * 2.0


def test_radial_profile_zero_mean():
    # all monomials odd => exact zero mean over the unit sphere; check by
    # quadrature on a fine spherical grid
    from helfrich.analytic import QuadratureGrid, oracle_integrate, sphere
    s = sphere(1.0)
    grid = QuadratureGrid.for_surface(s, 128, 128)
    mean = oracle_integrate(s, lambda g: radial_profile(g.position), grid)
    assert abs(mean) < 1e-12
    # sup bound keeps the amplitude inequality valid by construction
    rng = np.random.default_rng(0)
    n = rng.normal(size=(20000, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert np.abs(radial_profile(n)).max() <= 1.0


def test_invalid_specs_name_field():
    with pytest.raises(ParameterError) as e:
        hf.make_primitive(PrimitiveSpec(kind="icosphere", radius=-1.0))
    assert e.value.field == "radius"
    with pytest.raises(ParameterError) as e:
        hf.make_primitive(PrimitiveSpec(kind="perturbed_sphere", amplitude=0.5))
    assert e.value.field == "amplitude"
    with pytest.raises(ParameterError) as e:
        hf.make_primitive(PrimitiveSpec(kind="catenoid", neck_scale=0.0))
    assert e.value.field == "neck_scale"


def test_sphere_integrals_converge():
    m = hf.icosphere(1.0, 5)
    ints = hf.mesh_integrals(m)
    assert abs(ints["area"] - 4 * np.pi) / (4 * np.pi) < 1e-3
    assert abs(ints["signed_volume"] - 4 * np.pi / 3) / (4 * np.pi / 3) < 2e-3


def test_flat_patch_exact_area():
    m = hf.flat_patch((16, 16))
    ints = hf.mesh_integrals(m)
    assert abs(ints["area"] - 1.0) <= 1e-12
    assert ints["euler_characteristic"] == 1
    assert ints["signed_volume"] is None


def test_orientation_reversal_flips_volume():
    m = hf.icosphere(1.0, 2)
    flipped = hf.TriangleMesh(m.vertices, m.faces[:, ::-1])
    a = hf.mesh_integrals(m)
    b = hf.mesh_integrals(flipped)
    assert a["signed_volume"] > 0
    assert np.isclose(b["signed_volume"], -a["signed_volume"])
    assert np.isclose(b["area"], a["area"])


def test_signed_volume_requires_closed():
    from helfrich.mesh import signed_volume
    with pytest.raises(TopologyError):
        signed_volume(hf.flat_patch((4, 4)))


def test_validate_flags_bowtie_vertex():
    # two triangles sharing a single vertex: consistent orientation but a
    # non-manifold fan
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0],
                      [-1, 0, 0], [0, -1, 0]], dtype=float)
    faces = np.array([[0, 1, 2], [0, 3, 4]])
    d = hf.validate(hf.TriangleMesh(verts, faces))
    assert d.oriented             # no duplicated directed edges
    assert not d.manifold         # but the shared vertex is a bowtie
    assert not d.ok


def test_validate_flags_flipped_face():
    m = hf.icosphere(1.0, 2)
    faces = m.faces.copy()
    faces[0] = faces[0, ::-1]
    broken = hf.TriangleMesh(m.vertices, faces)
    d = hf.validate(broken)
    assert not d.ok
    assert not d.oriented
    assert any("orientation" in msg for msg in d.messages)


def test_refine_counts_and_projection():
    m = hf.icosphere(1.0, 3)
    r = hf.refine(m)
    assert r.n_vertices == 2562
    assert r.n_faces == 4 * m.n_faces
    assert r.euler_characteristic == 2
    # icosphere source reprojects onto the sphere
    assert np.abs(np.linalg.norm(r.vertices, axis=1) - 1.0).max() < 1e-12


def test_refine_area_error_decreases():
    errs = []
    m = hf.icosphere(1.0, 2)
    for _ in range(3):
        errs.append(abs(hf.mesh_integrals(m)["area"] - 4 * np.pi))
        m = hf.refine(m)
    errs.append(abs(hf.mesh_integrals(m)["area"] - 4 * np.pi))
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))


def test_refine_preserves_euler_characteristic():
    m = hf.perturbed_sphere(1.0, 0.1, 2)
    r = hf.refine(m)
    assert r.euler_characteristic == m.euler_characteristic == 2


def test_refine_open_mesh_unsupported():
    with pytest.raises(UnsupportedError):
        hf.refine(hf.flat_patch((4, 4)))


@pytest.mark.parametrize("level", [2, 3, 4])
def test_angle_defect_gauss_bonnet(level):
    m = hf.icosphere(1.3, level)
    assert abs(angle_defect_total(m) - 2 * np.pi * 2) < 1e-9
    p = hf.perturbed_sphere(1.0, 0.08, level)
    assert abs(angle_defect_total(p) - 2 * np.pi * 2) < 1e-9


def test_angle_defect_open_meshes():
    # polyhedral Gauss-Bonnet with boundary turning collapsed onto vertices
    assert abs(angle_defect_total(hf.flat_patch((8, 8))) - 2 * np.pi) < 1e-9
    assert abs(angle_defect_total(hf.catenoid_mesh(1.0, 2.0, (32, 32)))) < 1e-9


@pytest.mark.parametrize("ext", ["obj", "off"])
def test_roundtrip_bitwise(tmp_path, ext):
    m = hf.perturbed_sphere(1.7, 0.05, 2)
    path = tmp_path / f"mesh.{ext}"
    hf.save_mesh(m, path)
    back = hf.load_mesh(path)
    assert np.array_equal(back.faces, m.faces)
    assert np.array_equal(back.vertices, m.vertices)   # 17 sig digits round-trip
    # second round trip is bitwise stable
    path2 = tmp_path / f"mesh2.{ext}"
    hf.save_mesh(back, path2)
    assert path.read_bytes().splitlines()[-m.n_faces:] == \
        path2.read_bytes().splitlines()[-m.n_faces:]


def test_off_quad_face_rejected(tmp_path):
    path = tmp_path / "quad.off"
    path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(MeshInputError) as e:
        hf.load_mesh(path)
    assert "non-triangular face" in str(e.value)
    assert e.value.line == 7


def test_obj_quad_face_rejected(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(MeshInputError) as e:
        hf.load_mesh(path)
    assert "non-triangular" in str(e.value) and e.value.line == 5


def test_empty_file_parse_error(tmp_path):
    path = tmp_path / "empty.off"
    path.write_text("")
    with pytest.raises(MeshInputError):
        hf.load_mesh(path)
    path2 = tmp_path / "empty.obj"
    path2.write_text("")
    with pytest.raises(MeshInputError):
        hf.load_mesh(path2)


def test_load_rejects_nonmanifold(tmp_path):
    # two triangles sharing an edge with identical winding: duplicated
    # directed edge
    path = tmp_path / "bad.obj"
    path.write_text(
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 2 4\n")
    with pytest.raises(MeshInputError):
        hf.load_mesh(path)


def test_with_positions_shares_connectivity():
    m = hf.icosphere(1.0, 2)
    shifted = m.with_positions(m.vertices + [1.0, 0.0, 0.0])
    assert shifted.faces is m.faces
    assert shifted.closed
    assert np.allclose(
        hf.mesh_integrals(shifted)["signed_volume"],
        hf.mesh_integrals(m)["signed_volume"])


def test_vertices_immutable():
    m = hf.icosphere(1.0, 2)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 99.0
