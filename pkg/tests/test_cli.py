import numpy as np
import pytest

from patchdg.cli import export_vtk, main
from patchdg.mesh import build_topology, generate_square_tri, write_msh
from patchdg.reconstruction import build_space, interpolate


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


class TestSolveCommand:
    def test_solve_square(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "solve", "--problem", "laplace", "--mesh", "square:8",
            "--m", "2", "--k", "20", "--output", str(out),
        ])
        assert code == 0
        header, rows = read_csv(out / "eigenvalues.csv")
        assert header == ["index", "value", "residual"]
        assert len(rows) == 20
        values = [float(r[1]) for r in rows]
        assert values == sorted(values)
        assert abs(values[0] - 2.0) < 0.05

    def test_solve_writes_vtk(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "solve", "--mesh", "square:4", "--m", "1", "--k", "3",
            "--vtk", "2", "--output", str(out),
        ])
        assert code == 0
        assert (out / "eigenfunction_001.vtk").exists()
        assert (out / "eigenfunction_002.vtk").exists()

    def test_missing_mesh_file_exit_2_no_artifacts(self, tmp_path):
        out = tmp_path / "run"
        code = main(["solve", "--mesh", str(tmp_path / "nope.msh"), "--output", str(out)])
        assert code == 2
        assert not out.exists()

    def test_numerical_failure_exit_3(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "solve", "--mesh", "square:4", "--m", "2", "--k", "3",
            "--eta", "1e-9", "--output", str(out),
        ])
        assert code == 3

    def test_bad_degree_exit_2(self, tmp_path):
        code = main(["solve", "--problem", "biharmonic", "--mesh", "square:4",
                     "--m", "1", "--output", str(tmp_path)])
        assert code == 2

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["solve", "--mesh", "square:4", "--m", "1", "--k", "5",
                         "--output", str(out)]) == 0
        assert (a / "eigenvalues.csv").read_bytes() == (b / "eigenvalues.csv").read_bytes()

    def test_mesh_file_input(self, tmp_path):
        mesh_path = tmp_path / "mesh.msh"
        mesh_path.write_text(write_msh(generate_square_tri(4)))
        out = tmp_path / "run"
        code = main(["solve", "--mesh", str(mesh_path), "--m", "1", "--k", "3",
                     "--output", str(out)])
        assert code == 0
        assert (out / "eigenvalues.csv").exists()

    def test_above_exact_diagnostic_printed(self, tmp_path, capsys):
        code = main(["solve", "--mesh", "square:8", "--m", "2", "--k", "5",
                     "--output", str(tmp_path / "out")])
        assert code == 0
        assert "above-exact diagnostic" in capsys.readouterr().out


class TestConfigFile:
    def test_file_values_and_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mesh=square:4\nm=2\nk=3\nproblem=laplace\n# comment\n")
        out = tmp_path / "out"
        code = main(["solve", "--config", str(cfg), "--k", "5", "--output", str(out)])
        assert code == 0
        _, rows = read_csv(out / "eigenvalues.csv")
        assert len(rows) == 5  # flag overrode k=3

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("meshes=square:4\n")
        assert main(["solve", "--config", str(cfg)]) == 2

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PATCHDG_THREADS", "2")
        out = tmp_path / "out"
        code = main(["solve", "--mesh", "square:4", "--m", "1", "--k", "3",
                     "--output", str(out)])
        assert code == 0

    def test_bad_threads_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PATCHDG_THREADS", "lots")
        assert main(["solve", "--mesh", "square:4", "--output", str(tmp_path)]) == 2


class TestConvergenceCommand:
    def test_errors_csv(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "convergence", "--problem", "laplace", "--mesh", "square:4,8",
            "--m", "1", "--target", "1", "--output", str(out),
        ])
        assert code == 0
        header, rows = read_csv(out / "errors.csv")
        assert header == ["scale", "value", "error", "order"]
        assert len(rows) == 2
        assert rows[0][3] == ""  # no order on the first row
        assert float(rows[1][3]) > 0.5
        assert (out / "errors_eigenfunction.csv").exists()


class TestReliableCommand:
    def test_reliable_csv(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "reliable", "--problem", "laplace", "--mesh", "square:4,8",
            "--m", "1", "--output", str(out),
        ])
        assert code == 0
        header, rows = read_csv(out / "reliable.csv")
        assert header == ["N", "count", "percentage"]
        assert len(rows) == 1
        n, count, pct = int(rows[0][0]), int(rows[0][1]), float(rows[0][2])
        assert n == 128
        assert 0 <= count <= n
        assert abs(pct - 100.0 * count / n) < 1e-9


class TestSourceCommand:
    def test_source_errors_csv(self, tmp_path):
        out = tmp_path / "run"
        code = main([
            "source", "--problem", "laplace", "--mesh", "square:4,8",
            "--m", "2", "--output", str(out),
        ])
        assert code == 0
        header, rows = read_csv(out / "errors.csv")
        assert header == ["scale", "value", "error", "order"]
        errs = [float(r[2]) for r in rows]
        assert errs[1] < errs[0]


class TestMeshInfo:
    def test_prints_stats(self, tmp_path, capsys):
        code = main(["mesh-info", "--mesh", "square:4"])
        assert code == 0
        out = capsys.readouterr().out
        assert "elements:         32" in out
        assert "vertices:         25" in out


class TestVtkExport:
    @pytest.fixture()
    def space(self):
        mesh = generate_square_tri(4)
        return build_space(mesh, build_topology(mesh), 1)

    def test_constant_field(self, tmp_path, space):
        path = tmp_path / "f.vtk"
        export_vtk(space.mesh, space, np.ones(space.num_dofs), path)
        text = path.read_text().splitlines()
        assert text[0] == "# vtk DataFile Version 3.0"
        assert "DATASET UNSTRUCTURED_GRID" in text
        start = text.index("LOOKUP_TABLE default") + 1
        n_pts = 3 * space.mesh.num_elements
        values = [float(v) for v in text[start:start + n_pts]]
        assert np.allclose(values, 1.0, atol=1e-10)

    def test_linear_field_matches_vertices(self, tmp_path, space):
        data = interpolate(space, lambda x, y: x)
        path = tmp_path / "x.vtk"
        export_vtk(space.mesh, space, data, path)
        text = path.read_text().splitlines()
        i_pts = text.index("POINTS %d double" % (3 * space.mesh.num_elements)) + 1
        coords = [list(map(float, text[i_pts + k].split())) for k in range(3 * space.mesh.num_elements)]
        start = text.index("LOOKUP_TABLE default") + 1
        values = [float(v) for v in text[start:start + len(coords)]]
        for c, v in zip(coords, values):
            assert abs(v - c[0]) < 1e-10

    def test_cell_types_and_counts(self, tmp_path, space):
        path = tmp_path / "t.vtk"
        export_vtk(space.mesh, space, np.zeros(space.num_dofs), path)
        text = path.read_text().splitlines()
        nc = space.mesh.num_elements
        i_types = text.index(f"CELL_TYPES {nc}") + 1
        types = {int(t) for t in text[i_types:i_types + nc]}
        assert types == {5}  # triangles
        i_cd = text.index(f"CELL_DATA {nc}")
        assert i_cd > 0

    def test_wrong_length_rejected(self, tmp_path, space):
        with pytest.raises(ValueError):
            export_vtk(space.mesh, space, np.ones(3), tmp_path / "b.vtk")
