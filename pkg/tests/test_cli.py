"""Command-line interface: exit codes, outputs, and artifact writing."""

import json
import os
import stat

import pytest

from conftest import unit_square_tri
from lmdem.cli import EXIT_MESHER, EXIT_SCHEMA, EXIT_SOLVER, build_parser, main
from lmdem.materials import GENT_THOMAS_EXPR
from lmdem.mesh import write_msh


@pytest.fixture
def mesh_file(tmp_path):
    path = tmp_path / "plate.msh"
    write_msh(unit_square_tri(3, groups="left-fixed"), str(path))
    return path


def quick_config_file(tmp_path, mesh_file, solver="dem", max_epochs=5):
    path = tmp_path / "run.yaml"
    path.write_text(
        f"""
geometry:
  msh: {mesh_file}
boundary:
  neumann:
    value: 2.0
network:
  widths: [4]
training:
  solver: {solver}
  max_epochs: {max_epochs}
  particular_steps: 5
"""
    )
    return path


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_mesh_defaults(self):
        args = build_parser().parse_args(["mesh", "a.geo"])
        assert args.output == "out.msh" and args.dim == 2 and args.lc == 0.1

    def test_solve_defaults(self):
        args = build_parser().parse_args(["solve", "run.yaml"])
        assert args.outdir == "run" and args.solver is None


class TestExprCheck:
    def test_gent_thomas_passes(self, capsys):
        rc = main(["expr-check", GENT_THOMAS_EXPR])
        out = capsys.readouterr().out
        assert rc == 0
        assert "value at identity: 0.0" in out
        assert "gradient check: PASS" in out

    def test_simple_expression(self, capsys):
        rc = main(["expr-check", "0.5*(ux**2 + uy**2)", "--dim", "2"])
        assert rc == 0
        assert "symbols: ['ux', 'uy']" in capsys.readouterr().out

    def test_syntax_error(self, capsys):
        rc = main(["expr-check", "0.5*(ux"])
        assert rc == EXIT_SCHEMA
        assert "invalid" in capsys.readouterr().err

    def test_unknown_symbol(self, capsys):
        rc = main(["expr-check", "q**2"])
        assert rc == EXIT_SCHEMA

    def test_wrong_dim_symbol(self, capsys):
        # wz is a 3D symbol and must be rejected in 2D
        rc = main(["expr-check", "wz**2", "--dim", "2"])
        assert rc == EXIT_SCHEMA

    def test_domain_error_at_identity(self, capsys):
        rc = main(["expr-check", "log(ux)"])
        assert rc == EXIT_SCHEMA
        assert "identity" in capsys.readouterr().err

    def test_spatial_mode(self, capsys):
        rc = main(["expr-check", "sin(x)*cos(y)", "--spatial"])
        assert rc == 0
        assert "symbols: ['x', 'y']" in capsys.readouterr().out


class TestMesh:
    def test_missing_geo_file(self, tmp_path, capsys):
        rc = main(["mesh", str(tmp_path / "absent.geo")])
        assert rc == EXIT_SCHEMA

    def test_mesher_unavailable(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("LMDEM_GMSH_BIN", str(tmp_path / "no-such-gmsh"))
        geo = tmp_path / "plate.geo"
        geo.write_text("Point(1) = {0, 0, 0, 0.1};\n")
        rc = main(["mesh", str(geo), "-o", str(tmp_path / "out.msh")])
        assert rc == EXIT_MESHER
        assert "mesher error" in capsys.readouterr().err

    def test_fake_mesher_binary(self, tmp_path, mesh_file, monkeypatch, capsys):
        # a stand-in executable that honors the -o flag and emits a canned
        # mesh exercises the real subprocess path end to end
        script = tmp_path / "fakegmsh"
        script.write_text(
            "#!/bin/sh\n"
            'while [ "$#" -gt 0 ]; do\n'
            '  if [ "$1" = "-o" ]; then out="$2"; shift; fi\n'
            "  shift\n"
            "done\n"
            f'cp "{mesh_file}" "$out"\n'
        )
        script.chmod(script.stat().st_mode | stat.S_IEXEC)
        monkeypatch.setenv("LMDEM_GMSH_BIN", str(script))
        geo = tmp_path / "plate.geo"
        geo.write_text("Point(1) = {0, 0, 0, 0.1};\n")
        out_path = tmp_path / "meshed.msh"
        rc = main(["mesh", str(geo), "-o", str(out_path)])
        assert rc == 0
        assert out_path.exists()
        assert "nodes" in capsys.readouterr().out


class TestSolve:
    def test_missing_config(self, tmp_path, capsys):
        rc = main(["solve", str(tmp_path / "absent.yaml")])
        assert rc == EXIT_SCHEMA

    def test_schema_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("geometry:\n  msh: a.msh\n  dim: 7\n")
        rc = main(["solve", str(cfg)])
        assert rc == EXIT_SCHEMA
        assert "config error" in capsys.readouterr().err

    def test_solver_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("geometry:\n  msh: /nonexistent/plate.msh\n")
        rc = main(["solve", str(cfg), "-o", str(tmp_path / "out")])
        assert rc == EXIT_SOLVER

    def test_dem_run_writes_artifacts(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file)
        outdir = tmp_path / "out"
        rc = main(["solve", str(cfg), "-o", str(outdir)])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["solver"] == "dem"
        assert summary["dem"]["epochs"] == 5
        for artifact in ("history.csv", "solution_dem.vtk", "model.bin", "fields.npz", "result.json", "mesh.msh"):
            assert (outdir / artifact).exists(), artifact

    def test_both_solvers_report_difference(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file, solver="both")
        outdir = tmp_path / "out"
        rc = main(["solve", str(cfg), "-o", str(outdir)])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert "rel_l2_difference" in summary
        assert (outdir / "solution_fem.vtk").exists()

    def test_solver_flag_overrides_config(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file, solver="dem")
        rc = main(["solve", str(cfg), "-o", str(tmp_path / "out"), "--solver", "fem"])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["solver"] == "fem" and "dem" not in summary

    def test_save_and_load_model(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file)
        model = tmp_path / "model.bin"
        rc = main(["solve", str(cfg), "-o", str(tmp_path / "a"), "--save-model", str(model)])
        assert rc == 0 and model.exists()
        capsys.readouterr()
        rc = main(["solve", str(cfg), "-o", str(tmp_path / "b"), "--load-model", str(model)])
        assert rc == 0

    def test_load_model_missing(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file)
        rc = main(["solve", str(cfg), "--load-model", str(tmp_path / "absent.bin")])
        assert rc == EXIT_SCHEMA

    def test_verbose_progress(self, tmp_path, mesh_file, capsys):
        cfg = quick_config_file(tmp_path, mesh_file)
        rc = main(["solve", str(cfg), "-o", str(tmp_path / "out"), "-v"])
        assert rc == 0
        assert "epoch      0" in capsys.readouterr().out
