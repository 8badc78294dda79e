#!/usr/bin/env python3
"""
Configuration parsing, file formats and command-line round trips
"""

import csv
import json
import sys
import tempfile
from pathlib import Path
sys.path.append('.')

import numpy as np
from numpy.testing import assert_allclose

from src.core.config_parser import parse_config
from src.core.csv_parser import (
    parse_field_csv, format_field_csv, read_displacement_csv, write_displacement_csv,
)
from src.core.errors import ConfigError, FieldError
from src.core.field_grid import Grid2D
from src.core.models import Displacement
from src.main import main

QUIET = ['--log-level', 'WARNING']


def _config_error(text: str) -> ConfigError:
    try:
        parse_config(text)
    except ConfigError as e:
        return e
    raise AssertionError("configuration was accepted")


def _read_rows(path: Path):
    with open(path, newline='', encoding='utf-8') as f:
        return [row for row in csv.reader(f) if row and not row[0].startswith('#')]


# Configuration

def test_minimal_config_uses_defaults():
    pc = parse_config("[grid]\nnx = 9\nny = 7   # inline comment\n")
    assert pc.problem.grid.shape == (7, 9)
    assert pc.problem.material.mu == 1.0
    assert pc.zero_growth and pc.uniform_thickness
    assert pc.solver.init == 'random' and pc.solver.seed == 0
    assert pc.gamma.h_list == [0.08, 0.04, 0.02, 0.01]
    assert not pc.has_section('displacement')


def test_negative_thickness_rejected():
    e = _config_error("[grid]\nnx = 9\nny = 9\n\n[thickness]\ng1 = -0.1\n")
    assert e.exit_code == 2
    assert any("thickness must be positive" in msg and num == 5 for num, msg in e.errors)


def test_three_node_grid_rejected_with_reason():
    e = _config_error("[grid]\nnx = 3\nny = 3\n")
    assert e.exit_code == 2
    assert any(num == 1 and "3-node grids are not supported" in msg for num, msg in e.errors)


def test_every_problem_reported_with_line_numbers():
    text = "\n".join([
        "[grid]",
        "nx = abc",
        "[material]",
        "mu = -1",
        "[bogus]",
        "x = 1",
        "[growth]",
        "eps_11 = x1^0.5",
        "foo = 1",
    ])
    e = _config_error(text)
    lines = [num for num, _ in e.errors]
    assert lines == sorted(lines)
    assert {2, 3, 5, 8, 9} <= set(lines)
    assert (9, "unknown key 'foo' in [growth]") in e.errors
    assert "line 5: unknown section [bogus]" in str(e)


def test_malformed_lines():
    e = _config_error("nx = 9\n[grid]\nthis is not an entry\nnx = 9\nnx = 11\nny =\n")
    messages = dict(e.errors)
    assert "before any section" in messages[1]
    assert "cannot read" in messages[3]
    assert "duplicate key" in messages[5]
    assert "missing value" in messages[6]


def test_displacement_init_needs_section():
    e = _config_error("[solver]\ninit = displacement\n")
    assert e.errors[0][0] == 2
    parse_config("[solver]\ninit = displacement\n[displacement]\nv = x1^2\n")


def test_echo_parses_back_to_same_configuration():
    text = ("[grid]\nnx = 11\nny = 9\n[thickness]\ng2 = 0.4 + 0.2*x1\n"
            "[growth]\nkappa_11 = 1\neps_12 = 0.1*sin(x2)\n[gamma]\nh_list = 0.1, 0.05\n")
    pc = parse_config(text)
    again = parse_config(pc.to_ini())
    assert again.config.get_all() == pc.config.get_all()
    assert again.to_ini() == pc.to_ini()
    assert pc.to_ini().startswith("# Resolved configuration")


def test_overrides_reach_echo():
    pc = parse_config("[grid]\nnx = 9\nny = 9\n").with_overrides(seed=5, threads=3)
    assert pc.solver.seed == 5 and pc.gamma.threads == 3
    assert "seed = 5" in pc.to_ini() and "threads = 3" in pc.to_ini()


# Field CSV

def test_displacement_csv_round_trip():
    grid = Grid2D(x_min=-1.0, x_max=0.3, nx=6, ny=5)
    rng = np.random.default_rng(0)
    d = Displacement(rng.standard_normal(grid.shape + (2,)), rng.standard_normal(grid.shape) * 1e-7)
    with tempfile.TemporaryDirectory() as tmp:
        path = write_displacement_csv(Path(tmp) / "d.csv", grid, d)
        back = read_displacement_csv(path, grid)
    assert np.array_equal(back.w, d.w)
    assert np.array_equal(back.v, d.v)


def test_field_csv_rejections():
    grid = Grid2D(nx=5, ny=5)
    text = format_field_csv(grid, {'v': np.zeros(grid.shape)})
    for bad, needle in (
        (text.replace('x1,x2,v', 'x1,x2,u'), "lacks column"),
        ("\n".join(text.splitlines()[:-1]), "rows"),
    ):
        try:
            parse_field_csv(bad, grid, ['v'])
        except FieldError as e:
            assert needle in str(e)
            continue
        raise AssertionError(f"accepted CSV expected to fail with '{needle}'")

    try:
        parse_field_csv(text, Grid2D(x_max=2.0, nx=5, ny=5), ['v'])
    except FieldError as e:
        assert "does not match grid node" in str(e)
    else:
        raise AssertionError("coordinate mismatch accepted")

    lines = text.splitlines()
    lines[3] = lines[3].rsplit(',', 1)[0] + ',nan'
    try:
        parse_field_csv("\n".join(lines), grid, ['v'])
    except FieldError as e:
        assert "row 4: non-finite v" in str(e)
    else:
        raise AssertionError("non-finite value accepted")


# Command line

def test_material_table_command():
    with tempfile.TemporaryDirectory() as tmp:
        assert main(['material-table', '--sample', 'zero', '--out', tmp] + QUIET) == 0
        text = (Path(tmp) / 'material_table.csv').read_text(encoding='utf-8')
        assert (Path(tmp) / 'config_echo.ini').exists()
        assert (Path(tmp) / 'run.log').exists()
    assert '6.666666666666667' in text
    assert '-0.6666666666666666' in text


def test_gamma_command_on_unstressed_plate():
    with tempfile.TemporaryDirectory() as tmp:
        assert main(['gamma', '--sample', 'zero', '--out', tmp] + QUIET) == 0
        rows = _read_rows(Path(tmp) / 'gamma_study.csv')
        footer = (Path(tmp) / 'gamma_study.csv').read_text(encoding='utf-8').splitlines()[-1]
        report = json.loads((Path(tmp) / 'gamma_report.json').read_text(encoding='utf-8'))
    assert rows[0] == ['h', 'scaled_energy', 'rel_gap_to_Ig', 'normalization_gap']
    assert [float(r[1]) for r in rows[1:]] == [0.0] * 4
    assert footer.startswith('# extrapolated=0.0,I_g=0.0,')
    assert footer.endswith('order=1')
    assert report['I_g'] == 0.0


def test_solve_then_residual_reproduces_stationarity():
    with tempfile.TemporaryDirectory() as tmp:
        solve_dir = Path(tmp) / 'solve'
        residual_dir = Path(tmp) / 'residual'
        assert main(['solve', '--sample', 'compatible-prestrain', '--out', str(solve_dir), '--seed', '2'] + QUIET) == 0
        assert {'displacement.csv', 'energy_trace.csv', 'solve_report.json', 'config_echo.ini'} <= \
            {p.name for p in solve_dir.iterdir()}
        solved = json.loads((solve_dir / 'solve_report.json').read_text(encoding='utf-8'))
        assert 'seed = 2' in (solve_dir / 'config_echo.ini').read_text(encoding='utf-8')

        assert main(['residual', '--config', str(solve_dir / 'config_echo.ini'), '--out', str(residual_dir),
                     '--displacement', str(solve_dir / 'displacement.csv')] + QUIET) == 0
        residual = json.loads((residual_dir / 'residual_report.json').read_text(encoding='utf-8'))
        trace = _read_rows(solve_dir / 'energy_trace.csv')

    assert solved['converged']
    assert trace[0] == ['iteration', 'energy', 'grad_norm', 'step']
    assert_allclose(residual['weak_max'], solved['stationarity']['weak_max'], rtol=1e-12, atol=1e-300)
    assert_allclose(residual['energy'], solved['energy'], rtol=1e-12, atol=1e-300)
    assert_allclose(residual['el_r1_l2'], solved['residuals']['el_r1_l2'], rtol=1e-12, atol=1e-300)


def test_export_command():
    with tempfile.TemporaryDirectory() as tmp:
        assert main(['export', '--sample', 'curved-growth', '--out', tmp] + QUIET) == 0
        rows = _read_rows(Path(tmp) / 'input_fields.csv')
    assert rows[0][:4] == ['x1', 'x2', 'g1', 'g2']
    assert 'kappa_13' in rows[0] and 'eps_33' in rows[0]
    assert len(rows) == 1 + 17 * 17


def test_exit_codes():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        bad = tmp / 'bad.ini'
        bad.write_text("[thickness]\ng1 = -0.1\n", encoding='utf-8')
        assert main(['solve', '--config', str(bad), '--out', str(tmp / 'a')] + QUIET) == 2
        assert main(['solve', '--config', str(tmp / 'missing.ini'), '--out', str(tmp / 'b')] + QUIET) == 2

        # residual needs a displacement
        assert main(['residual', '--sample', 'zero', '--out', str(tmp / 'c')] + QUIET) == 2

        # displacement written on another grid
        other = Grid2D(nx=5, ny=5)
        csv_path = write_displacement_csv(tmp / 'd.csv', other, Displacement.zeros(other))
        assert main(['residual', '--sample', 'zero', '--out', str(tmp / 'd'),
                     '--displacement', str(csv_path)] + QUIET) == 5

        # output path is a file
        blocker = tmp / 'blocker'
        blocker.write_text('', encoding='utf-8')
        assert main(['material-table', '--sample', 'zero', '--out', str(blocker)] + QUIET) == 4


if __name__ == "__main__":
    print("🧪 CLI and file format tests")
    print("=" * 60)
    tests = [obj for name, obj in list(globals().items()) if name.startswith('test_') and callable(obj)]
    failed = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except Exception as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    sys.exit(1 if failed else 0)
