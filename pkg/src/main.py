#!/usr/bin/env python3
"""
FvK plate toolkit - command-line entry point

    fvk <subcommand> (--config PATH | --sample NAME) --out DIR [--seed N] [--threads N]

Subcommands:
    solve           minimize the limiting plate energy
    gamma           scaled 3d energies of the recovery sequence against I_g
    residual        Euler-Lagrange, boundary and weak residuals of a displacement
    material-table  quadratic forms and completion maps on reference matrices
    export          sampled thickness and growth fields
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Add repository root to Python path when run as a script
src_dir = Path(__file__).parent
sys.path.insert(0, str(src_dir.parent))

from src.core.airy_el import residual_report
from src.core.config_parser import ProblemConfig, load_config, parse_config
from src.core.csv_parser import read_displacement_csv
from src.core.errors import ConfigError, FvKError
from src.core.export_manager import ExportManager
from src.core.gamma_bridge import gamma_study
from src.core.limit_energy import energy_and_gradient, gradient_norm
from src.core.material_law import material_table
from src.core.models import Displacement
from src.core.solver import minimize, stationarity_report
from src.data.sample_loader import SampleLoader
from src.utils.logger import logger

# Application metadata
APP_NAME = "fvk-plate"
APP_VERSION = "1.0.0"

SUBCOMMANDS = ('solve', 'gamma', 'residual', 'material-table', 'export')

EXIT_OK = 0
EXIT_UNEXPECTED = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='fvk',
        description="Variable-thickness prestrained Föppl-von Kármán plates",
    )
    parser.add_argument('--version', action='version', version=f"{APP_NAME} {APP_VERSION}")
    sub = parser.add_subparsers(dest='subcommand', required=True)

    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name)
        source = cmd.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', help="problem file (sectioned key = value text)")
        source.add_argument('--sample', choices=SampleLoader().names(), help="built-in problem")
        cmd.add_argument('--out', required=True, help="output directory")
        cmd.add_argument('--seed', type=int, default=None, help="override solver.seed")
        cmd.add_argument('--threads', type=int, default=None, help="override gamma.threads")
        cmd.add_argument('--log-level', default='INFO',
                         choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
        if name in ('solve', 'residual'):
            cmd.add_argument('--displacement', default=None,
                             help="displacement CSV (x1,x2,w1,w2,v) on the configured grid")
    return parser


def load_problem(config_path: Optional[str] = None, sample: Optional[str] = None,
                 seed: Optional[int] = None, threads: Optional[int] = None) -> ProblemConfig:
    if sample:
        pc = parse_config(SampleLoader().get_sample(sample))
        logger.info(f"Using built-in sample '{sample}'")
    else:
        pc = load_config(config_path)
        logger.info(f"Configuration loaded from: {config_path}")
    return pc.with_overrides(seed=seed, threads=threads)


# Subcommands

def _displacement(pc: ProblemConfig, csv_path: Optional[str]) -> Optional[Displacement]:
    if csv_path:
        return read_displacement_csv(csv_path, pc.problem.grid)
    if pc.has_section('displacement'):
        return pc.displacement.sample(pc.problem.grid)
    return None


def run_solve(pc: ProblemConfig, exporter: ExportManager, displacement_csv: Optional[str] = None) -> Dict:
    p = pc.problem
    init = None
    if displacement_csv or pc.solver.init == 'displacement':
        init = _displacement(pc, displacement_csv)
    report = minimize(p, pc.solver, init)
    exporter.export_solve(p, report)
    return report.to_dict()


def run_gamma(pc: ProblemConfig, exporter: ExportManager) -> Dict:
    g = pc.gamma
    study = gamma_study(pc.problem, pc.displacement, g.h_list, g.n_inplane, g.n_thickness, g.threads)
    exporter.export_gamma(study)
    return study.to_dict()


def run_residual(pc: ProblemConfig, exporter: ExportManager, displacement_csv: Optional[str] = None) -> Dict:
    p = pc.problem
    d = _displacement(pc, displacement_csv)
    if d is None:
        raise ConfigError([(0, "residual needs a [displacement] section or --displacement CSV")])

    summary, fields = residual_report(p, d)
    stationarity = stationarity_report(p, d, pc.solver.n_tests, pc.solver.seed)
    energy, g = energy_and_gradient(p, d)
    summary.update({
        'weak_max': stationarity.get('weak_max', 0.0),
        'weak_max_r1': stationarity.get('weak_max_r1', 0.0),
        'weak_max_r2': stationarity.get('weak_max_r2', 0.0),
        'energy': energy,
        'grad_norm': gradient_norm(p, g),
    })
    exporter.export_residual(p, summary, fields)
    return summary


def run_material_table(pc: ProblemConfig, exporter: ExportManager) -> List[Dict]:
    rows = material_table(pc.problem.material)
    exporter.export_material_table(rows)
    return rows


def run_export(pc: ProblemConfig, exporter: ExportManager) -> Path:
    return exporter.export_input_fields(pc.problem)


def run(subcommand: str, pc: ProblemConfig, out_dir: str, displacement_csv: Optional[str] = None) -> int:
    """Run one subcommand and write its artifacts

    Returns:
        Exit code: 0 on success, the error's exit code otherwise
    """
    try:
        exporter = ExportManager(out_dir)
        logger.attach_run_log(exporter.out_dir)
        exporter.export_config_echo(pc.config)

        logger.info(f"Running '{subcommand}' (grid {pc.problem.grid.nx}x{pc.problem.grid.ny}, "
                    f"zero growth: {pc.zero_growth}, uniform thickness: {pc.uniform_thickness})")
        if subcommand == 'solve':
            run_solve(pc, exporter, displacement_csv)
        elif subcommand == 'gamma':
            run_gamma(pc, exporter)
        elif subcommand == 'residual':
            run_residual(pc, exporter, displacement_csv)
        elif subcommand == 'material-table':
            run_material_table(pc, exporter)
        elif subcommand == 'export':
            run_export(pc, exporter)
        else:
            raise ConfigError([(0, f"unknown subcommand '{subcommand}'")])
        logger.info(f"'{subcommand}' finished; outputs in {exporter.out_dir}")
        return EXIT_OK

    except FvKError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_UNEXPECTED
    finally:
        logger.detach_run_log()


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    try:
        logger.set_level(args.log_level)
        pc = load_problem(args.config, args.sample, args.seed, args.threads)
    except FvKError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    return run(args.subcommand, pc, args.out, getattr(args, 'displacement', None))


if __name__ == "__main__":
    sys.exit(main())
