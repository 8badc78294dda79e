#!/usr/bin/env python3
"""
Export Manager for the FvK plate toolkit
Writes run artifacts (field CSVs, traces, tables, flat JSON reports and the
resolved configuration echo) into one output directory
"""

import csv
import json
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..utils.config import Config
from ..utils.logger import logger
from .csv_parser import table_columns, write_displacement_csv, write_field_csv
from .errors import ExportError
from .field_grid import sample
from .gamma_bridge import GammaStudy
from .models import PlateProblem
from .solver import SolveReport


def _cell(value) -> str:
    """Shortest round-trip text for table cells"""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _plain(value):
    """JSON-ready copy with numpy scalars converted"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


class ExportManager:
    """Writes the artifacts of one CLI run"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ExportError(f"cannot create output directory {self.out_dir}: {e}") from e
        self.written: List[Path] = []
        logger.debug(f"Export manager writing to {self.out_dir}")

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, path: Path) -> Path:
        self.written.append(path)
        return path

    # Generic writers

    def write_json(self, name: str, data: Mapping) -> Path:
        path = self.path(name)
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(_plain(dict(data)), f, indent=2, ensure_ascii=False)
                f.write('\n')
        except (OSError, TypeError, ValueError) as e:
            raise ExportError(f"cannot write {path}: {e}") from e
        return self._record(path)

    def write_table_csv(self, name: str, rows: Sequence[Mapping], columns: Optional[List[str]] = None,
                        footer: Optional[str] = None) -> Path:
        """Write row dicts as CSV, optionally followed by a '# ' footer line"""
        path = self.path(name)
        columns = columns or table_columns(list(rows))
        try:
            with open(path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([_cell(row[c]) for c in columns])
                if footer:
                    f.write(f"# {footer}\n")
        except (OSError, KeyError) as e:
            raise ExportError(f"cannot write {path}: {e}") from e
        return self._record(path)

    def write_fields(self, name: str, p: PlateProblem, columns: Mapping[str, np.ndarray]) -> Path:
        return self._record(write_field_csv(self.path(name), p.grid, columns))

    # Run artifacts

    def export_config_echo(self, config: Config) -> Path:
        return self._record(config.save(self.path('config_echo.ini')))

    def export_solve(self, p: PlateProblem, report: SolveReport) -> Dict[str, Path]:
        """displacement.csv, energy_trace.csv, solve_report.json (and residual_fields.csv)"""
        paths = {
            'displacement': self._record(write_displacement_csv(self.path('displacement.csv'), p.grid,
                                                                report.displacement)),
            'energy_trace': self.write_table_csv(
                'energy_trace.csv',
                [{'iteration': i, 'energy': e, 'grad_norm': g, 'step': s} for i, e, g, s in report.energy_trace],
                ['iteration', 'energy', 'grad_norm', 'step'],
            ),
            'solve_report': self.write_json('solve_report.json', {'problem': p.to_dict(), **report.to_dict()}),
        }
        if report.residual_fields:
            paths['residual_fields'] = self.write_fields('residual_fields.csv', p, report.residual_fields)
        logger.info(f"Solve results written to {self.out_dir}")
        return paths

    def export_gamma(self, study: GammaStudy) -> Dict[str, Path]:
        footer = (f"extrapolated={study.extrapolated!r},I_g={study.I_g!r},"
                  f"rel_gap={study.extrapolated_gap!r},order={study.order}")
        paths = {
            'gamma_study': self.write_table_csv(
                'gamma_study.csv', study.to_rows(),
                ['h', 'scaled_energy', 'rel_gap_to_Ig', 'normalization_gap'], footer,
            ),
            'gamma_report': self.write_json('gamma_report.json', study.to_dict()),
        }
        logger.info(f"Gamma study written to {self.out_dir}")
        return paths

    def export_residual(self, p: PlateProblem, summary: Mapping[str, float],
                        fields: Mapping[str, np.ndarray]) -> Dict[str, Path]:
        paths = {'residual_report': self.write_json('residual_report.json', summary)}
        if fields:
            paths['residual_fields'] = self.write_fields('residual_fields.csv', p, fields)
        logger.info(f"Residual report written to {self.out_dir}")
        return paths

    def export_material_table(self, rows: List[Dict]) -> Path:
        return self.write_table_csv('material_table.csv', rows)

    def export_input_fields(self, p: PlateProblem) -> Path:
        """Sampled g1, g2 and the 18 growth entries"""
        columns = {
            'g1': sample(p.thickness.g1, p.grid).values,
            'g2': sample(p.thickness.g2, p.grid).values,
        }
        for name, values in (('eps', p.eps), ('kappa', p.kappa)):
            for a in range(3):
                for b in range(3):
                    columns[f"{name}_{a + 1}{b + 1}"] = values[..., a, b]
        return self.write_fields('input_fields.csv', p, columns)
