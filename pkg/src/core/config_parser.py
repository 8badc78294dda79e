#!/usr/bin/env python3
"""
Problem file parser

Reads the sectioned key-value format

    [grid]
    nx = 33          # comments start with '#' or ';'
    [thickness]
    g1 = 0.5 + 0.1*x1

line by line, collects every problem with its line number and builds the
validated problem, solver and gamma-study settings.
"""

import re
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple

from ..utils.config import Config
from ..utils.logger import logger
from .errors import ConfigError, FvKError
from .expr_field import ExprField
from .field_grid import Grid2D
from .gamma_bridge import GammaConfig
from .material_law import LameMaterial
from .models import DisplacementExpr, GrowthTensor, PlateProblem, ThicknessPair
from .solver import SolveConfig


SECTION_RE = re.compile(r'^\[\s*([A-Za-z_]\w*)\s*\]$')
ENTRY_RE = re.compile(r'^([A-Za-z_]\w*)\s*[=:]\s*(.*)$')
INLINE_COMMENT_RE = re.compile(r'\s[#;].*$')

SOLVER_CHOICES = {'init': ('zero', 'random', 'displacement')}


@dataclass(frozen=True)
class ProblemConfig:
    """Validated run configuration"""

    config: Config
    problem: PlateProblem
    displacement: DisplacementExpr
    solver: SolveConfig
    gamma: GammaConfig
    sections: FrozenSet[str] = field(default_factory=frozenset)

    @property
    def zero_growth(self) -> bool:
        return self.problem.growth.is_zero

    @property
    def uniform_thickness(self) -> bool:
        return self.problem.is_uniform_thickness

    def has_section(self, name: str) -> bool:
        return name in self.sections

    def with_overrides(self, seed: Optional[int] = None, threads: Optional[int] = None) -> 'ProblemConfig':
        """Apply command-line overrides; the echo reflects them"""
        config = Config(self.config.get_all())
        solver, gamma = self.solver, self.gamma
        if seed is not None:
            config.seed = seed
            solver = replace(solver, seed=int(seed))
        if threads is not None:
            config.threads = threads
            gamma = replace(gamma, threads=int(threads))
        return replace(self, config=config, solver=solver, gamma=gamma)

    def to_ini(self) -> str:
        return self.config.to_ini()


# Value converters

def _to_float(text: str) -> float:
    return float(text)


def _to_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got '{text}'")
    return int(value)


def _to_float_list(text: str) -> List[float]:
    items = [t.strip() for t in text.split(',') if t.strip()]
    if not items:
        raise ValueError("expected a comma separated list of numbers")
    return [float(t) for t in items]


def _to_expression(text: str) -> str:
    # Parse now so grammar errors carry the line number; the echo keeps the text
    ExprField.parse(text)
    return text


def _converter(section: str, key: str) -> Callable[[str], Any]:
    default = Config.DEFAULT_CONFIG[section][key]
    if section in ('thickness', 'growth', 'displacement'):
        return _to_expression
    if isinstance(default, list):
        return _to_float_list
    if isinstance(default, int):
        return _to_int
    if isinstance(default, float):
        return _to_float

    choices = SOLVER_CHOICES.get(key)

    def choice(text: str) -> str:
        if choices and text not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got '{text}'")
        return text
    return choice


# Line scanner

def scan_sections(text: str) -> Tuple[Dict[str, Dict[str, Tuple[int, str]]], Dict[str, int], List[Tuple[int, str]]]:
    """Split the text into section -> key -> (line, raw value)

    Returns:
        (entries, section header lines, errors)
    """
    known = Config.known_keys()
    entries: Dict[str, Dict[str, Tuple[int, str]]] = {}
    headers: Dict[str, int] = {}
    errors: List[Tuple[int, str]] = []
    section: Optional[str] = None
    in_unknown = False

    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in '#;':
            continue
        line = INLINE_COMMENT_RE.sub('', line).strip()

        header = SECTION_RE.match(line)
        if header:
            section = header.group(1).lower()
            if section not in known:
                errors.append((num, f"unknown section [{section}]"))
                section, in_unknown = None, True
                continue
            in_unknown = False
            if section in headers:
                errors.append((num, f"duplicate section [{section}] (first at line {headers[section]})"))
            headers.setdefault(section, num)
            entries.setdefault(section, {})
            continue

        entry = ENTRY_RE.match(line)
        if not entry:
            errors.append((num, f"cannot read '{raw.strip()}': expected 'key = value' or '[section]'"))
            continue
        if section is None:
            if not in_unknown:
                errors.append((num, f"entry '{entry.group(1)}' appears before any section"))
            continue

        key, value = entry.group(1).lower(), entry.group(2).strip()
        if key not in known[section]:
            errors.append((num, f"unknown key '{key}' in [{section}]"))
        elif key in entries[section]:
            errors.append((num, f"duplicate key '{key}' in [{section}] (first at line {entries[section][key][0]})"))
        elif not value:
            errors.append((num, f"missing value for '{section}.{key}'"))
        else:
            entries[section][key] = (num, value)

    return entries, headers, errors


def _build(label: str, line: int, errors: List[Tuple[int, str]], factory: Callable[[], Any]) -> Any:
    try:
        return factory()
    except ConfigError as e:
        errors.extend((num or line, msg) for num, msg in e.errors)
    except FvKError as e:
        errors.append((line, f"{label}: {e}"))
    return None


def parse_config(text: str) -> ProblemConfig:
    """Parse and validate a problem file

    Raises:
        ConfigError: With every problem found, each tagged with its line number
    """
    entries, headers, errors = scan_sections(text)

    values: Dict[str, Dict[str, Any]] = {}
    for section, keys in entries.items():
        for key, (num, raw) in keys.items():
            try:
                values.setdefault(section, {})[key] = _converter(section, key)(raw)
            except (ValueError, FvKError) as e:
                errors.append((num, f"{section}.{key}: {e}"))

    config = Config(values)

    def line_of(section: str, key: Optional[str] = None) -> int:
        if key and key in entries.get(section, {}):
            return entries[section][key][0]
        return headers.get(section, 0)

    g = config.section('grid')
    grid = _build('grid', line_of('grid'), errors, lambda: Grid2D(
        g['x_min'], g['x_max'], g['y_min'], g['y_max'], g['nx'], g['ny']))

    m = config.section('material')
    material = _build('material', line_of('material'), errors,
                      lambda: LameMaterial(m['mu'], m['lambda']))

    t = config.section('thickness')
    thickness = _build('thickness', line_of('thickness'), errors,
                       lambda: ThicknessPair(t['g1'], t['g2']))

    gr = config.section('growth')
    growth = _build('growth', line_of('growth'), errors, lambda: GrowthTensor(
        [[gr[f"eps_{a}{b}"] for b in range(1, 4)] for a in range(1, 4)],
        [[gr[f"kappa_{a}{b}"] for b in range(1, 4)] for a in range(1, 4)],
    ))

    dp = config.section('displacement')
    displacement = _build('displacement', line_of('displacement'), errors,
                          lambda: DisplacementExpr(dp['w1'], dp['w2'], dp['v']))

    solver = _build('solver', line_of('solver'), errors, lambda: SolveConfig(**config.section('solver')))
    gamma = _build('gamma', line_of('gamma'), errors, lambda: GammaConfig(**config.section('gamma')))

    problem = None
    if all(part is not None for part in (grid, material, thickness, growth)):
        problem = _build('thickness', line_of('thickness'), errors,
                         lambda: PlateProblem(grid, material, thickness, growth))

    if solver is not None and solver.init == 'displacement' and 'displacement' not in entries:
        errors.append((line_of('solver', 'init'), "solver.init = displacement needs a [displacement] section"))

    if errors:
        errors.sort(key=lambda e: e[0])
        logger.error(f"Configuration rejected with {len(errors)} problem(s)")
        raise ConfigError(errors)

    logger.debug(f"Configuration parsed: sections {sorted(entries)}")
    return ProblemConfig(config, problem, displacement, solver, gamma, frozenset(entries))


def load_config(path: str) -> ProblemConfig:
    """Read and parse a problem file

    Raises:
        ConfigError: If the file cannot be read or is invalid
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError([(0, f"cannot read configuration {path}: {e}")]) from e
    return parse_config(text)
