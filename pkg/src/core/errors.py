#!/usr/bin/env python3
"""
Error types for the FvK plate toolkit
Each family maps to one CLI exit code (see src.main)
"""

from typing import List, Tuple


class FvKError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1


class MaterialError(FvKError):
    """Invalid Lamé constants or singular material system"""
    exit_code = 2


class ExpressionError(FvKError):
    """Expression string outside the supported grammar"""
    exit_code = 2


class GridError(FvKError):
    """Invalid grid geometry or grid too small for a stencil"""
    exit_code = 2


class FieldError(FvKError):
    """Non-finite or mis-shaped field data"""
    exit_code = 5


class ThicknessError(FvKError):
    """Thickness profile not strictly positive"""
    exit_code = 2


class GrowthTensorError(FvKError):
    """Growth tensor a^h not invertible for the requested h"""
    exit_code = 5


class AiryRecoveryError(FvKError):
    """Airy least-squares solve did not converge"""
    exit_code = 5


class SolverError(FvKError):
    """Energy minimization failed"""
    exit_code = 3


class ExportError(FvKError):
    """Reading or writing result files failed"""
    exit_code = 4


class ConfigError(FvKError):
    """Configuration text rejected; carries every problem with its line number"""
    exit_code = 2

    def __init__(self, errors: List[Tuple[int, str]]):
        self.errors = list(errors)
        lines = [f"line {num}: {msg}" if num else msg for num, msg in self.errors]
        super().__init__("; ".join(lines) if lines else "invalid configuration")
