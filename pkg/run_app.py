#!/usr/bin/env python3
"""
Simple entry point for the fvk command line without installing the package

    python run_app.py material-table --sample zero --out out/table
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.main import main

if __name__ == "__main__":
    sys.exit(main())
