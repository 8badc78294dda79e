"""
Numerical core: material law, grid fields, limiting energy, residuals, recovery sequences and I/O
"""
