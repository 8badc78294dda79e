"""
fvk-plate: limiting energies and diagnostics for prestrained variable-thickness plates
"""
