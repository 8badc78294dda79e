"""
Built-in sample problems for fvk-plate
"""
