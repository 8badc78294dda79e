"""
Utility modules (configuration, logging)
"""
