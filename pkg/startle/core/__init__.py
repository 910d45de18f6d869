"""
Core infrastructure: configuration, errors, logging, files and workers.
"""
