"""
Fish startle detection from short underwater video clips.
"""
__version__ = "1.0.0"
