"""
Subcommands, one module each; every module exposes ``register``.
"""
