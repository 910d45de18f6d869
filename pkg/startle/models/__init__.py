"""
Stateful entities: tracks and the classifier network.
"""
from startle.models.track import Track
from startle.models.network import StartleNet, ModelBundle

__all__ = ["Track", "StartleNet", "ModelBundle"]
