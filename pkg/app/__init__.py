"""
BBC toolkit: bounded broadcast and collection networks.
"""

__version__ = "1.1.0"
