"""
Errors and logging shared by every layer.
"""
