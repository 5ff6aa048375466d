"""
Syntax trees, types, normal forms, reduction labels and exported documents.
"""
