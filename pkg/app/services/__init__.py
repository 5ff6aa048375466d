"""
Domain services, one per concern of the calculus.
"""
