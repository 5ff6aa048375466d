"""
Controllers: turn service results into command results.
"""
