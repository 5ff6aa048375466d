"""
Command views: click commands wrapping the controllers.
"""
