"""
Core functionality (configuration, errors)
"""
