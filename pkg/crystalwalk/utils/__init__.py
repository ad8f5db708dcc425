"""
Utility functions: accumulators, random streams, file export
"""
