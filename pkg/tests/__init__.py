"""
Test suite
"""

