"""
Pydantic schemas for configuration files and JSON output
"""
