"""
Subcommands of the crystalwalk command line
"""
