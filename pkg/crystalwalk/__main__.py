"""
Module entry point: python -m crystalwalk
"""

import sys

from crystalwalk.main import run_cli

if __name__ == "__main__":
    sys.exit(run_cli(sys.argv[1:]))
