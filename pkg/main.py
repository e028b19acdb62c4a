"""
Main entry point for running the facet-flow command line.
"""
import sys

from app.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
