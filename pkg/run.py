"""
Main entry point for the twoboson command line.

Logs go to stderr; reports go to stdout so they can be piped into files.
"""
import logging
import sys

from spectrum.config import LOG_LEVEL
from cli.main import main

logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
    datefmt="%H:%M:%S",
    stream=sys.stderr,
)


if __name__ == "__main__":
    sys.exit(main())
