"""
Main entry point for tensor-mp.
"""

import sys

from tensor_mp.harness import cli


def main() -> None:
    """Console script entry point."""
    sys.exit(cli.main())


if __name__ == "__main__":
    main()
