import sys

from harness.cli import cli_main

from structcode.schemes import *  # noqa: F403


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
