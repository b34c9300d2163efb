import sys


def main() -> None:
    from mathkg import cli

    sys.exit(cli.main())
