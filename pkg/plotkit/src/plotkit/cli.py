"""
Command line entry point: ``render <spec.json>``.

Exit codes: 0 on success, 2 when the spec or input fails validation. A
failed run leaves no partial image file behind.
"""

import argparse
import sys

from . import __version__
from .render import load_spec, render
from .schema import SchemaError


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from a simulator CSV per a JSON spec")
    ap.add_argument("spec", help="figure spec JSON file")
    ap.add_argument("--version", action="version", version=__version__)
    args = ap.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        out = render(spec)
    except SchemaError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print("wrote %s" % out)
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
