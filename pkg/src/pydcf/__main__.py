"""Module entrypoint for `python -m pydcf`."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
