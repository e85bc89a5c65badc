"""Turn a dataclass of defaults into command-line overrides."""
import argparse
import dataclasses
import json


def parse(cls, argv=None):
    p = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        kind = type(f.default) if f.default is not dataclasses.MISSING else str
        if kind in (list, tuple):
            p.add_argument(f"--{f.name.replace('_', '-')}", type=json.loads, default=f.default,
                           help=f"JSON list (default {list(f.default)})")
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=f.default)
    return cls(**vars(p.parse_args(argv)))


def show(rows, cols):
    print("  ".join(f"{c:>12}" for c in cols))
    for r in rows:
        print("  ".join(f"{r[c]:>12.6g}" if isinstance(r[c], float) else f"{str(r[c]):>12}" for c in cols))
