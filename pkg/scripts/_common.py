"""Shared helpers for the figure scripts."""

import argparse
from dataclasses import fields
from pathlib import Path


def parse_into(params_cls, description: str):
    """Expose every dataclass field as a --flag plus --out; return (params, out_dir)."""
    parser = argparse.ArgumentParser(description=description)
    defaults = params_cls()
    for f in fields(params_cls):
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(getattr(defaults, f.name)),
                            default=getattr(defaults, f.name))
    parser.add_argument("--out", default=None, help="output directory (default results/<script>)")
    args = vars(parser.parse_args())
    out = args.pop("out")
    return params_cls(**args), out


def out_dir(out, name: str) -> Path:
    path = Path(out) if out else Path("results") / name
    path.mkdir(parents=True, exist_ok=True)
    return path
