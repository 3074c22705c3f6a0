"""Regenerate tests/golden/help_*.txt from the current CLI parser."""

import argparse
from pathlib import Path

from vptbench.cli import build_parser

VERBS = ("generate", "evaluate", "score", "analyze", "validate")


def help_texts() -> dict:
    parser = build_parser()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    out = {"main": parser.format_help()}
    for verb in VERBS:
        out[verb] = sub.choices[verb].format_help()
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "tests" / "golden")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, text in help_texts().items():
        (args.out / f"help_{name}.txt").write_text(text)
        print(f"wrote {args.out / f'help_{name}.txt'}")


if __name__ == "__main__":
    main()
