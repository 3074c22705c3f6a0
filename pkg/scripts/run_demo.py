"""End-to-end demo: generate small datasets, run the built-in agents, score
and analyse. Everything lands under --work (default ./demo_out)."""

import argparse
import shutil
from pathlib import Path

from vptbench.cli import main as cli

AGENTS = ("oracle", "egocentric", "mirror", "random")


def run(*argv):
    code = cli([str(a) for a in argv])
    if code:
        raise SystemExit(f"vptbench {argv[0]} exited with {code}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--work", type=Path, default=Path("demo_out"))
    ap.add_argument("--n", type=int, default=300, help="RFT scenes / Director trials")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--images", action="store_true", help="render PNGs (slower)")
    ap.add_argument("--fresh", action="store_true", help="delete --work first")
    args = ap.parse_args()
    if args.fresh and args.work.exists():
        shutil.rmtree(args.work)
    (args.work / "data").mkdir(parents=True, exist_ok=True)
    img = [] if args.images else ["--no-images"]

    datasets = {
        "test_2": ["--task", "rft", "--set", "test_2"],
        "test_3": ["--task", "rft", "--set", "test_3"],
        "director": ["--task", "director", "--ascii", "--related", "0.7"],
    }
    for name, flags in datasets.items():
        ds = args.work / "data" / name
        if not ds.exists():
            run("generate", *flags, "--n", args.n, "--seed", args.seed, "--out", ds, *img)
        run("validate", "--dataset", ds)
        for agent in AGENTS:
            res = args.work / "results" / f"{name}-{agent}"
            extra = ["--ascii"] if name == "director" else []
            run("evaluate", "--dataset", ds, "--subject", agent, "--out", res, *extra)
            run("score", "--results", res)
            analyze = ["--bins", "12"] if name != "director" else ["--error-vectors"]
            run("analyze", "--results", res, *analyze, "--report", args.work / "reports" / name)


if __name__ == "__main__":
    main()
