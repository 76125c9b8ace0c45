"""Train with several seeds, evaluate every run, and report per-metric means.

Example:
    python3 tools/repeat_and_average.py --pwe build/tools/pwe \
        --corpus data/sample/corpus.txt --seeds 1 2 3 \
        --analogy data/sample/syntactic.txt --similarity data/sample/similarity.txt \
        -- --model pwe --dim 50 --min-count 5 --epochs 5

Arguments after `--` are passed to `pwe train` unchanged.
"""

import argparse
import json
import pathlib
import statistics
import subprocess
import sys
import tempfile


def run_json_lines(cmd):
    done = subprocess.run(cmd, check=True, capture_output=True, text=True)
    return [json.loads(line) for line in done.stdout.splitlines() if line.strip()]


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--pwe", default="build/tools/pwe", help="path to the pwe executable")
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--vocab", help="vocabulary with tag statistics; enables purity")
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--analogy", action="append", default=[])
    ap.add_argument("--similarity", action="append", default=[])
    ap.add_argument("--top-n", type=int, default=500)
    ap.add_argument("--keep", help="directory to keep vectors in (default: temporary)")
    ap.add_argument("train_args", nargs=argparse.REMAINDER)
    args = ap.parse_args()
    extra = args.train_args[1:] if args.train_args[:1] == ["--"] else args.train_args

    scores = {}
    with tempfile.TemporaryDirectory() as tmp:
        workdir = pathlib.Path(args.keep or tmp)
        workdir.mkdir(parents=True, exist_ok=True)
        for seed in args.seeds:
            vectors = workdir / f"vectors.seed{seed}.bin"
            cmd = [args.pwe, "train", "--corpus", args.corpus, "--seed", str(seed),
                   "--workers", "1", "--quiet", "--out", str(vectors)]
            if args.vocab:
                cmd += ["--vocab", args.vocab]
            summary = run_json_lines(cmd + extra)[-1]
            scores.setdefault("words_per_second", []).append(summary["words_per_second"])

            for mode, files, key in (("analogy", args.analogy, "accuracy"),
                                     ("sim", args.similarity, "spearman_x100")):
                if not files:
                    continue
                cmd = [args.pwe, "eval", "--vectors", str(vectors), "--mode", mode]
                for f in files:
                    cmd += ["--dataset", f]
                for report in run_json_lines(cmd):
                    scores.setdefault(f"{report['dataset']}.{key}", []).append(report[key])

            if args.vocab:
                report = run_json_lines([args.pwe, "purity", "--vectors", str(vectors),
                                         "--vocab", args.vocab, "--top-n", str(args.top_n)])[0]
                scores.setdefault("purity_pct", []).append(report["purity_pct"])

    result = {name: {"mean": statistics.fmean(values),
                     "stdev": statistics.stdev(values) if len(values) > 1 else 0.0,
                     "runs": values}
              for name, values in scores.items()}
    json.dump(result, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
