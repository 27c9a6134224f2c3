#!/usr/bin/env python3
"""Write the bundled synthetic example: 100 x 200 Gaussian design, 40 groups of 5."""
import argparse
import csv
import pathlib
import random

HEAD = [5, 5, 5, 5, 5, 5, -5, 2, 0, 0, -5, -5, -5, -5, -5, 2, -3, 8, 0, 0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--p", type=int, default=200)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    beta = HEAD + [0] * (args.p - len(HEAD))
    x = [[rng.gauss(0.0, 1.0) for _ in range(args.p)] for _ in range(args.n)]
    y = [sum(a * b for a, b in zip(row, beta)) + rng.gauss(0.0, 1.0) for row in x]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "x.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{j + 1}" for j in range(args.p)])
        w.writerows([[repr(v) for v in row] for row in x])
    with open(out / "y.csv", "w", newline="") as f:
        f.write("y\n")
        f.writelines(repr(v) + "\n" for v in y)
    with open(out / "groups.csv", "w", newline="") as f:
        f.write("group\n")
        f.writelines(f"{j // 5 + 1}\n" for j in range(args.p))
    with open(out / "beta.csv", "w", newline="") as f:
        f.write("beta\n")
        f.writelines(f"{b}\n" for b in beta)


if __name__ == "__main__":
    main()
