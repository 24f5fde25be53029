"""Typical-sequence weight as the number of runs grows."""

import argparse

from sepmix.ensemble import typical_weight


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", default="0.5,0.5")
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--m", default="10,25,50,100,200,400,800")
    args = parser.parse_args(argv)

    p = [float(x) for x in args.p.split(",")]
    print(f"p = {p}, epsilon = {args.epsilon}")
    print(f"{'m':>6}  weight")
    for m in (int(x) for x in args.m.split(",")):
        print(f"{m:>6}  {typical_weight(p, m, args.epsilon):.12f}")


if __name__ == "__main__":
    main()
