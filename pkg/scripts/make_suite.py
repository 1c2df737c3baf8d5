#!/usr/bin/env python3
"""Write a small benchmark suite (dags plus explicit families) into a
directory, ready for `ipdr bench`."""

import argparse
from pathlib import Path

CHAINS = {
    f"chain{n}": "\n".join(
        [f"node n{i}" for i in range(1, n + 1)]
        + [f"edge n{i} n{i + 1}" for i in range(1, n)]
        + [f"output n{n}", ""]
    )
    for n in (2, 3, 4)
}

DIAMOND = """\
node a
node b
node c
node d
edge a b
edge a c
edge b d
edge c d
output d
"""

TWOBIT = """\
var a
var b
init 00
edge 00 01
group 1 01 10
group 2 10 11
bad 11
direction {direction}
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", help="suite directory to create")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in CHAINS.items():
        (out / f"{name}.dag").write_text(text)
    (out / "diamond.dag").write_text(DIAMOND)
    for direction in ("relaxing", "constraining"):
        (out / f"twobit_{direction}.sys").write_text(
            TWOBIT.format(direction=direction)
        )
    print(f"wrote {len(CHAINS) + 3} inputs to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
