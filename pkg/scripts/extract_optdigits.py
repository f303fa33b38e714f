"""Rebuild data/optdigits.tra from the KEEL copy of the UCI Optdigits data.

The KEEL file holds the UCI training split (first 3823 rows) followed by
the test split. Usage:

    pip download keel-ds==0.2.5 --no-deps -d /tmp/keel
    python3 scripts/extract_optdigits.py /tmp/keel/keel_ds-0.2.5-py3-none-any.whl data/optdigits.tra
"""

import argparse
import zipfile
from collections import Counter

MEMBER = "keel_ds/data/balanced/raw/optdigits.dat"
N_TRAIN = 3823


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("wheel")
    ap.add_argument("out")
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as zf:
        text = zf.read(MEMBER).decode()
    rows = [l.strip() for l in text.splitlines() if l.strip() and not l.startswith("@")]
    rows = [[int(v) for v in r.split(",")] for r in rows]
    if len(rows) != 5620 or any(len(r) != 65 for r in rows):
        raise SystemExit(f"unexpected layout: {len(rows)} rows")
    train = rows[:N_TRAIN]
    with open(args.out, "w") as fh:
        fh.writelines(",".join(map(str, r)) + "\n" for r in train)
    counts = Counter(r[-1] for r in train)
    print(f"wrote {len(train)} rows to {args.out}; per-digit counts {dict(sorted(counts.items()))}")


if __name__ == "__main__":
    main()
