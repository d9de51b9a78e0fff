#!/usr/bin/env python3
"""Count records, max index, nonzeros and +1 label fraction of a LIBSVM file.

Written independently of the C++ parser; its output is the golden reference
for the `stats` subcommand.
"""
import sys


def main(path):
    count = nnz = max_index = positive = 0
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            label, *pairs = line.split()
            count += 1
            positive += float(label) == 1.0
            nnz += len(pairs)
            for p in pairs:
                max_index = max(max_index, int(p.split(":")[0]))
    balance = positive / count if count else 0.0
    print(f"count={count}")
    print(f"max_index={max_index}")
    print(f"nnz={nnz}")
    print(f"label_balance={balance:.9g}")


if __name__ == "__main__":
    main(sys.argv[1])
