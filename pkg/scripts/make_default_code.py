#!/usr/bin/env python3
"""Regenerate the shipped rate-1/2 n=1296 irregular PEG parity check."""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from fbmclink.ldpc import LdpcCode  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "fbmclink" / "data"


def main():
    t0 = time.time()
    code = LdpcCode.peg(n=1296, rate=0.5, seed=1)
    path = OUT / "peg_n1296_r12.alist"
    code.to_alist(path)
    print(f"wrote {path} (n={code.n}, k={code.k}, edges={code.n_edges}, "
          f"{time.time() - t0:.1f}s)")


if __name__ == "__main__":
    main()
