#!/usr/bin/env python3
"""Regenerate the shipped 16-QAM labeling tables.

gray  - corner-anchored Gray construction (exact by definition).
sp    - classical set partitioning: recursive max-min-distance splits,
        deterministic tie-breaks, split decisions MSB first.
msp   - first-improvement binary switching from the sp start, minimizing
        the inverse-square sum of per-bit complement-pair distances.
msew  - binary switching maximizing the total squared Euclidean weight
        (sum over bits/labels of complement-pair squared distance),
        min-distance tie-break.
m16r  - best-improvement binary switching from the gray start minimizing
        the inverse-square complement-pair sum (the ideal-feedback
        design goal of anti-Gray mappings).

sp follows the textbook procedure; msp/msew/m16r are locally optimized
surrogates for their published namesakes and are NOT verified against
the original tables (noted in each file header).  Output files are
checksum-pinned by the test suite.
"""

import itertools
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from fbmclink.mapping import gray_qam16  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "fbmclink" / "data"

GRID = np.array([complex(i, q) for q in (-3, -1, 1, 3) for i in (-3, -1, 1, 3)])
GRID = GRID / np.sqrt(10.0)


def min_dist(points):
    pts = np.asarray(points)
    d = np.abs(pts[:, None] - pts[None, :])
    d[np.diag_indices(len(pts))] = np.inf
    return d.min()


def sp_labeling():
    """points[label] via recursive max-min-distance bipartition."""
    labels = {}

    def split(indices, prefix):
        if len(indices) == 1:
            labels[prefix] = indices[0]
            return
        half = len(indices) // 2
        best = None
        for combo in itertools.combinations(indices[1:], half - 1):
            a = (indices[0],) + combo
            b = tuple(i for i in indices if i not in a)
            score = min(min_dist(GRID[list(a)]), min_dist(GRID[list(b)]))
            key = (score, tuple(sorted(a)))
            if best is None or key > best[0]:
                best = (key, a, b)
        _, a, b = best
        split(list(a), prefix + "0")
        split(list(b), prefix + "1")

    split(list(range(16)), "")
    points = np.empty(16, dtype=complex)
    for bits, grid_idx in labels.items():
        points[int(bits, 2)] = GRID[grid_idx]
    return points


def pair_metrics(points):
    """Per-bit complement-pair squared distances, shape (16, 4)."""
    d2 = np.empty((16, 4))
    for lab in range(16):
        for q in range(4):
            other = lab ^ (1 << (3 - q))
            d2[lab, q] = abs(points[lab] - points[other]) ** 2
    return d2


def cost_feedback(points):
    return (1.0 / pair_metrics(points)).sum()  # sum 1/d^2


def cost_msew(points):
    d2 = pair_metrics(points)
    return (-d2.sum(), -d2.min())  # maximize total, then min


def bsa(points, cost, best_improvement, sweeps=50):
    pts = points.copy()
    for _ in range(sweeps):
        improved = False
        base = cost(pts)
        best_swap, best_cost = None, base
        for i in range(16):
            for j in range(i + 1, 16):
                pts[i], pts[j] = pts[j], pts[i]
                c = cost(pts)
                if c < best_cost:
                    if best_improvement:
                        best_swap, best_cost = (i, j), c
                        pts[i], pts[j] = pts[j], pts[i]
                    else:
                        improved = True
                        break
                else:
                    pts[i], pts[j] = pts[j], pts[i]
            if improved and not best_improvement:
                break
        if best_improvement and best_swap is not None:
            i, j = best_swap
            pts[i], pts[j] = pts[j], pts[i]
            improved = True
        if not improved:
            break
    return pts


def write(scheme, points, note):
    path = OUT / f"labeling_{scheme}.csv"
    with open(path, "w") as fh:
        fh.write(f"# 16-QAM labeling table: {scheme}\n")
        fh.write(f"# {note}\n")
        fh.write("index,bits,re,im\n")
        for i in range(16):
            fh.write(f"{i},{i:04b},{float(points[i].real)!r},{float(points[i].imag)!r}\n")
    print(f"wrote {path}")


def main():
    gray = gray_qam16().points.copy()
    write("gray", gray, "corner-anchored Gray construction; verified by tests")
    sp = sp_labeling()
    write("sp", sp, "recursive max-min-distance set partitioning; derived, deterministic")
    msp = bsa(sp.copy(), cost_feedback, best_improvement=False)
    write("msp", msp,
          "UNVERIFIED surrogate: first-improvement BSA from sp, inverse-square pair cost")
    msew = bsa(gray.copy(), cost_msew, best_improvement=True)
    write("msew", msew,
          "UNVERIFIED surrogate: best-improvement BSA maximizing total squared Euclidean weight")
    m16r = bsa(gray.copy(), cost_feedback, best_improvement=True)
    write("m16r", m16r,
          "UNVERIFIED surrogate: best-improvement BSA minimizing inverse-square pair cost")


if __name__ == "__main__":
    main()
