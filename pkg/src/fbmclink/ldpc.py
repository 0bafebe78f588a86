"""Rate-1/2 LDPC encoding/decoding and the random bit interleaver.

The parity-check matrix comes either from a progressive-edge-growth
construction with an irregular variable-degree profile (pinned seed) or
from a standard alist file.  Decoding is flooding-schedule sum-product
with the exact tanh rule, vectorized over a batch of codewords.

Sign convention used throughout the package: LLR = log p(bit=0)/p(bit=1),
so positive LLRs vote for bit 0 and the bipolar value of a bit b is
x = 1 - 2b.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LLR_CLAMP",
    "LlrFrame",
    "LdpcCode",
    "DecodeResult",
    "sum_product_decode",
    "Interleaver",
    "random_interleaver",
    "interleave",
    "deinterleave",
    "peg_parity_check",
    "default_code",
]

LLR_CLAMP = 30.0

# variable-degree profile for the built-in irregular construction:
# (degree, node fraction)
DEFAULT_VAR_PROFILE = ((2, 0.45), (3, 0.35), (7, 0.20))


@dataclass
class LlrFrame:
    """A vector of log-likelihood ratios with its role in the exchange."""

    values: np.ndarray
    role: str = "a_priori"  # a_priori | extrinsic | a_posteriori

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


@dataclass
class DecodeResult:
    post: LlrFrame
    ext: LlrFrame
    iterations: int
    converged: bool


def _rng_seed(seed: int, salt: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}|peg|{salt}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _degree_sequence(n: int, profile) -> np.ndarray:
    counts = [int(round(frac * n)) for _, frac in profile]
    counts[-1] += n - sum(counts)
    degrees = np.concatenate([
        np.full(c, d, dtype=int) for (d, _), c in zip(profile, counts)
    ])
    return np.sort(degrees)


def peg_parity_check(n: int, m: int, var_degrees, rng: np.random.Generator):
    """Progressive edge growth: greedily place edges maximizing local girth.

    Variables are processed in ascending degree order.  The first edge of
    a variable goes to a minimum-degree check; each further edge expands
    a BFS tree from the variable and connects to a check that is either
    unreachable or at maximum depth, minimum degree, ties broken randomly.
    Returns the per-variable check neighbor lists.
    """
    var_degrees = np.asarray(var_degrees, dtype=int)
    if len(var_degrees) != n:
        raise ValueError("need one degree per variable node")
    chk_deg = np.zeros(m, dtype=int)
    var_adj = [[] for _ in range(n)]
    chk_adj = [[] for _ in range(m)]

    def pick_min_degree(cands):
        degs = chk_deg[cands]
        best = cands[degs == degs.min()]
        return int(rng.choice(best))

    for v in range(n):
        for j in range(var_degrees[v]):
            if j == 0:
                c = pick_min_degree(np.arange(m))
            else:
                # BFS from v alternating variable/check levels
                seen_chk = np.zeros(m, dtype=bool)
                seen_var = np.zeros(n, dtype=bool)
                seen_var[v] = True
                frontier = list(var_adj[v])
                for c0 in frontier:
                    seen_chk[c0] = True
                last_level = frontier
                while True:
                    nxt_vars = []
                    for c0 in last_level:
                        for v0 in chk_adj[c0]:
                            if not seen_var[v0]:
                                seen_var[v0] = True
                                nxt_vars.append(v0)
                    nxt_chks = []
                    for v0 in nxt_vars:
                        for c0 in var_adj[v0]:
                            if not seen_chk[c0]:
                                seen_chk[c0] = True
                                nxt_chks.append(c0)
                    if not nxt_chks:
                        break
                    last_level = nxt_chks
                    if seen_chk.all():
                        break
                unreached = np.flatnonzero(~seen_chk)
                if len(unreached):
                    c = pick_min_degree(unreached)
                else:
                    # all reachable: deepest level found last
                    c = pick_min_degree(np.asarray(last_level))
            var_adj[v].append(c)
            chk_adj[c].append(v)
            chk_deg[c] += 1
    return var_adj


def _gf2_row_reduce(mat: np.ndarray):
    """In-place RREF over GF(2); returns the pivot column list."""
    rows, cols = mat.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.flatnonzero(mat[r:, c]) + r
        if len(hit) == 0:
            continue
        if hit[0] != r:
            mat[[r, hit[0]]] = mat[[hit[0], r]]
        others = np.flatnonzero(mat[:, c])
        others = others[others != r]
        mat[others] ^= mat[r]
        pivots.append(c)
        r += 1
    return pivots


class LdpcCode:
    """Binary LDPC code defined by a sparse parity-check matrix."""

    def __init__(self, parity_check):
        h = sp.csr_matrix(parity_check, dtype=np.uint8)
        h.data[:] = 1
        h.eliminate_zeros()
        self.h = h
        self.m_checks, self.n = h.shape
        self._systematize()
        self._build_graph()

    # -- construction ------------------------------------------------

    @classmethod
    def peg(cls, n: int = 1296, rate: float = 0.5, seed: int = 1,
            profile=DEFAULT_VAR_PROFILE, max_attempts: int = 20) -> "LdpcCode":
        """Irregular PEG code; reseeds until the parity check is full rank."""
        m = int(round(n * (1.0 - rate)))
        degrees = _degree_sequence(n, profile)
        last_err = None
        for attempt in range(max_attempts):
            rng = _rng_seed(seed, attempt)
            var_adj = peg_parity_check(n, m, degrees, rng)
            rows = np.concatenate([np.asarray(cs) for cs in var_adj])
            cols = np.concatenate([
                np.full(len(cs), v) for v, cs in enumerate(var_adj)
            ])
            h = sp.coo_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)),
                              shape=(m, n))
            try:
                return cls(h)
            except ValueError as err:  # rank deficient; try the next seed
                last_err = err
        raise ValueError(f"no full-rank PEG construction found: {last_err}")

    @classmethod
    def from_alist(cls, path) -> "LdpcCode":
        with open(path) as fh:
            return cls.from_alist_text(fh.read())

    @classmethod
    def from_alist_text(cls, text: str) -> "LdpcCode":
        tokens = [int(t) for t in text.split()]
        n, m, max_vdeg, max_cdeg = tokens[:4]
        vdeg = tokens[4 : 4 + n]
        cdeg = tokens[4 + n : 4 + n + m]
        body = tokens[4 + n + m :]
        # canonical alist pads each neighbor line with zeros to the max
        # degree; tolerate the unpadded variant as well
        padded = len(body) >= n * max_vdeg + m * max_cdeg
        rows, cols = [], []
        pos = 0
        for v in range(n):
            take = max_vdeg if padded else vdeg[v]
            for e in body[pos : pos + take]:
                if e > 0:
                    rows.append(e - 1)
                    cols.append(v)
            pos += take
        h = sp.coo_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)),
                          shape=(m, n))
        return cls(h)

    def to_alist(self, path) -> None:
        hc = self.h.tocsc()
        hr = self.h.tocsr()
        vdeg = np.diff(hc.indptr)
        cdeg = np.diff(hr.indptr)
        with open(path, "w") as fh:
            fh.write(f"{self.n} {self.m_checks}\n")
            fh.write(f"{vdeg.max()} {cdeg.max()}\n")
            fh.write(" ".join(map(str, vdeg)) + "\n")
            fh.write(" ".join(map(str, cdeg)) + "\n")
            for v in range(self.n):
                nbrs = (hc.indices[hc.indptr[v]:hc.indptr[v + 1]] + 1).tolist()
                nbrs += [0] * (vdeg.max() - len(nbrs))
                fh.write(" ".join(map(str, nbrs)) + "\n")
            for c in range(self.m_checks):
                nbrs = (hr.indices[hr.indptr[c]:hr.indptr[c + 1]] + 1).tolist()
                nbrs += [0] * (cdeg.max() - len(nbrs))
                fh.write(" ".join(map(str, nbrs)) + "\n")

    # -- encoding ----------------------------------------------------

    def _systematize(self):
        dense = self.h.toarray().astype(np.uint8)
        work = dense.copy()
        pivots = _gf2_row_reduce(work)
        if len(pivots) != self.m_checks:
            raise ValueError(
                f"parity check is rank deficient ({len(pivots)}/{self.m_checks})"
            )
        pivots = np.asarray(pivots)
        free = np.setdiff1d(np.arange(self.n), pivots)
        self.k = len(free)
        self._pivot_cols = pivots
        self._info_cols = free
        # RREF rows give parity[j] = sum over free columns of work[j, free]*bits
        self._parity_map = work[:, free]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, bits: np.ndarray) -> np.ndarray:
        """Systematic-by-position encoding; info bits land on the free columns."""
        bits = np.asarray(bits, dtype=np.uint8)
        squeeze = bits.ndim == 1
        bits = np.atleast_2d(bits)
        if bits.shape[1] != self.k:
            raise ValueError(f"expected {self.k} info bits, got {bits.shape[1]}")
        cw = np.zeros((bits.shape[0], self.n), dtype=np.uint8)
        cw[:, self._info_cols] = bits
        cw[:, self._pivot_cols] = (bits @ self._parity_map.T) % 2
        return cw[0] if squeeze else cw

    def extract_info(self, codeword: np.ndarray) -> np.ndarray:
        return np.asarray(codeword)[..., self._info_cols]

    def check(self, codeword: np.ndarray) -> np.ndarray:
        """True where all parity checks of a codeword are satisfied."""
        cw = np.atleast_2d(np.asarray(codeword, dtype=np.uint8))
        syn = (self.h @ cw.T) % 2
        ok = ~syn.any(axis=0)
        return ok[0] if np.asarray(codeword).ndim == 1 else ok

    @property
    def generator(self) -> np.ndarray:
        """Dense k x n generator (rows are encodings of unit messages)."""
        return self.encode(np.eye(self.k, dtype=np.uint8))

    # -- message passing ---------------------------------------------

    def _build_graph(self):
        coo = self.h.tocoo()
        order = np.lexsort((coo.col, coo.row))  # edges grouped by check
        self._edge_chk = coo.row[order]
        self._edge_var = coo.col[order]
        self.n_edges = len(order)
        cdeg = np.bincount(self._edge_chk, minlength=self.m_checks)
        vdeg = np.bincount(self._edge_var, minlength=self.n)
        self._max_cdeg = int(cdeg.max())
        self._max_vdeg = int(vdeg.max())
        # padded (check, slot) -> edge index table and its mask
        self._chk_slots = np.zeros((self.m_checks, self._max_cdeg), dtype=np.int64)
        self._chk_mask = np.zeros((self.m_checks, self._max_cdeg), dtype=bool)
        pos = np.zeros(self.m_checks, dtype=np.int64)
        for e, c in enumerate(self._edge_chk):
            self._chk_slots[c, pos[c]] = e
            self._chk_mask[c, pos[c]] = True
            pos[c] += 1
        self._var_slots = np.zeros((self.n, self._max_vdeg), dtype=np.int64)
        self._var_mask = np.zeros((self.n, self._max_vdeg), dtype=bool)
        pos = np.zeros(self.n, dtype=np.int64)
        for e, v in enumerate(self._edge_var):
            self._var_slots[v, pos[v]] = e
            self._var_mask[v, pos[v]] = True
            pos[v] += 1


def sum_product_decode(code: LdpcCode, llr_a, iters: int,
                       early_stop: bool = True) -> DecodeResult:
    """Flooding sum-product decoding with the exact tanh rule.

    Accepts a single LLR vector or a (batch, n) array (also an LlrFrame).
    Messages are clamped to +/-LLR_CLAMP before the tanh to keep the
    check update finite.  Returns a-posteriori and extrinsic LLRs with
    the iteration count actually executed.
    """
    if isinstance(llr_a, LlrFrame):
        llr_a = llr_a.values
    llr_a = np.asarray(llr_a, dtype=float)
    squeeze = llr_a.ndim == 1
    la = np.atleast_2d(llr_a)
    b = la.shape[0]
    if la.shape[1] != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {la.shape[1]}")
    if iters < 1:
        raise ValueError("need at least one decoding iteration")

    msg_vc = la[:, code._edge_var].copy()  # variable -> check
    msg_cv = np.zeros_like(msg_vc)
    post = la.copy()
    used = 0
    converged = code.check((post < 0).astype(np.uint8))
    converged = np.atleast_1d(converged)
    if early_stop and converged.all():
        ext = post - la
        post_out = post[0] if squeeze else post
        ext_out = ext[0] if squeeze else ext
        return DecodeResult(LlrFrame(post_out, "a_posteriori"),
                            LlrFrame(ext_out, "extrinsic"), 0, True)

    chk_slots, chk_mask = code._chk_slots, code._chk_mask
    var_slots, var_mask = code._var_slots, code._var_mask
    for it in range(iters):
        used = it + 1
        # check update: product of tanh over the other edges of the check
        t = np.tanh(0.5 * np.clip(msg_vc, -LLR_CLAMP, LLR_CLAMP))
        tt = t[:, chk_slots]
        tt[:, ~chk_mask] = 1.0
        fwd = np.cumprod(tt, axis=2)
        bwd = np.cumprod(tt[:, :, ::-1], axis=2)[:, :, ::-1]
        excl = np.ones_like(tt)
        excl[:, :, 1:] *= fwd[:, :, :-1]
        excl[:, :, :-1] *= bwd[:, :, 1:]
        excl = np.clip(excl, -1.0 + 1e-15, 1.0 - 1e-15)
        lr = 2.0 * np.arctanh(excl)
        # scatter only the real slots; padded slots alias edge 0
        msg_cv[:, chk_slots[chk_mask]] = lr[:, chk_mask]
        # variable update and posterior
        gathered = msg_cv[:, var_slots]
        gathered[:, ~var_mask] = 0.0
        post = la + gathered.sum(axis=2)
        msg_vc = post[:, code._edge_var] - msg_cv
        if early_stop:
            converged = np.atleast_1d(code.check((post < 0).astype(np.uint8)))
            if converged.all():
                break
    converged = np.atleast_1d(code.check((post < 0).astype(np.uint8)))
    ext = post - la
    post_out = post[0] if squeeze else post
    ext_out = ext[0] if squeeze else ext
    return DecodeResult(LlrFrame(post_out, "a_posteriori"),
                        LlrFrame(ext_out, "extrinsic"),
                        used, bool(converged.all()))


@dataclass(frozen=True)
class Interleaver:
    """Fixed permutation of a coded block; out[i] = x[permutation[i]]."""

    permutation: np.ndarray
    seed: int

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if np.any(np.sort(perm) != np.arange(len(perm))):
            raise ValueError("permutation must be a bijection on [0, length)")
        perm.flags.writeable = False
        object.__setattr__(self, "permutation", perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        inverse.flags.writeable = False
        object.__setattr__(self, "_inverse", inverse)

    def __len__(self) -> int:
        return len(self.permutation)


def random_interleaver(length: int, seed: int) -> Interleaver:
    rng = np.random.default_rng(seed)
    return Interleaver(rng.permutation(length), seed)


def interleave(x: np.ndarray, il: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != len(il):
        raise ValueError("length mismatch with the interleaver")
    return x[..., il.permutation]


def deinterleave(x: np.ndarray, il: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != len(il):
        raise ValueError("length mismatch with the interleaver")
    return x[..., il._inverse]


def default_code() -> LdpcCode:
    """The shipped rate-1/2, n=1296 irregular PEG code."""
    from importlib.resources import files

    text = files("fbmclink").joinpath("data/peg_n1296_r12.alist").read_text()
    return LdpcCode.from_alist_text(text)
