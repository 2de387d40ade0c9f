"""Tree operators: exact simplex oscillatory integrals, multilinear sums,
majorant bounds, and convolution-kernel norm scans.

The integral attached to a tree integrates the product of per-node phases
e^{i sigma_v s_v} over the order polytope 0 <= s_child <= s_parent <= t.
It is evaluated exactly by recursing up the tree with exponential
polynomials (one antidifferentiation per internal node); no quadrature is
involved except in the test oracles.

Two evaluation paths exist deliberately:

* a scalar path on :class:`~mkdv_series.exppoly.ExpPoly`, memoized on
  (tree shape, per-node frequency profile), which is the readable
  reference; and
* a batch path where each symbolic term carries per-profile coefficient
  and frequency arrays, used to evaluate the full multilinear sums, which
  aggregate millions of index assignments into far fewer distinct
  frequency profiles.

The two paths are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exppoly import ExpPoly, ep_eval, ep_integrate, ep_mul
from .indexer import IndexAssignment, enumerate_assignments, expansion_coefficient, sigma
from .spectral import CoeffSeq, bracket
from .trees import TernaryTree, odd_even_partition

try:  # optional jit fast path; the numpy route below is the fallback
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

__all__ = [
    "TreeTerm",
    "KernelPoint",
    "tree_integral_poly",
    "integral_exact",
    "integral_bound",
    "parity_bound",
    "apply_tree_operator",
    "tree_term_table",
    "evaluate_term_table",
    "apply_tree_operator_reference",
    "majorant_apply",
    "majorant_tree",
    "kernel_value",
    "kernel_point",
    "kernel_norm_scan",
]

_CHUNK_ROWS = 1 << 20
_PROFILE_CHUNK = 1 << 18


# ---------------------------------------------------------------------------
# exact integrals: scalar reference path
# ---------------------------------------------------------------------------

_INTEGRAL_CACHE: dict = {}


def tree_integral_poly(tree: TernaryTree, sigmas: tuple) -> ExpPoly:
    """Symbolic value of the tree integral as a function of the upper time
    limit, for one frequency profile (one sigma per internal node, in
    preorder order).  Memoized: the integral depends on an assignment only
    through this profile."""
    internal = tree.internal_nodes
    if len(sigmas) != len(internal):
        raise ValueError("one frequency per internal node required")
    key = (tree.to_string(), tuple(int(s) for s in sigmas))
    hit = _INTEGRAL_CACHE.get(key)
    if hit is not None:
        return hit
    rank = {v: i for i, v in enumerate(internal)}

    def build(v: int) -> ExpPoly:
        poly = ExpPoly.exponential(int(sigmas[rank[v]]))
        for c in tree.children[v]:
            if not tree.is_leaf(c):
                poly = ep_mul(poly, build(c))
        return ep_integrate(poly)

    poly = build(0)
    k = len(internal)
    # resource guard on the two-branch antidifferentiation recursion
    assert poly.term_count <= 2**k * (k + 1), "term growth exceeded bound"
    _INTEGRAL_CACHE[key] = poly
    return poly


def integral_exact(tree: TernaryTree, a: IndexAssignment, t: float) -> complex:
    """Exact value of the oscillatory integral over the order polytope at
    time t for the given assignment.  Empty tree (single leaf) gives 1."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if a.tree.to_string() != tree.to_string() or len(a.j) != tree.size:
        raise ValueError("assignment inconsistent with tree")
    if tree.internal_count == 0:
        return 1.0 + 0.0j
    return ep_eval(tree_integral_poly(tree, a.sigmas), t)


def integral_bound(tree: TernaryTree, a: IndexAssignment, t: float, C: float = 16.0) -> float:
    """Decay bound (C t)^{k/2} * prod_v <sigma_v>^{-1/2} on the integral."""
    if C <= 0:
        raise ValueError("C must be positive")
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    k = tree.internal_count
    prod = float(np.prod(1.0 / np.sqrt(bracket(np.array(a.sigmas, dtype=float))))) if k else 1.0
    return (C * t) ** (k / 2.0) * prod


def parity_bound(tree: TernaryTree, a: IndexAssignment, t: float) -> float:
    """Intermediate bound 2^k * t^{|E|} * prod_{v odd level} <sigma_v>^{-1}
    obtained by integrating the odd-level time variables first."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    odd, even = odd_even_partition(tree)
    internal = tree.internal_nodes
    k = len(internal)
    prod = 1.0
    for v, s in zip(internal, a.sigmas):
        if v in odd:
            prod /= float(bracket(s))
    return 2.0**k * t ** len(even) * prod


# ---------------------------------------------------------------------------
# batch integrals: one symbolic recursion over arrays of profiles
# ---------------------------------------------------------------------------


def _bintegrate_term(coef, m, freq, out):
    """Append the antiderivative terms of coef * s^m * e^{i freq s}; freq is
    an integer array, and resonant (freq == 0) lanes take the power-raising
    branch while the others integrate by parts."""
    zero = freq == 0
    if np.any(zero):
        c0 = np.where(zero, coef, 0.0)
        if np.any(c0 != 0):
            out.append((c0 / (m + 1), m + 1, np.zeros_like(freq)))
    if not np.all(zero):
        cn = np.where(zero, 0.0, coef)
        iw = 1j * np.where(zero, 1, freq)
        while True:
            out.append((cn / iw, m, freq))
            if m == 0:
                out.append((-cn / iw, 0, np.zeros_like(freq)))
                break
            cn = -cn * m / iw
            m -= 1


def _bintegrate(terms):
    rows = terms[0][2].shape[0]
    out = []
    for coef, m, freq in terms:
        _bintegrate_term(coef, m, freq, out)
    # merge the pure-constant terms; other merges are not worth the scan
    merged, const = [], {}
    for coef, m, freq in out:
        if not np.any(freq):
            const[m] = const.get(m, 0) + coef
        elif np.any(coef):
            merged.append((coef, m, freq))
    for m, coef in sorted(const.items()):
        if np.any(coef):
            merged.append((coef, m, np.zeros(rows, dtype=np.int64)))
    return merged


def _bmul(f, g):
    out = []
    for c1, m1, w1 in f:
        for c2, m2, w2 in g:
            out.append((c1 * c2, m1 + m2, w1 + w2))
    return out


def batch_tree_integrals(tree: TernaryTree, sig_cols: np.ndarray, ts) -> np.ndarray:
    """Exact integrals for many frequency profiles at once.

    ``sig_cols`` has one row per profile and one column per internal node
    (preorder order).  Returns an array of shape (len(ts), n_profiles).
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    internal = tree.internal_nodes
    n_prof = sig_cols.shape[0]
    out = np.empty((ts.size, n_prof), dtype=np.complex128)
    rank = {v: i for i, v in enumerate(internal)}

    for lo in range(0, n_prof, _PROFILE_CHUNK):
        hi = min(lo + _PROFILE_CHUNK, n_prof)
        cols = sig_cols[lo:hi]
        rows = hi - lo

        def build(v):
            terms = [(np.ones(rows, dtype=np.complex128), 0, cols[:, rank[v]].astype(np.int64))]
            for c in tree.children[v]:
                if not tree.is_leaf(c):
                    terms = _bmul(terms, build(c))
            return _bintegrate(terms)

        poly = build(0)
        for it, t in enumerate(ts):
            acc = np.zeros(rows, dtype=np.complex128)
            for coef, m, freq in poly:
                acc += coef * (t**m if m else 1.0) * np.exp(1j * freq * t)
            out[it, lo:hi] = acc
    return out


# ---------------------------------------------------------------------------
# the multilinear tree operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeTerm:
    """Result of one tree operator applied to fixed leaf data at time t."""

    tree: TernaryTree
    t: float
    values: CoeffSeq


@dataclass(frozen=True)
class TermTable:
    """Aggregated assignments of one tree: for each distinct (output mode,
    frequency profile) pair the summed complex weight.  Evaluating a table
    at a time t costs one batch-integral pass, so sweeps over t reuse the
    expensive enumeration."""

    tree: TernaryTree
    cutoff: int
    root_idx: np.ndarray     # int, position of output mode (mode + N)
    sig_cols: np.ndarray     # int64, [n_profiles, k]
    weights: np.ndarray      # complex128


def _subtree_leaf_counts(tree: TernaryTree):
    counts = [0] * tree.size
    for v in range(tree.size - 1, -1, -1):
        ch = tree.children[v]
        counts[v] = 1 if ch is None else sum(counts[c] for c in ch)
    return counts


def _pack_bounds(tree: TernaryTree, N: int):
    """Mixed-radix capacity per internal node: |sigma_v| <= B_v from the
    subtree leaf counts, since every leaf mode is bounded by N."""
    counts = _subtree_leaf_counts(tree)
    bounds = []
    for v in tree.internal_nodes:
        l1, l2, l3 = (counts[c] for c in tree.children[v])
        bounds.append(3 * (l1 + l2) * (l2 + l3) * (l3 + l1) * N**3)
    return bounds


def _bincount_complex(inverse, weights, size):
    return np.bincount(inverse, weights=weights.real, minlength=size) + 1j * np.bincount(
        inverse, weights=weights.imag, minlength=size
    )


def _unique_packed(keys, weights):
    uniq, inverse = np.unique(keys, return_inverse=True)
    return uniq, _bincount_complex(inverse, weights, uniq.size)


def _unique_columns(root_idx, sig_cols, weights):
    stacked = np.column_stack([root_idx, sig_cols])
    rows, first, inverse = np.unique(
        stacked, axis=0, return_index=True, return_inverse=True
    )
    w = _bincount_complex(inverse, weights, first.size)
    return rows[:, 0], rows[:, 1:], w


def _numpy_chunk(tree, supports, leaf_values, sizes, lo, hi, N, project_internal):
    """One chunk of the leaf-grid enumeration, fully vectorized: returns the
    filtered (root value, sigma columns, complex weight) arrays."""
    k = tree.internal_count
    internal = tree.internal_nodes
    leaves = tree.leaves
    flat = np.arange(lo, hi, dtype=np.int64)
    pos = np.unravel_index(flat, sizes)

    values: dict = {}
    weight = np.ones(hi - lo, dtype=np.complex128)
    for i, v in enumerate(leaves):
        idx = supports[i][pos[i]]
        values[v] = idx.astype(np.int64) - N
        weight = weight * leaf_values[i][idx]

    valid = np.ones(hi - lo, dtype=bool)
    sig_cols = np.empty((hi - lo, k), dtype=np.int64)
    for v in reversed(internal):
        c1, c2, c3 = (values[c] for c in tree.children[v])
        values[v] = c1 + c2 + c3
    for col, v in enumerate(internal):
        jv = values[v]
        c1, c2, c3 = (values[c] for c in tree.children[v])
        res = (c1 == jv) & (c2 == -jv) & (c3 == jv)
        star = (c1 != jv) & (c2 != jv) & (c3 != jv)
        valid &= res | star
        if project_internal:
            valid &= np.abs(jv) <= N
        sig_cols[:, col] = 3 * (c1 + c2) * (c2 + c3) * (c3 + c1)
        weight = weight * np.where(res, 1j * jv, (-1j / 3.0) * jv)

    valid &= np.abs(values[0]) <= N
    valid &= weight != 0
    return values[0][valid], sig_cols[valid], weight[valid]


if _numba is not None:

    @_numba.njit(cache=True)
    def _kernel_chunk(
        lo,
        hi,
        sizes,
        sup_modes,
        sup_vals,
        child_kind,
        child_ref,
        N,
        project,
        offs,
        radix,
        out_keys,
        out_w,
    ):  # pragma: no cover - exercised through tree_term_table
        L = sizes.size
        k = child_kind.shape[0]
        idx = np.empty(L, dtype=np.int64)
        modes = np.empty(L, dtype=np.int64)
        prefix = np.empty(L, dtype=np.complex128)
        jv = np.empty(k, dtype=np.int64)
        sig = np.empty(k, dtype=np.int64)
        # decode the chunk start once; afterwards step like an odometer
        f = lo
        for i in range(L - 1, -1, -1):
            q = f // sizes[i]
            idx[i] = f - q * sizes[i]
            f = q
        for i in range(L):
            modes[i] = sup_modes[i, idx[i]]
            base = prefix[i - 1] if i > 0 else 1.0 + 0.0j
            prefix[i] = base * sup_vals[i, idx[i]]
        count = 0
        for flat in range(lo, hi):
            w = prefix[L - 1]
            ok = True
            for t in range(k - 1, -1, -1):
                c1 = modes[child_ref[t, 0]] if child_kind[t, 0] == 0 else jv[child_ref[t, 0]]
                c2 = modes[child_ref[t, 1]] if child_kind[t, 1] == 0 else jv[child_ref[t, 1]]
                c3 = modes[child_ref[t, 2]] if child_kind[t, 2] == 0 else jv[child_ref[t, 2]]
                s = c1 + c2 + c3
                jv[t] = s
                res = (c1 == s) and (c2 == -s) and (c3 == s)
                star = (c1 != s) and (c2 != s) and (c3 != s)
                if not (res or star):
                    ok = False
                    break
                if project and (s > N or s < -N):
                    ok = False
                    break
                sig[t] = 3 * (c1 + c2) * (c2 + c3) * (c3 + c1)
                if res:
                    w = w * (1j * float(s))
                else:
                    w = w * (-1j / 3.0 * float(s))
            if ok:
                root = jv[0]
                if -N <= root <= N and w != 0.0:
                    key = root + N
                    for t in range(k):
                        key = key * radix[t] + (sig[t] + offs[t])
                    out_keys[count] = key
                    out_w[count] = w
                    count += 1
            if flat + 1 < hi:
                i = L - 1
                while True:
                    idx[i] += 1
                    if idx[i] < sizes[i]:
                        break
                    idx[i] = 0
                    i -= 1
                for j in range(i, L):
                    modes[j] = sup_modes[j, idx[j]]
                    base = prefix[j - 1] if j > 0 else 1.0 + 0.0j
                    prefix[j] = base * sup_vals[j, idx[j]]
        return count


def _kernel_inputs(tree, supports, leaf_values, N):
    L = len(supports)
    max_size = max(s.size for s in supports)
    sup_modes = np.zeros((L, max_size), dtype=np.int64)
    sup_vals = np.zeros((L, max_size), dtype=np.complex128)
    for i, s in enumerate(supports):
        sup_modes[i, : s.size] = s - N
        sup_vals[i, : s.size] = leaf_values[i][s]
    internal = tree.internal_nodes
    rank = {v: t for t, v in enumerate(internal)}
    leaf_slot = {v: i for i, v in enumerate(tree.leaves)}
    k = len(internal)
    child_kind = np.zeros((k, 3), dtype=np.int8)
    child_ref = np.zeros((k, 3), dtype=np.int64)
    for t, v in enumerate(internal):
        for c_i, c in enumerate(tree.children[v]):
            if tree.is_leaf(c):
                child_kind[t, c_i] = 0
                child_ref[t, c_i] = leaf_slot[c]
            else:
                child_kind[t, c_i] = 1
                child_ref[t, c_i] = rank[c]
    return sup_modes, sup_vals, child_kind, child_ref


def tree_term_table(
    tree: TernaryTree,
    leaf_data,
    N: int,
    project_internal: bool = False,
    chunk_rows: int = _CHUNK_ROWS,
    use_jit: bool | None = None,
) -> TermTable:
    """Enumerate every admissible assignment of the tree (leaf modes running
    over the support of each leaf's data) and aggregate coefficient-weighted
    leaf products by (output mode, frequency profile).

    Only leaf modes inside [-N, N] are populated by construction; internal
    modes are additionally restricted to the cutoff when
    ``project_internal`` is set.  Output modes beyond the cutoff are
    discarded (the result is a sequence at cutoff N either way).

    The row sweep runs through a jit-compiled kernel when numba is present
    (``use_jit=None`` auto-detects); the pure-numpy sweep computes the same
    rows in the same order and is kept as the fallback and cross-check.
    """
    leaves = tree.leaves
    if len(leaf_data) != len(leaves):
        raise ValueError(f"need {len(leaves)} leaf sequences, got {len(leaf_data)}")
    for d in leaf_data:
        if d.cutoff != N:
            raise ValueError("all leaf data must share the cutoff N")
    k = tree.internal_count
    if k == 0:
        raise ValueError("single-leaf tree has no table; handled by caller")
    if (2 * k + 1) * N >= (1 << 15):
        raise ValueError("mode range too large for int64 frequency arithmetic")

    supports = [np.nonzero(d.values)[0] for d in leaf_data]
    leaf_values = [d.values for d in leaf_data]
    sizes = np.array([s.size for s in supports], dtype=np.int64)
    empty = TermTable(
        tree,
        N,
        np.empty(0, dtype=np.int64),
        np.empty((0, k), dtype=np.int64),
        np.empty(0, dtype=np.complex128),
    )
    total = int(np.prod(sizes))
    if total == 0:
        return empty

    bounds = _pack_bounds(tree, N)
    capacity = 2 * N + 1
    for b in bounds:
        capacity *= 2 * b + 1
    packable = capacity < (1 << 62)
    jit = (_numba is not None) if use_jit is None else (use_jit and _numba is not None)

    if packable:
        offs = np.array(bounds, dtype=np.int64)
        radix = 2 * offs + 1
        if jit:
            sup_modes, sup_vals, child_kind, child_ref = _kernel_inputs(
                tree, supports, leaf_values, N
            )
        parts_k, parts_w = [], []
        buf_keys = np.empty(min(chunk_rows, total), dtype=np.int64)
        buf_w = np.empty(min(chunk_rows, total), dtype=np.complex128)
        for lo in range(0, total, chunk_rows):
            hi = min(lo + chunk_rows, total)
            if jit:
                cnt = _kernel_chunk(
                    lo, hi, sizes, sup_modes, sup_vals, child_kind, child_ref,
                    N, project_internal, offs, radix, buf_keys, buf_w,
                )
                keys, w = buf_keys[:cnt], buf_w[:cnt]
            else:
                root, cols, w = _numpy_chunk(
                    tree, supports, leaf_values, sizes, lo, hi, N, project_internal
                )
                keys = root + N
                for col, b, rad in zip(cols.T, bounds, radix):
                    keys = keys * rad + (col + b)
            if keys.size:
                ku, wu = _unique_packed(keys, w)
                parts_k.append(ku)
                parts_w.append(wu)
        if not parts_k:
            return empty
        keys, w = _unique_packed(np.concatenate(parts_k), np.concatenate(parts_w))
        sig_cols = np.empty((keys.size, k), dtype=np.int64)
        rest = keys.copy()
        for t in range(k - 1, -1, -1):
            sig_cols[:, t] = rest % radix[t] - offs[t]
            rest //= radix[t]
        return TermTable(tree, N, rest, sig_cols, w)

    parts_root, parts_cols, parts_w = [], [], []
    for lo in range(0, total, chunk_rows):
        hi = min(lo + chunk_rows, total)
        root, cols, w = _numpy_chunk(
            tree, supports, leaf_values, sizes, lo, hi, N, project_internal
        )
        if root.size:
            r, c, wu = _unique_columns(root + N, cols, w)
            parts_root.append(r)
            parts_cols.append(c)
            parts_w.append(wu)
    if not parts_root:
        return empty
    r, c, w = _unique_columns(
        np.concatenate(parts_root), np.vstack(parts_cols), np.concatenate(parts_w)
    )
    return TermTable(tree, N, r, c, w)


def evaluate_term_table(table: TermTable, ts) -> np.ndarray:
    """Values of the tree operator at the given times.

    Returns an array of shape (len(ts), 2N+1), modes ordered -N..N.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    width = 2 * table.cutoff + 1
    out = np.zeros((ts.size, width), dtype=np.complex128)
    if table.weights.size == 0:
        return out
    integrals = batch_tree_integrals(table.tree, table.sig_cols, ts)
    for it in range(ts.size):
        contrib = table.weights * integrals[it]
        out[it] = np.bincount(table.root_idx, weights=contrib.real, minlength=width) + 1j * np.bincount(
            table.root_idx, weights=contrib.imag, minlength=width
        )
    return out


def apply_tree_operator(
    tree: TernaryTree,
    leaf_data,
    t: float,
    N: int,
    project_internal: bool = False,
) -> CoeffSeq:
    """The multilinear operator of one tree applied to per-leaf data.

    Sums expansion coefficient x leaf-data product x exact oscillatory
    integral over every admissible assignment with output mode in [-N, N].
    A single-leaf tree is the identity on its one datum.
    """
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if tree.internal_count == 0:
        if len(leaf_data) != 1:
            raise ValueError("single-leaf tree takes exactly one sequence")
        if leaf_data[0].cutoff != N:
            raise ValueError("cutoff mismatch")
        return leaf_data[0]
    table = tree_term_table(tree, leaf_data, N, project_internal)
    return CoeffSeq(N, evaluate_term_table(table, [t])[0])


def apply_tree_operator_reference(
    tree: TernaryTree,
    leaf_data,
    t: float,
    N: int,
    project_internal: bool = False,
) -> CoeffSeq:
    """Brute-force evaluation through the scalar assignment stream; used to
    pin down the vectorized path on small cases."""
    if tree.internal_count == 0:
        if len(leaf_data) != 1:
            raise ValueError("single-leaf tree takes exactly one sequence")
        return leaf_data[0]
    leaves = tree.leaves
    if len(leaf_data) != len(leaves):
        raise ValueError(f"need {len(leaves)} leaf sequences, got {len(leaf_data)}")
    out = np.zeros(2 * N + 1, dtype=np.complex128)
    for n in range(-N, N + 1):
        acc = 0.0 + 0.0j
        for a in enumerate_assignments(tree, n, N, project_internal):
            w = expansion_coefficient(a)
            for i, v in enumerate(leaves):
                w *= leaf_data[i][a.j[v]]
                if w == 0:
                    break
            if w == 0:
                continue
            acc += w * integral_exact(tree, a, t)
        out[n + N] = acc
    return CoeffSeq(N, out)


# ---------------------------------------------------------------------------
# majorant operator
# ---------------------------------------------------------------------------


def majorant_apply(a1: CoeffSeq, a2: CoeffSeq, a3: CoeffSeq, s: float) -> CoeffSeq:
    """Positive trilinear majorant: star sum of |n| <sigma>^{-1/2} products
    of moduli, plus the diagonal term |n| |a1(n) a2(n) a3(n)|."""
    # s is accepted alongside the data for signature symmetry with the
    # weighted-norm chain; the majorant itself carries no weight.
    N = a1.cutoff
    if a2.cutoff != N or a3.cutoff != N:
        raise ValueError("common cutoff required")
    modes = np.arange(-N, N + 1)
    m1 = np.abs(a1.values)[:, None, None]
    m2 = np.abs(a2.values)[None, :, None]
    n1 = modes[:, None, None]
    n2 = modes[None, :, None]
    n = modes[None, None, :]
    n3 = n - n1 - n2
    inside = np.abs(n3) <= N
    star = (n1 != n) & (n2 != n) & (n3 != n) & inside
    a3_abs = np.abs(a3.values)
    m3 = np.where(inside, a3_abs[np.clip(n3 + N, 0, 2 * N)], 0.0)
    sig = 3.0 * (n1 + n2) * (n2 + n3) * (n3 + n1)
    kern = np.abs(n) / np.sqrt(np.sqrt(1.0 + sig**2))
    total = np.sum(np.where(star, kern * m1 * m2 * m3, 0.0), axis=(0, 1))
    diag = np.abs(modes) * np.abs(a1.values) * np.abs(a2.values) * np.abs(a3.values)
    return CoeffSeq(N, (total + diag).astype(np.complex128))


def majorant_tree(tree: TernaryTree, leaf_data, s: float) -> CoeffSeq:
    """Composition of the majorant over a tree: the subtree results feed the
    trilinear majorant at each internal node, leaves contribute their data's
    moduli.  Dominates the modulus of the exact tree operator mode by mode
    (up to the (Ct)^{k/2} integral factor) for modulus-even data."""
    leaves = tree.leaves
    if len(leaf_data) != len(leaves):
        raise ValueError(f"need {len(leaves)} leaf sequences, got {len(leaf_data)}")
    pos = {v: i for i, v in enumerate(leaves)}

    def walk(v) -> CoeffSeq:
        if tree.is_leaf(v):
            d = leaf_data[pos[v]]
            return d.with_values(np.abs(d.values).astype(np.complex128))
        c1, c2, c3 = (walk(c) for c in tree.children[v])
        return majorant_apply(c1, c2, c3, s)

    return walk(0)


# ---------------------------------------------------------------------------
# convolution kernels and norm scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelPoint:
    """One lattice sample of a kernel; value is 0 outside the kernel's
    defining region and nonnegative everywhere."""

    n1: int
    n2: int
    n3: int
    value: float


def _kernel_array(n1, n2, n3, s: float, which: str):
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    n3 = np.asarray(n3, dtype=float)
    n = n1 + n2 + n3
    if which == "m2":
        on_diag = (n1 == n) & (n2 == -n) & (n3 == n)
        return np.where(on_diag, np.abs(n) / bracket(n) ** (2 * s), 0.0)
    num = bracket(n) ** s * np.abs(n)
    if which == "full":
        sig = 3.0 * (n - n1) * (n - n2) * (n - n3)
        den = np.sqrt(bracket(sig)) * (bracket(n1) * bracket(n2) * bracket(n3)) ** s
        return num / den
    if which == "m1":
        off = (n1 != n) & (n2 != n) & (n3 != n)
        den = (bracket(n1) * bracket(n2) * bracket(n3)) ** s * np.sqrt(
            bracket(n - n1) * bracket(n - n2) * bracket(n - n3)
        )
        return np.where(off, num / den, 0.0)
    raise ValueError(f"unknown kernel {which!r}")


def kernel_value(n1: int, n2: int, n3: int, s: float, which: str = "full") -> float:
    """Kernel value at one lattice triple; ``which`` selects the full
    kernel, its off-diagonal part m1 (product-form denominator), or the
    resonant diagonal m2 = |n| / <n>^{2s}."""
    return float(_kernel_array(n1, n2, n3, s, which))


def kernel_point(n1: int, n2: int, n3: int, s: float, which: str = "full") -> KernelPoint:
    return KernelPoint(n1, n2, n3, kernel_value(n1, n2, n3, s, which))


_PAIRS = {(1, 2), (1, 3), (2, 3)}


def kernel_norm_scan(
    n: int,
    s: float,
    p: float,
    pair: tuple = (1, 2),
    M: int = 64,
    which: str = "m1",
    row_chunk: int = 512,
) -> float:
    """l^{p'} norm of the kernel slice at fixed output mode n.

    The two indices of ``pair`` run over the box [-M, M]^2 and the third is
    determined by n1+n2+n3 = n.  Since the slice is a single 2-parameter
    set, the pair choice only moves the truncation window.  p' is the
    conjugate of the given p.
    """
    if tuple(pair) not in _PAIRS:
        raise ValueError(f"pair must be one of {_PAIRS}")
    if M < abs(n):
        raise ValueError("M must be at least |n|")
    if p == 1.0:
        pc = math.inf
    elif math.isinf(p):
        pc = 1.0
    else:
        pc = p / (p - 1.0)

    free = np.arange(-M, M + 1, dtype=np.int64)
    total = 0.0
    sup = 0.0
    for lo in range(0, free.size, row_chunk):
        u = free[lo : lo + row_chunk][:, None]
        v = free[None, :]
        w = n - u - v
        if pair == (1, 2):
            n1, n2, n3 = u, v, w
        elif pair == (1, 3):
            n1, n3, n2 = u, v, w
        else:
            n2, n3, n1 = u, v, w
        vals = _kernel_array(n1, n2, n3, s, which)
        if math.isinf(pc):
            sup = max(sup, float(np.max(vals)))
        else:
            total += float(np.sum(vals**pc))
    if math.isinf(pc):
        return sup
    return total ** (1.0 / pc)
