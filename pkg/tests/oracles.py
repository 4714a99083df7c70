"""Independent brute-force reference implementations used as test oracles.

Nothing here imports conceptorclf internals; every routine takes plain arrays
and recomputes the quantity by the most direct route available.
"""

import math

import numpy as np


def scalar_loop_drive(W, W_in, b, frames, washout=0, x0=None):
    """Re-run x(n+1) = tanh(W x(n) + W_in p(n+1) + b) with explicit Python loops."""
    n, k = W_in.shape
    x = [0.0] * n if x0 is None else list(map(float, x0))
    out = []
    for p in frames:
        new = []
        for i in range(n):
            acc = b[i]
            for j in range(n):
                acc += W[i, j] * x[j]
            for j in range(k):
                acc += W_in[i, j] * p[j]
            new.append(math.tanh(acc))
        x = new
        out.append(new)
    return np.array(out)[washout:]


def dense_step(W, W_in, b, x, p):
    n, k = W_in.shape
    return np.array(
        [math.tanh(sum(W[i, j] * x[j] for j in range(n)) + sum(W_in[i, j] * p[j] for j in range(k)) + b[i])
         for i in range(n)]
    )


def lapack_spectral_radius(W):
    return float(np.max(np.abs(np.linalg.eigvals(W))))


def double_loop_correlation(state_blocks):
    """R[i, j] = sum over all pooled states of x_i x_j, divided by the state count."""
    n = state_blocks[0].shape[1]
    R = [[0.0] * n for _ in range(n)]
    count = 0
    for block in state_blocks:
        for x in block:
            count += 1
            for i in range(n):
                for j in range(n):
                    R[i][j] += x[i] * x[j]
    return np.array(R) / count


def eigen_conceptor_spectrum(R, aperture):
    """Sorted eigenvalues s/(s + aperture^-2) from an eigendecomposition of R."""
    s = np.linalg.eigvalsh(R)
    return np.sort(s / (s + aperture ** -2))


def eigen_conceptor(R, aperture):
    s, U = np.linalg.eigh(R)
    return (U * (s / (s + aperture ** -2))) @ U.T


def triple_loop_evidence(C, Z):
    """Mean over rows z of Z of sum_i sum_j z_i C_ij z_j."""
    total = 0.0
    n = C.shape[0]
    for z in Z:
        q = 0.0
        for i in range(n):
            for j in range(n):
                q += z[i] * C[i, j] * z[j]
        total += q
    return total / len(Z)


def tally_confusion(pairs, labels):
    counts = {(t, p): 0 for t in labels for p in labels}
    for t, p in pairs:
        counts[(t, p)] += 1
    recall, precision = {}, {}
    for lab in labels:
        support = sum(1 for t, _ in pairs if t == lab)
        predicted = sum(1 for _, p in pairs if p == lab)
        hits = sum(1 for t, p in pairs if t == lab and p == lab)
        recall[lab] = hits / support if support else None
        precision[lab] = hits / predicted if predicted else None
    accuracy = sum(1 for t, p in pairs if t == p) / len(pairs)
    return counts, accuracy, recall, precision


def pairwise_krippendorff(ratings, level="interval"):
    """Alpha from explicit pair sums over units (D_o) and over all pairable values (D_e)."""
    units = []
    for col in np.asarray(ratings, dtype=float).T:
        vals = [v for v in col if not math.isnan(v)]
        if len(vals) >= 2:
            units.append(vals)
    pool = [v for u in units for v in u]
    n = len(pool)

    if level == "interval":
        def delta(a, b):
            return (a - b) ** 2
    else:
        freq = {}
        for v in pool:
            freq[v] = freq.get(v, 0) + 1

        def delta(a, b):
            lo, hi = min(a, b), max(a, b)
            between = sum(c for v, c in freq.items() if lo <= v <= hi)
            return (between - (freq[a] + freq[b]) / 2.0) ** 2

    d_o = 0.0
    for u in units:
        m = len(u)
        s = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    s += delta(u[i], u[j])
        d_o += s / (m - 1)
    d_o /= n

    d_e = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                d_e += delta(pool[i], pool[j])
    d_e /= n * (n - 1)
    if d_o == 0.0:
        return 1.0
    return 1.0 - d_o / d_e
