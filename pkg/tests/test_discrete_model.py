"""Exact finite model of the block commutator expansion.

Operators on a finite point set with counting measure have exact trace
formulas: tr(K_1 ... K_m) is a finite sum of kernel-block products.  The
doubled 4x4 block operator, the multiplication operator, and the graded
trace are built densely here, and the expansion into admissible sequences
(index map, expansion sign, consecutive kernel arguments, anchored
projection factors) is checked against plain matrix algebra to rounding
accuracy.  No quadrature, no truncation: any convention error is a hard
failure.
"""

import numpy as np
import pytest

from sphdeg.combinatorics import domino_placements, enumerate_gamma, expansion_sign

M_PTS = 3  # points in the base set
R_FIB = 2  # fiber dimension
N_MAT = 2  # projection matrix size


def _random_setup(seed):
    rng = np.random.default_rng(seed)

    def cmat(d):
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

    k_op = cmat(M_PTS * R_FIB)
    w_op = cmat(M_PTS * R_FIB)
    p = rng.standard_normal((M_PTS, N_MAT, N_MAT)) + 1j * rng.standard_normal(
        (M_PTS, N_MAT, N_MAT)
    )
    return k_op, w_op, p


def _dense_side(k_op, w_op, p, k):
    """str(ptilde [T, ptilde]^{2k}) by dense algebra on C^4 (x) base (x) C^N."""
    eye_n = np.eye(N_MAT)
    kn = np.kron(k_op, eye_n)
    wn = np.kron(w_op, eye_n)
    d = kn.shape[0]
    z = np.zeros_like(kn)
    t_big = np.block(
        [
            [kn, z, z, 1j * wn],
            [z, kn, -1j * wn, z],
            [z, 1j * wn, -kn, z],
            [-1j * wn, z, z, -kn],
        ]
    )
    mult = np.zeros((d, d), dtype=complex)
    for x in range(M_PTS):
        e = np.zeros((M_PTS, M_PTS))
        e[x, x] = 1.0
        mult += np.kron(np.kron(e, np.eye(R_FIB)), p[x])
    e4 = np.zeros((4, 4))
    e4[0, 0] = 1.0
    p_tilde = np.kron(e4, mult)

    tau_r = np.diag([1.0, -1.0])
    gamma = np.kron(
        np.diag([1.0, -1.0, 1.0, -1.0]), np.kron(np.kron(np.eye(M_PTS), tau_r), eye_n)
    )
    comm = t_big @ p_tilde - p_tilde @ t_big
    acc = p_tilde.copy()
    for _ in range(2 * k):
        acc = acc @ comm
    return np.trace(gamma @ acc)


def _kernel_block(op, x, y):
    return op.reshape(M_PTS, R_FIB, M_PTS, R_FIB)[x, :, y, :]


def _expanded_side(k_op, w_op, p, k):
    """The same trace as a sum over sequences, tuples, and kernel chains."""
    tau_r = np.diag([1.0, -1.0])
    m = 2 * k
    total = 0.0
    for seq in enumerate_gamma(k):
        imap = [(i - 1) % m for i in seq.indexmap]
        for tup in np.ndindex(*([M_PTS] * m)):
            qm = p[tup[0]].copy()
            for i in imap:
                qm = qm @ p[tup[i]]
            hm = np.eye(R_FIB, dtype=complex)
            for l in range(m):
                op = k_op if seq.entries[l] in (1, 2) else w_op
                hm = hm @ _kernel_block(op, tup[l], tup[(l + 1) % m])
            total += expansion_sign(seq) * np.trace(qm) * np.trace(tau_r @ hm)
    return total


def _grouped_side(k_op, w_op, p, k):
    """Domino-grouped form: differences on free slots, one term per placement."""
    tau_r = np.diag([1.0, -1.0])
    m = 2 * k
    total = 0.0
    for placement in domino_placements(m):
        w = len(placement)
        starts = set(placement)
        seconds = {q + 1 for q in placement}
        for tup in np.ndindex(*([M_PTS] * m)):
            qm = p[tup[0]].copy()
            hm = np.eye(R_FIB, dtype=complex)
            for l in range(m):
                nxt = (l + 1) % m
                if l in starts:
                    qm = qm @ p[tup[l]]
                    hm = hm @ _kernel_block(w_op, tup[l], tup[nxt])
                elif l in seconds:
                    qm = qm @ p[tup[nxt]]
                    hm = hm @ _kernel_block(w_op, tup[l], tup[nxt])
                else:
                    qm = qm @ (p[tup[nxt]] - p[tup[l]])
                    hm = hm @ _kernel_block(k_op, tup[l], tup[nxt])
            total += (-1.0) ** w * np.trace(qm) * np.trace(tau_r @ hm)
    return total


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("seed", [0, 1])
def test_expansion_matches_dense_supertrace(k, seed):
    k_op, w_op, p = _random_setup(seed)
    dense = _dense_side(k_op, w_op, p, k)
    expanded = _expanded_side(k_op, w_op, p, k)
    assert abs(dense - expanded) < 1e-9 * max(1.0, abs(dense))


@pytest.mark.parametrize("k", [1, 2])
def test_grouped_placements_match_dense(k):
    k_op, w_op, p = _random_setup(7)
    dense = _dense_side(k_op, w_op, p, k)
    grouped = _grouped_side(k_op, w_op, p, k)
    assert abs(dense - grouped) < 1e-9 * max(1.0, abs(dense))
