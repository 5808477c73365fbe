"""Reference implementations that share no code with the package's fast paths."""
import math

import numpy as np


def sylvester(n):
    H = np.array([[1.0]])
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def givens_product(walk):
    K = np.eye(walk.dim)
    if walk.sign_diag is not None:
        K = np.diag(walk.sign_diag)
    for i, j, c, s in zip(walk.i.tolist(), walk.j.tolist(), walk.cos.tolist(), walk.sin.tolist()):
        R = np.eye(walk.dim)
        R[i, i], R[i, j], R[j, i], R[j, j] = c, -s, s, c
        K = R @ K
    return K


def kron_power(A, level):
    out = A
    for _ in range(level - 1):
        out = np.kron(out, A)
    return out


def explicit_matrix(t):
    """Assemble the ``m x d`` matrix of a structured transform from its stored parts."""
    d, m = t.d, t.m
    if t.kind == "fjlt":
        D = t.padded_dim
        M = t.P.toarray() @ sylvester(D) @ np.diag(t.signs) / math.sqrt(D) / math.sqrt(m)
    elif t.kind == "srht":
        D = t.padded_dim
        M = sylvester(D)[t.rows] @ np.diag(t.signs) / math.sqrt(m)
    elif t.kind == "toeplitz":
        T = np.array([[t.spec.t_values[j - i + m - 1] for j in range(d)] for i in range(m)])
        M = T @ np.diag(t.spec.sign_diag) / math.sqrt(m)
    elif t.kind == "lwtjl":
        A = kron_power(t.seed_matrix.entries, t.level)
        G = explicit_inner(t.inner)
        M = G @ A @ np.diag(t.signs)
    elif t.kind == "kacjl":
        D = t.walk1.dim
        M = givens_product(t.walk1)[t.keep1]
        if t.walk2 is not None:
            M = givens_product(t.walk2)[t.keep2] @ M
        M = M * math.sqrt(D / m)
    else:
        raise ValueError(t.kind)
    return M[:, :d]


def explicit_inner(t):
    if t.kind == "identity":
        return np.eye(t.d)
    return t.matrix / math.sqrt(t.m)
