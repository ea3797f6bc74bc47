"""Independent dense-matrix oracles used by the tests.

Everything here is built from the defining formulas directly (explicit N x N
and N^M x N^M matrices, brute-force partial traces), never from the package's
fast paths, so agreement is a real two-route check.
"""

import numpy as np


def dx_of(n: int) -> float:
    return np.sqrt(np.pi / n)


def x_values(n: int) -> np.ndarray:
    return (np.arange(n) - n // 2) * dx_of(n)


def dense_fourier(n: int) -> np.ndarray:
    """U[j, k] = (dx / sqrt(pi)) * exp(2i x_j x_k), the defining kernel."""
    x = x_values(n)
    return (dx_of(n) / np.sqrt(np.pi)) * np.exp(2j * np.outer(x, x))


def dense_sum(n: int, inverse: bool = False) -> np.ndarray:
    """Permutation matrix for (j, k) -> (j, (k + j - N/2) mod N) on two modes."""
    c0 = n // 2
    u = np.zeros((n * n, n * n))
    for j in range(n):
        for k in range(n):
            k2 = (k + j - c0) % n if not inverse else (k - j + c0) % n
            u[j * n + k2, j * n + k] = 1.0
    return u


def dense_gate(kind: str, modes: tuple[int, ...], m: int, n: int) -> np.ndarray:
    """Full N^M x N^M matrix of one gate by explicit kron products."""
    if kind in ("F", "Finv"):
        u1 = dense_fourier(n)
        if kind == "Finv":
            u1 = u1.conj().T
        ops = [np.eye(n, dtype=complex)] * m
        ops[modes[0]] = u1
        out = ops[0]
        for op in ops[1:]:
            out = np.kron(out, op)
        return out
    # Sum acts on a (control, target) pair; permute axes around the 2-mode kernel
    c, t = modes
    u2 = dense_sum(n, inverse=(kind == "SumInv")).astype(complex)
    dim = n**m
    out = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        digits = np.unravel_index(idx, (n,) * m)
        col = digits[c] * n + digits[t]
        rows = np.nonzero(u2[:, col])[0]
        for row in rows:
            jd = list(digits)
            jd[c], jd[t] = divmod(int(row), n)
            out[np.ravel_multi_index(jd, (n,) * m), idx] = u2[row, col]
    return out


def dense_partial_trace(vec: np.ndarray, m: int, n: int, keep: list[int]) -> np.ndarray:
    """Brute-force reduced density matrix by direct summation."""
    tensor = vec.reshape((n,) * m)
    d = n ** len(keep)
    rho = np.zeros((d, d), dtype=complex)
    rest = [ax for ax in range(m) if ax not in keep]
    for i in np.ndindex(*(n,) * len(keep)):
        for j in np.ndindex(*(n,) * len(keep)):
            total = 0.0 + 0.0j
            for r in np.ndindex(*(n,) * len(rest)):
                idx_i = [0] * m
                idx_j = [0] * m
                for ax, v in zip(keep, i):
                    idx_i[ax] = v
                for ax, v in zip(keep, j):
                    idx_j[ax] = v
                for ax, v in zip(rest, r):
                    idx_i[ax] = v
                    idx_j[ax] = v
                total += tensor[tuple(idx_i)] * np.conj(tensor[tuple(idx_j)])
            rho[
                np.ravel_multi_index(i, (n,) * len(keep)) if keep else 0,
                np.ravel_multi_index(j, (n,) * len(keep)) if keep else 0,
            ] = total
    return rho


def random_state(n: int, m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n,) * m) + 1j * rng.normal(size=(n,) * m)
    return v / np.linalg.norm(v)
