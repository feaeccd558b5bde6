#!/usr/bin/env python3
"""Independent reference values for the unit tests (numpy/scipy only).

Rebuilds the second-order Dirichlet discretization from scratch, solves the
stationary equation with scipy's root finder and prints the numbers frozen
into tests/. Run: python3 tools/derive_oracles.py
"""
import numpy as np
import scipy.linalg as la
import scipy.optimize as opt

L = 20.0
MU = 1.0


def grid(n):
    x = np.linspace(-L, L, n)
    return x, x[1] - x[0]


def minus_laplacian(n):
    _, h = grid(n)
    m = n - 2
    return (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h**2


def profile(n, sigma):
    x, _ = grid(n)
    xi = x[1:-1]
    a = minus_laplacian(n) + MU * np.eye(n - 2)
    seed = ((sigma + 1) * MU) ** (1 / (2 * sigma)) / np.cosh(sigma * np.sqrt(MU) * xi) ** (1 / sigma)
    f = lambda p: a @ p - np.abs(p) ** (2 * sigma) * p
    jac = lambda p: a - np.diag((2 * sigma + 1) * np.abs(p) ** (2 * sigma))
    sol = opt.root(f, seed, jac=jac, method="hybr", options={"xtol": 1e-14})
    return xi, sol.x, np.max(np.abs(f(sol.x)))


def potentials(phi, sigma):
    s = phi**2
    fprime_s = sigma * s**sigma
    return -(s**sigma) - fprime_s, -fprime_s


def h_matrix(n, sigma):
    _, phi, _ = profile(n, sigma)
    u, w = potentials(phi, sigma)
    lap = minus_laplacian(n)
    l = lap + MU * np.eye(n - 2) + np.diag(u)
    return np.block([[l, np.diag(w)], [-np.diag(w), -l]]), u, w


def kernel_dims(h, value, powers, tol=1e-6):
    m = h - value * np.eye(h.shape[0])
    out, p = [], np.eye(h.shape[0])
    for _ in range(powers):
        p = p @ m
        s = la.svdvals(p)
        out.append(int(np.sum(s < tol * s[0])))
    return out


def main():
    for sigma in (1.0, 3.0):
        xi, phi, res = profile(256, sigma)
        print(f"profile sigma={sigma} N=256: peak {phi.max():.15g} l2 {np.sqrt(np.sum(phi**2) * (xi[1] - xi[0])):.15g} residual {res:.3g}")

    n = 256
    _, h = grid(n)
    free = np.block([[minus_laplacian(n) + MU * np.eye(n - 2), np.zeros((n - 2, n - 2))],
                     [np.zeros((n - 2, n - 2)), -minus_laplacian(n) - MU * np.eye(n - 2)]])
    ev = la.eigvals(free)
    print(f"free N=256 lowest positive {np.min(ev.real[ev.real > 0]):.15g}")

    hs, u, w = h_matrix(256, 3.0)
    ev = la.eigvals(hs)
    gap = ev[(np.abs(ev.real) < 0.95) & (np.abs(ev.imag) <= 4)]
    for z in sorted(gap, key=lambda z: z.imag):
        print(f"sigma=3 N=256 gap eigenvalue {z.real:+.3e} {z.imag:+.15g}i")
    lminus = minus_laplacian(256) + MU * np.eye(254) + np.diag(u - w)
    print(f"sigma=3 N=256 L_minus smallest {la.eigvalsh(lminus)[0]:.6g}")

    h1, u1, w1 = h_matrix(256, 1.0)
    print("sigma=1 N=256 dim ker H^m, m=1..2:", kernel_dims(h1, 0.0, 2))
    ev = la.eigvals(h1)
    gap = ev[(np.abs(ev.real) < 0.95) & (np.abs(ev.imag) <= 4)]
    print(f"sigma=1 N=256 gap values: {len(gap)}")

    # Exterior Rayleigh quotient of Re H_E at E = 0 (block [[L, W], [W, L]]).
    x, _ = grid(256)
    xi = x[1:-1]
    lap = minus_laplacian(256)
    l1 = lap + MU * np.eye(254) + np.diag(u1)
    re = np.block([[l1, np.diag(w1)], [np.diag(w1), l1]])
    for r in (5.0, 8.0, 12.0):
        keep = np.abs(xi) >= r
        idx = np.concatenate([np.where(keep)[0], 254 + np.where(keep)[0]])
        q = la.eigvalsh(re[np.ix_(idx, idx)])[0]
        print(f"exterior quotient N=256 R={r}: {q:.15g}")

    # Re E = 0.3 shifts the blocks by -+0.3.
    re_e = re + np.diag(np.concatenate([-0.3 * np.ones(254), 0.3 * np.ones(254)]))
    keep = np.abs(xi) >= 5.0
    idx = np.concatenate([np.where(keep)[0], 254 + np.where(keep)[0]])
    print(f"exterior quotient N=256 R=5 ReE=0.3: {la.eigvalsh(re_e[np.ix_(idx, idx)])[0]:.15g}")

    # || V (H0 + i lam)^{-1} ||_2 at N=128 for the cubic potentials.
    hc, uc, wc = h_matrix(128, 1.0)
    m = 126
    lapc = minus_laplacian(128)
    h0 = np.block([[lapc + MU * np.eye(m), np.zeros((m, m))], [np.zeros((m, m)), -lapc - MU * np.eye(m)]])
    v = np.block([[np.diag(uc), np.diag(wc)], [-np.diag(wc), -np.diag(uc)]])
    for lam in (1.0, 10.0):
        r0 = la.inv(h0 + 1j * lam * np.eye(2 * m))
        print(f"perturbation resolvent norm N=128 lambda={lam}: {la.norm(v @ r0, 2):.15g}")


if __name__ == "__main__":
    main()
