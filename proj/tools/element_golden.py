#!/usr/bin/env python3
"""Exact bilinear element matrices on [0, h]^2 for a Bloch wavevector k.

Prints C++ initializers for the unit-test golden values. Local vertex order is
(0,0), (h,0), (h,h), (0,h).
"""
import sys

import sympy as sp


def element(h, kx, ky):
    x, y = sp.symbols("x y", real=True)
    phi = [(1 - x / h) * (1 - y / h), (x / h) * (1 - y / h), (x / h) * (y / h), (1 - x / h) * (y / h)]
    grad = [(sp.diff(p, x) + sp.I * kx * p, sp.diff(p, y) + sp.I * ky * p) for p in phi]
    K = sp.zeros(4, 4)
    M = sp.zeros(4, 4)
    for p in range(4):
        for q in range(4):
            integrand = sp.conjugate(grad[p][0]) * grad[q][0] + sp.conjugate(grad[p][1]) * grad[q][1]
            K[p, q] = sp.simplify(sp.integrate(sp.integrate(sp.expand(integrand), (x, 0, h)), (y, 0, h)))
            M[p, q] = sp.integrate(sp.integrate(phi[p] * phi[q], (x, 0, h)), (y, 0, h))
    return K, M


def main():
    K, M = element(sp.Integer(1), sp.pi / 2, sp.Integer(0))
    print("// stiffness (re, im), row-major")
    for p in range(4):
        row = []
        for q in range(4):
            v = complex(sp.N(K[p, q], 30))
            row.append("{%.17g, %.17g}" % (v.real, v.imag))
        print("  " + ", ".join(row) + ",")
    print("// mass, row-major")
    for p in range(4):
        print("  " + ", ".join("%.17g" % float(M[p, q]) for q in range(4)) + ",")
    return 0


if __name__ == "__main__":
    sys.exit(main())
