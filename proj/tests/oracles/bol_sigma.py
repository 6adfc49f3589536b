"""Independent evaluation of Sigma(5) for the Bol 5-web in original coordinates.

Each foliation {u = const} contributes the frame-free geodesic condition for
its leaf direction V = (-u_y, u_x):
    V^2 (V(V^1) + Pi^1(V, V)) - V^1 (V(V^2) + Pi^2(V, V)) = 0,
linear in the trace-free Thomas symbols
    Pi^1_11 = a, Pi^1_12 = b, Pi^1_22 = c, Pi^2_11 = d, Pi^2_12 = -a, Pi^2_22 = -b.
Derivatives are exact (sympy); the 4 x 4 solves run in 50-digit arithmetic.
"""
import json
import sys

import mpmath as mp
import sympy as sp

mp.mp.dps = 50
x, y = sp.symbols("x y")
a, b, c, d = sp.symbols("a b c d")
PI = {
    (0, 0, 0): a, (0, 0, 1): b, (0, 1, 0): b, (0, 1, 1): c,
    (1, 0, 0): d, (1, 0, 1): -a, (1, 1, 0): -a, (1, 1, 1): -b,
}
U = [x, y, x / y, (1 - x) / (1 - y), x * (1 - y) / (y * (1 - x))]


def condition(u):
    V = [-sp.diff(u, y), sp.diff(u, x)]
    dV = [V[0] * sp.diff(Vk, x) + V[1] * sp.diff(Vk, y) for Vk in V]
    G = [sum(PI[(k, i, j)] * V[i] * V[j] for i in range(2) for j in range(2)) for k in range(2)]
    return sp.expand(V[1] * (dV[0] + G[0]) - V[0] * (dV[1] + G[1]))


CONDS = [condition(u) for u in U]
UNK = [a, b, c, d]
ROWS = [[sp.lambdify((x, y), sp.diff(e, s), "mpmath") for s in UNK] for e in CONDS]
RHS = [sp.lambdify((x, y), -e.subs({s: 0 for s in UNK}), "mpmath") for e in CONDS]


def thomas(sel, px, py):
    A = mp.matrix([[ROWS[f][k](px, py) for k in range(4)] for f in sel])
    r = mp.matrix([RHS[f](px, py) for f in sel])
    s = mp.lu_solve(A, r)
    va, vb, vc, vd = (s[i] for i in range(4))
    return [va, vb, vc, vd, -va, -vb]  # Pi^1_11, Pi^1_12, Pi^1_22, Pi^2_11, Pi^2_12, Pi^2_22


def sigma(px, py):
    px, py = mp.mpf(px), mp.mpf(py)
    p4 = thomas([0, 1, 2, 3], px, py)
    p5 = thomas([0, 1, 2, 4], px, py)
    return [float(u - v) for u, v in zip(p5, p4)], max(abs(float(v)) for v in p4)


def main():
    out = {"points": {}, "pi4_max": 0.0}
    for p in [(0.3, 0.5), (0.35, 0.45), (0.25, 0.55), (0.32, 0.41)]:
        s, p4 = sigma(*p)
        out["points"][f"{p[0]},{p[1]}"] = s
        out["pi4_max"] = max(out["pi4_max"], p4)
    # Lower bound of max-component |Sigma(5)| over the closed ball of radius
    # 0.1 around (0.3, 0.5): dense polar grid including the boundary.
    lo = float("inf")
    for ir in range(0, 11):
        for it in range(0, 72):
            r = 0.1 * ir / 10
            t = 2 * mp.pi * it / 72
            s, p4 = sigma(0.3 + r * mp.cos(t), 0.5 + r * mp.sin(t))
            lo = min(lo, max(abs(v) for v in s) / (1 + p4))
            out["pi4_max"] = max(out["pi4_max"], p4)
    out["ball_min_scaled_sigma"] = lo
    json.dump(out, sys.stdout, indent=1)
    print()


if __name__ == "__main__":
    main()
