"""Hand-derived reduction coefficients for the worked invariance claims.

Each entry is ``(label, operator, basis, psi)`` where ``psi(k)`` returns the
expected coefficients for numeric symbol values ``k``.  The expressions are
worked out by hand with the power and Mittag-Leffler rules; they do not go
through the package's algebra.
"""

from math import gamma as G

from invsub.subspace import Add, Const, F, FracDx, IntPow, Mul, Recip, Scale, SubspaceBasis


def powers(beta, n):
    return SubspaceBasis.of(*[j * beta for j in range(n + 1)])


def ml(beta, rate):
    return SubspaceBasis.of(0.0, (0.0, [(beta, rate)]))


def catalog(alpha, beta, C=1.3, d=0.7):
    b = beta
    bb = 1.0 + beta / 2  # diffusion examples need order in (1, 2]
    D = lambda o, c: FracDx(o, c)  # noqa: E731
    out = [
        ("EX1 {1,x^(b+1)}", D(b + 1, F()), SubspaceBasis.of(0.0, b + 1), lambda k: [k[1] * G(b + 2), 0.0]),
        (
            "EX2 {1,x^b}",
            Add((Scale(-1.0, Mul((F(), D(b, F())))), Scale(d, D(b, D(b, F()))))),
            powers(b, 1),
            lambda k: [-G(b + 1) * k[0] * k[1], -G(b + 1) * k[1] ** 2],
        ),
        (
            "EX3 {1,x^b,x^2b}",
            Scale(C, D(bb, F())),
            powers(bb, 2),
            lambda k: [C * G(bb + 1) * k[1], C * G(2 * bb + 1) / G(bb + 1) * k[2], 0.0],
        ),
        ("EX3 {1,E_b(x^b)}", Scale(C, D(bb, F())), ml(bb, 1.0), lambda k: [0.0, C * k[1]]),
        ("EX3 {1,x^b}", Scale(C, D(bb, F())), powers(bb, 1), lambda k: [C * G(bb + 1) * k[1], 0.0]),
        ("EX4 {1,E_b(x^b)}", Add((D(b, F()), Scale(-1.0, F()))), ml(b, 1.0), lambda k: [-k[0], 0.0]),
        (
            "EX6 {1,E_b(x^b)}",
            Add((IntPow(D(b, F()), 2), Scale(-1.0, Mul((F(), D(b, F())))))),
            ml(b, 1.0),
            lambda k: [0.0, -k[0] * k[1]],
        ),
        (
            "EX7 {1,x^b}",
            Add((D(b, Mul((F(), D(b, F())))), Const(-1.0))),
            powers(b, 1),
            lambda k: [G(b + 1) ** 2 * k[1] ** 2 - 1.0, 0.0],
        ),
        (
            "EX8 {1,x^b}",
            Add((Scale(6.0, Mul((F(), D(b, F())))), Scale(-1.0, D(2 * b, D(b, F()))))),
            powers(b, 1),
            lambda k: [6 * G(b + 1) * k[0] * k[1], 6 * G(b + 1) * k[1] ** 2],
        ),
        (
            "EX9 {1,x^b,x^2b}",
            D(b, D(b, D(b, Scale(0.5, IntPow(F(), 2))))),
            powers(b, 2),
            lambda k: [G(3 * b + 1) * k[1] * k[2], G(4 * b + 1) / (2 * G(b + 1)) * k[2] ** 2, 0.0],
        ),
        ("EX10 {1,x^b}", D(b, Mul((F(), D(b, F())))), powers(b, 1), lambda k: [G(b + 1) ** 2 * k[1] ** 2, 0.0]),
        (
            "EX11 {1,E_b(-x^b)}",
            Add((D(b, F()), Recip(Add((D(b, F()), F()))))),
            ml(b, -1.0),
            lambda k: [1.0 / k[0], -k[1]],
        ),
    ]
    for n in range(1, 7):

        def psi(k, n=n):
            return [C * G((j + 1) * bb + 1) / G(j * bb + 1) * k[j + 1] for j in range(n)] + [0.0]

        out.append((f"EX3 {{1,..,x^{n}b}}", Scale(C, D(bb, F())), powers(bb, n), psi))
    return out
