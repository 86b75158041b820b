"""Regenerates golden_functions.csv: benchmark targets at fixed points, 40 digits."""

import random

from mpmath import mp, mpf, sin, cos, exp, sqrt, pi

mp.dps = 40


def sinc(x):
    if x == 0:
        return mpf(-1)
    u = 5 * pi * x
    return -sin(u) / u


def twisted_sigmoid(x):
    return 2 / (1 + exp(-3 * x)) - mpf("0.8") * x


def f1(a, b):
    return mpf("0.5") * a**3 - 2 * a * b * b + 3 * sin(4 * a) * cos(2 * b) + mpf("0.1") * exp(-(a * a + b * b))


def f2(a, b):
    return sin(3 * a) + cos(2 * b) + mpf("0.5") * sin(5 * a) * cos(4 * b)


def f3(a, b):
    r = sqrt(a * a + b * b) + mpf(1e-6)
    return (a * a - b * b) / (mpf("0.5") + r * r) + sin(r) * exp(-r)


def f4(a, b):
    return (
        2 * exp(-((a - 1) ** 2 + (b - 1) ** 2) / mpf("0.5"))
        - 3 * exp(-((a + 1) ** 2 + (b + mpf("1.5")) ** 2) / mpf("0.3"))
        + mpf("0.5") * a
    )


rng = random.Random(20240601)
rows = []
for name, fn, lo, hi, count, fixed in [
    ("sinc", sinc, -1.5, 1.5, 9, [(0.0,)]),
    ("twisted_sigmoid", twisted_sigmoid, -3, 3, 9, [(0.0,)]),
    ("f1", f1, -3, 3, 8, [(0.0, 0.0)]),
    ("f2", f2, -3, 3, 8, [(0.0, 0.0)]),
    ("f3", f3, -3, 3, 8, [(0.0, 0.0)]),
    ("f4", f4, -3, 3, 8, [(1.0, 1.0)]),
]:
    dim = len(fixed[0])
    points = list(fixed)
    while len(points) < count:
        points.append(tuple(round(rng.uniform(lo, hi), 4) for _ in range(dim)))
    for p in points:
        y = fn(*[mpf(float(v)) for v in p])
        xs = list(p) + [""] * (2 - dim)
        rows.append(f"{name},{xs[0]!r},{xs[1]!r},{mp.nstr(y, 30)}".replace("''", ""))

with open("golden_functions.csv", "w") as out:
    out.write("function,x1,x2,y\n")
    out.write("\n".join(rows) + "\n")
