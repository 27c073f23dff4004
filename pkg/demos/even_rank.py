"""Symmetric matrices with zero diagonal: even rank in characteristic 2 only.

In characteristic 2 the Hessian of a quadratic form is symmetric with zero
diagonal, and such a matrix is alternating, so its rank is even.  The same
shape over GF(3) or Q is not alternating and odd ranks appear.
"""
import random

from quadmap import ConstMatrix, make_field
from quadmap.generators import random_scalar
from quadmap.matpoly import evenrk_reduce


def sample(ctx, n, rng):
    rows = [[ctx.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i):
            rows[i][j] = rows[j][i] = random_scalar(ctx, rng)
    return ConstMatrix(ctx, rows)


rng = random.Random(5)
for spec in ("GF(2)", "GF(3)", "Q"):
    ctx = make_field(spec)
    ranks = [evenrk_reduce(sample(ctx, rng.randint(2, 8), rng)).rank for _ in range(300)]
    odd = sum(r % 2 for r in ranks)
    print(f"{spec:>6}: {odd:3d} of 300 random matrices have odd rank")

print("\nthe smallest witness, [[0,1,1],[1,0,1],[1,1,0]]:")
for spec in ("GF(2)", "GF(3)", "Q"):
    ctx = make_field(spec)
    M = ConstMatrix(ctx, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    red = evenrk_reduce(M)
    print(f"{spec:>6}: rank {red.rank}, T^t M T = P D holds: "
          f"{red.T.transpose() @ M @ red.T == red.P @ red.D}")
