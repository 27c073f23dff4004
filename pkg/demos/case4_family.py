"""The rank-3 family whose components satisfy a quadratic relation.

H = (x1 x3 + c x2 x4, x2 x3 - x1 x4, (x3^2 + c x4^2)/2, (x1^2 + c x2^2)/2)
has a Jacobian of rank 3 and H1^2 + c H2^2 - 4 H3 H4 = 0.  We classify it,
hide it behind random linear changes of coordinates, and classify again.
"""
import random

from quadmap import classify_rk3, conjugate, make_field
from quadmap.classify import case4_form, case4_relation, square_class
from quadmap.generators import scramble

Q = make_field("Q")
rng = random.Random(2024)

for c in (1, 2, -1, 3):
    cq = Q.from_int(c)
    H = case4_form(Q, cq)
    rep = classify_rk3(H)
    print(f"c = {c:>2}:  case {rep.case}, c recovered as {rep.c}, "
          f"relation vanishes: {case4_relation(H, cq).is_zero()}")

print("\nscrambled by random S, T (c is only defined up to squares):")
for c in (8, 12, 5):
    cq = Q.from_int(c)
    H = scramble(case4_form(Q, cq), rng)
    rep = classify_rk3(H)
    Ht = conjugate(H, rep.S, rep.T)
    print(f"c = {c:>2}:  case {rep.case}, c = {rep.c} "
          f"(square class of {c} is {square_class(Q, cq)[0]}), "
          f"relation on S.H(Tx): {case4_relation(Ht, rep.c).is_zero()}")

print("\none scrambled instance:")
for p in H.to_strings():
    print("   ", p)
