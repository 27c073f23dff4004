"""Keller maps x + H with rk JH <= 3 written as compositions of elementary maps.

Each certificate is checked by composing its factors symbolically; nothing is
sampled.  Over GF(2) the check is up to square terms c x_i^2, which have zero
derivative and are reported separately.
"""
import random

from quadmap import PolyMap, TameCertificate, make_field, tame_decompose, verify_certificate
from quadmap.generators import random_keller_map

Q, GF2 = make_field("Q"), make_field("GF(2)")


def show(title, F):
    rep = tame_decompose(F)
    print(title)
    print("  F  =", ", ".join(F.to_strings()))
    print(f"  rank {rep.rank}, case {rep.case}, {len(rep.certificate)} factors")
    print("  F  =", rep.certificate)
    if rep.square_part is not None and not rep.square_part.is_zero():
        print("  square part:", ", ".join(rep.square_part.to_strings()))
    print("  verified:", rep.verified)
    return rep


core = PolyMap.from_strings(Q, 5, ["x1 + x2*x5", "x2 + x1*x4 - x3*x5", "x3 + x2*x4", "x4", "x5"])
rep = show("the three-row core over Q", core)

print("\na tampered certificate is caught:")
bad = rep.certificate.dumps().replace("x2*x4", "2*x2*x4")
res = verify_certificate(TameCertificate.from_json(bad), core)
print("  ok:", res.ok, " discrepancy:", ", ".join(res.discrepancy.to_strings()))

print()
show("the six-variable form over GF(2)",
     PolyMap.from_strings(GF2, 6, ["x1 + x2*x6", "x2 + x1*x5 + x3*x6", "x3 + x2*x5",
                                   "x4 + x5*x6", "x5", "x6"]))

rng = random.Random(11)
print()
F, kind = random_keller_map(GF2, rng, (6, 6), ["core4"])
show(f"a random conjugate of the {kind} family over GF(2)", F)
