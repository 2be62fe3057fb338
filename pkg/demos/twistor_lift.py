"""Even words of the trefoil group lift to P^3_C and commute with the twistor projection."""
import numpy as np

from spunpearls.cli import random_even_word
from spunpearls.necklace import load_trefoil_table, spin_necklace, validate_spun
from spunpearls.orbit import generators_from_necklace
from spunpearls.twistor import (equivariance_check, even_word_to_qmoebius, fiber_check, qmoebius_to_complex4,
                                right_line_defect)

sn = spin_necklace(load_trefoil_table())
validate_spun(sn)
gens = generators_from_necklace(sn)
rng = np.random.default_rng(7)

for _ in range(5):
    w = random_even_word(rng, len(gens), 6)
    L = qmoebius_to_complex4(even_word_to_qmoebius(w, gens))
    Z = rng.normal(size=4) + 1j * rng.normal(size=4)
    print(f"word {w}: equivariance {equivariance_check(w, gens, 100, rng):.1e}, "
          f"fibers {fiber_check(w, gens, 20, 3, rng):.1e}, right-j {right_line_defect(L, Z):.1e}")
