"""Build the spun trefoil necklace from the bundled table and check it."""
import time

from spunpearls.necklace import load_trefoil_table, spin_necklace, validate_semi, validate_spun
from spunpearls.orbit import poincare_check

semi = load_trefoil_table()
print(f"{semi.name}: {len(semi)} pearls in the page")
print(validate_semi(semi).summary())

t = time.perf_counter()
sn = spin_necklace(semi)
rep = validate_spun(sn)
print(f"\nspun: {len(sn)} pearls in {time.perf_counter() - t:.1f} s, rectified by {sn.rectification:.2e} (relative)")
print(rep.summary())

kinds = [lab.kind for lab in sn.labels]
for k in ("meridian", "pole", "junction"):
    print(f"  {k}: {kinds.count(k)}")

# angles between crossing pearls should all be right angles
pc = poincare_check(sn)
print(f"\ncrossing pairs {len(pc.angles)}, bad angles {len(pc.failures)}, triples {pc.triples}")
