"""The trefoil monodromy has order six in Out(F2)."""
from spunpearls.topology import (conjugacy_search, format_word, homology_matrix, matrix_order, parse_word,
                                 trefoil_monodromy)

phi = trefoil_monodromy()
print("phi:", phi)
w = parse_word("a")
for k in range(7):
    print(f"phi^{k}(a) = {format_word(phi.power(k)(w))}")

M = homology_matrix(phi)
print("\non homology:", M.tolist(), "of order", matrix_order(M))

k, c = conjugacy_search(phi, 12, 8)
print(f"first inner power: k = {k}, phi^{k} = conjugation by {format_word(c)}")
