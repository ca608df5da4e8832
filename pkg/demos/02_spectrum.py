# The Neumann spectrum from decimation next to brute force.
from fractions import Fraction

from vicsek import Params, build_graph, cluster_multiplicities, dense_spectrum, neumann_spectrum, operator_matrix
from vicsek.decim import dirichlet_spectrum, forbidden_set, inverse_branches, r_coeffs

p = Params(2, 2)
print("R(lambda) coefficients:", r_coeffs(p).to_list())  # 3 lam (2 lam - 1)(6 lam - 5)
print("forbidden values:", forbidden_set(p).values())

# every value below the top has 2n-1 preimages
print("preimages of 4/3:", inverse_branches(p, Fraction(4, 3)))

m = 2
spec = neumann_spectrum(p, m)
for e in spec:
    print(f"{e.value:.12f}  x{e.multiplicity:<3d} {e.genealogy.label:>6s}  word={e.genealogy.word_str or '-'}")
print("total", spec.total_multiplicity, "trace", spec.trace())

# now the slow way
vals = dense_spectrum(operator_matrix(build_graph(p, m)).matrix).values
clusters = cluster_multiplicities(vals)
print("dense clusters:", len(clusters), "decimation entries:", len(spec))
print("largest disagreement:", max(abs(a - b[0]) for a, b in zip(spec.values, clusters)))

# dirichlet picks up the alpha and beta seeds too
for e in dirichlet_spectrum(p, 1):
    print(e.genealogy.label, round(e.value, 6), e.multiplicity)
