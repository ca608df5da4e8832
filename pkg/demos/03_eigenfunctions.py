# Lifting a K_4 eigenfunction up two levels and coming back down.
import numpy as np

from vicsek import Params, build_graph, extend_eigenfunction, restrict_check
from vicsek.decim import eval_R, forbidden_set, inverse_branches, is_forbidden
from vicsek.eigmap import cell_trace
from vicsek.errors import ForbiddenEigenvalue
from vicsek.graph import eigen_residual

p = Params(2, 3)
g0, g1, g2 = (build_graph(p, m) for m in range(3))

f0 = np.array([3.0, -1, -1, -1])  # eigenvalue 4/3 on K_4
print("preimages of 4/3:", inverse_branches(p, 4 / 3))

lam1 = inverse_branches(p, 4 / 3)[0]
f1 = extend_eigenfunction(g0, g1, f0, lam1)
print("level 1 residual", eigen_residual(g1, f1.values, lam1))

# pick a second branch below lam1 that is allowed
lam2 = next(x for x in inverse_branches(p, lam1) if not is_forbidden(p, x))
f2 = extend_eigenfunction(g1, g2, f1.values, lam2)
print("level 2 residual", eigen_residual(g2, f2.values, lam2))

rep = restrict_check(g1, g2, f2.values, lam2)
print("restricted back:", rep.passed, rep.residual, "R(lam2) =", eval_R(p, lam2))

# the arm values inside the first cell follow the Chebyshev recurrence
tr = cell_trace(g0, g1, 0, f1.values, lam1)
print("t =", tr.t)
print(tr.J)

# a forbidden value is refused outright
bad = forbidden_set(p).values()[0]
try:
    extend_eigenfunction(g0, g1, np.ones(4), bad)
except ForbiddenEigenvalue as exc:
    print("refused:", exc)
