# When do two address sequences give the same infinite lattice?
from vicsek import Params, gamma_oracle_iso, iso_decide_periodic, parse_omega, thm56_check
from vicsek.lattice import center_matrix

p = Params(2, 2)

# climbing through the corner cell (1,1) each time: centers drift away geometrically
w = parse_omega("|(1,1)")
print(center_matrix(p, w, 0, 5).distances)

# same as above but the climbing corner changes; only the pattern of opposites matters
a, b = parse_omega("|(1,1)"), parse_omega("|(2,1)")
print("(1,1)^inf vs (2,1)^inf:", thm56_check(p, a, b, 1, 10), gamma_oracle_iso(p, a, b, 1, 10))

# alternating between opposite corners is a different shape
a, b = parse_omega("|(1,1),(4,1)"), parse_omega("|(1,1),(2,1)")
print("opposite chaining:", thm56_check(p, a, b, 1, 10), gamma_oracle_iso(p, a, b, 1, 10))

# a finite perturbation at the start does not matter, but the witness M moves
print(iso_decide_periodic(p, parse_omega("(3,1),0|(1,1),0"), parse_omega("|(1,1),0"), 10))

# n = 3: stepping in at a different depth along the arm is never fixable
q = Params(2, 3)
print(iso_decide_periodic(q, parse_omega("|(1,1)"), parse_omega("|(1,2)"), 10))
