# Building the approximating graphs and poking at them.
import numpy as np

from vicsek import Params, build_graph
from vicsek.graph import energy, letters

p = Params(2, 2)  # the planar "plus sign" fractal with 5 cells
print("cells per level:", p.cell_count, " letters:", letters(p))

for m in range(4):
    g = build_graph(p, m)
    print(f"level {m}: {g.num_vertices} vertices, {g.num_edges} edges, degrees {sorted(set(g.degree))}")

# coordinates are integers at scale 2(2n-1)^m, so shared corners are exact matches
g = build_graph(p, 1)
print("scale", g.scale)
print(g.coords)

# junction points have twice the degree of the others
junctions = np.flatnonzero(g.degree == 2 * p.N)
print("junction vertices:", g.coords[junctions].tolist())

# renormalized energy of a junction indicator: 3 * 6 edges
f = np.zeros(g.num_vertices)
f[junctions[0]] = 1
print("energy of a junction bump:", energy(g, f))

# same thing in three dimensions, where cells are cubes
g3 = build_graph(Params(3, 2), 2)
print("3d level 2:", g3.num_vertices, "vertices")
