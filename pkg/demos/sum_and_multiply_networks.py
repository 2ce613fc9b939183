"""
Arithmetic on tensor networks without leaving factor space
==========================================================

Sums and products of networks can be formed directly on the factors;
recovering the result equals operating on the recovered tensors.
"""

import numpy as np

from mtnr.algebra import tn_add, tn_hadamard, tn_inner, tn_outer
from mtnr.dense import frob, hadamard, outer
from mtnr.network import TnComponent, grow_edge, recover

rng = np.random.default_rng(3)


def random_net(dims, edges):
    c = TnComponent.rank_one(dims, max_connections=3, rng=rng)
    for i, j in edges:
        c = grow_edge(c, i, j, rng=rng)
    return c


a = random_net((3, 4, 5), [(0, 1), (1, 2), (1, 2)])
b = random_net((3, 4, 5), [(0, 2), (0, 1)])

s = tn_add(a, b)
print("sum ranks:\n", s.ranks.table)
err = frob(recover(s) - (recover(a) + recover(b))) / frob(recover(s))
print("addition exact to", err)

h = tn_hadamard(a, b)
print("hadamard bond ranks multiply:\n", h.ranks.table)
print("hadamard error:",
      frob(recover(h) - hadamard(recover(a), recover(b))))

o = tn_outer(a, b)
print("outer product order:", o.order)
print("outer error:", frob(recover(o) - outer(recover(a), recover(b))))

ip = tn_inner(a, b)
print("inner product:", ip, "vs dense",
      float(np.vdot(recover(a), recover(b))))
