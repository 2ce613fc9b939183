"""
Dense tensor operations and little-endian matricization
=======================================================

A quick tour of the dense kernel layer: the products every network
routine is built from, and the reshape conventions that make their
matrix identities hold.
"""

import numpy as np

from mtnr import dense

rng = np.random.default_rng(0)

# Two small order-3 tensors to play with.
a = rng.standard_normal((2, 3, 4))
b = rng.standard_normal((2, 3, 4))

# Elementwise (Hadamard) product - nothing surprising.
print("hadamard:", dense.hadamard(a, b).shape)

# The tensor Kronecker product multiplies mode sizes.
print("kronecker:", dense.kronecker(a, b).shape)

# The mode-wise Khatri-Rao product keeps one mode aligned and takes
# Kronecker products of the remaining slices.
kr = dense.khatri_rao_mode(a, b, 1)
print("khatri-rao on mode 1:", kr.shape)

# Outer product stacks the index sets.
print("outer:", dense.outer(a, b).shape)

# Mode-n product contracts a matrix onto one mode.
m = rng.standard_normal((5, 3))
print("mode-1 product:", dense.mode_n_product(a, m, 1).shape)

# General contraction over chosen axis pairs generalizes matmul.
c = dense.contract(a, b, [(2, 2)])
print("contract over last modes:", c.shape)

# All reshapes in the package are first-index-fastest.  That choice is
# what makes mode-n matricization interact with the Kronecker/Khatri-Rao
# algebra the way the matrix identities promise:
#
#   matricize_mode(mode_n_product(T, M, n), n) == M @ matricize_mode(T, n)
lhs = dense.matricize_mode(dense.mode_n_product(a, m, 1), 1)
rhs = m @ dense.matricize_mode(a, 1)
print("mode-product identity error:", dense.frob(lhs - rhs))

# And every matricization is a lossless relabeling.
back = dense.fold_mode(dense.matricize_mode(a, 2), 2, a.shape)
print("fold round-trip exact:", bool(np.array_equal(back, a)))
