"""
How far can one entangled pair push the gluing index?
=====================================================

Two remote sites each pick a monoblock kind at random and let a
measurement outcome decide the shift direction. This script compares the
best classical answers with what a shared entangled pair allows.
"""

# %%
# Start with the singlet-like state shared by Alice (first family) and Bob
# (second family). Qubit 0 is the leftmost character of each ket.
import numpy as np

from bellchains import claims
from bellchains.chsh import PRESETS, all_heterosexual_pairs, chsh_operator, gluing_index, xi_exact
from bellchains.optimize import Objective, classical_bound, max_unrestricted

pair = claims.TRIPLET.pairs[0]
print(claims.TRIPLET.text)
for name, preset in PRESETS.items():
    xi = xi_exact(claims.TRIPLET.state, pair, preset)
    print(f"{name:12s} xi = {xi:+.6f}  index = {gluing_index(xi):.6f}")

# %%
# The CHSH operator is small enough to inspect directly. Its spectrum is
# symmetric and its largest eigenvalue sets the ceiling for every state.
op = chsh_operator(pair, 2)
print(np.round(np.linalg.eigvalsh(op), 6))
print("eigen maximum:", max_unrestricted(Objective.single_pair_xi(pair), 2).value)

# %%
# Deterministic local answers can only reach 1/2, i.e. three of four kind
# combinations glue. Enumerating all sixteen strategies confirms it.
duo_pair = all_heterosexual_pairs(claims.DUO)[0]
best = classical_bound(Objective.single_pair_xi(duo_pair), claims.DUO)
print("classical xi:", best.value, "with", best.argmax)
print("quantum advantage in index:", gluing_index(1 / np.sqrt(2)) - gluing_index(best.value))
