"""
Pairwise sources versus a fully entangled register
==================================================

When entanglement arrives as separate two-photon sources, the register
state factorizes into blocks. Here the total gluing index over every
opposite-family pair is maximized in three strategy spaces.
"""

# %%
import numpy as np

from bellchains import claims
from bellchains.chsh import all_heterosexual_pairs
from bellchains.optimize import Objective, StrategySpace, optimize

people = claims.FOUR
obj = Objective.sum_index(all_heterosexual_pairs(people))
print([p.label for p in obj.pairs])

# %%
# Blocks {Alice, Bob} and {Natasha, Ivan}. Restricting each block to a
# maximally entangled state caps the sum at 2 + 1/sqrt(2); letting the
# blocks be arbitrary pure states does better, because a partially
# entangled pair also biases the cross pairs.
for bell in (True, False):
    space = StrategySpace.biphoton([(0, 2), (1, 3)], maximally_entangled=bell)
    res = optimize(obj, space, people, restarts=32)
    print(f"{space.label:22s} {res.value:.9f}")
print("closed forms:", 2 + 1 / np.sqrt(2), 2 + 9 / (8 * np.sqrt(2)))

# %%
# Neither comes close to the classical optimum, which any fixed answer
# table reaches, nor to the unrestricted quantum optimum.
for space in (StrategySpace.classical(), StrategySpace.unrestricted()):
    print(f"{space.label:22s} {optimize(obj, space, people).value:.9f}")
