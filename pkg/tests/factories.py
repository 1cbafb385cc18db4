"""Small model builders shared by the test modules."""

import numpy as np

from annealtune.models.ising import IsingModel


def random_ising(n: int, rng: np.random.Generator, density: float = 1.0) -> IsingModel:
    """Random Ising model with h and J drawn from U[-1, 1]."""
    h = {v: float(rng.uniform(-1, 1)) for v in range(n)}
    J = {
        (u, v): float(rng.uniform(-1, 1))
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < density
    }
    return IsingModel(h=h, J=J)


def brute_force_minimum(model: IsingModel) -> float:
    """Minimum energy by plain iteration over every spin assignment."""
    variables = model.variables
    best = np.inf
    for index in range(1 << len(variables)):
        assignment = {v: 1 if (index >> i) & 1 else -1 for i, v in enumerate(variables)}
        best = min(best, model.energy(assignment))
    return best
