import numpy as np

from dckp.instance import GeneratorSpec, generate_instance


def small_instance(seed, n=None, eta=None, lo=8, hi=18):
    """Random instance with n in [lo, hi] and capacity at half the total weight."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(lo, hi + 1)) if n is None else n
    eta = float(rng.choice([0.1, 0.3, 0.5])) if eta is None else eta
    probe = generate_instance(GeneratorSpec(n=n, capacity=1, density=eta, seed=seed))
    cap = max(1, int(probe.weights.sum()) // 2)
    return generate_instance(GeneratorSpec(n=n, capacity=cap, density=eta, seed=seed, name=f"rnd{seed}"))
