"""Synchronous consensus primitives driven by one weight matrix per round.

Both primitives read the communication pattern off the weight matrix of the
round: agent i hears agent j exactly when W[i, j] > 0.
"""

import numpy as np

# Shape conventions rather than classes: ScalarEstimates is a length-N array
# of per-agent scalars (max/min consensus state); TrackerState is (N,) or
# (N, d), one tracker value per agent.
ScalarEstimates = np.ndarray
TrackerState = np.ndarray


def _neighbor_mask(W, tol=1e-12):
    # Self-loops are always included, whatever the diagonal weight is.
    mask = np.abs(np.asarray(W, dtype=float)) > tol
    np.fill_diagonal(mask, True)
    return mask


def max_min_consensus_step(b, c, W):
    """One synchronous round of max-consensus on b and min-consensus on c.

    Each agent replaces its scalar with the max (resp. min) over the values
    it hears, itself included. Selections are exact, no arithmetic happens,
    so repeated application reaches the global extremes in finite time once
    the union graph has passed information around.

    Returns the pair of updated arrays; inputs are not modified.
    """
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    mask = _neighbor_mask(W)
    b_next = np.where(mask, b[None, :], -np.inf).max(axis=1)
    c_next = np.where(mask, c[None, :], np.inf).min(axis=1)
    return b_next, c_next


def dynamic_average_step(values, W, increments):
    """One round of dynamic average tracking: mix, then add local increments.

    ``values`` is (N,) or (N, d); ``increments`` matches its shape. Under a
    doubly stochastic W the column sums are one, so the sum over agents after
    the step equals the old sum plus the sum of increments. That conservation
    is the whole point of the tracker and is what the tests pin down.
    """
    values = np.asarray(values, dtype=float)
    increments = np.asarray(increments, dtype=float)
    if increments.shape != values.shape:
        raise ValueError("increments shape does not match values")
    return np.asarray(W, dtype=float) @ values + increments
