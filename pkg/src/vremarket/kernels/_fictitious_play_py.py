"""Reference (numpy) implementation of the fictitious-play inner loop."""

import numpy as np


def fp_run(payoff_row, payoff_col, row_cum, col_cum, row_counts, col_counts,
           iterations):
    """Advance simultaneous fictitious play by `iterations` steps, in place.

    Both payoff matrices are oriented own-action x rival-action. `row_cum`
    and `col_cum` hold each pure action's cumulative payoff against the
    rival's past plays; each step both players best-respond (ties broken
    toward the lowest index), the play counters are incremented and the
    cumulative payoffs are updated with the rival's new action.

    Returns the pair of actions played on the final step.
    """
    a = b = -1
    for _ in range(iterations):
        a = int(np.argmax(row_cum))
        b = int(np.argmax(col_cum))
        row_counts[a] += 1.0
        col_counts[b] += 1.0
        row_cum += payoff_row[:, b]
        col_cum += payoff_col[:, a]
    return a, b
