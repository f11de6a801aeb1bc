"""Complementary pivoting (Lemke-Howson) for bimatrix games.

Exact equilibrium computation used as the last-resort fallback when the
iterative price-equilibrium solver cannot certify its tolerance (capacity-
saturated games behave like classic undercutting competition, whose mixed
equilibria fictitious play approaches only very slowly). The ratio test is
lexicographic, so degenerate games (tied payoffs, zero rows) pivot without
cycling.

The implementation follows the textbook best-response-polytope walk: each
player's polytope is held as a slack-form tableau, a starting label is
dropped at the artificial origin equilibrium, and complementary pivots
alternate between the tableaus until the dropped label is picked back up.
"""

import numpy as np

__all__ = ["lemke_howson", "lemke_howson_all"]

_PIVOT_TOL = 1e-12


class _Tableau:
    """Slack-form tableau ``M v + s = 1`` with lexicographic ratio tests.

    Variable indexing: columns 0..k-1 are the structural variables, columns
    k..k+rows-1 the slacks, last column the right-hand side. ``labels``
    maps every variable to its label in the polytope labeling.
    """

    def __init__(self, matrix, var_labels, slack_labels):
        rows, cols = matrix.shape
        self.rows = rows
        self.table = np.hstack([matrix, np.eye(rows), np.ones((rows, 1))])
        self.basis = [cols + r for r in range(rows)]   # slacks start basic
        self.labels = list(var_labels) + list(slack_labels)
        # lexicographic comparison order: rhs first, then slack columns
        self.lex_cols = [self.table.shape[1] - 1] + \
            [cols + r for r in range(rows)]

    def var_with_label(self, label):
        return self.labels.index(label)

    def pivot(self, entering):
        """Bring ``entering`` into the basis; return the leaving variable."""
        col = self.table[:, entering]
        candidates = np.nonzero(col > _PIVOT_TOL)[0]
        if candidates.size == 0:
            raise RuntimeError("unbounded pivot step in complementary walk")
        # lexicographic minimum ratio over [rhs, slack columns]
        keys = self.table[np.ix_(candidates, self.lex_cols)] \
            / col[candidates, None]
        order = np.lexsort(keys.T[::-1])
        row = int(candidates[order[0]])
        leaving = self.basis[row]
        self.table[row] /= self.table[row, entering]
        factors = self.table[:, entering].copy()
        factors[row] = 0.0
        self.table -= factors[:, None] * self.table[row][None, :]
        self.basis[row] = entering
        return leaving

    def solution(self, num_vars):
        values = np.zeros(num_vars)
        for row, var in enumerate(self.basis):
            if var < num_vars:
                values[var] = self.table[row, -1]
        return values


def lemke_howson(payoff_row, payoff_col, dropped_label=0, max_pivots=None):
    """One Nash equilibrium of the bimatrix game (row-player orientation).

    ``payoff_row[i, j]`` is the row player's payoff and ``payoff_col[i, j]``
    the column player's payoff when row plays i and column plays j. Returns
    (x, y) probability vectors. Different ``dropped_label`` values (0 to
    m+n-1) may reach different equilibria. ``max_pivots`` bounds the walk
    (default 25 * (m + n)); pathological games exceed any polynomial bound
    and raise RuntimeError rather than stalling.
    """
    A = np.asarray(payoff_row, dtype=float)
    B = np.asarray(payoff_col, dtype=float)
    if A.shape != B.shape:
        raise ValueError("payoff matrices must share a shape")
    m, n = A.shape
    if not 0 <= dropped_label < m + n:
        raise ValueError(f"dropped label must be in [0, {m + n}), "
                         f"got {dropped_label}")
    if max_pivots is None:
        max_pivots = 25 * (m + n)
    # positive payoffs keep both polytopes bounded with the origin interior
    A = A - A.min() + 1.0
    B = B - B.min() + 1.0

    # row player's polytope: B^T x <= 1 (n rows over the m x-variables);
    # x_i carries label i, its slacks carry the column labels m..m+n-1
    row_tab = _Tableau(B.T, var_labels=range(m),
                       slack_labels=range(m, m + n))
    # column player's polytope: A y <= 1 (m rows over the n y-variables)
    col_tab = _Tableau(A, var_labels=range(m, m + n),
                       slack_labels=range(m))

    current = row_tab if dropped_label < m else col_tab
    other = col_tab if current is row_tab else row_tab
    label = dropped_label
    for _ in range(max_pivots):
        entering = current.var_with_label(label)
        leaving = current.pivot(entering)
        label = current.labels[leaving]
        if label == dropped_label:
            break
        current, other = other, current
    else:
        raise RuntimeError("complementary walk failed to terminate")

    x = row_tab.solution(m)
    y = col_tab.solution(n)
    if x.sum() <= 0 or y.sum() <= 0:
        raise RuntimeError("complementary walk returned the artificial origin")
    return x / x.sum(), y / y.sum()


def lemke_howson_all(payoff_row, payoff_col, max_labels=None):
    """Equilibria reached from each starting label, deduplicated."""
    m, n = np.asarray(payoff_row).shape
    limit = m + n if max_labels is None else min(max_labels, m + n)
    seen = []
    for label in range(limit):
        try:
            x, y = lemke_howson(payoff_row, payoff_col, label)
        except RuntimeError:
            continue
        if not any(np.allclose(x, px, atol=1e-9)
                   and np.allclose(y, py, atol=1e-9) for px, py in seen):
            seen.append((x, y))
    return seen
