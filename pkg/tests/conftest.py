from fractions import Fraction

import pytest

from hankel_mineig.moments import WeightSpec, moment_exact


def exact_hankel(spec, N):
    return [[Fraction(moment_exact(spec, i + j)) for j in range(N)] for i in range(N)]


def exact_ldlt(H):
    """Reference L, D by fraction-valued elimination."""
    N = len(H)
    A = [row[:] for row in H]
    L = [[Fraction(int(i == j)) for j in range(N)] for i in range(N)]
    D = []
    for i in range(N):
        D.append(A[i][i])
        for j in range(i + 1, N):
            L[j][i] = A[j][i] / A[i][i]
        for j in range(i + 1, N):
            for k in range(i + 1, N):
                A[j][k] -= L[j][i] * A[i][k]
    return L, D


def exact_inverse(M):
    n = len(M)
    A = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


@pytest.fixture
def half():
    return WeightSpec(1, 2)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
