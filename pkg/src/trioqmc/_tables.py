"""Embedded parameter tables for the low-discrepancy generators.

SOBOL_PRIMITIVES
    Joe & Kuo, ``new-joe-kuo-6.21201``, dimensions 2..32.  Each entry is
    ``(s, a, m)``: degree of the primitive polynomial, its interior
    coefficients packed as an integer (most significant bit first), and the
    initial odd direction integers ``m_1..m_s``.  Dimension 1 is the
    van der Corput sequence and has no entry.

    t-value notes: the unscrambled projection onto any coordinate pair
    ``(j, k)`` is a digital ``(t, m, 2)``-net with
    ``t <= (e_j - 1) + (e_k - 1)``, where ``e`` is the polynomial degree
    (``e = 1`` for the first two coordinates).  In particular coordinates
    ``(0, 1)`` form a ``(0, m, 2)``-net for every ``m``.

LATTICE_GENERATOR
    Kuo, ``lattice-33002-1024-1048576.9125``: a component-by-component
    embedded rank-1 lattice generating vector, usable for every
    ``n = 2^m`` with ``10 <= m <= 20`` and fine for smaller ``m`` in practice.
    First 32 components.
"""

SOBOL_BITS = 32
MAX_DIM = 32
MAX_M = 20

SOBOL_PRIMITIVES = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
    (5, 11, (1, 1, 5, 1, 1)),
    (5, 13, (1, 1, 1, 3, 11)),
    (5, 14, (1, 3, 5, 5, 31)),
    (6, 1, (1, 3, 3, 9, 7, 49)),
    (6, 13, (1, 1, 1, 15, 21, 21)),
    (6, 16, (1, 3, 1, 13, 27, 49)),
    (6, 19, (1, 1, 1, 15, 7, 5)),
    (6, 22, (1, 3, 1, 15, 13, 25)),
    (6, 25, (1, 1, 5, 5, 19, 61)),
    (7, 1, (1, 3, 7, 11, 23, 15, 103)),
    (7, 4, (1, 3, 7, 13, 13, 15, 69)),
    (7, 7, (1, 1, 3, 13, 7, 35, 63)),
    (7, 8, (1, 3, 5, 9, 1, 25, 53)),
    (7, 14, (1, 3, 1, 13, 9, 35, 107)),
    (7, 19, (1, 3, 1, 5, 27, 61, 31)),
    (7, 21, (1, 1, 5, 11, 19, 41, 61)),
    (7, 28, (1, 3, 5, 3, 3, 13, 69)),
    (7, 31, (1, 1, 7, 13, 1, 19, 1)),
    (7, 32, (1, 3, 7, 5, 13, 19, 59)),
    (7, 37, (1, 1, 3, 9, 25, 29, 41)),
    (7, 41, (1, 3, 5, 13, 23, 1, 55)),
    (7, 42, (1, 3, 7, 3, 13, 59, 17)),
)

LATTICE_GENERATOR = (
    1, 182667, 213731, 255351, 96013, 116671, 479315, 424089,
    271103, 464421, 124483, 230887, 392877, 162965, 109125, 168491,
    216103, 5613, 207895, 506745, 189519, 114879, 133967, 374257,
    254597, 502087, 298245, 191333, 242099, 285991, 397887, 507051,
)


def sobol_degrees(d):
    """Polynomial degree ``e_j`` for the first ``d`` Sobol' coordinates."""
    return [1] + [s for s, _, _ in SOBOL_PRIMITIVES[: d - 1]]
