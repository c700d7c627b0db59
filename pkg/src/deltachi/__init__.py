"""Character-twisted divisor window concentration.

Computes the maximum of twisted divisor sums over sliding log-windows
(the Delta function of a weighted divisor distribution), the exact
integrals of those window sums, the closed-form analytic constants
attached to them, and weighted moment sums over ranges of n, together
with a verification suite for the identities and inequalities that are
checkable at finite scale.
"""

__version__ = "0.1.0"
