"""Central tolerance settings and resource budgets.

Every validation tolerance in the package is read from a Tolerances record so
that one object controls all of them; functions take an optional ``tols``
argument defaulting to DEFAULT_TOLS.
"""

from __future__ import annotations

from dataclasses import dataclass

VERSION = "0.1.0"


@dataclass(frozen=True)
class Tolerances:
    """Shared numerical validation tolerances."""

    herm: float = 1e-9       # max |A - A^dag| entry for Hermitian inputs
    trace: float = 1e-9      # unit-trace slack for density operators
    psd: float = 1e-9        # most negative admissible eigenvalue
    eig: float = 1e-11       # relative eigendecomposition residual
    norm: float = 1e-9       # pure-state normalization slack
    proj: float = 1e-8       # projector idempotence / completeness slack
    support: float = 1e-10   # eigenvalue cutoff deciding support (infinity decisions)
    zero_eig: float = 1e-12  # eigenvalues below this contribute 0 to entropies


DEFAULT_TOLS = Tolerances()

# Hard caps guarding against runaway instance sizes.
MAX_KRON_DIM = 1 << 20       # largest dimension a kron result may have
MAX_ENUMERATION = 10**6      # deterministic maps per side in classical_value
MAX_TABLE_ENTRIES = 10**8    # predicate-table entries for repeated games


class BudgetError(RuntimeError):
    """Instance exceeds a configured enumeration or memory budget."""
