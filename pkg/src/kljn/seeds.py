"""Sub-seed schedule.

Every random stream in a run is derived from one 64-bit master seed by
hashing ``(master_seed, trial_id, role, member)`` through
:class:`numpy.random.SeedSequence`::

    SeedSequence(entropy=master_seed, spawn_key=(trial_id, ROLES[role], member))

and taking the first 64-bit word of its generated state. The roles are the
four noise generators (``u_ha``, ``u_la``, ``u_hb``, ``u_lb``) and the switch
stream that drives the resistor choices. ``member`` indexes the raw series
averaged together for one generator.

An eavesdropper who "knows the seed of Alice's RNG" is simply handed the
integer sub-seeds for the ``u_ha`` and ``u_la`` roles (see :func:`eve_seeds`).
"""

from __future__ import annotations

import numpy as np

ROLES = {"u_ha": 0, "u_la": 1, "u_hb": 2, "u_lb": 3, "switch": 4}
ALICE_ROLES = ("u_ha", "u_la")
BOB_ROLES = ("u_hb", "u_lb")

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, *path: int) -> int:
    """Hash a master seed and an integer path into a 64-bit sub-seed."""
    seq = np.random.SeedSequence(master_seed & _MASK64, spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def role_seed(master_seed: int, trial_id: int, role: str) -> int:
    return derive_seed(master_seed, trial_id, ROLES[role])


def switch_seed(master_seed: int) -> int:
    # one switch stream per run, indexed by BEP number downstream
    return derive_seed(master_seed, 0, ROLES["switch"])


def member_seed(source_seed: int, member: int) -> int:
    """Seed of the ``member``-th raw series averaged into one generator."""
    return derive_seed(source_seed, member)


def eve_seeds(master_seed: int, trial_id: int, mode: str) -> dict[str, int]:
    """Generator seeds granted to the eavesdropper under an attack premise.

    ``bilateral`` grants all four noise generators, ``unilateral`` only
    Alice's two. The switch stream is never granted.
    """
    if mode == "bilateral":
        roles = ALICE_ROLES + BOB_ROLES
    elif mode == "unilateral":
        roles = ALICE_ROLES
    else:
        raise ValueError(f"unknown attack mode {mode!r}")
    return {role: role_seed(master_seed, trial_id, role) for role in roles}
