import hashlib
import struct

import numpy as np


def _flatten(keys):
    for k in keys:
        if isinstance(k, (tuple, list)):
            yield from _flatten(k)
        else:
            yield k


def derive_seed(master, *keys) -> int:
    """Stable 64-bit seed from a master seed and any sequence of cell keys.

    Keys may be ints, strings or (nested) tuples of them; tuples are
    flattened, so ``derive_seed((1, 2), 3) == derive_seed(1, 2, 3)``.  The mapping does not depend on Python's
    hash randomization, so seeds are reproducible across processes.
    """
    h = hashlib.blake2b(digest_size=8)
    for k in _flatten((master,) + keys):
        if isinstance(k, str):
            b = k.encode()
            h.update(b"s" + struct.pack("<I", len(b)) + b)
        else:
            h.update(b"i" + int(k).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def rng(master, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *keys))
