"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback. ``OWPUZZLE_BACKEND=python`` forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("OWPUZZLE_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

gf_mul = _impl.gf_mul
hash_each = _impl.hash_each
hash_table = _impl.hash_table
preimage_mass = _impl.preimage_mass
posterior_sample = _impl.posterior_sample
