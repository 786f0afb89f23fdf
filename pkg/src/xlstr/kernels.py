"""Kernel backend selection.

The compiled extension is used when it imports; setting ``XLSTR_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("XLSTR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

ngram_cosine = _impl.ngram_cosine
average_ranks = _impl.average_ranks
sgd_batches = _impl.sgd_batches
char_ngrams = _pykernels.char_ngrams

__all__ = ["BACKEND", "ngram_cosine", "average_ranks", "sgd_batches", "char_ngrams"]
