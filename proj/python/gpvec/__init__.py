"""Word-vector composition programs.

Python face of the C++ core: embedding stores, composition-program parsing and
evaluation, the word-analogy benchmark and the evolutionary search.  The heavy
lifting lives in the compiled ``_gpvec`` extension module.
"""

try:
    # installed layout: the extension is built into the package
    from ._gpvec import *  # noqa: F401,F403
    from . import _gpvec as _impl
except ImportError:
    # development layout: the extension sits on PYTHONPATH next to the package
    from _gpvec import *  # noqa: F401,F403
    import _gpvec as _impl

__version__ = "0.1.0"
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
