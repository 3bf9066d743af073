try:
    from ._isac_precode import *  # noqa: F401,F403
    from . import _isac_precode as _core
except ImportError:  # flat layout: extension sits next to the package
    from _isac_precode import *  # noqa: F401,F403
    import _isac_precode as _core

__version__ = _core.__version__
__all__ = [name for name in dir(_core) if not name.startswith("_")]
