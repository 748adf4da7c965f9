"""Cross-channel retail recommendation toolkit (python bindings)."""

try:
    from c2rec._c2rec import *  # noqa: F401,F403  (installed package layout)
    from c2rec._c2rec import __doc__ as _doc
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _c2rec import *  # noqa: F401,F403
    from _c2rec import __doc__ as _doc

__doc__ = _doc
