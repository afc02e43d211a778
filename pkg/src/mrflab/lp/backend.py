"""Pick the tableau kernel: the GMP extension when built, pure Python otherwise.

Set ``MRFLAB_TABLEAU=python`` (or ``gmp``) to force a backend.
"""

from __future__ import annotations

import os

from . import _pytableau

try:
    from . import _ctableau
except ImportError:  # extension not compiled
    _ctableau = None


def tableau_class(name: str | None = None):
    name = (name or os.environ.get("MRFLAB_TABLEAU") or "auto").lower()
    if name == "python":
        return _pytableau.Tableau
    if name in ("gmp", "auto"):
        if _ctableau is not None:
            return _ctableau.Tableau
        if name == "gmp":
            raise ImportError("compiled tableau extension is not available")
        return _pytableau.Tableau
    raise ValueError(f"unknown tableau backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    if _ctableau is not None:
        out.insert(0, "gmp")
    return out


Tableau = tableau_class()
BACKEND = Tableau.backend
