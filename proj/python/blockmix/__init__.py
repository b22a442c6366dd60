"""Mixtures of dyadic block models for sparse networks."""

import json

from . import _core
from ._core import DomainError, IoError, Network, ParseError, UnsupportedError

__all__ = [
    "DomainError",
    "IoError",
    "Network",
    "ParseError",
    "UnsupportedError",
    "bootstrap",
    "fit",
    "lower_bound",
    "simulate",
]


def _document(value):
    return value if isinstance(value, str) else json.dumps(value)


def fit(network, K, model="tabular", e_step="mm", restarts=1, max_sweeps=6000, rel_tol=1e-10, seed=1, jobs=1,
        alpha=None):
    """Fit a K-component model; returns a dict with alpha, gamma, lb, lb_trace and the fit document.

    With `alpha` (n x K memberships) a single run starts there instead of random restarts.
    """
    res = _core.fit(network, K, model, e_step, restarts, max_sweeps, rel_tol, seed, jobs, alpha)
    res["document"] = json.loads(res["document"])
    return res


def lower_bound(network, alpha, model):
    """Variational lower bound at memberships alpha for a model document with gamma."""
    return _core.lower_bound(network, alpha, _document(model))


def simulate(model, n, seed=1, relabel=False):
    """Sample (network, assignment) from a model or fit document."""
    return _core.simulate(_document(model), n, seed, relabel)


def bootstrap(fit_document, B=500, seed=1, jobs=1, max_sweeps=1000, relabel=True):
    """Parametric bootstrap of a fit document; returns the bootstrap document as a dict."""
    return json.loads(_core.bootstrap(_document(fit_document), B, seed, jobs, max_sweeps, relabel))
