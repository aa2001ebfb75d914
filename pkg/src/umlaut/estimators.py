"""scikit-learn style wrappers around the functional API.

Each estimator is configured through constructor parameters (so
``get_params`` / ``set_params`` / ``clone`` work) and ``fit`` takes the
object to analyse, storing results in trailing-underscore attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import channel as chn
from . import state as st
from .optim import OptimizerOptions


def _options(est, **defaults):
    opts = OptimizerOptions(**defaults)
    opts.seed = est.seed
    if est.max_iter is not None:
        opts.max_iter = est.max_iter
    if est.tol is not None:
        opts.tol = est.tol
    return opts


def as_state(X, dims=None):
    """Accept a :class:`BipartiteState` or a density matrix plus ``dims``."""
    if isinstance(X, st.BipartiteState):
        return X
    if dims is None:
        raise ValueError("dims is required when fitting on a raw density matrix")
    return st.BipartiteState(np.asarray(X), tuple(dims))


class StateUmlaut(BaseEstimator):
    """Umlaut information of a bipartite state.

    ``method`` is one of ``"closed-form"``, ``"direct"`` (mirror descent),
    ``"petz"`` (needs ``alpha``) or ``"bs"`` (geometric variant).
    """

    def __init__(self, method="closed-form", alpha=0.5, dims=None, seed=0, max_iter=None, tol=None):
        self.method = method
        self.alpha = alpha
        self.dims = dims
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        s = as_state(X, self.dims)
        if self.method == "closed-form":
            res = st.umlaut_information(s)
        elif self.method == "direct":
            res = st.umlaut_information_direct(s, _options(self))
        elif self.method == "petz":
            res = st.petz_umlaut(s, self.alpha)
        elif self.method == "bs":
            res = st.bs_umlaut_state(s, _options(self, max_iter=2000, tol=1e-13, window=3))
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.value_ = res.value
        self.sigma_ = res.sigma
        self.diagnostics_ = res.diagnostics
        return self

    def transform(self, X):
        """The umlaut-marginal of ``X`` (closed form, independent of ``method``)."""
        check_is_fitted(self, "value_")
        return st.umlaut_marginal(as_state(X, self.dims))


class ChannelUmlaut(BaseEstimator):
    """Channel umlaut information.

    ``method="auto"`` picks the covariant reduction or the cq formula when
    the channel carries that structure, else generic mirror ascent.
    ``"bs"`` gives the geometric upper bound.
    """

    def __init__(self, method="auto", seed=0, max_iter=None, tol=None, n_starts=None):
        self.method = method
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol
        self.n_starts = n_starts

    def fit(self, X, y=None):
        if not isinstance(X, chn.Channel):
            raise TypeError(f"expected Channel, got {type(X).__name__}")
        method = self.method
        if method == "auto":
            method = {"covariant": "covariant", "cq": "cq"}.get(X.kind, "generic")
        if method == "generic":
            opts = _options(self, max_iter=2000, tol=1e-9, window=50)
            opts.n_starts = self.n_starts
            res = chn.channel_umlaut(X, opts)
        elif method == "covariant":
            res = chn.channel_umlaut_covariant(X, _options(self, max_iter=2000, tol=1e-9, window=50))
        elif method == "cq":
            res = chn.cq_channel_umlaut(list(X.states), _options(self, max_iter=5000, tol=1e-13, window=5))
        elif method == "bs":
            opts = _options(self, max_iter=300, tol=1e-13, window=3)
            opts.n_starts = self.n_starts
            res = chn.bs_channel_umlaut(X, opts)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.channel_ = X
        self.method_ = method
        self.value_ = res.value
        self.rho_ = res.rho
        self.sigma_ = res.sigma
        self.diagnostics_ = res.diagnostics
        return self

    def predict(self, rho):
        """U(A';B) of the output state for input ``rho``; the fitted value is its supremum."""
        check_is_fitted(self, "channel_")
        return st.umlaut_value(chn.output_state(self.channel_, rho))
