"""Second-largest absolute adjacency eigenvalue and the expander mixing audit."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import MajorityLabError, NumericalError, PreconditionError, UsageError
from .graph import Graph

DENSE_LIMIT = 2000
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
CROSS_CHECK_RTOL = 1e-6
MAX_STARTS = 5


@dataclass
class SpectralReport:
    leading: float
    lambda_: float
    method: str
    residual: float
    iterations: int
    n: int = 0
    delta: Optional[int] = None
    iterative_lambda: Optional[float] = None

    @property
    def lambda_upper(self) -> float:
        """lambda plus the final residual: a safe upper bound when lambda came from iteration."""
        return self.lambda_ + (self.residual if self.method == "iterative" else 0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


def spectrum_dense(g: Graph, limit: int = DENSE_LIMIT) -> np.ndarray:
    """All adjacency eigenvalues in descending order (dense symmetric solver)."""
    if g.n > limit:
        raise UsageError(f"dense spectrum refused for n={g.n} > {limit}")
    if g.n == 0:
        return np.empty(0)
    a = g.adjacency.toarray().astype(np.float64)
    return np.linalg.eigvalsh(a)[::-1]


def _require_regular_connected(g: Graph) -> int:
    delta = g.regular_degree()
    if delta is None:
        raise PreconditionError("graph is not regular", reason="non-regular")
    if g.n < 2 or not g.is_connected():
        raise PreconditionError("graph is not connected", reason="disconnected")
    return delta


def _deflated_apply(a, delta, n, x):
    # (A - (delta/n) J) x for a block of column vectors
    return a @ x - (delta / n) * x.sum(axis=0, keepdims=True)


def _block_power(a, delta, n, tol, max_iter, rng, block, check_every=8):
    """Power iteration on a block of vectors with Rayleigh-Ritz extraction.

    Columns are re-orthonormalized and the Ritz pairs extracted every
    ``check_every`` products. Returns (lambda, residual, iterations); converged
    when the dominant Ritz pair has ||B x - mu x|| <= tol with ||x|| = 1.
    """
    k = min(block, n - 1)
    x = rng.standard_normal((n, k))
    x -= x.mean(axis=0, keepdims=True)
    residual = math.inf
    mu = 0.0
    for it in range(1, max_iter + 1):
        if (it - 1) % check_every and it < max_iter:
            y = _deflated_apply(a, delta, n, x)
            x = y / np.linalg.norm(y, axis=0, keepdims=True).clip(min=1e-300)
            continue
        x, _ = np.linalg.qr(x)
        y = _deflated_apply(a, delta, n, x)
        h = x.T @ y
        theta, w = np.linalg.eigh((h + h.T) / 2)
        top = int(np.argmax(np.abs(theta)))
        mu = float(theta[top])
        r = y @ w[:, top] - mu * (x @ w[:, top])
        residual = float(np.linalg.norm(r))
        if residual <= tol:
            return abs(mu), residual, it
        # continue from the Ritz-rotated block so dominant directions stay separated
        x = y @ w
    return abs(mu), residual, max_iter


def _operator(g: Graph):
    # BLAS dense product beats CSR once the adjacency is fairly dense
    if g.n <= 8000 and g.neighbors.size * 8 > g.n * g.n:
        return g.adjacency.toarray().astype(np.float64)
    return g.adjacency.astype(np.float64)


def lambda_iterative(g: Graph, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     rng: Optional[np.random.Generator] = None, block: int = 64):
    """lambda by power iteration on A - (delta/n) J, restarted from fresh random blocks on stall."""
    delta = _require_regular_connected(g)
    rng = np.random.default_rng(0) if rng is None else rng
    n = g.n
    if n == 2:
        return 1.0, 0.0, 0
    a = _operator(g)
    total = 0
    residual = math.inf
    for _ in range(MAX_STARTS):
        lam, residual, its = _block_power(a, delta, n, tol, max_iter, rng, block)
        total += its
        if residual <= tol:
            return lam, residual, total
    raise NumericalError(f"power iteration did not reach residual {tol} after {MAX_STARTS} starts "
                         f"(last residual {residual:.3e})", residual=residual)


def lambda_second(g: Graph, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  rng: Optional[np.random.Generator] = None, dense_limit: int = DENSE_LIMIT) -> SpectralReport:
    """Second-largest absolute adjacency eigenvalue of a connected regular graph.

    For n <= dense_limit the dense eigenvalues are authoritative and the
    iterative value must match them to 1e-6 relative.
    """
    delta = _require_regular_connected(g)
    lam_it, residual, its = lambda_iterative(g, tol=tol, max_iter=max_iter, rng=rng)
    if g.n > dense_limit:
        return SpectralReport(leading=float(delta), lambda_=lam_it, method="iterative",
                              residual=residual, iterations=its, n=g.n, delta=delta)
    spec = spectrum_dense(g, limit=dense_limit)
    leading = float(spec[0])
    if abs(leading - delta) > 1e-9 * max(1, delta):
        raise NumericalError(f"leading eigenvalue {leading} differs from degree {delta}")
    lam_dense = float(max(abs(spec[1]), abs(spec[-1])))
    if abs(lam_it - lam_dense) > CROSS_CHECK_RTOL * max(1.0, lam_dense):
        raise NumericalError(f"iterative lambda {lam_it} disagrees with dense {lam_dense}",
                             residual=residual)
    return SpectralReport(leading=leading, lambda_=lam_dense, method="dense", residual=residual,
                          iterations=its, n=g.n, delta=delta, iterative_lambda=lam_it)


def dense_lambda(g: Graph) -> float:
    """lambda straight from the dense spectrum (no iteration)."""
    _require_regular_connected(g)
    spec = spectrum_dense(g)
    return float(max(abs(spec[1]), abs(spec[-1])))


# ------------------------------------------------------------------- mixing

class AuditFailure(MajorityLabError):
    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class MixingAudit:
    pairs: int
    lambda_: float
    delta: int
    n: int
    max_violation: float
    max_slack_ratio: float
    tolerance: float
    worst_sizes: tuple = field(default=(0, 0))

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["passed"] = self.passed
        return d


def random_subsets(n: int, sizes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Boolean (len(sizes), n) matrix; row i is a uniform subset of size sizes[i]."""
    keys = rng.random((len(sizes), n))
    order = np.argsort(keys, axis=1)
    rows = np.zeros((len(sizes), n), dtype=bool)
    take = np.arange(n)[None, :] < np.asarray(sizes)[:, None]
    rows[np.arange(len(sizes))[:, None], order] = take
    return rows


def mixing_audit(g: Graph, lam: float, pairs: int, rng: np.random.Generator,
                 batch: int = 500, strict: bool = True) -> MixingAudit:
    """Sample set pairs and check |e(S,T) - |S||T| delta/n| <= lam sqrt(|S||T|).

    Set sizes are uniform on [1, n]; given its size, each set is uniform.
    """
    delta = g.regular_degree()
    if delta is None:
        raise PreconditionError("mixing audit needs a regular graph", reason="non-regular")
    n = g.n
    a = g.adjacency
    tol = 1e-6 * n
    worst = -math.inf
    worst_sizes = (0, 0)
    slack = 0.0
    done = 0
    while done < pairs:
        b = min(batch, pairs - done)
        ss = rng.integers(1, n + 1, size=b)
        ts = rng.integers(1, n + 1, size=b)
        S = random_subsets(n, ss, rng)
        T = random_subsets(n, ts, rng)
        at = a @ T.T.astype(np.int64)  # n x b, neighbors in T per node
        e = (at * S.T).sum(axis=0)
        dev = np.abs(e - ss * ts * delta / n)
        bound = lam * np.sqrt(ss * ts)
        viol = dev - bound
        i = int(np.argmax(viol))
        if viol[i] > worst:
            worst = float(viol[i])
            worst_sizes = (int(ss[i]), int(ts[i]))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, dev / bound, np.where(dev > 0, np.inf, 0.0))
        slack = max(slack, float(ratio.max()))
        done += b
    report = MixingAudit(pairs=pairs, lambda_=float(lam), delta=delta, n=n,
                         max_violation=worst if pairs else 0.0, max_slack_ratio=slack,
                         tolerance=tol, worst_sizes=worst_sizes)
    if strict and not report.passed:
        raise AuditFailure(f"mixing lemma violated by {report.max_violation:.3e} "
                           f"(sizes {worst_sizes}); lambda or edge counting is wrong", report)
    return report
