"""Finite-sum test problems and their file formats.

Every problem is an average f(x) = (1/n) sum_i f_i(x) of n smooth components
over points x stored as flat float64 vectors (matrices are flattened row
major). Three named families are provided: sparse binary logistic regression,
entrywise matrix-completion least squares, and synthetic quadratics. A small
CustomProblem wrapper around per-component callables exists for tests.
"""

import numpy as np
from dataclasses import dataclass, field
from pathlib import Path

from scipy.special import expit

from . import _kernels
from ._jit import HAVE_NUMBA


class LibsvmParseError(ValueError):
    """Raised on malformed LIBSVM input; messages name the offending line."""


@dataclass
class LabeledExample:
    """One row of a binary classification dataset.

    features holds (zero-based index, value) pairs sorted by index; label is
    0 or 1 (the LIBSVM labels -1 and 0 both map to 0).
    """

    features: list
    label: int


def parse_libsvm(source):
    """Parse LIBSVM text into examples.

    Args:
        source: the file content as a string, an open text file, or any
            iterable of lines.

    Returns:
        (examples, d) where examples is a list of LabeledExample and d is the
        dimension inferred from the largest feature index seen.

    Raises:
        LibsvmParseError: on bad labels, malformed pairs, indices below 1, or
            indices that fail to increase strictly within a line.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = source
    examples = []
    d = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            lab = float(parts[0])
        except ValueError:
            raise LibsvmParseError(f"bad label '{parts[0]}' at line {lineno}") from None
        if lab == 1.0:
            label = 1
        elif lab == 0.0 or lab == -1.0:
            label = 0
        else:
            raise LibsvmParseError(f"bad label '{parts[0]}' at line {lineno}")
        feats = []
        prev = 0
        for tok in parts[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(f"malformed feature pair '{tok}' at line {lineno}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(f"malformed feature pair '{tok}' at line {lineno}") from None
            if idx < 1:
                raise LibsvmParseError(f"feature index must be >= 1 at line {lineno}")
            if idx <= prev:
                raise LibsvmParseError(f"non-increasing index at line {lineno}")
            prev = idx
            feats.append((idx - 1, val))
        d = max(d, prev)
        examples.append(LabeledExample(features=feats, label=label))
    return examples, d


def serialize_libsvm(examples):
    """Inverse of parse_libsvm; one-based indices, repr-exact float values."""
    out = []
    for ex in examples:
        toks = [str(int(ex.label))]
        for idx, val in ex.features:
            toks.append(f"{idx + 1}:{float(val)!r}")
        out.append(" ".join(toks))
    return "\n".join(out) + "\n" if out else ""


def read_pgm(path):
    """Read a P2 (ascii) or P5 (binary) PGM image as a float64 grid.

    Comments starting with '#' are honored in the header, maxval up to 65535
    is accepted, and two-byte P5 samples are big-endian per the format.
    """
    data = Path(path).read_bytes()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c in (b" ", b"\t", b"\r", b"\n"):
                pos += 1
            elif c == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                break
        start = pos
        while pos < len(data) and data[pos : pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
            pos += 1
        if start == pos:
            raise ValueError(f"truncated PGM header in {path}")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a PGM file (magic {magic!r}) in {path}")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if width <= 0 or height <= 0:
        raise ValueError(f"bad PGM dimensions {width}x{height} in {path}")
    if not 0 < maxval <= 65535:
        raise ValueError(f"bad PGM maxval {maxval} in {path}")
    count = width * height
    if magic == b"P2":
        vals = np.empty(count, dtype=np.float64)
        for k in range(count):
            vals[k] = int(next_token())
    else:
        pos += 1  # exactly one whitespace byte separates maxval from pixels
        dtype = ">u2" if maxval > 255 else "u1"
        itemsize = 2 if maxval > 255 else 1
        raw = data[pos : pos + count * itemsize]
        if len(raw) != count * itemsize:
            raise ValueError(f"truncated PGM pixel data in {path}")
        vals = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    if vals.max(initial=0.0) > maxval:
        raise ValueError(f"PGM sample exceeds maxval in {path}")
    return vals.reshape(height, width)


def read_csv_grid(path):
    """Read a dense numeric grid from comma-separated text."""
    grid = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if not np.isfinite(grid).all():
        raise ValueError(f"non-finite entries in grid {path}")
    return grid


def make_mask(dims, fraction, seed):
    """Sample an observation mask of round(fraction * d1 * d2) distinct cells.

    Returns an (m, 2) int array of (row, col) pairs in canonical row-major
    order; the draw is uniform without replacement from a counter-based
    generator so a given (dims, fraction, seed) always yields the same mask.
    """
    d1, d2 = int(dims[0]), int(dims[1])
    if d1 <= 0 or d2 <= 0:
        raise ValueError(f"mask dims must be positive, got {dims}")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"mask fraction must be in (0, 1], got {fraction}")
    total = d1 * d2
    m = int(round(fraction * total))
    if m <= 0:
        raise ValueError(f"mask fraction {fraction} selects no cells of {dims}")
    rng = np.random.Generator(np.random.Philox(seed))
    flat = rng.choice(total, size=m, replace=False)
    flat.sort()
    return np.stack([flat // d2, flat % d2], axis=1).astype(np.int64)


@dataclass
class MatrixCompletionData:
    """Observed entries of a d1 x d2 matrix plus the nuclear-norm radius."""

    d1: int
    d2: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    radius: float

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        m = len(self.values)
        if m == 0:
            raise ValueError("observed entry set must be nonempty")
        if len(self.rows) != m or len(self.cols) != m:
            raise ValueError("rows, cols and values must have equal length")
        if self.rows.min() < 0 or self.rows.max() >= self.d1:
            raise ValueError("row index out of bounds")
        if self.cols.min() < 0 or self.cols.max() >= self.d2:
            raise ValueError("column index out of bounds")
        flat = self.rows * self.d2 + self.cols
        if len(np.unique(flat)) != m:
            raise ValueError("duplicate observed entries")
        if not np.isfinite(self.values).all():
            raise ValueError("non-finite observed values")
        if not self.radius > 0:
            raise ValueError(f"nuclear radius must be positive, got {self.radius}")


def completion_data_from_grid(grid, mask, radius):
    """Bundle grid values at masked cells into MatrixCompletionData."""
    grid = np.asarray(grid, dtype=np.float64)
    rows = mask[:, 0]
    cols = mask[:, 1]
    return MatrixCompletionData(
        d1=grid.shape[0],
        d2=grid.shape[1],
        rows=rows,
        cols=cols,
        values=grid[rows, cols],
        radius=radius,
    )


class FiniteSumProblem:
    """Base interface: n smooth components over R^d, averaged.

    Subclasses set kind, n, d, L (a smoothness constant valid for every
    component) and tau (a strong-convexity constant of the average, zero when
    none is claimed), and implement the per-component value and gradient.
    """

    kind = "abstract"
    n = 0
    d = 0
    L = 0.0
    tau = 0.0

    def _check_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ValueError(f"dimension mismatch: expected ({self.d},), got {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("point contains NaN or Inf")
        return x

    def _check_i(self, i):
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"component index {i} out of range [0, {self.n})")
        return i

    def component_value(self, i, x):
        raise NotImplementedError

    def component_gradient(self, i, x):
        raise NotImplementedError

    def objective(self, x):
        """Mean of all component values. Never charges oracle counters."""
        x = self._check_x(x)
        total = 0.0
        for i in range(self.n):
            total += self.component_value(i, x)
        return total / self.n

    def batch_gradients(self, idx, x):
        x = self._check_x(x)
        out = np.empty((len(idx), self.d))
        for r, i in enumerate(idx):
            out[r] = self.component_gradient(i, x)
        return out

    def batch_mean_gradient(self, idx, x):
        return self.batch_gradients(idx, x).mean(axis=0)

    def coord_estimate_component(self, i, x, mu):
        """Central-difference gradient estimate of one component.

        The generic path probes every coordinate with honest value calls;
        structured families override it with an equivalent cheaper sweep.
        """
        i = self._check_i(i)
        x = self._check_x(x)
        out = np.empty(self.d)
        xp = x.copy()
        for k in range(self.d):
            orig = x[k]
            xp[k] = orig + mu
            fp = self.component_value(i, xp)
            xp[k] = orig - mu
            fm = self.component_value(i, xp)
            xp[k] = orig
            out[k] = (fp - fm) / (2.0 * mu)
        return out

    def batch_mean_coord_estimate(self, idx, x, mu):
        acc = np.zeros(self.d)
        for i in idx:
            acc += self.coord_estimate_component(i, x, mu)
        return acc / len(idx)

    def directional_curvature(self, x, h):
        """Second derivative of t -> f(x + t h) when exactly computable."""
        return None


class LogisticProblem(FiniteSumProblem):
    """Binary logistic regression over sparse features.

    With z = x . a_i the component loss is
        f_i(x) = y_i * softplus(z) + (1 - y_i) * softplus(-z),
    softplus(t) = log(1 + e^t), whose gradient is (sigmoid(z) - 1 + y_i) a_i.
    Smoothness: |sigmoid'| <= 1/4, so L = max_i ||a_i||^2 / 4.
    """

    kind = "logistic"

    def __init__(self, examples, d=None):
        if not examples:
            raise ValueError("logistic problem needs at least one example")
        inferred = 0
        for ex in examples:
            if ex.features:
                inferred = max(inferred, ex.features[-1][0] + 1)
        self.d = int(d) if d is not None else inferred
        if self.d < 1:
            raise ValueError("feature dimension must be at least 1")
        if inferred > self.d:
            raise ValueError(f"feature index {inferred - 1} exceeds dimension {self.d}")
        self.n = len(examples)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        idx_chunks = []
        val_chunks = []
        labels = np.empty(self.n)
        for i, ex in enumerate(examples):
            if ex.label not in (0, 1):
                raise ValueError(f"label must be 0 or 1, got {ex.label}")
            labels[i] = float(ex.label)
            indptr[i + 1] = indptr[i] + len(ex.features)
            for k, v in ex.features:
                idx_chunks.append(k)
                val_chunks.append(v)
        self.indptr = indptr
        self.indices = np.asarray(idx_chunks, dtype=np.int64)
        self.data = np.asarray(val_chunks, dtype=np.float64)
        if not np.isfinite(self.data).all():
            raise ValueError("non-finite feature value")
        self.labels = labels
        sq = np.zeros(self.n)
        np.add.at(sq, np.repeat(np.arange(self.n), np.diff(indptr)), self.data**2)
        self.L = float(sq.max() / 4.0)
        self.tau = 0.0
        self._matrix = None

    @property
    def matrix(self):
        """scipy CSR view of the features, built on first use."""
        if self._matrix is None:
            from scipy.sparse import csr_matrix

            self._matrix = csr_matrix(
                (self.data, self.indices, self.indptr), shape=(self.n, self.d)
            )
        return self._matrix

    @staticmethod
    def _value_at(z, y):
        return y * np.logaddexp(0.0, z) + (1.0 - y) * np.logaddexp(0.0, -z)

    def _dot(self, i, x):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return float(self.data[lo:hi] @ x[self.indices[lo:hi]])

    def component_value(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        return float(self._value_at(self._dot(i, x), self.labels[i]))

    def component_gradient(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        z = self._dot(i, x)
        coef = expit(z) - 1.0 + self.labels[i]
        out = np.zeros(self.d)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        out[self.indices[lo:hi]] = coef * self.data[lo:hi]
        return out

    def objective(self, x):
        x = self._check_x(x)
        if HAVE_NUMBA:
            idx = np.arange(self.n, dtype=np.int64)
            return float(
                _kernels.logistic_mean_value(
                    self.indptr, self.indices, self.data, self.labels, idx, x
                )
            )
        z = self.matrix @ x
        return float(self._value_at(z, self.labels).mean())

    def batch_gradients(self, idx, x):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        sub = self.matrix[idx]
        coef = expit(sub @ x) - 1.0 + self.labels[idx]
        return np.asarray(sub.multiply(coef[:, None]).todense())

    def batch_mean_gradient(self, idx, x):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        if HAVE_NUMBA:
            return _kernels.logistic_mean_grad(
                self.indptr, self.indices, self.data, self.labels, idx, x, self.d
            )
        sub = self.matrix[idx]
        coef = expit(sub @ x) - 1.0 + self.labels[idx]
        return sub.T @ coef / len(idx)

    def coord_estimate_component(self, i, x, mu):
        i = self._check_i(i)
        x = self._check_x(x)
        z = self._dot(i, x)
        y = self.labels[i]
        out = np.zeros(self.d)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        # probes off the support leave z unchanged, so those differences are
        # exactly zero and only stored features need value probes
        steps = mu * self.data[lo:hi]
        fp = self._value_at(z + steps, y)
        fm = self._value_at(z - steps, y)
        out[self.indices[lo:hi]] = (fp - fm) / (2.0 * mu)
        return out

    def batch_mean_coord_estimate(self, idx, x, mu):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        if HAVE_NUMBA:
            return _kernels.logistic_mean_coord_est(
                self.indptr, self.indices, self.data, self.labels, idx, x, mu, self.d
            )
        sub = self.matrix[idx]
        z = sub @ x
        counts = np.diff(sub.indptr)
        zrep = np.repeat(z, counts)
        yrep = np.repeat(self.labels[idx], counts)
        steps = mu * sub.data
        contrib = (self._value_at(zrep + steps, yrep) - self._value_at(zrep - steps, yrep)) / (
            2.0 * mu * len(idx)
        )
        out = np.zeros(self.d)
        np.add.at(out, sub.indices, contrib)
        return out


class MatrixCompletionProblem(FiniteSumProblem):
    """Least squares on observed entries of a flattened d1 x d2 matrix.

    Component i is f_i(X) = (X[r_i, c_i] - Y[r_i, c_i])^2, so every component
    is a one-dimensional quadratic with curvature 2 and L = 2 regardless of
    the data. Points are row-major flattened matrices.
    """

    kind = "matrix_completion"

    def __init__(self, data: MatrixCompletionData):
        self.data = data
        self.n = len(data.values)
        self.d = data.d1 * data.d2
        self.flat = data.rows * data.d2 + data.cols
        self.values = data.values
        self.L = 2.0
        self.tau = 0.0

    def component_value(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        diff = x[self.flat[i]] - self.values[i]
        return float(diff * diff)

    def component_gradient(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        out = np.zeros(self.d)
        e = self.flat[i]
        out[e] = 2.0 * (x[e] - self.values[i])
        return out

    def objective(self, x):
        x = self._check_x(x)
        diff = x[self.flat] - self.values
        return float((diff * diff).mean())

    def batch_gradients(self, idx, x):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros((len(idx), self.d))
        e = self.flat[idx]
        out[np.arange(len(idx)), e] = 2.0 * (x[e] - self.values[idx])
        return out

    def batch_mean_gradient(self, idx, x):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        e = self.flat[idx]
        out = np.zeros(self.d)
        np.add.at(out, e, 2.0 * (x[e] - self.values[idx]) / len(idx))
        return out

    def coord_estimate_component(self, i, x, mu):
        # ((w + mu)^2 - (w - mu)^2) / (2 mu) is identically 2w: the central
        # difference of a quadratic recovers the derivative for every probe
        # radius, so the closed form is returned and mu only matters for the
        # query accounting done by the caller.
        i = self._check_i(i)
        x = self._check_x(x)
        return self.component_gradient(i, x)

    def batch_mean_coord_estimate(self, idx, x, mu):
        # Same exact-cancellation fact as coord_estimate_component; routing
        # through the gradient path keeps the two modes bit-identical.
        return self.batch_mean_gradient(idx, x)

    def directional_curvature(self, x, h):
        return float(2.0 * np.mean(h[self.flat] ** 2))


class QuadraticProblem(FiniteSumProblem):
    """Synthetic components f_i(x) = x^T A_i x / 2 + b_i^T x with A_i psd."""

    kind = "quadratic"

    def __init__(self, A, b):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError(f"A must be (n, d, d), got {A.shape}")
        if b.shape != A.shape[:2]:
            raise ValueError(f"b must be (n, d), got {b.shape}")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("non-finite quadratic data")
        if not np.allclose(A, np.swapaxes(A, 1, 2), atol=1e-12):
            raise ValueError("A components must be symmetric")
        self.A = A
        self.b = b
        self.n, self.d = b.shape
        eigs = np.linalg.eigvalsh(A)
        if eigs.min() < -1e-10:
            raise ValueError("A components must be positive semidefinite")
        self.L = float(eigs[:, -1].max())
        self.A_mean = A.mean(axis=0)
        self.b_mean = b.mean(axis=0)
        self.tau = float(max(np.linalg.eigvalsh(self.A_mean)[0], 0.0))

    def component_value(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        return float(0.5 * x @ (self.A[i] @ x) + self.b[i] @ x)

    def component_gradient(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        return self.A[i] @ x + self.b[i]

    def objective(self, x):
        x = self._check_x(x)
        q = self.A @ x
        vals = 0.5 * (q @ x) + self.b @ x
        return float(vals.mean())

    def batch_gradients(self, idx, x):
        x = self._check_x(x)
        idx = np.asarray(idx, dtype=np.int64)
        return self.A[idx] @ x + self.b[idx]

    def batch_mean_gradient(self, idx, x):
        return self.batch_gradients(idx, x).mean(axis=0)

    def coord_estimate_component(self, i, x, mu):
        """Exact central-difference estimate for a quadratic component.

        Expanding the two probes gives

            f_i(x + mu e_k) - f_i(x - mu e_k) = 2 mu (A_i x + b_i)_k,

        with the value and curvature terms cancelling identically, so the
        estimator equals the true component gradient for every probe radius.
        The closed form is evaluated directly; the caller still charges two
        function queries per coordinate because that is what the probe model
        costs.
        """
        i = self._check_i(i)
        x = self._check_x(x)
        return self.component_gradient(i, x)

    def batch_mean_coord_estimate(self, idx, x, mu):
        return self.batch_mean_gradient(idx, x)

    def directional_curvature(self, x, h):
        return float(h @ (self.A_mean @ h))


class CustomProblem(FiniteSumProblem):
    """Components given as callables; intended for tests and experiments."""

    kind = "custom"

    def __init__(self, value_fns, grad_fns, d, L, tau=0.0):
        if not value_fns:
            raise ValueError("need at least one component")
        if grad_fns is not None and len(grad_fns) != len(value_fns):
            raise ValueError("grad_fns length must match value_fns")
        self.value_fns = list(value_fns)
        self.grad_fns = list(grad_fns) if grad_fns is not None else None
        self.n = len(self.value_fns)
        self.d = int(d)
        self.L = float(L)
        self.tau = float(tau)

    def component_value(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        return float(self.value_fns[i](x))

    def component_gradient(self, i, x):
        i = self._check_i(i)
        x = self._check_x(x)
        if self.grad_fns is None:
            raise ValueError("this problem exposes no analytic gradients")
        return np.asarray(self.grad_fns[i](x), dtype=np.float64)


def component_value(problem, i, x):
    return problem.component_value(i, x)


def component_gradient(problem, i, x):
    return problem.component_gradient(i, x)


def smoothness_constant(problem):
    """L such that every component gradient is L-Lipschitz."""
    return problem.L


def synthetic_logistic_examples(n, d, seed):
    """Generate a non-separable logistic dataset with a planted optimum.

    Recipe (a choice of this package, not taken from any dataset): a sparse
    x_true with max(1, d // 10) nonzero coordinates of equal magnitude and
    l1 norm 5, dense gaussian features with per-coordinate variance 0.2 so
    that x_true . a_i has roughly unit variance, and labels drawn
    Bernoulli(sigmoid(-z_i)), which makes x_true the population minimizer of
    the loss used by LogisticProblem while keeping plenty of label noise.

    Returns (examples, d, x_true).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    k = max(1, d // 10)
    support = rng.choice(d, size=k, replace=False)
    support.sort()
    signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    x_true = np.zeros(d)
    x_true[support] = signs * (5.0 / k)
    feats = rng.normal(0.0, np.sqrt(0.2), size=(n, d))
    z = feats @ x_true
    labels = (rng.random(n) < expit(-z)).astype(int)
    examples = [
        LabeledExample(features=[(j, float(feats[i, j])) for j in range(d)], label=int(labels[i]))
        for i in range(n)
    ]
    return examples, d, x_true


def synthetic_quadratic_problem(n, d, seed, tau0=0.1, L0=1.0, xstar_l1=1.0):
    """Generate quadratics with pinned curvature extremes and known optimum.

    All components share one orthogonal eigenbasis; per-component eigenvalues
    are uniform in [tau0, L0] with the first forced to tau0 and the last to
    L0, so the average Hessian has smallest eigenvalue exactly tau0 and every
    component is L0-smooth (tau / L = tau0 / L0 by construction). The linear
    terms average to -A_mean @ x_star for a sparse x_star with l1 norm
    xstar_l1, making x_star the exact unconstrained minimizer.

    Returns (problem, x_star).
    """
    if not 0 < tau0 <= L0:
        raise ValueError("need 0 < tau0 <= L0")
    if d < 2:
        raise ValueError("d must be at least 2 to pin both curvature extremes")
    rng = np.random.Generator(np.random.Philox(seed))
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    lam = rng.uniform(tau0, L0, size=(n, d))
    lam[:, 0] = tau0
    lam[:, -1] = L0
    A = np.einsum("ik,nk,jk->nij", Q, lam, Q)
    A = 0.5 * (A + np.swapaxes(A, 1, 2))
    k = max(1, d // 10)
    support = rng.choice(d, size=k, replace=False)
    support.sort()
    signs = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    x_star = np.zeros(d)
    x_star[support] = signs * (xstar_l1 / k)
    b_mean = -(A.mean(axis=0) @ x_star)
    noise = rng.normal(0.0, 0.1, size=(n, d))
    noise -= noise.mean(axis=0)
    b = b_mean + noise
    return QuadraticProblem(A, b), x_star


def synthetic_lowrank_matrix(d1, d2, seed, rank=3):
    """Random low-rank grid with entries of roughly unit scale."""
    if rank < 1:
        raise ValueError("rank must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    U = rng.normal(size=(d1, rank))
    V = rng.normal(size=(d2, rank))
    return U @ V.T / np.sqrt(rank)
