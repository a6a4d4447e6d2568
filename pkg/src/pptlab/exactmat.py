"""Exact linear algebra over the Gaussian rationals.

Scalars are complex numbers ``a + b*i`` with arbitrary-precision rational
``a``, ``b`` (:class:`GaussianRational`).  Matrices are dense and immutable
(:class:`ExactMatrix`); subspaces carry a canonical reduced-row-echelon
basis so that equality of subspaces is syntactic equality of bases
(:class:`Subspace`).

Every operation here is exact: verdicts like :func:`psd_check` are decided
by symmetric-pivoted LDL* elimination over the field, never by floating
point.  The pseudoinverse is never materialized; its action is available
through :func:`solve_on_range`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionMismatch, NotHermitian, RangeViolation

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


class GaussianRational:
    """Exact complex scalar with rational real and imaginary parts.

    Values are immutable.  Mixed arithmetic with ``int`` and ``Fraction``
    is supported; division by zero raises ``ZeroDivisionError``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def _raw(re: Fraction, im: Fraction) -> "GaussianRational":
        z = object.__new__(GaussianRational)
        object.__setattr__(z, "re", re)
        object.__setattr__(z, "im", im)
        return z

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = as_scalar(other)
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_scalar(other)
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if b == 0 and d == 0:  # real fast path
            return GaussianRational._raw(a * c, _ZERO)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_scalar(other)
        n2 = other.abs2()
        if n2 == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        if self.im == 0 and other.im == 0:
            return GaussianRational._raw(self.re / other.re, _ZERO)
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational._raw((a * c + b * d) / n2, (b * c - a * d) / n2)

    def __rtruediv__(self, other):
        return as_scalar(other) / self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def conj(self) -> "GaussianRational":
        if self.im == 0:
            return self
        return GaussianRational._raw(self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        return ONE / self

    def abs2(self) -> Fraction:
        """Squared modulus; exact, nonnegative rational."""
        return self.re * self.re + self.im * self.im

    # -- predicates & conversions ---------------------------------------
    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * float(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)


def as_scalar(x) -> GaussianRational:
    """Coerce int, Fraction or GaussianRational to a GaussianRational."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational._raw(_frac(x), _ZERO)
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def format_scalar(z: GaussianRational) -> str:
    """Serialize as ``"p/q"`` or ``"p/q+r/s i"``."""
    if z.im == 0:
        return str(z.re)
    sign = "+" if z.im >= 0 else "-"
    return f"{z.re}{sign}{abs(z.im)} i"


def parse_scalar(text: str) -> GaussianRational:
    """Inverse of :func:`format_scalar`."""
    s = text.strip()
    if s.endswith("i"):
        body = s[:-1].strip()
        # split at the sign separating real and imaginary parts
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "+-/":
                re_part, im_part = body[:pos], body[pos] + body[pos + 1:]
                return GaussianRational(Fraction(re_part), Fraction(im_part))
        return GaussianRational(0, Fraction(body))
    return GaussianRational(Fraction(s))


# ---------------------------------------------------------------------------
# vectors: plain tuples of GaussianRational
# ---------------------------------------------------------------------------

Vector = tuple  # tuple[GaussianRational, ...]


def vector(entries: Iterable) -> Vector:
    return tuple(as_scalar(e) for e in entries)


def zero_vector(n: int) -> Vector:
    return (ZERO,) * n


def basis_vector(n: int, j: int) -> Vector:
    return tuple(ONE if i == j else ZERO for i in range(n))


def vec_add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))

def vec_sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v: Vector) -> Vector:
    c = as_scalar(c)
    return tuple(c * a for a in v)


def vdot(u: Vector, v: Vector) -> GaussianRational:
    """Hermitian inner product ``<u|v>``, conjugate-linear in ``u``."""
    if len(u) != len(v):
        raise DimensionMismatch("vectors of different length")
    acc = ZERO
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a.conj() * b
    return acc


def vec_conj(v: Vector) -> Vector:
    return tuple(a.conj() for a in v)


def kron_vec(u: Vector, v: Vector) -> Vector:
    return tuple(a * b for a in u for b in v)


def is_zero_vector(v: Vector) -> bool:
    return not any(v)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class ExactMatrix:
    """Dense immutable matrix of Gaussian rationals.

    ``hermitian_hint`` marks matrices whose Hermiticity was established at
    construction; it is verified exactly when requested, never assumed.
    """

    __slots__ = ("rows", "cols", "_e", "hermitian_hint")

    def __init__(self, entries: Sequence[Sequence], hermitian_hint: bool = False):
        e = tuple(tuple(as_scalar(x) for x in row) for row in entries)
        if e and any(len(r) != len(e[0]) for r in e):
            raise DimensionMismatch("ragged matrix rows")
        object.__setattr__(self, "_e", e)
        object.__setattr__(self, "rows", len(e))
        object.__setattr__(self, "cols", len(e[0]) if e else 0)
        object.__setattr__(self, "hermitian_hint", hermitian_hint)
        if hermitian_hint and not self.is_hermitian():
            raise NotHermitian("hermitian_hint set on a non-Hermitian matrix")

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    # -- constructors ---------------------------------------------------
    @staticmethod
    def zeros(rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix([[ZERO] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @staticmethod
    def diag(values: Iterable) -> "ExactMatrix":
        vals = [as_scalar(v) for v in values]
        n = len(vals)
        return ExactMatrix([[vals[i] if i == j else ZERO for j in range(n)] for i in range(n)])

    @staticmethod
    def from_cols(columns: Sequence[Vector]) -> "ExactMatrix":
        if not columns:
            return ExactMatrix.zeros(0, 0)
        n = len(columns[0])
        return ExactMatrix([[columns[j][i] for j in range(len(columns))] for i in range(n)])

    @staticmethod
    def outer(u: Vector, v: Vector) -> "ExactMatrix":
        """Rank-one operator ``|u><v|``."""
        vc = [b.conj() for b in v]
        return ExactMatrix([[a * b for b in vc] for a in u])

    # -- access ----------------------------------------------------------
    def entry(self, i: int, j: int) -> GaussianRational:
        return self._e[i][j]

    def row(self, i: int) -> Vector:
        return self._e[i]

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self._e)

    def tolists(self):
        return [list(r) for r in self._e]

    def to_complex_rows(self):
        return [[x.to_complex() for x in row] for row in self._e]

    # -- algebra ----------------------------------------------------------
    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._e, other._e)])

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self._e, other._e)])

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-a for a in r] for r in self._e])

    def scale(self, c) -> "ExactMatrix":
        c = as_scalar(c)
        return ExactMatrix([[c * a for a in r] for r in self._e])

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            return self.matmul(other)
        return self.scale(other)

    __rmul__ = scale

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        ot = list(zip(*other._e))  # columns of other
        out = []
        for r in self._e:
            nz = [(k, a) for k, a in enumerate(r) if a]
            out_row = []
            for c in ot:
                acc = ZERO
                for k, a in nz:
                    b = c[k]
                    if b:
                        acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return ExactMatrix(out)

    def matvec(self, v: Vector) -> Vector:
        if self.cols != len(v):
            raise DimensionMismatch("matrix-vector shape mismatch")
        out = []
        for r in self._e:
            acc = ZERO
            for a, b in zip(r, v):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return tuple(out)

    def adjoint(self) -> "ExactMatrix":
        return ExactMatrix([[self._e[i][j].conj() for i in range(self.rows)] for j in range(self.cols)])

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self._e[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def conjugate(self) -> "ExactMatrix":
        return ExactMatrix([[x.conj() for x in row] for row in self._e])

    def trace(self) -> GaussianRational:
        acc = ZERO
        for i in range(min(self.rows, self.cols)):
            acc = acc + self._e[i][i]
        return acc

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        out = []
        for r1 in self._e:
            for r2 in other._e:
                out.append([a * b for a in r1 for b in r2])
        return ExactMatrix(out)

    # -- predicates --------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(not x for row in self._e for x in row)

    def is_hermitian(self) -> bool:
        if not self.is_square():
            return False
        for i in range(self.rows):
            for j in range(i, self.cols):
                if self._e[i][j] != self._e[j][i].conj():
                    return False
        return True

    def is_diagonal(self) -> bool:
        return all(not self._e[i][j] for i in range(self.rows) for j in range(self.cols) if i != j)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._e == other._e

    def __hash__(self):
        return hash(self._e)

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"

    def _check_same_shape(self, other: "ExactMatrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape mismatch {self.shape} vs {other.shape}")


# ---------------------------------------------------------------------------
# row reduction core
# ---------------------------------------------------------------------------

def _rref(rows: list, limit_cols: int | None = None) -> list:
    """Reduce ``rows`` (lists of GaussianRational) in place to RREF.

    Pivots are normalized to 1 and eliminated above and below.  Pivot search
    is restricted to the first ``limit_cols`` columns when given, which makes
    the same routine usable on augmented systems.  Returns pivot columns.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    span = ncols if limit_cols is None else limit_cols
    pivots = []
    r = 0
    for c in range(span):
        pr = None
        for i in range(r, nrows):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        piv = rows[r][c]
        if piv != ONE:
            inv = ONE / piv
            rows[r] = [inv * x for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri, rr = rows[i], rows[r]
                rows[i] = [a - f * b if b else a for a, b in zip(ri, rr)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def _kernel_from_rref(rref_rows: list, pivots: list, ncols: int) -> list:
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rref_rows[r][f]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class Subspace:
    """Linear subspace with a canonical RREF basis.

    Two subspaces are equal iff their canonical bases are identical, so
    equality is decidable by syntactic comparison.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, vectors: Iterable[Vector] = ()):
        rows = [list(vector(v)) for v in vectors]
        for r in rows:
            if len(r) != ambient_dim:
                raise DimensionMismatch("basis vector of wrong length")
        pivots = _rref(rows)
        canon = tuple(tuple(rows[i]) for i in range(len(pivots)))
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", canon)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Vector) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatch("vector of wrong length")
        w = list(v)
        for b in self.basis:
            lead = next(i for i, x in enumerate(b) if x)
            if w[lead]:
                f = w[lead]
                w = [a - f * c if c else a for a, c in zip(w, b)]
        return not any(w)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def column_space(M: ExactMatrix) -> Subspace:
    """Range R(M) as a canonical subspace."""
    return Subspace(M.rows, [M.col(j) for j in range(M.cols)])


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def rank_and_kernel(M: ExactMatrix) -> tuple[int, Subspace]:
    """Exact rank of ``M`` together with its right kernel."""
    rows = [list(r) for r in (M.row(i) for i in range(M.rows))]
    if not rows:
        return 0, Subspace(M.cols, [basis_vector(M.cols, j) for j in range(M.cols)])
    pivots = _rref(rows)
    kern = _kernel_from_rref(rows, pivots, M.cols)
    return len(pivots), Subspace(M.cols, kern)


def rank(M: ExactMatrix) -> int:
    return rank_and_kernel(M)[0]


@dataclass(frozen=True)
class PsdResult:
    """Outcome of an exact PSD decision.

    PSD case: ``M = sum_t d_t |l_t><l_t|`` with strictly positive rational
    ``d_t`` (``pivots`` holds the pivot index alongside ``d_t``).  Non-PSD
    case: ``witness`` satisfies ``<v|M|v> = witness_value < 0`` exactly.
    """

    is_psd: bool
    pivots: tuple = ()            # tuple[(index, Fraction), ...]
    columns: tuple = ()           # tuple[Vector, ...], l_t with l_t[index]=1
    witness: Vector | None = None
    witness_value: Fraction | None = None

    def reconstruct(self, n: int) -> ExactMatrix:
        acc = ExactMatrix.zeros(n, n)
        for (_, d), l in zip(self.pivots, self.columns):
            acc = acc + ExactMatrix.outer(l, l).scale(d)
        return acc

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _psd_witness(loc: list, pivot_indices: list, ell_list: list, n: int) -> Vector:
    """Extend a local witness to the original coordinates.

    The local witness ``loc`` lives in the residual after eliminating the
    recorded pivots; appending corrections on the pivot coordinates makes it
    orthogonal to every recorded column, which preserves the quadratic form
    value taken on the residual.
    """
    v = list(loc)
    t = len(pivot_indices)
    alphas = [ZERO] * t
    for s in range(t - 1, -1, -1):
        ell = ell_list[s]
        acc = ZERO
        for i, x in enumerate(v):
            if x and ell[i]:
                acc = acc + ell[i].conj() * x
        for s2 in range(s + 1, t):
            a2 = alphas[s2]
            if a2 and ell[pivot_indices[s2]]:
                acc = acc + ell[pivot_indices[s2]].conj() * a2
        alphas[s] = -acc
    for s in range(t):
        v[pivot_indices[s]] = v[pivot_indices[s]] + alphas[s]
    return tuple(v)


def psd_check(M: ExactMatrix) -> PsdResult:
    """Exact positive-semidefiniteness decision by pivoted LDL*.

    Pivots only on nonzero diagonal entries; a negative diagonal or a zero
    diagonal with a nonzero residual row yields an explicit witness vector
    with a negative quadratic form value.
    """
    if not M.is_hermitian():
        raise NotHermitian("psd_check requires an exactly Hermitian matrix")
    n = M.rows
    R = [list(M.row(i)) for i in range(n)]
    active = list(range(n))
    pivot_indices: list[int] = []
    pivot_values: list[Fraction] = []
    ells: list[list] = []

    while True:
        piv = None
        for j in active:
            d = R[j][j]
            if d:
                piv = j
                break
        if piv is not None:
            d = R[piv][piv].re
            if d < 0:
                loc = [ZERO] * n
                loc[piv] = ONE
                w = _psd_witness(loc, pivot_indices, ells, n)
                return PsdResult(False, witness=w, witness_value=d)
            dval = R[piv][piv]
            ell = [R[i][piv] / dval for i in range(n)]
            nz = [i for i, x in enumerate(ell) if x]
            for i in nz:
                li = ell[i]
                Ri = R[i]
                for k in nz:
                    Ri[k] = Ri[k] - dval * li * ell[k].conj()
            pivot_indices.append(piv)
            pivot_values.append(d)
            ells.append(ell)
            active.remove(piv)
        else:
            off = None
            for ai, i in enumerate(active):
                for k in active[ai + 1:]:
                    if R[i][k]:
                        off = (i, k)
                        break
                if off:
                    break
            if off is None:
                cols = tuple(tuple(l) for l in ells)
                return PsdResult(True, pivots=tuple(zip(pivot_indices, pivot_values)), columns=cols)
            i, k = off
            loc = [ZERO] * n
            loc[i] = ONE
            loc[k] = -R[i][k].conj()
            value = -2 * R[i][k].abs2()
            w = _psd_witness(loc, pivot_indices, ells, n)
            return PsdResult(False, witness=w, witness_value=value)


def orth_projector(S: Subspace) -> ExactMatrix:
    """Orthogonal projector onto ``S`` via exact Gram-matrix inversion."""
    if S.ambient_dim < 1:
        raise DimensionMismatch("ambient dimension must be at least 1")
    if S.dim == 0:
        return ExactMatrix.zeros(S.ambient_dim, S.ambient_dim)
    C = ExactMatrix.from_cols(S.basis)        # ambient x k
    G = C.adjoint().matmul(C)                 # k x k, positive definite
    X = _solve_invertible(G, C.adjoint())     # G^{-1} C*
    return C.matmul(X)


def _solve_invertible(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """Solve ``A X = B`` for invertible square ``A``."""
    n = A.rows
    rows = [list(A.row(i)) + list(B.row(i)) for i in range(n)]
    pivots = _rref(rows, limit_cols=n)
    if len(pivots) != n:
        raise RangeViolation("matrix is singular")
    return ExactMatrix([rows[i][n:] for i in range(n)])


def solve_on_range(A: ExactMatrix, b: Vector) -> Vector:
    """Minimal-norm solution of ``A x = b`` when ``b`` is in R(A).

    The result lies in R(A*), so multiplying by ``A`` realizes the
    pseudoinverse action without forming a pseudoinverse matrix.  Raises
    :class:`RangeViolation` when ``b`` is not in the range.
    """
    return _solve_on_range_cols(A, [b])[0]


def solve_on_range_matrix(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """Columnwise :func:`solve_on_range`; shares one elimination pass."""
    cols = [B.col(j) for j in range(B.cols)]
    return ExactMatrix.from_cols(_solve_on_range_cols(A, cols))


def _solve_on_range_cols(A: ExactMatrix, bs: list) -> list:
    m, n = A.rows, A.cols
    for b in bs:
        if len(b) != m:
            raise DimensionMismatch("right-hand side of wrong length")
    k = len(bs)
    rows = [list(A.row(i)) + [bs[j][i] for j in range(k)] for i in range(m)]
    pivots = _rref(rows, limit_cols=n)
    r = len(pivots)
    for i in range(r, m):
        for j in range(k):
            if rows[i][n + j]:
                raise RangeViolation("right-hand side outside the range")
    # particular solutions with free variables set to zero
    xs = []
    for j in range(k):
        x = [ZERO] * n
        for t, pc in enumerate(pivots):
            x[pc] = rows[t][n + j]
        xs.append(x)
    # project out the kernel component to land in R(A*)
    kern = _kernel_from_rref([row[:n] for row in rows[:r]], pivots, n)
    if kern:
        K = ExactMatrix.from_cols(kern)
        G = K.adjoint().matmul(K)
        for j in range(k):
            coeffs = K.adjoint().matvec(tuple(xs[j]))
            proj = K.matvec(_solve_invertible(G, ExactMatrix.from_cols([coeffs])).col(0))
            xs[j] = [a - p for a, p in zip(xs[j], proj)]
    return [tuple(x) for x in xs]


def subspace_intersection(U: Subspace, V: Subspace) -> Subspace:
    """Exact intersection, computed as the joint fixed space of projectors.

    ``x`` lies in both subspaces iff ``(P_U + P_V) x = 2 x``; the kernel of
    ``P_U + P_V - 2*I`` is therefore exactly the intersection.
    """
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch("subspaces in different ambient spaces")
    n = U.ambient_dim
    if U.dim == 0 or V.dim == 0:
        return Subspace(n)
    P = orth_projector(U) + orth_projector(V) - ExactMatrix.identity(n).scale(2)
    _, kern = rank_and_kernel(P)
    return kern


def intersection_via_stacked_kernel(U: Subspace, V: Subspace) -> Subspace:
    """Independent route to the intersection for cross-checks.

    Solves ``sum a_i u_i = sum b_j v_j`` through the kernel of the stacked
    basis matrix ``[U | -V]`` and maps the ``a`` part back.
    """
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch("subspaces in different ambient spaces")
    n = U.ambient_dim
    if U.dim == 0 or V.dim == 0:
        return Subspace(n)
    cols = [u for u in U.basis] + [vec_scale(-1, v) for v in V.basis]
    M = ExactMatrix.from_cols(cols)
    _, kern = rank_and_kernel(M)
    vecs = []
    for w in kern.basis:
        a = w[:U.dim]
        x = zero_vector(n)
        for c, u in zip(a, U.basis):
            if c:
                x = vec_add(x, vec_scale(c, u))
        if not is_zero_vector(x):
            vecs.append(x)
    return Subspace(n, vecs)
