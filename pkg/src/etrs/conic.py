"""Small dense primal-dual interior-point solver for mixed cones.

Solves   minimize <c, s>  subject to  <A_i, s> = r_i,  s in K,
where K is an ordered product of PSD, second-order, nonnegative and free
blocks. PSD blocks live in symmetric-vectorized coordinates (off-diagonals
scaled by sqrt(2)) so every inner product is the plain dot product.

The algorithm is the homogeneous self-dual embedding with Nesterov-Todd
scaling and a Mehrotra predictor-corrector, solving the full Newton system
densely each iteration. That is ample at the desk scale this package
targets (scalarized dimension up to a few thousand) and terminates with a
certificate instead of diverging on infeasible or unbounded inputs.

Free blocks are handled internally by the standard difference-of-two-
nonnegatives split, which keeps every cone self-scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PsdBlock",
    "SocBlock",
    "NonnegBlock",
    "FreeBlock",
    "ConeSpec",
    "ConicProgram",
    "ConicSolution",
    "SolverOptions",
    "NumericalBreakdown",
    "NotOptimal",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "MAXITER",
    "svec",
    "smat",
    "svec_dim",
    "solve",
    "extract_dual",
]

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
MAXITER = "MaxIter"

_SQRT2 = np.sqrt(2.0)


class NumericalBreakdown(Exception):
    """The Newton system stayed singular beyond the regularization budget."""


class NotOptimal(Exception):
    """Dual extraction requested from a non-optimal solution."""


@dataclass(frozen=True)
class PsdBlock:
    size: int


@dataclass(frozen=True)
class SocBlock:
    size: int


@dataclass(frozen=True)
class NonnegBlock:
    size: int


@dataclass(frozen=True)
class FreeBlock:
    size: int


Block = PsdBlock | SocBlock | NonnegBlock | FreeBlock


def svec_dim(p: int) -> int:
    return p * (p + 1) // 2


def svec(M: np.ndarray) -> np.ndarray:
    """Symmetric vectorization with sqrt(2)-scaled off-diagonals."""
    M = np.asarray(M, dtype=float)
    p = M.shape[0]
    out = np.empty(svec_dim(p))
    k = 0
    for i in range(p):
        out[k] = M[i, i]
        k += 1
        for j in range(i + 1, p):
            out[k] = _SQRT2 * 0.5 * (M[i, j] + M[j, i])
            k += 1
    return out


def smat(v: np.ndarray, p: int) -> np.ndarray:
    """Inverse of svec."""
    M = np.zeros((p, p))
    k = 0
    for i in range(p):
        M[i, i] = v[k]
        k += 1
        for j in range(i + 1, p):
            M[i, j] = M[j, i] = v[k] / _SQRT2
            k += 1
    return M


def _svec_index_pairs(p: int):
    pairs = []
    for i in range(p):
        pairs.append((i, i))
        for j in range(i + 1, p):
            pairs.append((i, j))
    return pairs


@dataclass(frozen=True)
class ConeSpec:
    """Ordered block structure of the cone."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        for blk in self.blocks:
            if blk.size <= 0:
                raise ValueError(f"block sizes must be positive, got {blk}")
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def dim(self) -> int:
        return sum(svec_dim(b.size) if isinstance(b, PsdBlock) else b.size for b in self.blocks)

    def slices(self) -> list[slice]:
        out = []
        k = 0
        for b in self.blocks:
            d = svec_dim(b.size) if isinstance(b, PsdBlock) else b.size
            out.append(slice(k, k + d))
            k += d
        return out


@dataclass(frozen=True)
class ConicProgram:
    """minimize <c, s> subject to A s = r, s in cone.

    `groups` optionally names contiguous sets of constraint rows so duals
    can be pulled out by meaning rather than index arithmetic.
    """

    c: np.ndarray
    A: np.ndarray
    r: np.ndarray
    cone: ConeSpec
    groups: dict[str, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        N = self.cone.dim
        if c.shape != (N,):
            raise ValueError(f"c has shape {c.shape}, cone dimension is {N}")
        if A.shape[1] != N:
            raise ValueError(f"A has {A.shape[1]} columns, cone dimension is {N}")
        if r.shape != (A.shape[0],):
            raise ValueError("r length must match the number of constraint rows")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(r))):
            raise ValueError("program data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "r", r)

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]


@dataclass
class ConicSolution:
    s: np.ndarray
    y: np.ndarray
    w: np.ndarray  # dual slack, c - A'y
    status: str
    primal_obj: float
    dual_obj: float
    residuals: dict
    iterations: int
    history: list  # per-iterate (primal_obj, dual_obj, pres, dres, gap)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-9
    accept_tol: float = 1e-8
    max_iter: int = 100
    step_fraction: float = 0.99
    regularization: float = 1e-10
    infeas_ratio: float = 1e-8


# ---------------------------------------------------------------------------
# per-block cone operations (on the internal, free-split representation)


class _ConeOps:
    """Scaled-space operations for one symmetric-cone block."""

    def __init__(self, block: Block):
        self.block = block
        if isinstance(block, PsdBlock):
            p = block.size
            self.dim = svec_dim(p)
            self.degree = p
            self.pairs = _svec_index_pairs(p)
            # basis tensor: mat(v) = sum_k v_k * basis[k]
            basis = np.zeros((self.dim, p, p))
            for k, (i, j) in enumerate(self.pairs):
                if i == j:
                    basis[k, i, i] = 1.0
                else:
                    basis[k, i, j] = basis[k, j, i] = 1.0 / _SQRT2
            self.basis = basis
        elif isinstance(block, SocBlock):
            self.dim = block.size
            self.degree = 1
        elif isinstance(block, NonnegBlock):
            self.dim = block.size
            self.degree = block.size
        else:
            raise TypeError("free blocks must be split before building cone ops")

    def unit(self) -> np.ndarray:
        if isinstance(self.block, PsdBlock):
            return svec(np.eye(self.block.size))
        if isinstance(self.block, SocBlock):
            e = np.zeros(self.dim)
            e[0] = 1.0
            return e
        return np.ones(self.dim)

    def jordan(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if isinstance(self.block, PsdBlock):
            p = self.block.size
            U, V = smat(u, p), smat(v, p)
            return svec(0.5 * (U @ V + V @ U))
        if isinstance(self.block, SocBlock):
            out = np.empty(self.dim)
            out[0] = u @ v
            out[1:] = u[0] * v[1:] + v[0] * u[1:]
            return out
        return u * v

    def _map_matrix(self, R_left: np.ndarray, R_right: np.ndarray) -> np.ndarray:
        """svec-coordinate matrix of M -> R_left' M R_right (symmetrized)."""
        imgs = np.einsum("ai,kab,bj->kij", R_left, self.basis, R_right)
        imgs = 0.5 * (imgs + np.transpose(imgs, (0, 2, 1)))
        out = np.empty((self.dim, self.dim))
        for k in range(self.dim):
            out[k] = svec(imgs[k])
        return out.T  # column l is image of basis l

    def scaling(self, s: np.ndarray, z: np.ndarray):
        """NT scaling: returns (Winv_T, W, lam) with Winv_T s = W z = lam."""
        if isinstance(self.block, PsdBlock):
            p = self.block.size
            S, Z = smat(s, p), smat(z, p)
            Ls = np.linalg.cholesky(S)
            Lz = np.linalg.cholesky(Z)
            U, sig, Vt = np.linalg.svd(Lz.T @ Ls)
            R = Ls @ Vt.T @ np.diag(1.0 / np.sqrt(sig))
            Rinv = np.diag(np.sqrt(sig)) @ Vt @ np.linalg.inv(Ls)
            W = self._map_matrix(R, R)  # z -> R' Z R
            WinvT = self._map_matrix(Rinv.T, Rinv.T)  # s -> Rinv S Rinv'
            lam = svec(np.diag(sig))
            return WinvT, W, lam
        if isinstance(self.block, SocBlock):
            J = np.ones(self.dim)
            J[1:] = -1.0
            res_s = s[0] ** 2 - s[1:] @ s[1:]
            res_z = z[0] ** 2 - z[1:] @ z[1:]
            if res_s <= 0.0 or res_z <= 0.0:
                raise NumericalBreakdown("second-order cone iterate left the interior")
            sb = s / np.sqrt(res_s)
            zb = z / np.sqrt(res_z)
            gamma = np.sqrt((1.0 + sb @ zb) / 2.0)
            wb = (sb + J * zb) / (2.0 * gamma)
            # square-root scaling point: W^2 is the quadratic representation of wb
            v = wb.copy()
            v[0] += 1.0
            v /= np.sqrt(2.0 * (wb[0] + 1.0))
            eta = (res_s / res_z) ** 0.25
            Wm = eta * (2.0 * np.outer(v, v) - np.diag(J))
            Winv = (2.0 * np.outer(J * v, J * v) - np.diag(J)) / eta
            lam = Winv @ s
            return Winv, Wm, lam
        wv = np.sqrt(s / z)
        lam = np.sqrt(s * z)
        return np.diag(1.0 / wv), np.diag(wv), lam

    def lam_lyap(self, lam: np.ndarray) -> np.ndarray:
        """Dense matrix of the Jordan product u -> lam o u."""
        if isinstance(self.block, PsdBlock):
            # lam is svec of a diagonal matrix here
            p = self.block.size
            sig = smat(lam, p).diagonal()
            return np.diag([0.5 * (sig[i] + sig[j]) for (i, j) in self.pairs])
        if isinstance(self.block, SocBlock):
            M = lam[0] * np.eye(self.dim)
            M[0, 1:] = lam[1:]
            M[1:, 0] = lam[1:]
            return M
        return np.diag(lam)

    def max_step(self, s: np.ndarray, ds: np.ndarray) -> float:
        """Largest alpha with s + alpha*ds still in the cone."""
        if isinstance(self.block, PsdBlock):
            p = self.block.size
            S, D = smat(s, p), smat(ds, p)
            Ls = np.linalg.cholesky(S)
            Linv = np.linalg.inv(Ls)
            m = float(np.linalg.eigvalsh(Linv @ D @ Linv.T)[0])
            return np.inf if m >= 0.0 else -1.0 / m
        if isinstance(self.block, SocBlock):
            # boundary: quadratic in alpha from (s+a*ds)'J(s+a*ds) = 0
            q2 = ds[0] ** 2 - ds[1:] @ ds[1:]
            q1 = s[0] * ds[0] - s[1:] @ ds[1:]
            q0 = s[0] ** 2 - s[1:] @ s[1:]
            cands = []
            disc = q1 * q1 - q2 * q0
            if abs(q2) > 1e-300 and disc >= 0.0:
                rt = np.sqrt(disc)
                cands += [(-q1 - rt) / q2, (-q1 + rt) / q2]
            elif abs(q2) <= 1e-300 and abs(q1) > 1e-300:
                cands.append(-q0 / (2.0 * q1))
            if ds[0] < 0.0:
                cands.append(-s[0] / ds[0])
            pos = [a for a in cands if a > 0.0]
            return min(pos) if pos else np.inf
        neg = ds < 0.0
        if not np.any(neg):
            return np.inf
        return float(np.min(-s[neg] / ds[neg]))


# ---------------------------------------------------------------------------
# free-variable splitting


def _split_free(program: ConicProgram):
    """Rewrite free blocks as differences of nonnegative pairs.

    Returns (blocks, c_int, A_int, recover) where recover maps an internal
    primal vector back to the user-facing coordinates.
    """
    blocks: list[Block] = []
    cols: list[np.ndarray] = []  # internal A columns
    cvals: list[np.ndarray] = []
    mapping: list[tuple[slice, slice, bool]] = []  # (user slice, internal slice, split?)
    k_int = 0
    for blk, sl in zip(program.cone.blocks, program.cone.slices()):
        Ablk = program.A[:, sl]
        cblk = program.c[sl]
        d = sl.stop - sl.start
        if isinstance(blk, FreeBlock):
            blocks.append(NonnegBlock(blk.size))
            blocks.append(NonnegBlock(blk.size))
            cols.append(Ablk)
            cols.append(-Ablk)
            cvals.append(cblk)
            cvals.append(-cblk)
            mapping.append((sl, slice(k_int, k_int + 2 * d), True))
            k_int += 2 * d
        else:
            blocks.append(blk)
            cols.append(Ablk)
            cvals.append(cblk)
            mapping.append((sl, slice(k_int, k_int + d), False))
            k_int += d

    A_int = np.hstack(cols)
    c_int = np.concatenate(cvals)

    def recover(v: np.ndarray) -> np.ndarray:
        out = np.empty(program.cone.dim)
        for usl, isl, split in mapping:
            d = usl.stop - usl.start
            if split:
                out[usl] = v[isl][:d] - v[isl][d:]
            else:
                out[usl] = v[isl]
        return out

    return blocks, c_int, A_int, recover, mapping


# ---------------------------------------------------------------------------
# the solver


def solve(program: ConicProgram, options: SolverOptions | None = None) -> ConicSolution:
    """Homogeneous self-dual interior-point solve of a ConicProgram."""
    opts = options or SolverOptions()
    blocks, c, A, recover, mapping = _split_free(program)
    ops = [_ConeOps(b) for b in blocks]
    dims = [op.dim for op in ops]
    N = sum(dims)
    m = A.shape[0]
    sl_int = []
    k = 0
    for d in dims:
        sl_int.append(slice(k, k + d))
        k += d

    nu = sum(op.degree for op in ops)
    e = np.concatenate([op.unit() for op in ops])

    s = e.copy()
    z = e.copy()
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0

    norm_r = 1.0 + np.linalg.norm(program.r)
    norm_c = 1.0 + np.linalg.norm(program.c)

    history: list[tuple] = []
    best = None  # (score, s, y, z, tau, iterations)
    status = MAXITER
    it = 0

    def metrics(s, y, z, tau):
        pobj = float(c @ s / tau)
        dobj = float(program.r @ y / tau)
        pres = float(np.linalg.norm(A @ s / tau - program.r)) / norm_r
        dres = float(np.linalg.norm(-A.T @ y / tau - z / tau + c)) / norm_c
        gap = abs(pobj - dobj) / (1.0 + max(abs(pobj), abs(dobj)))
        return pobj, dobj, pres, dres, gap

    for it in range(1, opts.max_iter + 1):
        rp = A @ s - program.r * tau
        rd = -A.T @ y - z + c * tau
        rg = -c @ s + program.r @ y - kappa
        mu = (s @ z + tau * kappa) / (nu + 1)

        pobj, dobj, pres, dres, gap = metrics(s, y, z, tau)
        history.append((pobj, dobj, pres, dres, gap))
        score = max(pres, dres, gap)
        if best is None or score < best[0]:
            best = (score, s.copy(), y.copy(), z.copy(), tau, it)
        if score <= opts.tol:
            status = OPTIMAL
            break

        # certificate of infeasibility / unboundedness via the self-dual ray
        if tau <= opts.infeas_ratio * min(1.0, kappa):
            by = float(program.r @ y)
            cs = float(c @ s)
            if by > 1e-12 and np.linalg.norm(-A.T @ y - z) <= 1e-7 * abs(by) * norm_c:
                status = INFEASIBLE
                break
            if -cs > 1e-12 and np.linalg.norm(A @ s) <= 1e-7 * abs(cs) * norm_r:
                status = UNBOUNDED
                break
            status = MAXITER
            break

        # NT scaling per block
        WinvT = np.zeros((N, N))
        Wm = np.zeros((N, N))
        lam = np.empty(N)
        Llam = np.zeros((N, N))
        try:
            for op, sl in zip(ops, sl_int):
                wi, wm, lm = op.scaling(s[sl], z[sl])
                WinvT[sl, sl] = wi
                Wm[sl, sl] = wm
                lam[sl] = lm
                Llam[sl, sl] = op.lam_lyap(lm)
        except (np.linalg.LinAlgError, NumericalBreakdown):
            break  # fall through with best iterate

        # full Newton system in (ds, dy, dz, dtau, dkappa)
        dim = 2 * N + m + 2
        K = np.zeros((dim, dim))
        iS, iY, iZ = slice(0, N), slice(N, N + m), slice(N + m, 2 * N + m)
        iT, iK = 2 * N + m, 2 * N + m + 1
        K[0:m, iS] = A
        K[0:m, iT] = -program.r
        K[m : m + N, iY] = -A.T
        K[m : m + N, iZ] = -np.eye(N)
        K[m : m + N, iT] = c
        K[m + N, iS] = -c
        K[m + N, iY] = program.r
        K[m + N, iK] = -1.0
        K[m + N + 1 : m + 2 * N + 1, iS] = Llam @ WinvT
        K[m + N + 1 : m + 2 * N + 1, iZ] = Llam @ Wm
        K[m + 2 * N + 1, iT] = kappa
        K[m + 2 * N + 1, iK] = tau

        lam_lam = np.concatenate([op.jordan(lam[sl], lam[sl]) for op, sl in zip(ops, sl_int)])

        def solve_kkt(rhs):
            reg = 0.0
            while True:
                try:
                    M = K if reg == 0.0 else K + reg * np.eye(dim)
                    return np.linalg.solve(M, rhs)
                except np.linalg.LinAlgError:
                    reg = opts.regularization if reg == 0.0 else reg * 100.0
                    if reg > 1e-6:
                        raise NumericalBreakdown(
                            "Newton system singular beyond regularization budget"
                        )

        rhs_aff = np.concatenate([-rp, -rd, [-rg], -lam_lam, [-tau * kappa]])
        d_aff = solve_kkt(rhs_aff)

        def step_len(ds, dz, dtau, dkappa):
            alpha = np.inf
            for op, sl in zip(ops, sl_int):
                alpha = min(alpha, op.max_step(s[sl], ds[sl]), op.max_step(z[sl], dz[sl]))
            if dtau < 0.0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0.0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        ds_a, dy_a, dz_a = d_aff[iS], d_aff[iY], d_aff[iZ]
        dt_a, dk_a = d_aff[iT], d_aff[iK]
        a_aff = min(1.0, step_len(ds_a, dz_a, dt_a, dk_a))
        mu_aff = (
            (s + a_aff * ds_a) @ (z + a_aff * dz_a)
            + (tau + a_aff * dt_a) * (kappa + a_aff * dk_a)
        ) / (nu + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        corr = np.concatenate(
            [
                op.jordan(WinvT[sl, sl] @ ds_a[sl], Wm[sl, sl] @ dz_a[sl])
                for op, sl in zip(ops, sl_int)
            ]
        )
        d_comp = sigma * mu * e - lam_lam - corr
        d_tk = sigma * mu - tau * kappa - dt_a * dk_a
        rhs = np.concatenate(
            [-(1 - sigma) * rp, -(1 - sigma) * rd, [-(1 - sigma) * rg], d_comp, [d_tk]]
        )
        d = solve_kkt(rhs)
        ds, dy, dz = d[iS], d[iY], d[iZ]
        dtau, dkappa = d[iT], d[iK]

        alpha = opts.step_fraction * step_len(ds, dz, dtau, dkappa)
        alpha = min(1.0, alpha)
        if not np.isfinite(alpha) or alpha <= 1e-13:
            break
        s = s + alpha * ds
        y = y + alpha * dy
        z = z + alpha * dz
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

    if status not in (OPTIMAL, INFEASIBLE, UNBOUNDED):
        # fall back to the best iterate seen
        score, s, y, z, tau, it_best = best
        status = OPTIMAL if score <= opts.accept_tol else MAXITER

    if status in (INFEASIBLE, UNBOUNDED):
        s_out = recover(s)
        w_out = program.c * 0.0
        return ConicSolution(
            s=s_out,
            y=y.copy(),
            w=w_out,
            status=status,
            primal_obj=np.nan,
            dual_obj=np.nan,
            residuals={"primal": np.nan, "dual": np.nan, "gap": np.nan},
            iterations=it,
            history=history,
        )

    pobj, dobj, pres, dres, gap = metrics(s, y, z, tau)
    s_out = recover(s / tau)
    y_out = y / tau
    w_out = program.c - program.A.T @ y_out
    return ConicSolution(
        s=s_out,
        y=y_out,
        w=w_out,
        status=status,
        primal_obj=float(program.c @ s_out),
        dual_obj=float(program.r @ y_out),
        residuals={"primal": pres, "dual": dres, "gap": gap},
        iterations=it,
        history=history,
    )


def extract_dual(solution: ConicSolution, program: ConicProgram) -> dict[str, np.ndarray]:
    """Duals of the named constraint groups of an Optimal solution."""
    if solution.status != OPTIMAL:
        raise NotOptimal(f"solution status is {solution.status}")
    return {name: solution.y[np.asarray(idx, dtype=int)] for name, idx in program.groups.items()}
