"""
Channel Engine
Builds the superoperators of a monitored model: the Liouvillian L, jump maps
J_k, the no-jump generator L_0 = L - sum_{k monitored} J_k, the channel maps
M_k = -J_k L_0^-1 and their sum M, plus the steady state, the jump steady
state pi = J rho_ss / K and the spectrum of M.

Also hosts the Drazin-inverse machinery used to cross-check L_0^-1 and M.
"""
import warnings
from typing import Dict, Optional

import numpy as np
from scipy import linalg

from src.algebra.dense import (
    eig,
    hermitize,
    max_norm,
    min_eigenvalue,
    null_vector,
    random_density,
    sandwich,
    superop_left,
    superop_right,
    trace_functional,
    unvectorize,
    vectorize,
)
from src.algebra.exact_matrix import exact_inverse, exact_null_vector, trace_row
from src.algebra.scalars import GaussianRational
from src.config.analysis_config import COND_MAX, DRAZIN_TOL, TOL_PSD, TOL_RANK, VERBOSE_LOGGING
from src.models.errors import (
    DarkSubspaceError,
    DegeneracyError,
    NumericError,
    SingularMatrixError,
    UnsupportedModelError,
)
from src.models.open_system import OpenSystemModel
from src.models.process import (
    ChannelProcess,
    DrazinData,
    DrazinReport,
    PositivityReport,
    Superoperator,
    SuperoperatorRole,
)

_MINUS_I = GaussianRational(0, -1)


class ChannelEngine:
    """
    Superoperator construction for exact and float models

    Usage:
        engine = ChannelEngine()
        process = engine.build_channel_maps(model)
    """

    def __init__(self, tol_rank: float = TOL_RANK, cond_max: float = COND_MAX, verbose: bool = None):
        self.tol_rank = tol_rank
        self.cond_max = cond_max
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose

    # ========== Generators ==========

    def _dissipator_parts(self, model: OpenSystemModel, label: str):
        channel = model.jump(label)
        op = channel.operator
        if model.is_exact:
            op_dag = op.dagger()
            jump = sandwich(op, op_dag).scale(channel.rate)
            decay = op_dag @ op
            anticommutator = (superop_left(decay) + superop_right(decay)).scale(channel.rate / 2)
        else:
            op = np.asarray(op, dtype=complex)
            rate = float(channel.rate)
            jump = rate * sandwich(op, op.conj().T)
            decay = op.conj().T @ op
            anticommutator = 0.5 * rate * (superop_left(decay) + superop_right(decay))
        return jump, anticommutator

    def build_jump(self, model: OpenSystemModel, label: str) -> Superoperator:
        """J_k rho = rate * L_k rho L_k^dagger"""
        jump, _ = self._dissipator_parts(model, label)
        return Superoperator(model.dim, jump, SuperoperatorRole.JUMP, label)

    def build_liouvillian(self, model: OpenSystemModel) -> Superoperator:
        """-i[H, rho] + sum_k (J_k rho - 1/2 {L_k^dagger L_k, rho}) over every channel"""
        h = model.hamiltonian
        commutator = superop_left(h) - superop_right(h)
        if model.is_exact:
            generator = commutator.scale(_MINUS_I)
        else:
            generator = -1j * commutator
        for label in model.labels:
            jump, anticommutator = self._dissipator_parts(model, label)
            generator = generator + jump - anticommutator
        return Superoperator(model.dim, generator, SuperoperatorRole.LIOUVILLIAN)

    def build_no_jump(self, model: OpenSystemModel, liouvillian: Superoperator = None) -> Superoperator:
        """L_0 = L - sum over monitored J_k; unmonitored jumps stay inside L_0"""
        liouvillian = liouvillian or self.build_liouvillian(model)
        generator = liouvillian.matrix
        for label in model.monitored:
            generator = generator - self.build_jump(model, label).matrix
        return Superoperator(model.dim, generator, SuperoperatorRole.NO_JUMP)

    # ========== Channel process ==========

    def _invert_no_jump(self, no_jump: Superoperator):
        if no_jump.is_exact:
            try:
                return exact_inverse(no_jump.matrix)
            except SingularMatrixError as e:
                raise DarkSubspaceError(f"No-jump generator is singular: dark subspace present ({e})")

        matrix = np.asarray(no_jump.matrix, dtype=complex)
        condition = np.linalg.cond(matrix)
        if not np.isfinite(condition) or condition > self.cond_max:
            raise DarkSubspaceError(
                f"No-jump generator is numerically singular (cond={condition:.3e}): dark subspace present",
                residual=float(condition),
            )
        # L_0 is factorized once; every channel map reuses the inverse
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            factors = linalg.lu_factor(matrix)
        return linalg.lu_solve(factors, np.eye(matrix.shape[0], dtype=complex))

    def build_channel_maps(self, model: OpenSystemModel) -> ChannelProcess:
        """
        Build M_k, M, rho_ss, K, pi and the spectrum of M

        Raises:
            DarkSubspaceError: L_0 is singular
            DegeneracyError: the steady state is not unique
        """
        d = model.dim
        liouvillian = self.build_liouvillian(model)
        no_jump = self.build_no_jump(model, liouvillian)
        no_jump_inverse = self._invert_no_jump(no_jump)
        jumps = {label: self.build_jump(model, label) for label in model.alphabet}

        channel_maps: Dict[str, Superoperator] = {}
        for label, jump in jumps.items():
            channel_maps[label] = Superoperator(
                d, -(jump.matrix @ no_jump_inverse), SuperoperatorRole.CHANNEL_MAP, label
            )
        total = None
        for superop in channel_maps.values():
            total = superop.matrix if total is None else total + superop.matrix
        total_map = Superoperator(d, total, SuperoperatorRole.TOTAL_MAP)

        if model.is_exact:
            steady_state = exact_null_vector(liouvillian.matrix, d)
            jumped = None
            for jump in jumps.values():
                term = jump.matrix @ steady_state.vectorize()
                jumped = term if jumped is None else jumped + term
            activity_scalar = (trace_row(d) @ jumped).scalar()
            if activity_scalar.is_zero():
                raise DarkSubspaceError("Steady state emits no monitored jumps (K = 0)")
            activity = activity_scalar.re if activity_scalar.im == 0 else activity_scalar
            jss = (jumped / activity_scalar).unvectorize(d)
            total_float = total.to_numpy()
            stationary = (total @ jss.vectorize()) == jss.vectorize()
            diagnostics = {"exact_stationarity": stationary}
        else:
            steady_state = null_vector(liouvillian.matrix, self.tol_rank)
            jumped = sum(jump.matrix @ vectorize(steady_state) for jump in jumps.values())
            activity = float(np.real(trace_functional(d) @ jumped))
            if activity <= 0:
                raise DarkSubspaceError(f"Steady state emits no monitored jumps (K = {activity:.3e})")
            jss = hermitize(unvectorize(jumped / activity, d))
            total_float = total
            diagnostics = {}

        spectrum = eig(total_float, self.cond_max)
        pi_vec = vectorize(jss.to_numpy() if model.is_exact else jss)
        tf = trace_functional(d)
        diagnostics.update({
            "stationarity_residual": max_norm(total_float @ pi_vec - pi_vec),
            "trace_residual": max_norm(tf @ total_float - tf),
            "spectral_radius": spectrum.spectral_radius,
            "diagonalizable": spectrum.diagonalizable,
        })

        process = ChannelProcess(
            model=model,
            liouvillian=liouvillian,
            no_jump=no_jump,
            jumps=jumps,
            channel_maps=channel_maps,
            total_map=total_map,
            no_jump_inverse=no_jump_inverse,
            steady_state=steady_state,
            jss=jss,
            activity=activity,
            spectrum=spectrum,
            diagnostics=diagnostics,
        )
        if self.verbose:
            print(f"✓ Channel process for {model.name}: K={float(complex(activity).real):.6g}, "
                  f"max|mu|={spectrum.spectral_radius:.6g}")
        return process

    # ========== Positivity ==========

    def positivity_check(
        self,
        process: ChannelProcess,
        label: str,
        trials: int = 100,
        seed=None,
        tol_psd: float = TOL_PSD,
        strict: bool = False,
    ) -> PositivityReport:
        """
        Apply M_k to random density matrices and record the worst minimum eigenvalue

        Raises:
            NumericError: strict mode and a violation beyond tol_psd
        """
        fp = process.to_float()
        matrix = fp.channel_matrix(label)
        rng = np.random.default_rng(seed)
        d = fp.dim
        worst = np.inf
        for _ in range(trials):
            rank = int(rng.integers(1, d + 1))
            rho = random_density(d, rng, rank)
            image = unvectorize(matrix @ vectorize(rho), d)
            worst = min(worst, min_eigenvalue(image))
        report = PositivityReport(label, trials, float(worst), tol_psd)
        if not report.passed:
            message = f"M_{label} produced a non-PSD image (min eigenvalue {worst:.3e})"
            print(f"❌ {message}")
            if strict:
                raise NumericError(message, residual=float(-worst))
        return report

    # ========== Drazin inverse ==========

    def drazin_inverse(self, process: ChannelProcess) -> DrazinData:
        """
        L+ = (L - P)^-1 Q with P = |rho_ss>><<1| and Q = 1 - P

        (L - P) acts as L on trace-zero operators and as -1 on rho_ss, so its
        inverse restricted to the range of Q is the inverse of L there.

        Raises:
            DegeneracyError: the restricted generator is singular
        """
        fp = process.to_float()
        d = fp.dim
        n = d * d
        generator = fp.liouvillian.matrix
        steady = vectorize(fp.steady_state)
        tf = trace_functional(d)
        projector = np.outer(steady, tf)
        complement = np.eye(n, dtype=complex) - projector

        shifted = generator - projector
        condition = np.linalg.cond(shifted)
        if not np.isfinite(condition) or condition > self.cond_max:
            raise DegeneracyError(
                f"Liouvillian restricted to the trace-zero sector is singular (cond={condition:.3e})",
                residual=float(condition),
            )
        drazin = linalg.solve(shifted, complement)

        jump_total = sum(fp.jump_matrix(k) for k in fp.alphabet)
        b_matrix = linalg.inv(jump_total @ drazin - np.eye(n))
        g = complex(tf @ b_matrix @ jump_total @ steady)
        residual = max(max_norm(generator @ drazin - complement), max_norm(drazin @ generator - complement))
        return DrazinData(
            drazin=Superoperator(d, drazin, SuperoperatorRole.DRAZIN),
            b_matrix=b_matrix,
            g=g,
            steady_vector=steady,
            diagnostics={"identity_residual": residual, "condition": float(condition)},
        )

    def eigen_drazin(self, liouvillian: np.ndarray, tol: float = None) -> np.ndarray:
        """Drazin inverse as sum over nonzero eigenvalues lambda_j^-1 |x_j>><<y_j|"""
        tol = self.tol_rank if tol is None else tol
        spectrum = eig(liouvillian, self.cond_max)
        if not spectrum.diagonalizable:
            raise NumericError("Eigen-sum Drazin inverse needs a diagonalizable Liouvillian")
        scale = max(1.0, spectrum.spectral_radius)
        keep = np.abs(spectrum.eigenvalues) > tol * scale
        right = spectrum.right[:, keep]
        left = spectrum.left[keep, :]
        return right @ np.diag(1.0 / spectrum.eigenvalues[keep]) @ left

    def verify_drazin_relations(
        self,
        process: ChannelProcess,
        drazin: Optional[DrazinData] = None,
        tol: float = DRAZIN_TOL,
    ) -> DrazinReport:
        """
        Rebuild L_0^-1 and M from the Drazin inverse and compare with the direct ones

            L_0^-1 = -L+ B + g^-1 (L+ B J - 1)|rho_ss>><<1|B
            M      = 1 + B - g^-1 B J |rho_ss>><<1| B
            B^-1   = -|rho_ss>><<1| - L_0 L+

        Raises:
            UnsupportedModelError: some channel is unmonitored
        """
        if not process.model.fully_monitored:
            raise UnsupportedModelError(
                "Drazin relations hold for fully monitored models only; "
                f"unmonitored channels: {sorted(set(process.model.labels) - set(process.model.monitored))}"
            )
        drazin = drazin or self.drazin_inverse(process)
        fp = process.to_float()
        d = fp.dim
        n = d * d
        identity = np.eye(n, dtype=complex)
        tf = trace_functional(d)
        steady = drazin.steady_vector
        ld = drazin.drazin.matrix
        b = drazin.b_matrix
        g = drazin.g
        jump_total = sum(fp.jump_matrix(k) for k in fp.alphabet)
        tf_b = tf @ b

        no_jump_inverse_rhs = -ld @ b + (1.0 / g) * np.outer((ld @ b @ jump_total - identity) @ steady, tf_b)
        total_map_rhs = identity + b - (1.0 / g) * np.outer(b @ jump_total @ steady, tf_b)
        b_inverse_rhs = -np.outer(steady, tf) - fp.no_jump.matrix @ ld

        complement = identity - np.outer(steady, tf)
        report = DrazinReport(
            no_jump_inverse_deviation=max_norm(no_jump_inverse_rhs - fp.no_jump_inverse),
            total_map_deviation=max_norm(total_map_rhs - fp.total_map.matrix),
            b_inverse_deviation=max_norm(b_inverse_rhs @ b - identity),
            drazin_identity_deviation=max_norm(fp.liouvillian.matrix @ ld - complement),
            tolerance=tol,
        )
        if not report.consistent:
            print(f"⚠️  Drazin relations inconsistent for {process.model.name}: {report.to_dict()}")
        elif self.verbose:
            print(f"✓ Drazin relations hold for {process.model.name}")
        return report
