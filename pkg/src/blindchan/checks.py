"""Named invariant suites behind the `check` command.

Each check is a pure function returning (ok, detail).  The fast suite covers
oracle equivalences and algebraic identities and finishes well under a
minute; the full suite adds the Monte Carlo expectation identities and the
perturbation-bound sweep.  The Monte Carlo helpers are shared with the test
suite so both run the same code at the same tolerances.
"""

import hashlib

import numpy as np

from . import harness, metrics, sigops, spectral, xcorr
from .models import complex_gaussian

DEFAULT_SEED = 20240817


# ---------------------------------------------------------------------------
# Monte Carlo expectation helpers (shared with the acceptance tests)

def mean_filter_autocorr_error(filter_len, signal_len, dim, n_draws, rng):
    """Relative Frobenius deviation of the averaged circulant Gram of random
    in-model filters from K ||u||^2 I."""
    u = complex_gaussian(rng, dim)
    acc = np.zeros((signal_len, signal_len), dtype=np.complex128)
    for _ in range(n_draws):
        phi = complex_gaussian(rng, filter_len, dim)
        h = sigops.zero_pad(phi @ u, signal_len)
        ch = sigops.circulant(h)
        acc += ch.conj().T @ ch
    acc /= n_draws
    target = filter_len * np.linalg.norm(u) ** 2 * np.eye(signal_len)
    return float(np.linalg.norm(acc - target) / np.linalg.norm(target))


def mean_filter_basis_corr_error(filter_len, signal_len, dim, n_draws, rng):
    """Relative Frobenius deviation of the averaged filter/basis correlation
    from K e_1 u^H."""
    u = complex_gaussian(rng, dim)
    acc = np.zeros((signal_len, dim), dtype=np.complex128)
    for _ in range(n_draws):
        phi = complex_gaussian(rng, filter_len, dim)
        h = sigops.zero_pad(phi @ u, signal_len)
        padded = np.concatenate([phi, np.zeros((signal_len - filter_len, dim))])
        acc += sigops.circulant(h).conj().T @ padded
    acc /= n_draws
    target = np.zeros((signal_len, dim), dtype=np.complex128)
    target[0] = filter_len * np.conj(u)
    return float(np.linalg.norm(acc - target) / np.linalg.norm(target))


def mean_compressed_energy_errors(filter_len, signal_len, dim, n_draws, rng):
    """Relative Frobenius deviations of the averaged source-weighted block
    Gram, for independent blocks and for the same block twice.

    Targets: K^2 ||x||^2 ||u||^2 I_D (independent) and
    K^2 ||x||^2 (||u||^2 I_D + u u^H) (same block).
    """
    u = complex_gaussian(rng, dim)
    x = complex_gaussian(rng, signal_len)
    cx = sigops.circulant(x)
    cx_gram = cx.conj().T @ cx
    acc_indep = np.zeros((dim, dim), dtype=np.complex128)
    acc_same = np.zeros((dim, dim), dtype=np.complex128)
    pad_rows = np.zeros((signal_len - filter_len, dim))
    for _ in range(n_draws):
        phi = complex_gaussian(rng, filter_len, dim)
        phi_other = complex_gaussian(rng, filter_len, dim)
        h = sigops.zero_pad(phi @ u, signal_len)
        ch = sigops.circulant(h)
        core = ch.conj().T @ cx_gram @ ch
        padded = np.concatenate([phi, pad_rows])
        padded_other = np.concatenate([phi_other, pad_rows])
        acc_indep += padded_other.conj().T @ core @ padded_other
        acc_same += padded.conj().T @ core @ padded
    acc_indep /= n_draws
    acc_same /= n_draws
    scale = filter_len**2 * np.linalg.norm(x) ** 2
    target_indep = scale * np.linalg.norm(u) ** 2 * np.eye(dim)
    target_same = scale * (np.linalg.norm(u) ** 2 * np.eye(dim) + np.outer(u, u.conj()))
    err_indep = float(np.linalg.norm(acc_indep - target_indep) / np.linalg.norm(target_indep))
    err_same = float(np.linalg.norm(acc_same - target_same) / np.linalg.norm(target_same))
    return err_indep, err_same


def mean_noise_gram_error(n_channels, filter_len, signal_len, noise_var, n_draws, rng):
    """Relative Frobenius deviation of the averaged noise-only constraint Gram
    from noise_var * (M-1) * L * I."""
    size = n_channels * filter_len
    acc = np.zeros((size, size), dtype=np.complex128)
    for _ in range(n_draws):
        ws = [complex_gaussian(rng, signal_len, var=noise_var) for _ in range(n_channels)]
        acc += xcorr.cross_corr_matrix(ws, filter_len).dense
    acc /= n_draws
    target = xcorr.noise_gram_mean(n_channels, signal_len, noise_var) * np.eye(size)
    return float(np.linalg.norm(acc - target) / np.linalg.norm(target))


def davis_kahan_trials(n_trials, dim, rng):
    """Random premise-satisfying (A, E) pairs; returns how many satisfy the bound."""
    holds = 0
    for _ in range(n_trials):
        q, _ = np.linalg.qr(complex_gaussian(rng, dim, dim))
        gap = rng.uniform(0.5, 2.0)
        floor = rng.uniform(0.1, 1.0)
        lam = np.sort(rng.uniform(gap, 3 * gap, dim - 1))[::-1] + floor + gap
        lam = np.concatenate([lam, [floor]])
        a = (q * lam) @ q.conj().T
        e = complex_gaussian(rng, dim, dim)
        e = (e + e.conj().T) / 2
        e *= rng.uniform(0.1, 1.0) * min(gap / 5, floor) / np.linalg.norm(e, 2)
        report = spectral.davis_kahan_check(a, e)
        if report.premise_holds and report.lhs <= report.rhs + 1e-12:
            holds += 1
    return holds


# ---------------------------------------------------------------------------
# Individual named checks, each returning (ok, detail)

def check_conv_fft_vs_naive(rng):
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(4, 129))
        a = complex_gaussian(rng, L)
        b = complex_gaussian(rng, L)
        naive = np.array(
            [sum(a[k] * b[(l - k) % L] for k in range(L)) for l in range(L)]
        )
        dev = np.max(np.abs(sigops.circular_convolve(a, b) - naive))
        worst = max(worst, dev / (np.linalg.norm(a) * np.linalg.norm(b)))
    return worst <= 1e-12, f"max scaled deviation {worst:.2e}"


def check_conv_commutativity(rng):
    worst = 0.0
    for _ in range(50):
        L = int(rng.integers(4, 129))
        a = complex_gaussian(rng, L)
        b = complex_gaussian(rng, L)
        worst = max(
            worst,
            np.max(np.abs(sigops.circular_convolve(a, b) - sigops.circular_convolve(b, a))),
        )
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_conv_linear_circular(rng):
    worst = 0.0
    for _ in range(50):
        K = int(rng.integers(2, 17))
        L = int(rng.integers(2 * K, 4 * K + 1))
        f = complex_gaussian(rng, K)
        g = complex_gaussian(rng, K)
        circ = sigops.circular_convolve(sigops.zero_pad(f, L), sigops.zero_pad(g, L))
        lin = np.convolve(f, g)
        worst = max(worst, np.max(np.abs(circ[: 2 * K - 1] - lin)))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_adjoint_conv_matrix(rng):
    worst = 0.0
    for _ in range(50):
        K = int(rng.integers(1, 17))
        L = int(rng.integers(K, 65))
        v = complex_gaussian(rng, L)
        h = complex_gaussian(rng, K)
        z = complex_gaussian(rng, L)
        lhs = np.vdot(z, sigops.convolve_short(v, h))
        rhs = np.vdot(sigops.convolve_short_adjoint(v, z, K), h)
        scale = max(1.0, abs(lhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst <= 1e-12, f"max scaled deviation {worst:.2e}"


def check_adjoint_restrictions(rng):
    worst = 0.0
    for kind in sigops.RESTRICTION_KINDS:
        for _ in range(20):
            K = int(rng.integers(1, 9))
            L = int(rng.integers(3 * K, 6 * K + 4))
            v = complex_gaussian(rng, L)
            idx = sigops.restriction_indices(kind, K, L)
            z = complex_gaussian(rng, len(idx))
            lhs = np.vdot(z, sigops.restrict(v, kind, K))
            rhs = np.vdot(sigops.restrict_adjoint(z, kind, K, L), v)
            worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_xcorr_fast_vs_explicit(rng):
    worst = 0.0
    for _ in range(20):
        ys = [complex_gaussian(rng, 32) for _ in range(3)]
        explicit = xcorr.cross_relation_matrix(ys, 8)
        oracle = explicit.conj().T @ explicit
        fast = xcorr.cross_corr_matrix(ys, 8).dense
        worst = max(worst, np.linalg.norm(fast - oracle) / np.linalg.norm(oracle))
    return worst <= 1e-10, f"max relative Frobenius error {worst:.2e}"


def check_xcorr_hermitian_psd(rng):
    worst_herm = 0.0
    worst_neg = 0.0
    for _ in range(50):
        M = int(rng.integers(2, 5))
        K = int(rng.integers(2, 9))
        L = int(rng.integers(3 * K, 6 * K))
        ys = [complex_gaussian(rng, L) for _ in range(M)]
        a = xcorr.cross_corr_matrix(ys, K).dense
        worst_herm = max(
            worst_herm, np.linalg.norm(a - a.conj().T) / max(np.linalg.norm(a), 1e-30)
        )
        w = np.linalg.eigvalsh((a + a.conj().T) / 2)
        worst_neg = max(worst_neg, -w[0] / w[-1])
    ok = worst_herm <= 1e-10 and worst_neg <= 1e-10
    return ok, f"hermitian dev {worst_herm:.2e}, min eig ratio {-worst_neg:.2e}"


def check_noiseless_null_vector(rng):
    """Noiseless Gram annihilates the true channels and has a 1-D null space."""
    worst_null = 0.0
    worst_second = np.inf
    for _ in range(10):
        M, K = 3, 8
        L = 4 * K
        h = complex_gaussian(rng, M, K)
        x = complex_gaussian(rng, L)
        ys = [sigops.convolve_short(x, h[m]) for m in range(M)]
        a = xcorr.cross_corr_matrix(ys, K).dense
        stacked = h.reshape(-1)
        quad = float(np.real(np.vdot(stacked, a @ stacked))) / np.linalg.norm(stacked) ** 2
        w = np.linalg.eigvalsh((a + a.conj().T) / 2)
        worst_null = max(worst_null, abs(quad) / w[-1])
        worst_second = min(worst_second, w[1] / w[-1])
    ok = worst_null <= 1e-10 and worst_second > 1e-8
    return ok, f"null residual {worst_null:.2e}, smallest second ratio {worst_second:.2e}"


def check_eig_reconstruction(rng):
    worst_rec = 0.0
    worst_trace = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 33))
        a = complex_gaussian(rng, n, n)
        a = (a + a.conj().T) / 2
        res = spectral.eig_hermitian(a)
        rec = (res.eigenvectors * res.eigenvalues[None, :]) @ res.eigenvectors.conj().T
        na = np.linalg.norm(a)
        worst_rec = max(worst_rec, np.linalg.norm(a - rec) / na)
        worst_trace = max(
            worst_trace, abs(res.eigenvalues.sum() - np.trace(a).real) / (na * n)
        )
    ok = worst_rec <= 1e-9 and worst_trace <= 1e-9
    return ok, f"reconstruction {worst_rec:.2e}, trace deviation {worst_trace:.2e}"


def check_shift_invariance(rng):
    # A gap between the two smallest eigenvalues keeps the argmin eigenvector
    # numerically identifiable; without one the invariant is vacuous.
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 17))
        q, _ = np.linalg.qr(complex_gaussian(rng, n, n))
        lam = np.concatenate([[0.0], rng.uniform(0.1, 1.0, n - 1)])
        a = (q * lam) @ q.conj().T
        sigma = float(rng.uniform(-1, 3))
        _, v1 = spectral.smallest_eigvec(a)
        _, v2 = spectral.smallest_eigvec(a + sigma * np.eye(n))
        worst = max(worst, metrics.sin_angle(v1, v2))
    return worst <= 1e-10, f"max sin-angle {worst:.2e}"


def check_angle_inequality(rng):
    ok = True
    for _ in range(1000):
        n = int(rng.integers(2, 17))
        a = complex_gaussian(rng, n)
        b = complex_gaussian(rng, n)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        s = metrics.sin_angle(a, b)
        d = metrics.min_phase_distance(a, b)
        if not (s <= d + 1e-12 and d <= np.sqrt(2) * s + 1e-12):
            ok = False
            break
    return ok, "sin <= min-phase distance <= sqrt(2) sin on 1000 unit pairs"


def check_percentile_nearest_rank(rng):
    cases = [
        ([0.1], 95, 0.1),
        ([i / 100 for i in range(1, 101)], 95, 0.95),
        ([0.2, 0.4, 0.6, 0.8], 50, 0.4),
    ]
    ok = all(harness.aggregate_percentile(vals, p) == expect for vals, p, expect in cases)
    return ok, "nearest-rank on reference lists"


def check_determinism(rng):
    spec = harness.ExperimentSpec(
        filter_len=8, n_channels=3, subspace_dim=2, l_over_k=4, snr_db=20,
        trials=1, methods=("cc", "sccc"), seed=123,
    )
    first = harness.run_trial(spec, 0)
    second = harness.run_trial(spec, 0)
    ok = first == second
    return ok, "repeated (seed, trial) bit-identical"


def check_mean_noise_gram(rng):
    err = mean_noise_gram_error(3, 8, 32, 0.7, 2000, rng)
    return err <= 0.05, f"relative Frobenius error {err:.4f} (tol 0.05)"


def check_mean_filter_autocorr(rng):
    err = mean_filter_autocorr_error(8, 32, 3, 2000, rng)
    return err <= 0.05, f"relative Frobenius error {err:.4f} (tol 0.05)"


def check_mean_filter_basis_corr(rng):
    err = mean_filter_basis_corr_error(8, 32, 3, 2000, rng)
    return err <= 0.05, f"relative Frobenius error {err:.4f} (tol 0.05)"


def check_mean_compressed_energy(rng):
    err_indep, err_same = mean_compressed_energy_errors(8, 32, 3, 2000, rng)
    ok = err_indep <= 0.05 and err_same <= 0.05
    return ok, f"relative errors {err_indep:.4f} / {err_same:.4f} (tol 0.05)"


def check_davis_kahan_bound(rng):
    holds = davis_kahan_trials(200, 12, rng)
    return holds == 200, f"bound held on {holds}/200 premise-satisfying pairs"


def check_snr_empirical_vs_formula(rng):
    x = complex_gaussian(rng, 32)
    u = complex_gaussian(rng, 9)
    noise_var = 0.5
    formula = metrics.snr(8, 32, 3, x, u, noise_var, mode="formula")
    empirical = metrics.snr(8, 32, 3, x, u, noise_var, mode="empirical", n_draws=2000, rng=rng)
    rel = abs(empirical - formula) / formula
    return rel <= 0.03, f"relative deviation {rel:.4f} (tol 0.03)"


FAST_CHECKS = (
    ("conv_fft_vs_naive", check_conv_fft_vs_naive),
    ("conv_commutativity", check_conv_commutativity),
    ("conv_linear_circular", check_conv_linear_circular),
    ("adjoint_conv_matrix", check_adjoint_conv_matrix),
    ("adjoint_restrictions", check_adjoint_restrictions),
    ("xcorr_fast_vs_explicit", check_xcorr_fast_vs_explicit),
    ("xcorr_hermitian_psd", check_xcorr_hermitian_psd),
    ("noiseless_null_vector", check_noiseless_null_vector),
    ("eig_reconstruction", check_eig_reconstruction),
    ("shift_invariance", check_shift_invariance),
    ("angle_inequality", check_angle_inequality),
    ("percentile_nearest_rank", check_percentile_nearest_rank),
    ("determinism", check_determinism),
)

FULL_CHECKS = FAST_CHECKS + (
    ("mean_noise_gram", check_mean_noise_gram),
    ("mean_filter_autocorr", check_mean_filter_autocorr),
    ("mean_filter_basis_corr", check_mean_filter_basis_corr),
    ("mean_compressed_energy", check_mean_compressed_energy),
    ("davis_kahan_bound", check_davis_kahan_bound),
    ("snr_empirical_vs_formula", check_snr_empirical_vs_formula),
)


def run_checks(level="fast", seed=DEFAULT_SEED, report=print):
    """Run the named invariant suite; returns the list of failed names."""
    suite = FAST_CHECKS if level == "fast" else FULL_CHECKS
    failures = []
    for name, fn in suite:
        tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")
        rng = np.random.default_rng([seed, tag])
        ok, detail = fn(rng)
        report(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures.append(name)
    return failures
