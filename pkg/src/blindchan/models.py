"""Random instance generation: subspace bases, channels, sources, noise.

Every draw comes from a seeded substream so experiments are reproducible and
stream-isolated: a (master seed, purpose label, trial index) triple always
yields the same values regardless of evaluation order or thread count, and
adding one more consumer never perturbs the others.

Complex Gaussian convention: CN(0, s^2) has independent real and imaginary
parts N(0, s^2/2), so E|g|^2 = s^2.  The expectation identities the library
checks hold with exactly this normalization.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, DimensionError, InputError
from .sigops import as_signal


class RngStreams:
    """Deterministic factory of independent random substreams.

    Substreams are keyed by a purpose label and an integer index; the label
    is hashed so that, e.g., enabling an extra consumer never shifts the
    draws other labels see.
    """

    def __init__(self, master_seed):
        self.master_seed = int(master_seed)

    def stream(self, label, index=0):
        tag = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")
        return np.random.default_rng([self.master_seed, tag, int(index)])


def complex_gaussian(rng, *shape, var=1.0):
    """iid CN(0, var) array of the given shape."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class SubspaceModel:
    """Per-channel bases Phi_m stacked as an (M, K, D) array.

    Applying the model to stacked coefficients concatenates Phi_m u_m in
    channel order (block-diagonal action).
    """

    bases: np.ndarray
    kind: str = "custom"

    @property
    def n_channels(self):
        return self.bases.shape[0]

    @property
    def filter_len(self):
        return self.bases.shape[1]

    @property
    def dim(self):
        return self.bases.shape[2]

    def apply(self, u):
        """Map stacked coefficients u in C^{MD} to stacked filters in C^{MK}."""
        M, K, D = self.bases.shape
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (M * D,):
            raise DimensionError(f"expected coefficients of length {M * D}, got shape {u.shape}")
        return np.einsum("mkd,md->mk", self.bases, u.reshape(M, D)).reshape(M * K)

    def block_diag(self):
        """Dense MK x MD block-diagonal matrix (small-scale oracles)."""
        M, K, D = self.bases.shape
        out = np.zeros((M * K, M * D), dtype=np.complex128)
        for m in range(M):
            out[m * K : (m + 1) * K, m * D : (m + 1) * D] = self.bases[m]
        return out

    def smallest_singular_value(self):
        return float(min(np.linalg.svd(self.bases[m], compute_uv=False)[-1]
                         for m in range(self.n_channels)))

    def validate(self):
        if self.smallest_singular_value() <= 0:
            raise ConfigurationError("subspace basis is rank deficient")
        return self

    def orthonormalized(self):
        """Same column spans with orthonormal columns per block."""
        q = np.stack([np.linalg.qr(self.bases[m])[0] for m in range(self.n_channels)])
        return SubspaceModel(bases=q, kind=self.kind)


@dataclass(frozen=True)
class ChannelEnsemble:
    """M length-K impulse responses and their stacked concatenation."""

    filters: np.ndarray  # (M, K)
    stacked: np.ndarray = field(init=False)  # (M*K,)

    def __post_init__(self):
        object.__setattr__(self, "stacked", self.filters.reshape(-1).copy())

    @property
    def n_channels(self):
        return self.filters.shape[0]

    @property
    def filter_len(self):
        return self.filters.shape[1]


def gen_gaussian_subspace(filter_len, dim, n_channels, rng):
    """Generic model: independent K x D bases with iid CN(0,1) entries."""
    if not 1 <= dim <= filter_len:
        raise ConfigurationError(f"need 1 <= D <= K, got D={dim}, K={filter_len}")
    bases = complex_gaussian(rng, n_channels, filter_len, dim)
    return SubspaceModel(bases=bases, kind="gaussian")


def bandpass_pulse(t, filter_len):
    """Default parametric waveform: Hann-windowed complex exponential.

    Compact support |t| <= K/4 and center frequency 0.25 of Nyquist
    (0.125 cycles/sample).  The compact window keeps the family's spectrum
    strictly concentrated, which is what makes the non-subspace baselines
    ill-conditioned on it.
    """
    half = filter_len / 4.0
    t = np.asarray(t, dtype=float)
    window = np.where(np.abs(t) <= half, np.cos(np.pi * t / (2 * half)) ** 2, 0.0)
    return window * np.exp(2j * np.pi * 0.125 * t)


def sample_parametric_filter(pulse, filter_len, rng):
    """One training filter: the pulse at a continuous random shift and log-uniform amplitude."""
    half = filter_len / 4.0
    shift = rng.uniform(half, filter_len - half)
    amp = np.exp(rng.uniform(np.log(0.5), np.log(2.0)))
    return amp * pulse(np.arange(filter_len) - shift, filter_len)


def gen_pca_subspace(pulse, filter_len, dim, n_train, rng, n_channels=1):
    """Data-driven model: top-D eigenvectors of the training second-moment matrix.

    Draws n_train filters from the parametric family, forms the K x K sample
    second-moment matrix and keeps its D leading orthonormal eigenvectors,
    shared by all channels.
    """
    if n_train < dim:
        raise ConfigurationError(f"need n_train >= D, got n_train={n_train}, D={dim}")
    train = np.stack([sample_parametric_filter(pulse, filter_len, rng) for _ in range(n_train)])
    # structural rank guard: exact zeros only, so a smooth family with tiny
    # trailing eigenvalues still yields its full orthonormal eigenbasis
    if np.count_nonzero(np.linalg.svd(train, compute_uv=False)) < dim:
        raise ConfigurationError(
            f"training family spans fewer than D={dim} directions; "
            "increase n_train or lower D"
        )
    second_moment = train.conj().T @ train / n_train
    _, v = np.linalg.eigh((second_moment + second_moment.conj().T) / 2)
    basis = v[:, ::-1][:, :dim]
    bases = np.repeat(basis[None, :, :], n_channels, axis=0)
    return SubspaceModel(bases=bases.copy(), kind="pca")


def default_train_size(dim):
    """Training draws used for the PCA basis unless overridden."""
    return 50 * dim


def gen_channels_in_subspace(model, rng, norm_profile="flat"):
    """Draw coefficients u and the channels h = Phi u they induce.

    norm_profile "flat" rescales every block to unit norm (flatness 1);
    "spiky" puts all energy on the first block (flatness sqrt(M)).
    """
    M, K, D = model.bases.shape
    u = complex_gaussian(rng, M, D)
    if norm_profile == "flat":
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
    elif norm_profile == "spiky":
        u[1:] = 0.0
        u[0] = u[0] / np.linalg.norm(u[0])
    else:
        raise InputError(f"unknown norm profile {norm_profile!r}")
    u_flat = u.reshape(-1)
    filters = model.apply(u_flat).reshape(M, K)
    return u_flat, ChannelEnsemble(filters=filters)


def gen_source(kind, signal_len, sigma_x, rng):
    """Common source of length L.

    "gaussian": iid CN(0, sigma_x^2).  "flat_spectrum": all DFT magnitudes
    equal to sqrt(L)*sigma_x with seeded uniform phases, so the circulant
    Gram of the source is an exact multiple of the identity.
    """
    if signal_len < 1:
        raise ConfigurationError(f"need L >= 1, got {signal_len}")
    if kind == "gaussian":
        return complex_gaussian(rng, signal_len, var=sigma_x**2)
    if kind == "flat_spectrum":
        phase = rng.uniform(0.0, 2 * np.pi, signal_len)
        spec = np.sqrt(signal_len) * sigma_x * np.exp(1j * phase)
        return np.fft.ifft(spec)
    raise InputError(f"unknown source kind {kind!r}")


def add_noise(s, sigma_w, rng):
    """Add iid CN(0, sigma_w^2) noise; sigma_w = 0 returns the signal unchanged."""
    s = as_signal(s)
    if sigma_w < 0:
        raise InputError(f"noise level must be >= 0, got {sigma_w}")
    if sigma_w == 0:
        return s.copy()
    return s + complex_gaussian(rng, len(s), var=sigma_w**2)


def sigma_for_snr(eta_target, filter_len, signal_len, n_channels, x, u):
    """Noise variance achieving a target SNR: K ||x||^2 ||u||^2 / (M L eta)."""
    if eta_target <= 0:
        raise ConfigurationError(f"target SNR must be positive, got {eta_target}")
    x = as_signal(x)
    u = np.asarray(u, dtype=np.complex128)
    ex = float(np.linalg.norm(x) ** 2)
    eu = float(np.linalg.norm(u) ** 2)
    if ex == 0 or eu == 0:
        raise ConfigurationError("source and coefficients must have nonzero energy")
    return filter_len * ex * eu / (n_channels * signal_len * eta_target)


def save_basis(path, model):
    """Write bases to a text file: one complex entry per line, column-major
    within each K x D block, blocks in channel order."""
    M, K, D = model.bases.shape
    with open(path, "w") as fh:
        fh.write(f"# channels={M} filter_len={K} dim={D}\n")
        for m in range(M):
            for value in model.bases[m].flatten(order="F"):
                fh.write(f"{value.real:.17g} {value.imag:.17g}\n")


def load_basis(path, filter_len, dim, n_channels):
    """Read a custom basis saved in the save_basis layout."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            re_part, im_part = line.split()
            rows.append(complex(float(re_part), float(im_part)))
    expected = n_channels * filter_len * dim
    if len(rows) != expected:
        raise ConfigurationError(
            f"basis file holds {len(rows)} entries, expected {expected} "
            f"(M={n_channels}, K={filter_len}, D={dim})"
        )
    flat = np.asarray(rows, dtype=np.complex128)
    bases = np.stack(
        [
            flat[m * filter_len * dim : (m + 1) * filter_len * dim].reshape(
                (filter_len, dim), order="F"
            )
            for m in range(n_channels)
        ]
    )
    return SubspaceModel(bases=bases, kind="custom").validate()
