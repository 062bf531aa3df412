"""Uniform periodic grid on [0, 1) and the discrete operators built on it.

Grid functions are plain float64 arrays of length n sampled at x_j = j/n,
with no duplicated endpoint.  The node count is restricted to powers of two
so spectral transforms stay exact and cheap.
"""

from __future__ import annotations

import numpy as np

_TWO_PI = 2.0 * np.pi


def greens_function(d):
    """Periodic kernel of (1 - d^2/dx^2)^{-1} on a unit circle.

    The argument is reduced to its fractional representative in [0, 1)
    before evaluation, so any real separation is accepted.  Normalised:
    the kernel integrates to one over a period.
    """
    r = np.asarray(d, dtype=float) % 1.0
    return np.cosh(r - 0.5) / (2.0 * np.sinh(0.5))


class PeriodicGrid:
    """Node set x_j = j/n with quadrature, integration and Helmholtz inverses.

    Parameters
    ----------
    n : int
        Number of nodes, a power of two, at least 16.
    """

    def __init__(self, n: int):
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 16, got {n}")
        self.n = int(n)
        self.h = 1.0 / n
        self.x = np.arange(n) / n
        self.wavenumbers = np.fft.rfftfreq(n, self.h)
        self._ik = _TWO_PI * 1j * self.wavenumbers
        self._helm = 1.0 / (1.0 + _TWO_PI**2 * self.wavenumbers**2)
        self._inv_n = 1.0 / n
        inv = np.zeros(n // 2 + 1, dtype=complex)
        inv[1:] = 1.0 / self._ik[1:]
        self._inv_ik = inv

    def __repr__(self):
        return f"PeriodicGrid(n={self.n})"

    def check(self, w) -> np.ndarray:
        """Validate a grid function: length n, all entries finite."""
        w = np.asarray(w, dtype=float)
        if w.shape != (self.n,):
            raise ValueError(f"expected shape ({self.n},), got {w.shape}")
        if not np.isfinite(w).all():
            bad = np.flatnonzero(~np.isfinite(w))
            raise ValueError(f"non-finite values at nodes {bad[:8].tolist()}")
        return w

    def quad(self, w) -> float:
        """Trapezoid quadrature over the period, (1/n) * sum(w)."""
        return float(np.mean(self.check(w)))

    def cumint(self, w) -> np.ndarray:
        """Running trapezoid integral, anchored so the first node is 0.

        The full-period total (last entry plus the closing panel) equals
        quad(w) exactly.
        """
        w = self.check(w)
        out = np.empty(self.n)
        out[0] = 0.0
        np.cumsum(0.5 * (w[:-1] + w[1:]), out=out[1:])
        out[1:] *= self.h
        return out

    def cumint_spectral(self, w) -> np.ndarray:
        """Running integral of the trigonometric interpolant, anchored at 0.

        Splits off the mean (which integrates to a linear ramp) and inverts
        the derivative mode by mode on the fluctuation.  Exact for
        band-limited integrands, which the trapezoid rule is not; the kernel
        and velocity fields in `lagrangian` rely on this.
        """
        return self._antideriv(self.check(w))

    def _antideriv(self, w: np.ndarray) -> np.ndarray:
        # unvalidated cumint_spectral; the field evaluation calls this once
        # per integrand per stage, so it skips the finite scan
        mean = w.sum() * self._inv_n
        anti = np.fft.irfft(np.fft.rfft(w - mean) * self._inv_ik, self.n)
        return mean * self.x + (anti - anti[0])

    def _antideriv_pair(self, a: np.ndarray, b: np.ndarray):
        # two antiderivatives through one batched transform pair; returns
        # (anti_a, anti_b, mean_a, mean_b)
        ma = a.sum() * self._inv_n
        mb = b.sum() * self._inv_n
        buf = np.empty((2, self.n))
        np.subtract(a, ma, out=buf[0])
        np.subtract(b, mb, out=buf[1])
        anti = np.fft.irfft(np.fft.rfft(buf, axis=1) * self._inv_ik, self.n, axis=1)
        pa = ma * self.x + (anti[0] - anti[0, 0])
        pb = mb * self.x + (anti[1] - anti[1, 0])
        return pa, pb, float(ma), float(mb)

    def deriv(self, w, scheme: str = "spectral") -> np.ndarray:
        """Periodic derivative, spectral or second-order centered."""
        w = self.check(w)
        if scheme == "spectral":
            coeffs = np.fft.rfft(w) * self._ik
            if self.n % 2 == 0:
                coeffs[-1] = 0.0
            return np.fft.irfft(coeffs, self.n)
        if scheme == "centered":
            return (np.roll(w, -1) - np.roll(w, 1)) / (2.0 * self.h)
        raise ValueError(f"unknown derivative scheme {scheme!r}")

    def helmholtz_inverse(self, w, method: str = "fourier_symbol") -> np.ndarray:
        """Apply (1 - d^2/dx^2)^{-1}.

        fourier_symbol divides each mode by 1 + (2 pi k)^2.
        greens_convolution forms the quadrature of the kernel integral with
        a corner correction at the diagonal; the kernel slope jumps by -1
        there, which the plain trapezoid rule feels at second order.  The
        two routes are deliberately independent implementations.
        """
        w = self.check(w)
        if method == "fourier_symbol":
            return np.fft.irfft(np.fft.rfft(w) * self._helm, self.n)
        if method == "greens_convolution":
            idx = (np.arange(self.n)[:, None] - np.arange(self.n)[None, :]) % self.n
            conv = (greens_function(idx * self.h) * w[None, :]).sum(axis=1) * self.h
            return conv - (self.h**2 / 12.0) * w
        raise ValueError(f"unknown Helmholtz method {method!r}")
